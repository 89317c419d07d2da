import math

import numpy as np
import pytest
from mpmath import mp

from dhlab.errors import GridStepError
from dhlab.primes import primes_in_range
from dhlab.solver import (ProblemInstance, duality_tail_bound,
                          enumerate_solutions, main_term_scan,
                          solution_integral, weighted_count)

INST = ProblemInstance(1.0, 1.0, -1.0, 2.0, 0.0, delta=0.01, epsilon=0.01)


def brute_force_solutions(instance, X, eta, table):
    """Exhaustive ordered-triple oracle with 50-digit residuals."""
    lin = primes_in_range(instance.linear_range(X), table)
    pw = primes_in_range(instance.power_range(X), table)
    l1, l2, l3 = (mp.mpf(l) for l in instance.lambdas)
    om = mp.mpf(instance.omega)
    out = []
    for p3, lg3 in pw:
        base = l3 * mp.power(p3, instance.k) - om
        for p1, lg1 in lin:
            for p2, lg2 in lin:
                res = abs(l1 * p1 + l2 * p2 + base)
                if res <= eta:
                    out.append(((p1, p2, p3), float(res), lg1 * lg2 * lg3))
    return out


def _by_output_order(items):
    # library emits records sorted by (p3, p1, p2)
    return sorted(items, key=lambda it: (it[0][2], it[0][0], it[0][1]))


def test_enumeration_matches_brute_force(table_1e6):
    sols = enumerate_solutions(INST, 100.0, 0.5, table_1e6)
    brute = brute_force_solutions(INST, 100.0, 0.5, table_1e6)
    assert [s.triple for s in sols] == [t for t, _, _ in _by_output_order(brute)]
    assert [s.triple for s in sols] == [
        (2, 2, 2), (2, 7, 3), (7, 2, 3), (2, 23, 5), (23, 2, 5),
        (2, 47, 7), (47, 2, 7),
    ]
    assert all(s.residual == 0.0 for s in sols)
    assert not any(s.boundary for s in sols)


def test_enumeration_brute_force_random_instances(table_1e6):
    rng = np.random.default_rng(31)
    for _ in range(6):
        inst = ProblemInstance(
            float(rng.uniform(0.5, 2.0)),
            float(rng.uniform(0.5, 2.0)) * (1 if rng.random() < 0.5 else -1),
            -float(rng.uniform(0.5, 2.0)),
            float(rng.choice([1.5, 2.0, 2.5])),
            float(rng.uniform(-5.0, 5.0)),
            delta=0.05,
        )
        eta = float(rng.uniform(0.05, 0.8))
        sols = enumerate_solutions(inst, 60.0, eta, table_1e6)
        brute = _by_output_order(brute_force_solutions(inst, 60.0, eta, table_1e6))
        assert [s.triple for s in sols] == [t for t, _, _ in brute]
        for s, (_, res, w) in zip(sols, brute):
            assert s.residual == pytest.approx(res, abs=1e-14)
            assert s.weight == pytest.approx(w, rel=1e-12)


def test_enumeration_empty_below_min_residual(table_1e6):
    brute = brute_force_solutions(INST, 40.0, 10.0, table_1e6)
    nonzero = [r for _, r, _ in brute if r > 0]
    eta = 0.9 * min(nonzero)
    inst = ProblemInstance(1.0, 1.0, -1.0, 2.0, 0.25, delta=0.01)
    # shift omega so zero residuals are impossible, then pick eta below min
    brute = brute_force_solutions(inst, 40.0, 10.0, table_1e6)
    eta = 0.9 * min(r for _, r, _ in brute)
    assert enumerate_solutions(inst, 40.0, eta, table_1e6) == []


def test_enumeration_swap_symmetry(table_1e6):
    inst = ProblemInstance(1.0, math.sqrt(2.0), -1.0, 2.0, 0.0, delta=0.01)
    swapped = ProblemInstance(math.sqrt(2.0), 1.0, -1.0, 2.0, 0.0, delta=0.01)
    a = enumerate_solutions(inst, 150.0, 0.3, table_1e6)
    b = enumerate_solutions(swapped, 150.0, 0.3, table_1e6)
    assert sorted((s.p2, s.p1, s.p3) for s in a) == sorted(s.triple for s in b)


def test_count_monotone_in_eta(table_1e6):
    triples = {}
    for eta in (0.1, 0.2, 0.4, 0.8):
        triples[eta] = {s.triple for s in
                        enumerate_solutions(INST, 200.0, eta, table_1e6)}
    assert triples[0.1] <= triples[0.2] <= triples[0.4] <= triples[0.8]


def test_weighted_count_value(table_1e6):
    sols = enumerate_solutions(INST, 100.0, 0.5, table_1e6)
    w = weighted_count(sols, 0.5)
    # oracle recomputation: all residuals zero, so 0.5 * sum of weights
    expect = 0.5 * math.fsum(s.weight for s in sols)
    assert w == pytest.approx(expect, rel=1e-15)
    assert w == pytest.approx(10.34, abs=0.01)
    assert weighted_count([], 0.5) == 0.0
    # eta doubling doubles each term on a zero-residual set
    assert weighted_count(sols, 1.0) == pytest.approx(2 * w, rel=1e-14)


def test_solution_integral_hermitian(table_1e6):
    val = solution_integral(INST, 100.0, 0.5, (-40.0, 40.0), table_1e6)
    assert abs(val.imag) <= 1e-6 * max(abs(val.real), 1.0)


def test_duality_two_windows(table_1e6):
    # the central correctness identity at B = 10/eta and 50/eta
    eta = 0.5
    sols = enumerate_solutions(INST, 100.0, eta, table_1e6)
    w = weighted_count(sols, eta)
    for B in (10.0 / eta, 50.0 / eta):
        val = solution_integral(INST, 100.0, eta, (-B, B), table_1e6)
        tail = duality_tail_bound(INST, 100.0, B, table_1e6)
        assert abs(val.real - w) <= tail
        assert abs(val.real - w) <= 0.02 * w + tail


def test_solution_integral_step_refusal(table_1e6):
    with pytest.raises(GridStepError):
        solution_integral(INST, 100.0, 0.5, (-1.0, 1.0), table_1e6, step=1e-3)


def test_main_term_scan(table_1e6):
    inst = ProblemInstance(1.0, math.sqrt(2.0), -1.0, 2.0, 0.0)
    rows = main_term_scan(inst, [500.0, 1000.0, 2000.0], table_1e6)
    assert all(r.ratio > 0 for r in rows)
    assert not any(r.degenerate for r in rows)
    ratios = [r.ratio for r in rows]
    assert max(ratios) / min(ratios) < 10.0  # bounded below across the sweep


def test_main_term_scan_flags_same_sign(table_1e6):
    inst = ProblemInstance(1.0, 1.0, 1.0, 2.0, -1.0)
    rows = main_term_scan(inst, [500.0], table_1e6)
    assert rows[0].degenerate
    assert enumerate_solutions(inst, 500.0, 0.25, table_1e6) == []


def test_instance_validation():
    with pytest.raises(ValueError):
        ProblemInstance(0.0, 1.0, -1.0, 2.0, 0.0)
    with pytest.raises(ValueError):
        ProblemInstance(1.0, 1.0, -1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ProblemInstance(1.0, 1.0, -1.0, 3.5, 0.0)
    assert ProblemInstance(1.0, 1.0, 1.0, 2.0, 0.0).same_sign


def test_boundary_band_flag(table_1e6):
    # place eta exactly on a residual: |2 + 2 - 4 - omega| with omega = 0.1
    inst = ProblemInstance(1.0, 1.0, -1.0, 2.0, 0.1, delta=0.01)
    sols = enumerate_solutions(inst, 30.0, 0.1, table_1e6)
    hits = [s for s in sols if s.triple == (2, 2, 2)]
    assert len(hits) == 1
    assert hits[0].boundary  # residual == eta within the guard band
