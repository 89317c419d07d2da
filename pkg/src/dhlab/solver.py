"""Direct enumeration of prime solutions and the kernel-integral cross-check.

A solution of one ProblemInstance at scale X and width eta is an ordered
prime triple (p1, p2, p3) inside the summation windows with

    |l1 p1 + l2 p2 + l3 p3^k - omega| <= eta.

Residuals are rechecked in 50-digit arithmetic at admission (float64 only
prefilters candidates), with a 1e-14 * eta guard band flagging records that
sit essentially on the boundary.  By Fourier inversion the weighted count
sum(w * max(0, eta - residual)) equals the real-line integral of
S1(l1 a) S1(l2 a) Sk(l3 a) K_eta(a) e(-omega a), which `solution_integral`
approximates on a finite interval; the pair is the package's central
correctness check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from mpmath import mp

from .arcs import choose_parameters
from .errors import GridStepError
from .expsums import fejer_kernel, iter_grid_values, prime_exp_sum, sum_freqs
from .precision import phase_frac
from .primes import PrimeTable, SumRange, window_arrays

_TWO_PI_I = 2j * np.pi
BOUNDARY_BAND = 1e-14


@dataclass(frozen=True)
class ProblemInstance:
    """One inequality |l1 p1 + l2 p2 + l3 p3^k - omega| <= eta to study."""

    lambda1: float
    lambda2: float
    lambda3: float
    k: float
    omega: float
    delta: float = 0.1
    epsilon: float = 0.01

    def __post_init__(self):
        if 0.0 in (self.lambda1, self.lambda2, self.lambda3):
            raise ValueError("coefficients must be nonzero")
        if not 1.0 < self.k <= 3.0:
            raise ValueError(f"k must be in (1, 3], got {self.k}")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0,1), got {self.delta}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")

    @property
    def lambdas(self) -> tuple[float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3)

    @property
    def same_sign(self) -> bool:
        """True when all coefficients share a sign (hypothesis violation)."""
        signs = {math.copysign(1.0, l) for l in self.lambdas}
        return len(signs) == 1

    def linear_range(self, X: float) -> SumRange:
        return SumRange(1.0, self.delta, X)

    def power_range(self, X: float) -> SumRange:
        return SumRange(self.k, self.delta, X)


@dataclass(frozen=True)
class SolutionRecord:
    """One admitted ordered triple with its residual and log-weight."""

    p1: int
    p2: int
    p3: int
    residual: float
    weight: float
    boundary: bool = False

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.p1, self.p2, self.p3)


def _mp_lambdas(instance: ProblemInstance):
    return (mp.mpf(instance.lambda1), mp.mpf(instance.lambda2),
            mp.mpf(instance.lambda3), mp.mpf(instance.omega))


def _p3_power_mp(p3: int, k: float):
    if float(k).is_integer():
        return mp.mpf(int(p3) ** int(k))
    return mp.power(int(p3), mp.mpf(k))


def enumerate_solutions(instance: ProblemInstance, X: float, eta: float,
                        table: PrimeTable) -> list[SolutionRecord]:
    """All ordered triples with residual <= eta, in (p3, p1, p2) order.

    For each p3 the target l1 p1 + l2 p2 is a window of width 2 eta; the
    sorted values l2 p2 are binary-searched per p1.  Candidate windows are
    widened by the float64 error bound, then every candidate is admitted or
    rejected on its 50-digit residual.
    """
    lin = instance.linear_range(X)
    pw = instance.power_range(X)
    p1s, logs1 = window_arrays(lin, table)
    p3s, logs3 = window_arrays(pw, table)
    if len(p1s) == 0 or len(p3s) == 0:
        return []
    l1, l2, l3 = instance.lambdas
    omega = instance.omega

    vals2 = l2 * p1s.astype(np.float64)
    order = np.argsort(vals2, kind="stable")
    sorted2 = vals2[order]

    L1, L2, L3, OM = _mp_lambdas(instance)
    slack = 64.0 * np.finfo(np.float64).eps * (
        (abs(l1) + abs(l2) + abs(l3)) * float(X) + abs(omega)
    )
    lo_shift = eta + slack

    a1 = l1 * p1s.astype(np.float64)
    out: list[SolutionRecord] = []
    for p3, lg3 in zip(p3s, logs3):
        t = omega - l3 * float(p3) ** instance.k
        lows = t - a1 - lo_shift
        highs = t - a1 + lo_shift
        i_lo = np.searchsorted(sorted2, lows, side="left")
        i_hi = np.searchsorted(sorted2, highs, side="right")
        counts = i_hi - i_lo
        hit = np.nonzero(counts > 0)[0]
        if len(hit) == 0:
            continue
        p3k_mp = _p3_power_mp(int(p3), instance.k)
        base = L3 * p3k_mp - OM
        eta_mp = mp.mpf(eta)
        band = mp.mpf(BOUNDARY_BAND) * eta_mp
        for i in hit:
            p1 = int(p1s[i])
            part = L1 * p1 + base
            for j in range(i_lo[i], i_hi[i]):
                p2 = int(p1s[order[j]])
                res = abs(part + L2 * p2)
                if res <= eta_mp:
                    out.append(SolutionRecord(
                        p1=p1, p2=p2, p3=int(p3),
                        residual=float(res),
                        weight=float(logs1[i] * logs1[order[j]] * lg3),
                        boundary=bool(abs(res - eta_mp) <= band),
                    ))
    out.sort(key=lambda r: (r.p3, r.p1, r.p2))
    return out


def weighted_count(solutions: list[SolutionRecord], eta: float) -> float:
    """sum of weight * max(0, eta - residual) over the records."""
    return math.fsum(r.weight * max(0.0, eta - r.residual) for r in solutions)


def duality_tail_bound(instance: ProblemInstance, X: float, B: float,
                       table: PrimeTable) -> float:
    """Crude tail bound S1(0)^2 Sk(0) / B for truncating the detector
    integral to [-B, B] (kernel decay alpha^-2 against trivial sum bounds)."""
    s1 = prime_exp_sum(0.0, instance.linear_range(X), table).real
    sk = prime_exp_sum(0.0, instance.power_range(X), table).real
    return s1 * s1 * sk / B


def solution_integral(instance: ProblemInstance, X: float, eta: float,
                      interval: tuple[float, float], table: PrimeTable,
                      step: float | None = None) -> complex:
    """Trapezoid integral over `interval` of

        S1(l1 a) S1(l2 a) Sk(l3 a) K_eta(a) e(-omega a).

    Step must satisfy step <= 1/(64 X max|l|).  The imaginary part of a
    symmetric-interval run is a discretization diagnostic: the integrand's
    Hermitian symmetry makes the true value real.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi <= lo:
        raise GridStepError(f"empty interval [{lo}, {hi}]")
    lmax = max(abs(l) for l in instance.lambdas)
    max_step = 1.0 / (64.0 * X * max(1.0, lmax))
    if step is None:
        step = max_step
    elif step > max_step * (1 + 1e-12):
        raise GridStepError(
            f"step {step:.3e} too coarse; need <= {max_step:.3e}"
        )
    n = max(1, math.ceil((hi - lo) / step))
    h = (hi - lo) / n
    count = n + 1

    lin = instance.linear_range(X)
    pw = instance.power_range(X)
    f1 = sum_freqs("prime", lin, table, scale=instance.lambda1)
    f2 = sum_freqs("prime", lin, table, scale=instance.lambda2)
    f3 = sum_freqs("prime", pw, table, scale=instance.lambda3)

    gens = [iter_grid_values(*f, lo, h, count) for f in (f1, f2, f3)]
    partials = []
    endpoint = 0j
    pos = 0
    buffers = [None, None, None]
    while pos < count:
        blocks = []
        for gi, gen in enumerate(gens):
            if buffers[gi] is None or len(buffers[gi][1]) == 0:
                buffers[gi] = list(next(gen))
            blocks.append(buffers[gi])
        m = min(len(b[1]) for b in blocks)
        vals = blocks[0][1][:m] * blocks[1][1][:m] * blocks[2][1][:m]
        alphas = lo + (pos + np.arange(m)) * h
        om = phase_frac(np.float64(-instance.omega), 0.0, alphas)
        vals *= fejer_kernel(alphas, eta) * np.exp(_TWO_PI_I * om)
        partials.append(complex(np.sum(vals)))
        if pos == 0:
            endpoint += 0.5 * vals[0]
        if pos + m == count:
            endpoint += 0.5 * vals[-1]
        for b in blocks:
            b[1] = b[1][m:]
        pos += m
    total = sum(partials) - endpoint
    return complex(total * h)


@dataclass
class MainTermRow:
    """One scale of the major-region scan."""

    X: float
    eta: float
    major_integral: complex
    expected_scale: float  # eta^2 X^(1 + 1/k)
    ratio: float
    degenerate: bool = False


@dataclass
class MainTermScan:
    rows: list[MainTermRow]
    bounded_below: bool  # all ratios positive, none collapsing toward zero

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def __len__(self):
        return len(self.rows)


def main_term_scan(instance: ProblemInstance, X_list, table: PrimeTable,
                   eta_override: float | None = None) -> MainTermScan:
    """Detector integral over the major region per X, against eta^2 X^(1+1/k).

    Ratios staying positive and bounded below across the list is the
    experimental analogue of the main-term lower bound; a sign-infeasible
    instance is flagged degenerate instead.
    """
    rows = []
    degenerate = instance.same_sign
    for X in X_list:
        d = choose_parameters(instance, X)
        eta = eta_override if eta_override is not None else d.eta
        cut = d.major[1]
        val = solution_integral(instance, X, eta, (-cut, cut), table)
        scale = eta * eta * X ** (1.0 + 1.0 / instance.k)
        rows.append(MainTermRow(
            X=float(X), eta=eta, major_integral=val,
            expected_scale=scale, ratio=val.real / scale,
            degenerate=degenerate,
        ))
    ratios = [r.ratio for r in rows]
    bounded = bool(ratios) and all(r > 0 for r in ratios) and (
        min(ratios) >= 0.05 * max(ratios)
    )
    return MainTermScan(rows=rows, bounded_below=bounded)


def write_solutions_csv(path, solutions: list[SolutionRecord]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["p1", "p2", "p3", "residual", "weight"])
        for r in solutions:
            out.writerow([r.p1, r.p2, r.p3, repr(r.residual), repr(r.weight)])
