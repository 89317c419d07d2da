"""Arc decomposition of the real line and the parameter choices behind it.

For a scale X the line splits into four symmetric regions by |alpha|:
major [0, P/X], intermediate (P/X, X^(-3/5)] (present only for k >= 5/2),
minor (up to R), and the trivial remainder.  The decay exponent eta_exponent
fixes how fast the detection width eta may shrink with X; P and R are the
classical truncation choices that keep the complementary regions negligible.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DomainError, ParameterError

INTERMEDIATE_MIN_K = 2.5  # intermediate region exists for k in [5/2, 3]


def _k_fraction(k: float) -> Fraction:
    # the shortest decimal repr carries the caller's intent, so breakpoint
    # and branch values come out exact for decimal inputs like 1.1
    return Fraction(str(float(k)))


def eta_exponent(k: float) -> float:
    """The piecewise exponent psi with eta = X^(-psi + epsilon):

        (3-2k)/(6k) on (1, 6/5],  1/12 on (6/5, 2],
        (3-k)/(6k) on (2, 3),     1/24 at k = 3.

    Exact (rational) branch arithmetic; values like psi(1.1) = 4/33 are
    returned as the correctly rounded double of the exact fraction.
    """
    kf = _k_fraction(k)
    if not Fraction(1) < kf <= Fraction(3):
        raise DomainError(f"k must be in (1, 3], got {k}")
    if kf <= Fraction(6, 5):
        val = (3 - 2 * kf) / (6 * kf)
    elif kf <= 2:
        val = Fraction(1, 12)
    elif kf < 3:
        val = (3 - kf) / (6 * kf)
    else:
        val = Fraction(1, 24)
    return float(val)


def competitor_exponent(k: float) -> float:
    """The earlier exponent (4 - 3k)/(10k), defined on (1, 4/3)."""
    kf = _k_fraction(k)
    return float((4 - 3 * kf) / (10 * kf))


@dataclass(frozen=True)
class EtaConstraint:
    """One asymptotic admissibility constraint eta >> X^exponent."""

    name: str
    exponent: float
    satisfied: bool


@dataclass(frozen=True)
class ArcDecomposition:
    """Symmetric |alpha|-regions for one (k, X) with parameters eta, P, R."""

    k: float
    X: float
    eta: float
    P: float
    R: float
    major: tuple[float, float]  # [-P/X, P/X]
    intermediate: tuple[float, float] | None  # +/-[P/X, X^(-3/5)] or None
    minor: tuple[float, float]  # +/-[minor_lo, R]
    constraints: tuple[EtaConstraint, ...] = field(default=())
    window_feasible: bool = True

    @property
    def minor_lo(self) -> float:
        return self.minor[0]

    def locate(self, alpha: float) -> str:
        """Region containing alpha; boundaries go to the lower-|alpha| side."""
        a = abs(alpha)
        if a <= self.major[1]:
            return "major"
        if self.intermediate is not None and a <= self.intermediate[1]:
            return "intermediate"
        if a <= self.R:
            return "minor"
        return "trivial"

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "X": self.X,
            "eta": self.eta,
            "P": self.P,
            "R": self.R,
            "major": list(self.major),
            "intermediate": list(self.intermediate) if self.intermediate else None,
            "minor": list(self.minor),
            "trivial": f"|alpha| > {self.R}",
            "constraints": [
                {"name": c.name, "exponent": c.exponent, "satisfied": c.satisfied}
                for c in self.constraints
            ],
            "window_feasible": self.window_feasible,
        }

    def pretty(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)


def _eta_constraints(k: float, eta_exp: float) -> tuple[EtaConstraint, ...]:
    """The admissibility constraints on eta, per k-regime.

    Each requires eta = infinity(X^e); with eta = X^(-psi + eps) they hold
    (with equality in the critical one) iff -psi >= e, which is how psi was
    chosen, so `satisfied` is an arithmetic identity check, not a proof.
    """
    out = []
    if k <= 1.2:
        e = 1.0 / 3.0 - 1.0 / (2.0 * k)
        out.append(EtaConstraint("low-k-regime", e, -eta_exp >= e - 1e-12))
    elif k < 3.0:
        e = max(1.0 / 6.0 - 1.0 / (2.0 * k), -1.0 / 12.0)
        out.append(EtaConstraint("mid-k-regime", e, -eta_exp >= e - 1e-12))
    else:
        e = -1.0 / 24.0
        out.append(EtaConstraint("cubes-regime", e, -eta_exp >= e - 1e-12))
    return tuple(out)


def choose_parameters(instance, X: float) -> ArcDecomposition:
    """Theoretical parameters and regions for `instance` at scale X:

        eta = X^(-psi(k) + eps),  P = X^(5/(6k) - eps),  R = (log X)^(3/2)/eta^2

    plus the feasibility flag of the main-term coefficient windows
    [2 delta |l3|/|lj| X, 3 delta |l3|/|lj| X] inside [delta X, (1-delta) X].
    """
    k = instance.k
    eps = instance.epsilon
    if X < 100:
        raise DomainError(f"X must be >= 100, got {X}")
    if not 0 < eps < 1.0 / 24.0:
        raise DomainError(f"epsilon must be in (0, 1/24), got {eps}")
    psi = eta_exponent(k)
    eta = X ** (-psi + eps)
    if not eta < 1:
        raise ParameterError(
            f"eta = X^({-psi + eps:.6g}) >= 1: epsilon {eps} is not below "
            f"psi({k}) = {psi:.6g}; no X can repair this",
            failed="eta < 1",
        )
    P = X ** (5.0 / (6.0 * k) - eps)
    R = math.log(X) ** 1.5 / (eta * eta)
    if P <= 1.0:
        raise ParameterError(
            f"P = {P:.6g} <= 1 at X = {X}", failed="P > 1",
            min_x=math.ceil(math.exp(1.0 / max(1e-12, 5.0 / (6.0 * k) - eps))),
        )
    if R <= 1.0 / eta:
        # unreachable once eta < 1 and log X > 1, kept as a guard
        raise ParameterError(
            f"R = {R:.6g} <= 1/eta = {1/eta:.6g} at X = {X}", failed="R > 1/eta",
        )

    cut = P / X
    inter = None
    if k >= INTERMEDIATE_MIN_K:
        inter_hi = X ** (-3.0 / 5.0)
        inter = (cut, inter_hi)
        minor = (inter_hi, R)
    else:
        minor = (cut, R)

    lam = (instance.lambda1, instance.lambda2, instance.lambda3)
    l3 = abs(lam[2])
    delta = instance.delta
    feasible = True
    for lj in lam[:2]:
        a_j = 2.0 * delta * l3 / abs(lj)
        if a_j < delta or 1.5 * a_j > 1.0 - delta:
            feasible = False

    return ArcDecomposition(
        k=k, X=float(X), eta=eta, P=P, R=R,
        major=(-cut, cut), intermediate=inter, minor=minor,
        constraints=_eta_constraints(k, psi - eps),
        window_feasible=feasible,
    )


def locate(alpha: float, d: ArcDecomposition) -> str:
    """Region of the decomposition containing alpha (module-level alias)."""
    return d.locate(alpha)
