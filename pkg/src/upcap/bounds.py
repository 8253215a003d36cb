"""Explicit constants and lower bounds for dimension, content and capacity."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .errors import DomainError
from .geom import Annulus
from .specfun import M1, sphere_area, sug_log_ratio_lower, tau_lower_bound, teichmuller_tau2


@dataclass
class BoundReport:
    """A computed constant together with the inputs and formula that produced it."""

    name: str
    value: float
    inputs: dict
    formula_ref: str
    flags: list = field(default_factory=list)

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise DomainError(f"{self.name}: non-finite value")
        if self.value <= 0 and "vacuous" not in self.flags:
            self.flags.append("vacuous")

    def __float__(self):
        return float(self.value)

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=float)


def _check_c(c: float):
    if not 0 < c < 1:
        raise DomainError("c must lie in (0, 1)")


def beta_exponent(c: float) -> float:
    """Dimension exponent ``log 2 / log(3/c)``."""
    _check_c(c)
    return math.log(2) / math.log(3 / c)


def content_lower_bound(n: int, c: float, r: float) -> float:
    """``r^beta / (2 * 3^n)``: lower bound of the beta-content of ``E ∩ B(a, r)``."""
    if r <= 0:
        raise DomainError("r must be positive")
    return r ** beta_exponent(c) / (2 * 3**n)


def capacity_lower_bound(n: int, c: float, kissing: int | None = None) -> float:
    """``1 / (2 * 3^n * M1(n, beta))`` with ``beta = beta_exponent(c)``."""
    return 1.0 / (2 * 3**n * M1(n, beta_exponent(c), kissing))


def up_from_capacity(n: int, sigma: float) -> BoundReport:
    """Uniform-perfectness parameter ``2 exp(-(omega/sigma)^(1/(n-1)))`` implied by capacity ``sigma``."""
    if not sigma > 0:
        raise DomainError("sigma must be positive")
    omega = sphere_area(n)
    value = 2 * math.exp(-((omega / sigma) ** (1 / (n - 1))))
    flags = ["vacuous"] if value >= 1 else []
    return BoundReport("up_from_capacity", value, {"n": n, "sigma": sigma, "omega": omega},
                       "c >= 2 exp(-(omega_{n-1}/sigma)^(1/(n-1)))", flags)


def lambda_basic(n: int, c: float, variant: str = "basic") -> float:
    """Annulus ratio forcing capacity ``c``.

    ``"basic"``: ``max{exp((2 omega/c)^(1/(n-1)))/2, 2}``; ``"ring"``:
    ``exp((4 omega/c)^(1/(n-1)))``.
    """
    if not c > 0:
        raise DomainError("c must be positive")
    omega = sphere_area(n)
    if variant == "basic":
        return max(math.exp((2 * omega / c) ** (1 / (n - 1))) / 2, 2.0)
    if variant == "ring":
        return math.exp((4 * omega / c) ** (1 / (n - 1)))
    raise DomainError(f"unknown variant {variant!r}")


def _tau(n: int, s: float, tau: str):
    if tau == "lower" or n != 2:
        return tau_lower_bound(n, s), True
    if tau == "numeric":
        return teichmuller_tau2(s), False
    raise DomainError(f"unknown tau mode {tau!r}")


def comparison_constant_v(n: int, ratio_ba: float, t: float, tau: str = "numeric") -> BoundReport:
    """``3^-n min{1, v1/A}`` with ``A = omega (log b/a)^(1-n)`` and ``v1 = tau_n(4m^2+4m)/2``, ``m = 2/t``."""
    if not ratio_ba > 1 or not t > 0:
        raise DomainError("need b/a > 1 and t > 0")
    A = sphere_area(n) * math.log(ratio_ba) ** (1 - n)
    m = 2 / t
    tval, conservative = _tau(n, 4 * m * m + 4 * m, tau)
    v1 = tval / 2
    value = 3.0**-n * min(1.0, v1 / A)
    return BoundReport("comparison_constant_v", value,
                       {"n": n, "b/a": ratio_ba, "t": t, "A": A, "m": m, "tau": tval, "v1": v1},
                       "v = 3^-n min{1, v1/A}", ["conservative"] if conservative else [])


def mu_n(n: int, tau: str = "numeric") -> BoundReport:
    """``3^-n min{1, tau_n(80)/(2A)} (log 2)^(n-1) (1/2) (e/(n-1))^(n-1)`` with ``A = omega (log 2)^(1-n)``."""
    if n < 2:
        raise DomainError("n must be at least 2")
    A = sphere_area(n) * math.log(2) ** (1 - n)
    tval, conservative = _tau(n, 80.0, tau)
    value = 3.0**-n * min(1.0, tval / (2 * A)) * math.log(2) ** (n - 1) * 0.5 * (math.e / (n - 1)) ** (n - 1)
    return BoundReport("mu_n", value, {"n": n, "A": A, "tau(80)": tval},
                       "3^-n min{1, tau_n(80)/(2A)} (log 2)^(n-1) (e/(n-1))^(n-1) / 2",
                       ["conservative"] if conservative else [])


@dataclass
class SeparatingAnnuli:
    p: int
    annuli: list
    p_lower: float


def separating_annuli(dE: float, dist: float, lam: float, center=(0.0, 0.0)) -> SeparatingAnnuli:
    """Number ``p`` of disjoint annuli ``R(w, lam^m dist/2, lam^(m-1) dist/2)`` that fit, with its log lower estimate."""
    if not (dE > 0 and dist > 0):
        raise DomainError("dE and dist must be positive")
    if not lam > 1:
        raise DomainError("lambda must exceed 1")
    u = dE / dist
    p = 0
    while u > lam ** (p + 1) + 2:
        p += 1
    annuli = [Annulus(tuple(center), lam ** (m - 1) * dist / 2, lam**m * dist / 2) for m in range(1, p + 1)]
    p_lower = math.log1p(u) / (2 * math.log(lam))
    return SeparatingAnnuli(p, annuli, p_lower)


def separating_hypothesis(u: float, p: int, lam: float) -> bool:
    return u > max(lam**p + 2, lam**2 + 2 * lam + 2)


def quad_threshold(a: float, p: int, lam: float) -> float:
    """Threshold ``lam^(2p) + lam^p sqrt(1+a) + a`` above which ``t - a >= lam^p sqrt(1+t)``."""
    if not (a > 0 and p >= 1 and lam > 1):
        raise DomainError("need a > 0, p >= 1, lambda > 1")
    return lam ** (2 * p) + lam**p * math.sqrt(1 + a) + a


def marsarbd_factor(r: float, s: float, t: float, n: int = 2) -> float:
    """``(log(s/r) / log(t/r))^(n-1)`` for ``0 < r < s <= t``."""
    if not 0 < r < s <= t:
        raise DomainError("need 0 < r < s <= t")
    return (math.log(s / r) / math.log(t / r)) ** (n - 1)


def cap_GE_lower(n: int, delta: float, dE: float, dist: float, uniform: bool = False) -> BoundReport:
    """Lower bound for ``cap(G, E)`` of the form ``s * log(1 + d(E)/d(E, ∂G))``.

    Three regimes of ``u = d(E)/d(E, ∂G)`` carry separate constants: A for
    ``u <= 1/2``, B for ``u >= t0``, C in between.  By default the constant of
    the regime containing ``u`` is used; ``uniform=True`` uses the minimum of
    the three, which is valid for every ``u``.
    """
    if not (delta > 0 and dE > 0 and dist > 0):
        raise DomainError("delta, d(E) and d(E, ∂G) must be positive")
    u = dE / dist
    flags = []
    mu = mu_n(n)
    tau = lambda_basic(n, delta)
    lam_b = tau**2
    v = comparison_constant_v(n, 2 * tau**4, 1 / (2 * tau**2))
    if mu.flags or v.flags:
        flags.append("conservative")
    c_a = mu.value * delta
    c_b = v.value * delta / (16 * math.log(lam_b))
    t0 = lam_b**6 + 1
    d3 = delta * math.log(2) ** (n - 1) * sug_log_ratio_lower(2.0, n, 0.5) / math.log1p(0.5)
    d4 = d3
    c13 = d3 / t0
    c23 = d4 / (t0 * (2 * t0 + 1))
    c_c = v.value * min(c13, c23)
    s_uniform = min(c_a, c_b, c_c)
    if uniform:
        s, regime = s_uniform, "uniform"
    elif u <= 0.5:
        s, regime = c_a, "A"
    elif u >= t0:
        s, regime = c_b, "B"
    else:
        s, regime = c_c, "C"
    if regime in ("C", "uniform"):
        flags.append("proof-traced, conservative")
    inputs = {"n": n, "delta": delta, "d(E)": dE, "d(E,dG)": dist, "u": u, "regime": regime,
              "mu_n": mu.value, "tau": tau, "lambda": lam_b, "v": v.value, "c_A": c_a, "c_B": c_b,
              "t0": t0, "d3": d3, "d4": d4, "c_C": c_c, "s_uniform": s_uniform, "s": s}
    return BoundReport("cap_GE_lower", s * math.log1p(u), inputs, "s log(1 + d(E)/d(E, dG))", flags)
