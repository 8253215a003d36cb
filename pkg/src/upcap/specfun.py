"""Dimensional constants and special functions.

Gamma and Beta values come from :mod:`math` (``gamma``/``lgamma``), which are
accurate to a few ulp on the arguments used here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CrossValidationError, DomainError

# Kissing numbers that are known exactly; other dimensions need an explicit value.
_KISSING = {2: 6, 3: 12, 4: 24}


def sphere_area(n: int) -> float:
    """Surface area ``omega_{n-1}`` of the unit sphere in R^n (``sphere_area(1) == 2``)."""
    if n < 1:
        raise DomainError("sphere_area needs n >= 1")
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def ball_volume(n: int) -> float:
    """Volume ``Omega_n`` of the unit ball in R^n."""
    if n < 1:
        raise DomainError("ball_volume needs n >= 1")
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


def grisha_K(n: int) -> float:
    """``K_n = 2^-n * omega_{n-1}^n * Omega_n^(1-n)``, equal to ``(n sqrt(pi) / 2)^n / Gamma(n/2 + 1)``."""
    if n < 1:
        raise DomainError("grisha_K needs n >= 1")
    return (n * math.sqrt(math.pi) / 2) ** n / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class DimensionConstants:
    n: int
    omega: float
    volume: float
    K_n: float
    N_star: int | None

    @classmethod
    def of(cls, n: int, kissing: int | None = None) -> "DimensionConstants":
        try:
            nstar = kissing_table(n, kissing)[1]
        except DomainError:
            nstar = None
        return cls(n, sphere_area(n), ball_volume(n), grisha_K(n), nstar)


def kissing_table(n: int, kissing: int | None = None) -> tuple[int, int]:
    """``(kappa(n), N*_n)`` with ``N*_n = kappa(n) + 1``.

    Built in for n = 2, 3, 4 only; pass ``kissing`` for any other dimension.
    """
    if kissing is not None:
        if kissing < 1:
            raise DomainError("kissing number must be a positive integer")
        return int(kissing), int(kissing) + 1
    if n not in _KISSING:
        raise DomainError(f"no built-in kissing number for n={n}; supply one explicitly")
    return _KISSING[n], _KISSING[n] + 1


def M1(n: int, beta: float, kissing: int | None = None) -> float:
    """``max{2^(beta+n) ((n-1)/beta)^n N*_n, 1/K_n}``."""
    if n < 2:
        raise DomainError("M1 needs n >= 2")
    if not 0 < beta <= n:
        raise DomainError("M1 needs 0 < beta <= n")
    nstar = kissing_table(n, kissing)[1]
    return max(2.0 ** (beta + n) * ((n - 1) / beta) ** n * nstar, 1.0 / grisha_K(n))


def beta_function(a: float, b: float) -> float:
    return math.exp(math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b))


def c_n(n: int) -> float:
    """Constant of the logarithmic lower bound for the Teichmüller function."""
    if n < 2:
        raise DomainError("c_n needs n >= 2")
    return beta_function(1.0 / (2 * (n - 1)), 0.5) ** (1 - n) * sphere_area(n - 1)


def tau_lower_bound(n: int, s: float, weak: bool = False) -> float:
    """Explicit lower bound for ``tau_n(s)``.

    The default is ``c_n log(1 + 2(1 + sqrt(1+s))/s)``; ``weak=True`` gives the
    simpler ``2 c_n log(1 + 1/sqrt(s))``.
    """
    if not s > 0:
        raise DomainError("tau bound needs s > 0")
    cn = c_n(n)
    if weak:
        return 2 * cn * math.log1p(1 / math.sqrt(s))
    return cn * math.log1p(2 * (1 + math.sqrt(1 + s)) / s)


def agm(a: float, b: float, tol: float = 1e-15) -> float:
    while abs(a - b) > tol * max(abs(a), 1.0):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def complete_elliptic_K(k: float) -> float:
    """``K(k) = pi / (2 AGM(1, sqrt(1 - k^2)))`` for modulus ``0 <= k < 1``."""
    if not 0 <= k < 1:
        raise DomainError("complete_elliptic_K needs 0 <= k < 1")
    return math.pi / (2 * agm(1.0, math.sqrt((1 - k) * (1 + k))))


def grotzsch_mu(r: float) -> float:
    """Modulus ``mu(r) = (pi/2) K(r') / K(r)`` of the Grötzsch ring, ``r' = sqrt(1 - r^2)``."""
    if not 0 < r < 1:
        raise DomainError("grotzsch_mu needs 0 < r < 1")
    # K(r')/K(r) = AGM(1, r')/AGM(1, r), which stays accurate when r' rounds to 1
    rp = math.sqrt((1 - r) * (1 + r))
    return 0.5 * math.pi * agm(1.0, rp) / agm(1.0, r)


def teichmuller_tau2(s: float, validate: bool = False, rtol: float = 0.05) -> float:
    """Planar Teichmüller capacity ``tau_2(s) = pi / mu(1/sqrt(1+s))``.

    With ``validate=True`` the value is also computed by the grid capacity solver
    and a :class:`CrossValidationError` is raised if the two disagree by more
    than ``rtol``.
    """
    if not s > 0:
        raise DomainError("tau_2 needs s > 0")
    value = math.pi / grotzsch_mu(1 / math.sqrt(1 + s))
    if validate:
        validate_tau2(s, rtol=rtol, value=value)
    return value


def validate_tau2(s: float, rtol: float = 0.05, value: float | None = None, n_theta: int = 256) -> float:
    """Relative mismatch between the elliptic formula and the rasterized Teichmüller ring."""
    from .capacity2d import teichmuller_ring_capacity

    if value is None:
        value = teichmuller_tau2(s)
    numeric = teichmuller_ring_capacity(s, n_theta=n_theta)
    mismatch = abs(numeric - value) / value
    if mismatch > rtol:
        raise CrossValidationError(
            f"tau_2({s:g}): elliptic value {value:.6g} vs grid value {numeric:.6g} "
            f"(relative mismatch {mismatch:.3%} > {rtol:.0%})")
    return mismatch


def tau_n(n: int, s: float) -> tuple[float, bool]:
    """Best available value for ``tau_n(s)``: exact for n = 2, the lower bound otherwise.

    The flag tells whether the conservative lower bound was used.
    """
    if n == 2:
        return teichmuller_tau2(s), False
    return tau_lower_bound(n, s), True


def sug_log_ratio_lower(K: float, n: int, x: float) -> float:
    """Lower bound ``(1/K) (e/(n-1))^(n-1) log(1+x)`` for ``(log(K/x))^(1-n)``."""
    if not K > 1:
        raise DomainError("sug_log_ratio_lower needs K > 1")
    if not 0 < x < 1:
        raise DomainError("sug_log_ratio_lower needs 0 < x < 1")
    if n < 2:
        raise DomainError("n must be at least 2")
    return (math.e / (n - 1)) ** (n - 1) * math.log1p(x) / K


def sug_g(K: float, n: int, x: float) -> float:
    """``g(x) = log(1+x) (log(K/x))^(n-1)``, bounded above by ``K ((n-1)/e)^(n-1)``."""
    return math.log1p(x) * math.log(K / x) ** (n - 1)
