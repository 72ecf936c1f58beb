"""Closed-form probabilities, limits, and bounds for the scaled walks.

Everything here is a pure formula: survival probabilities of the running
sup, their large-scale limits, the radial distribution of the limiting
process via a geometric series, and prime tail sums with rigorous
integral remainders.  Formulas are evaluated in binary floating point;
the step count ``floor(D * p**(m*b) * T)`` is re-decided in exact rational
arithmetic whenever the float product lands within a couple of ulps of an
integer, because the floor is discontinuous and the closed forms depend
on it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from adelic_walks.padic import RationalLike, ceil_log, require_prime

__all__ = [
    "SeriesTolerance",
    "SigmaSpec",
    "diffusion_constant",
    "scaled_step_count",
    "walk_sup_ball_prob",
    "sup_survival_prob",
    "sup_survival_limit",
    "limit_ball_prob",
    "limit_radial_moment",
    "primes_up_to",
    "prime_count_oracle",
    "prime_tail_sum",
    "adelic_survival_bound",
    "adelic_sup_lower_bound",
]

DEFAULT_TAIL_CUTOFF = 10**6


@dataclass(frozen=True)
class SeriesTolerance:
    """Absolute truncation tolerance for the radial series."""

    abs_tol: float = 1e-9

    def __post_init__(self) -> None:
        if not 0 < self.abs_tol <= 1e-6:
            raise ValueError("abs_tol must lie in (0, 1e-6]")


@dataclass(frozen=True)
class SigmaSpec:
    """Diffusion coefficients per prime: explicit entries plus an optional
    power-law tail ``sigma_p = a * p**(-s)`` for every unlisted prime.

    ``s > 1`` keeps the sequence summable, which every consumer relies on.
    """

    explicit: tuple[tuple[int, float], ...] = ()
    tail: tuple[float, float] | None = None  # (a, s)

    def __post_init__(self) -> None:
        prev = None
        for p, v in self.explicit:
            require_prime(p)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"sigma for p={p} must be finite and nonnegative")
            if prev is not None and p <= prev:
                raise ValueError("explicit primes must be strictly increasing")
            prev = p
        if self.tail is not None:
            a, s = self.tail
            if a < 0:
                raise ValueError("tail amplitude a must be nonnegative")
            if not s > 1:
                raise ValueError("tail exponent s must exceed 1 for a summable sigma")

    @classmethod
    def from_mapping(
        cls, explicit: Mapping[int, float], tail: tuple[float, float] | None = None
    ) -> "SigmaSpec":
        return cls(tuple(sorted((int(p), float(v)) for p, v in explicit.items())), tail)

    def value(self, p: int) -> float:
        for q, v in self.explicit:
            if q == p:
                return v
        if self.tail is not None:
            a, s = self.tail
            return a * float(p) ** (-s)
        return 0.0

    @property
    def finitely_supported(self) -> bool:
        return self.tail is None or self.tail[0] == 0

    def support_ceiling(self) -> int | None:
        """Smallest M with sigma_p = 0 for all p >= M, if one exists."""
        if not self.finitely_supported:
            return None
        top = max((p for p, v in self.explicit if v > 0), default=1)
        return top + 1

    def active_primes_below(self, ceiling: int) -> list[int]:
        """Primes p < ceiling with sigma_p > 0."""
        return [int(p) for p in primes_up_to(max(ceiling - 1, 2)) if p < ceiling and self.value(int(p)) > 0]


def diffusion_constant(p: int, b: float, sigma_p: float) -> float:
    """Time rescaling rate: ``p**b * (p - 1) / (p**(b+1) - 1) * sigma_p``.

    The prime-dependent factor is always < 1.
    """
    require_prime(p)
    if not b > 0:
        raise ValueError("b must be positive")
    if sigma_p < 0:
        raise ValueError("sigma_p must be nonnegative")
    pf = float(p)
    return pf**b * (p - 1) / (pf ** (b + 1) - 1) * sigma_p


def _exact_step_count(p: int, bi: int, sigma_p: float, m: int, T: float) -> int:
    rate = Fraction(p**bi * (p - 1), p ** (bi + 1) - 1) * Fraction(sigma_p) * p ** (m * bi)
    return math.floor(rate * Fraction(T))


def scaled_step_count(p: int, b: float, sigma_p: float, m: int, T: float) -> int:
    """Number of walk steps up to time T: ``floor(D * p**(m*b) * T)``.

    Float products within two ulps of an integer get re-decided exactly
    when b is integral (sigma and T are floats, hence exact rationals);
    e.g. (2/3) * 2 * 3 evaluates to 3.9999999999999996 in doubles but the
    true count is 4.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    if m < 0:
        raise ValueError("m must be nonnegative")
    x = diffusion_constant(p, b, sigma_p) * float(p) ** (m * b) * T
    if x == 0.0:
        return 0
    nearest = round(x)
    if abs(x - nearest) <= 2 * math.ulp(max(x, 1.0)) and float(b).is_integer():
        return _exact_step_count(p, int(b), sigma_p, m, T)
    return math.floor(x)


def walk_sup_ball_prob(p: int, b: float, k: int, n: int) -> float:
    """P(running sup of the unscaled walk stays within radius p**k over n
    steps) = ``(1 - p**(-b*k))**n``; only valid for k >= 1 since single
    jumps already have radius >= p."""
    require_prime(p)
    if k < 1:
        raise ValueError("the containment formula needs k >= 1")
    if n < 0:
        raise ValueError("n must be nonnegative")
    return (1.0 - float(p) ** (-b * k)) ** n


def sup_survival_prob(
    p: int, b: float, sigma_p: float, m: int, T: float, lam: RationalLike
) -> float:
    """Probability that the scaled walk's running sup stays below lam up to
    time T, in the component norm ``|.|_p / p``.

    Exact closed form ``(1 - p**(-b*(m + c)))**n`` with c the exact ceiled
    base-p log of lam and ``n = scaled_step_count``; requires
    ``m + c >= 1`` so the containment radius is a genuine sphere radius.
    """
    c = ceil_log(lam, p)
    if m + c < 1:
        raise ValueError(
            f"survival formula needs 1 <= m + ceil(log_{p}(lam)) but m={m} and "
            f"ceil(log_{p}({lam}))={c}"
        )
    n = scaled_step_count(p, b, sigma_p, m, T)
    return (1.0 - float(p) ** (-b * (m + c))) ** n


def sup_survival_limit(p: int, b: float, sigma_p: float, T: float, lam: RationalLike) -> float:
    """Large-m limit of :func:`sup_survival_prob`:
    ``exp(-T * lpb**(-b) * (p-1)/(p**(b+1)-1) * sigma_p)`` where lpb is the
    largest power of p strictly below lam."""
    require_prime(p)
    if T < 0:
        raise ValueError("T must be nonnegative")
    e = ceil_log(lam, p) - 1
    lpb_pow = float(p) ** (-b * e)
    return math.exp(-T * lpb_pow * (p - 1) / (float(p) ** (b + 1) - 1) * sigma_p)


def limit_ball_prob(
    p: int,
    b: float,
    sigma_p: float,
    t: float,
    k: int,
    tol: SeriesTolerance = SeriesTolerance(),
) -> float:
    """P(|Y_t|_p <= p**k) for the limiting process, via the radial series

        (1 - 1/p) * sum_{i>=0} p**(-i) * exp(-sigma_p * t * p**(-(k+i)*b)).

    Integrating the inverse-transform kernel over the ball of radius p**k
    moves the indicator to a ball of radius p**(-k) on the frequency side,
    and slicing that ball into spheres of measure p**(-k-i) * (1 - 1/p)
    gives the series; at t = 0 it telescopes to exactly 1.  Truncated when
    the geometric tail bound p**(-I) drops below ``tol.abs_tol``.
    """
    require_prime(p)
    if t < 0:
        raise ValueError("t must be nonnegative")
    if sigma_p < 0:
        raise ValueError("sigma_p must be nonnegative")
    pf = float(p)
    total = 0.0
    weight = 1.0 - 1.0 / pf
    i = 0
    while pf**-i >= tol.abs_tol:
        total += weight * pf**-i * math.exp(-sigma_p * t * pf ** (-(k + i) * b))
        i += 1
    return total


def _limit_shell_prob(p: int, b: float, sigma_p: float, t: float, k: int) -> float:
    """P(|Y_t|_p = p**k) via the shell series, stable for tiny arguments.

    Differencing the ball series shell by shell gives
    ``(1 - 1/p) * sum_{i>=0} p**(-i) * (exp(-u_i) - exp(-p**b * u_i))``
    with ``u_i = sigma_p * t * p**(-(k+i)*b)``; the bracket is evaluated
    with expm1 so nearby exponentials do not cancel.
    """
    pf = float(p)
    total = 0.0
    weight = 1.0 - 1.0 / pf
    scale = pf**b
    i = 0
    while pf**-i >= 1e-16:
        u = sigma_p * t * pf ** (-(k + i) * b)
        total += weight * pf**-i * (-math.exp(-u) * math.expm1(-u * (scale - 1.0)))
        i += 1
    return total


def limit_radial_moment(
    p: int,
    b: float,
    sigma_p: float,
    t: float,
    r: float,
    tol: SeriesTolerance = SeriesTolerance(),
) -> float:
    """E|Y_t|_p**r for the limiting process, finite for 0 < r < b.

    Shell summation ``sum_k p**(k*r) * P(|Y_t| = p**k)``.  The upper cutoff
    uses the tail bound ``P(|Y_t| > p**K) <= sigma_p * t * p**(-K*b)``, so
    shells above K contribute at most
    ``sigma_p * t * p**b * p**((K+1)*(r-b)) / (1 - p**(r-b))``; the lower
    cutoff uses shell weight ``p**(K*r)`` directly.
    """
    if not 0 < r < b:
        raise ValueError("the moment is finite only for r in (0, b)")
    if t == 0 or sigma_p == 0:
        return 0.0
    pf = float(p)
    st = sigma_p * t
    geom = 1.0 - pf ** (r - b)
    k_hi = 1
    while st * pf**b * pf ** ((k_hi + 1) * (r - b)) / geom > tol.abs_tol:
        k_hi += 1
    k_lo = 0
    while pf ** (k_lo * r) > tol.abs_tol:
        k_lo -= 1
    return sum(
        pf ** (k * r) * _limit_shell_prob(p, b, sigma_p, t, k) for k in range(k_lo, k_hi + 1)
    )


@lru_cache(maxsize=32)
def _prime_array(n: int) -> np.ndarray:
    flags = np.ones(n + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(n) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags).astype(np.int64)


def primes_up_to(n: int) -> Sequence[int]:
    """All primes <= n, ascending (sieve of Eratosthenes, cached)."""
    if n < 2:
        raise ValueError("need n >= 2")
    return _prime_array(n)


def prime_count_oracle(n: int) -> int:
    """Independent prime count by trial division; cross-checks the sieve."""
    count = 0
    for m in range(2, n + 1):
        f = 2
        composite = False
        while f * f <= m:
            if m % f == 0:
                composite = True
                break
            f += 1
        count += not composite
    return count


def _tail_coefficient(primes: np.ndarray, b: float) -> np.ndarray:
    pf = primes.astype(np.float64)
    return pf**b * (pf - 1) / (pf ** (b + 1) - 1)


def prime_tail_sum(
    sigma: SigmaSpec, b: float, M: int, n0: int = DEFAULT_TAIL_CUTOFF
) -> tuple[float, float]:
    """``sum_{p >= M} p**b (p-1) / (p**(b+1) - 1) * sigma_p`` with remainder.

    Sieved primes in [M, n0] are summed directly.  For a power-law tail the
    primes beyond n0 contribute at most ``a * integral_{n0}^inf x**(-s) dx``
    because the coefficient factor is below 1; finitely supported sigma has
    remainder 0.  Returns (value, remainder_bound).
    """
    if not b > 0:
        raise ValueError("b must be positive")
    primes = _prime_array(n0)
    window = primes[primes >= M]
    value = 0.0
    if window.size:
        coeff = _tail_coefficient(window, b)
        sig = np.empty(window.size, dtype=np.float64)
        if sigma.tail is not None:
            a, s = sigma.tail
            np.power(window.astype(np.float64), -s, out=sig)
            sig *= a
        else:
            sig.fill(0.0)
        for p, v in sigma.explicit:
            if M <= p <= n0:
                i = int(np.searchsorted(window, p))
                if i < window.size and window[i] == p:
                    sig[i] = v
        value = float(coeff @ sig)
    # explicit entries beyond the sieve window are finitely many and exact
    for p, v in sigma.explicit:
        if p >= M and p > n0 and v > 0:
            value += diffusion_constant(p, b, 1.0) * v
    if sigma.tail is None or sigma.tail[0] == 0:
        return value, 0.0
    a, s = sigma.tail
    remainder = a * float(n0) ** (1 - s) / (s - 1)
    return value, remainder


def adelic_survival_bound(sigma: SigmaSpec, b: float, M: int, T: float, c: float) -> float:
    """Lower bound ``exp(-c*T*tail(M))`` on the probability that every
    component with prime >= M stays inside its unit ball up to time T.

    The tail uses value + remainder so the bound stays valid.
    """
    if not c > 1:
        raise ValueError("c must exceed 1")
    if T < 0:
        raise ValueError("T must be nonnegative")
    value, remainder = prime_tail_sum(sigma, b, M)
    return math.exp(-c * T * (value + remainder))


def adelic_sup_lower_bound(sigma: SigmaSpec, b: float, T: float, lam: float) -> float:
    """Lower bound on the limiting probability that the adelic sup norm of
    the path stays below lam up to T:
    ``exp(-lam**(-b) * T * sum_p coeff(p) * sigma_p)``."""
    if not lam > 0:
        raise ValueError("lam must be positive")
    value, remainder = prime_tail_sum(sigma, b, 2)
    return math.exp(-float(lam) ** (-b) * T * (value + remainder))
