"""Exact arithmetic on sparse p-adic digit expansions.

A number with finitely many nonzero base-p digits is stored as
``(prime, ((index, digit), ...))`` and represents ``sum(d * p**k)``.
The lattice role (the quotient of the p-adic field by its integer ring,
embedded back as expansions supported on negative indices) is the state
space of the walks: addition there is digitwise with carries, and a carry
reaching index 0 vanishes.

Absolute values stay symbolic: :class:`RadialValue` records the exponent
of an exact power of p and never rounds through a float, because walk
norms at large scale parameters span hundreds of orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

RationalLike = Union[int, float, Fraction]

__all__ = [
    "PrimeMismatchError",
    "is_prime",
    "require_prime",
    "RadialValue",
    "QpDigits",
    "AdelePoint",
    "qp_abs",
    "gp_add",
    "gp_neg",
    "qp_shift",
    "largest_power_below",
    "ceil_log",
    "adelic_abs",
    "rational_valuation_oracle",
]


class PrimeMismatchError(ValueError):
    """Raised when values built over different primes are combined."""


@lru_cache(maxsize=None)
def is_prime(n: int) -> bool:
    """Primality by trial division; cached because the same few primes recur."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def require_prime(p: int) -> int:
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise ValueError(f"{p!r} is not a prime")
    return p


def _as_fraction(x: RationalLike) -> Fraction:
    # floats convert exactly (every float is a dyadic rational)
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class RadialValue:
    """An exact p-adic absolute value: either 0 or ``prime**exponent``.

    ``exponent is None`` encodes the value 0.  Comparisons are consistent
    with the real values; mixed-prime comparisons go through exact
    rationals.
    """

    prime: int
    exponent: int | None

    def __post_init__(self) -> None:
        require_prime(self.prime)

    @classmethod
    def zero(cls, p: int) -> "RadialValue":
        return cls(p, None)

    @classmethod
    def power(cls, p: int, e: int) -> "RadialValue":
        return cls(p, e)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def scaled(self, shift: int) -> "RadialValue":
        """Multiply by ``prime**shift`` (0 stays 0)."""
        if self.exponent is None:
            return self
        return RadialValue(self.prime, self.exponent + shift)

    def as_fraction(self) -> Fraction:
        if self.exponent is None:
            return Fraction(0)
        if self.exponent >= 0:
            return Fraction(self.prime**self.exponent)
        return Fraction(1, self.prime**-self.exponent)

    def as_float(self) -> float:
        if self.exponent is None:
            return 0.0
        try:
            return float(self.as_fraction())
        except OverflowError:
            return math.inf

    def __float__(self) -> float:
        return self.as_float()

    def _cmp_key(self, other: "RadialValue") -> tuple[tuple, tuple]:
        if self.prime == other.prime:
            # same base: exponent order is value order, zero below everything
            a = (0, 0) if self.exponent is None else (1, self.exponent)
            b = (0, 0) if other.exponent is None else (1, other.exponent)
            return a, b
        return (self.as_fraction(),), (other.as_fraction(),)

    def __lt__(self, other: "RadialValue") -> bool:
        a, b = self._cmp_key(other)
        return a < b

    def __le__(self, other: "RadialValue") -> bool:
        a, b = self._cmp_key(other)
        return a <= b

    def __gt__(self, other: "RadialValue") -> bool:
        return other < self

    def __ge__(self, other: "RadialValue") -> bool:
        return other <= self

    def lt_rational(self, x: RationalLike) -> bool:
        """Exact ``self < x`` against a rational, no float rounding."""
        return self.as_fraction() < _as_fraction(x)

    def le_rational(self, x: RationalLike) -> bool:
        return self.as_fraction() <= _as_fraction(x)


DigitPairs = tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class QpDigits:
    """Sparse digit expansion ``sum(d * prime**k)`` with digits in 1..p-1.

    ``digits`` is a tuple of ``(index, digit)`` pairs sorted by index with
    zero digits omitted, so the smallest stored index is ``digits[0][0]``
    and the absolute value is O(1).
    """

    prime: int
    digits: DigitPairs = ()

    def __post_init__(self) -> None:
        require_prime(self.prime)
        prev = None
        for k, d in self.digits:
            if not (1 <= d < self.prime):
                raise ValueError(f"digit {d} at index {k} outside 1..{self.prime - 1}")
            if prev is not None and k <= prev:
                raise ValueError("digit indices must be strictly increasing")
            prev = k

    @classmethod
    def _from_sorted(cls, p: int, pairs: DigitPairs) -> "QpDigits":
        # internal fast path: caller guarantees the invariants
        obj = object.__new__(cls)
        object.__setattr__(obj, "prime", p)
        object.__setattr__(obj, "digits", pairs)
        return obj

    @classmethod
    def zero(cls, p: int) -> "QpDigits":
        return cls(p, ())

    @classmethod
    def from_digits(cls, p: int, digits: Mapping[int, int] | Iterable[tuple[int, int]]) -> "QpDigits":
        items = digits.items() if isinstance(digits, Mapping) else digits
        pairs = tuple(sorted((int(k), int(d)) for k, d in items if d != 0))
        return cls(p, pairs)

    @classmethod
    def from_fraction(cls, p: int, value: RationalLike) -> "QpDigits":
        """Expand a nonnegative rational whose denominator is a power of p."""
        require_prime(p)
        v = _as_fraction(value)
        if v < 0:
            raise ValueError("only nonnegative values have a digit expansion here")
        if v == 0:
            return cls.zero(p)
        den = v.denominator
        depth = 0
        while den % p == 0:
            den //= p
            depth += 1
        if den != 1:
            raise ValueError(f"denominator of {value} is not a power of {p}")
        num = v.numerator
        pairs = []
        k = -depth
        while num:
            num, d = divmod(num, p)
            if d:
                pairs.append((k, d))
            k += 1
        return cls._from_sorted(p, tuple(pairs))

    @property
    def is_zero(self) -> bool:
        return not self.digits

    def min_index(self) -> int:
        if not self.digits:
            raise ValueError("zero expansion has no digits")
        return self.digits[0][0]

    def max_index(self) -> int:
        if not self.digits:
            raise ValueError("zero expansion has no digits")
        return self.digits[-1][0]

    def digit_at(self, k: int) -> int:
        for i, d in self.digits:
            if i == k:
                return d
            if i > k:
                break
        return 0

    def as_dict(self) -> dict[int, int]:
        return dict(self.digits)

    def to_fraction(self) -> Fraction:
        total = Fraction(0)
        for k, d in self.digits:
            total += Fraction(d * self.prime**k) if k >= 0 else Fraction(d, self.prime**-k)
        return total

    def __repr__(self) -> str:
        body = ", ".join(f"{k}:{d}" for k, d in self.digits)
        return f"QpDigits(p={self.prime}, {{{body}}})"


def qp_abs(x: QpDigits) -> RadialValue:
    """p-adic absolute value: ``p**(-k)`` for the smallest stored index k."""
    if not x.digits:
        return RadialValue.zero(x.prime)
    return RadialValue(x.prime, -x.digits[0][0])


def _require_lattice(x: QpDigits) -> None:
    if x.digits and x.digits[-1][0] >= 0:
        raise ValueError("operand has digits at index >= 0, not a lattice element")


def gp_add(x: QpDigits, y: QpDigits) -> QpDigits:
    """Lattice addition: digitwise with carries, carries reaching index 0 vanish."""
    if x.prime != y.prime:
        raise PrimeMismatchError(f"cannot add expansions over p={x.prime} and p={y.prime}")
    _require_lattice(x)
    _require_lattice(y)
    if not x.digits:
        return y
    if not y.digits:
        return x
    p = x.prime
    acc = dict(x.digits)
    for k, d in y.digits:
        acc[k] = acc.get(k, 0) + d
    out = []
    carry = 0
    for k in range(min(acc), 0):
        carry, d = divmod(acc.get(k, 0) + carry, p)
        if d:
            out.append((k, d))
    # leftover carry is the integer part, killed by the quotient
    return QpDigits._from_sorted(p, tuple(out))


def gp_neg(x: QpDigits) -> QpDigits:
    """Additive inverse in the lattice (the p-complement of the digits)."""
    _require_lattice(x)
    if not x.digits:
        return x
    frac = x.to_fraction()
    return QpDigits.from_fraction(x.prime, 1 - frac)


def qp_shift(x: QpDigits, m: int) -> QpDigits:
    """Multiply by ``p**m``: every index k becomes k + m."""
    if m == 0 or not x.digits:
        return x
    return QpDigits._from_sorted(x.prime, tuple((k + m, d) for k, d in x.digits))


def ceil_log(lam: RationalLike, p: int) -> int:
    """Smallest integer e with ``p**e >= lam``, by exact integer comparison.

    A floating log misclassifies exact powers of p, so powers are compared
    as integers: ``p**e >= num/den  <=>  den * p**e >= num`` (with the
    power moved across for negative e).
    """
    require_prime(p)
    v = _as_fraction(lam)
    if v <= 0:
        raise ValueError("lam must be positive")
    num, den = v.numerator, v.denominator
    e = 0
    if num > den:
        power = 1
        while den * power < num:
            power *= p
            e += 1
        return e
    power = 1
    while power * num <= den:  # p**-e >= lam
        power *= p
        e -= 1
    return e + 1


def largest_power_below(lam: RationalLike, p: int) -> RadialValue:
    """The largest power of p strictly less than lam, as an exact exponent.

    Satisfies ``p**k < lam  <=>  p**k <= largest_power_below(lam, p)`` for
    every integer k, including lam an exact power of p.
    """
    return RadialValue(p, ceil_log(lam, p) - 1)


ComponentPairs = tuple[tuple[int, QpDigits], ...]


@dataclass(frozen=True)
class AdelePoint:
    """Finitely many nonzero p-adic components; unlisted primes are zero."""

    components: ComponentPairs = ()

    def __post_init__(self) -> None:
        prev = None
        for p, x in self.components:
            require_prime(p)
            if x.prime != p:
                raise PrimeMismatchError(f"component keyed {p} holds a p={x.prime} value")
            if x.is_zero:
                raise ValueError("zero components must be omitted")
            if prev is not None and p <= prev:
                raise ValueError("component primes must be strictly increasing")
            prev = p

    @classmethod
    def from_components(cls, components: Mapping[int, QpDigits]) -> "AdelePoint":
        pairs = tuple(sorted((p, x) for p, x in components.items() if not x.is_zero))
        return cls(pairs)

    def component(self, p: int) -> QpDigits:
        for q, x in self.components:
            if q == p:
                return x
        return QpDigits.zero(require_prime(p))


def adelic_abs(x: AdelePoint) -> Fraction:
    """Adelic absolute value: max over components of ``|x_p|_p / p``, exact."""
    best = Fraction(0)
    for p, comp in x.components:
        e = qp_abs(comp).exponent
        if e is None:
            continue
        val = Fraction(p ** (e - 1)) if e >= 1 else Fraction(1, p ** (1 - e))
        if val > best:
            best = val
    return best


def rational_valuation_oracle(num: int, den: int, p: int) -> RadialValue:
    """|num/den|_p by repeated division; the independent check for qp_abs."""
    require_prime(p)
    if den == 0:
        raise ZeroDivisionError("denominator must be nonzero")
    if num == 0:
        return RadialValue.zero(p)
    v = 0
    n = abs(num)
    while n % p == 0:
        n //= p
        v += 1
    d = abs(den)
    while d % p == 0:
        d //= p
        v -= 1
    return RadialValue(p, -v)
