"""Jump sampling for the lattice walks.

A jump has a radius ``p**k`` drawn from the normalized power-law pmf
``P(K = k) = (p**b - 1) * p**(-k*b)`` for k >= 1, and is then uniform on
the sphere of that radius.  The radius comes from one uniform through the
inverse CDF of the tail ``P(K > k) = p**(-k*b)``; sphere digits are drawn
one bounded uniform integer per digit.

Randomness flows through :class:`RngStream`, a named position in a
splittable family of generators: equal (seed, index) replays the exact
same sequence, distinct indices are statistically independent, and
``substream`` derives child streams for replicas and primes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np

from adelic_walks.padic import QpDigits, require_prime

__all__ = [
    "JumpLaw",
    "RngStream",
    "sample_radius",
    "sample_radii",
    "sphere_cardinality",
    "sample_sphere_point",
    "sample_jump",
    "payload_to_digits",
]

RngLike = Union["RngStream", np.random.Generator]

# payload integers for sphere points are built in int64; a radius deep
# enough to overflow that (never seen at desk scale) falls back to exact
# Python integers assembled digit by digit
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class JumpLaw:
    """Power-law radius distribution of a single jump."""

    prime: int
    b: float
    c_pb: float = field(init=False)

    def __post_init__(self) -> None:
        require_prime(self.prime)
        if not self.b > 0:
            raise ValueError("b must be positive")
        object.__setattr__(self, "c_pb", float(self.prime) ** self.b - 1.0)

    def radius_pmf(self, k: int) -> float:
        """P(K = k) for k >= 1."""
        if k < 1:
            return 0.0
        return self.c_pb * float(self.prime) ** (-k * self.b)

    def tail_prob(self, k: int) -> float:
        """P(K > k) = p**(-k*b) for k >= 0."""
        return float(self.prime) ** (-k * self.b)


@dataclass(frozen=True)
class RngStream:
    """A reproducible, splittable random stream (seed, index, derivation path)."""

    seed: int
    index: int = 0
    path: tuple[int, ...] = ()

    @cached_property
    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.index, *self.path))
        return np.random.Generator(np.random.PCG64(seq))

    def substream(self, j: int) -> "RngStream":
        """Derive an independent child stream; used per replica and per prime."""
        return RngStream(self.seed, self.index, self.path + (int(j),))


def _gen_of(rng: RngLike) -> np.random.Generator:
    return rng.generator if isinstance(rng, RngStream) else rng


def _open_uniforms(gen: np.random.Generator, size: int) -> np.ndarray:
    """Uniforms in the open interval (0, 1): exact zeros are redrawn."""
    u = gen.random(size)
    while True:
        zeros = np.flatnonzero(u == 0.0)
        if zeros.size == 0:
            return u
        u[zeros] = gen.random(zeros.size)


def _radii_from_uniforms(law: JumpLaw, u: np.ndarray) -> np.ndarray:
    """Smallest k >= 1 with 1 - p**(-k*b) >= u, elementwise.

    A closed form from the log gives the candidate; the loops absorb float
    rounding at cell boundaries (almost always <= 1 step).  The comparison
    is evaluated exactly as written, so cell boundaries land where the
    float CDF puts them.
    """
    p, b = float(law.prime), law.b
    k = np.ceil(np.log1p(-u) / (-b * math.log(p))).astype(np.int64)
    np.maximum(k, 1, out=k)
    while True:
        down = (k > 1) & (1.0 - np.power(p, -(k - 1) * b) >= u)
        if not down.any():
            break
        k[down] -= 1
    while True:
        up = 1.0 - np.power(p, -k * b) < u
        if not up.any():
            break
        k[up] += 1
    return k


def sample_radii(law: JumpLaw, rng: RngLike, size: int) -> np.ndarray:
    """Draw ``size`` iid radii exponents K (one uniform each)."""
    gen = _gen_of(rng)
    return _radii_from_uniforms(law, _open_uniforms(gen, size))


def sample_radius(law: JumpLaw, rng: RngLike) -> int:
    return int(sample_radii(law, rng, 1)[0])


def sphere_cardinality(p: int, k: int) -> int:
    """Number of lattice points with absolute value exactly ``p**k``."""
    require_prime(p)
    if k < 1:
        raise ValueError("spheres in the lattice have radius p**k with k >= 1")
    return (p - 1) * p ** (k - 1)


def _sphere_digit_batches(
    p: int, ks: np.ndarray, gen: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Canonical digit draws for a batch of sphere points.

    One leading digit in 1..p-1 per point, then a single flat batch of
    ``sum(k - 1)`` digits in 0..p-1, in point order.  All walk engines use
    this exact consumption pattern so a stream replays identically.
    """
    lead = gen.integers(1, p, size=ks.size)
    rest = gen.integers(0, p, size=int(np.sum(ks - 1)))
    return lead, rest


def _assemble_payloads(p: int, ks: np.ndarray, lead: np.ndarray, rest: np.ndarray) -> np.ndarray:
    """Combine digit draws into payload integers ``u = x * p**k``.

    The payload's base-p digit i is the point's digit at index ``-k + i``,
    so ``1 <= u < p**k`` with ``u % p != 0``.  Returns int64 when every
    radius fits, else an object array of exact Python ints.
    """
    n = ks.size
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(ks - 1, out=offsets[1:])
    if n and int(ks.max()) >= 1 and p ** int(ks.max()) >= _INT64_SAFE:
        out = np.empty(n, dtype=object)
        for i in range(n):
            u = 0
            lo, hi = offsets[i], offsets[i + 1]
            for j in range(hi - 1, lo - 1, -1):
                u = u * p + int(rest[j])
            out[i] = u * p + int(lead[i])
        return out
    out = np.empty(n, dtype=np.int64)
    for k in np.unique(ks):
        idx = np.flatnonzero(ks == k)
        if k == 1:
            out[idx] = lead[idx]
            continue
        cols = offsets[idx][:, None] + np.arange(k - 1, dtype=np.int64)[None, :]
        powers = p ** (1 + np.arange(k - 1, dtype=np.int64))
        out[idx] = lead[idx] + rest[cols] @ powers
    return out


def payload_to_digits(p: int, k: int, payload: int) -> QpDigits:
    """Expand a payload integer into the sphere point it encodes."""
    pairs = []
    u = int(payload)
    for i in range(k):
        u, d = divmod(u, p)
        if d:
            pairs.append((-k + i, d))
    return QpDigits._from_sorted(p, tuple(pairs))


def sample_sphere_point(p: int, k: int, rng: RngLike) -> QpDigits:
    """Uniform point on the sphere of radius ``p**k``.

    The digit at index -k is uniform in 1..p-1 and the k-1 digits above it
    are uniform in 0..p-1, independently; the result has absolute value
    exactly ``p**k``.
    """
    require_prime(p)
    if k < 1:
        raise ValueError("sphere radius requires k >= 1")
    gen = _gen_of(rng)
    ks = np.array([k], dtype=np.int64)
    lead, rest = _sphere_digit_batches(p, ks, gen)
    payload = _assemble_payloads(p, ks, lead, rest)[0]
    return payload_to_digits(p, k, payload)


def sample_jump(law: JumpLaw, rng: RngLike) -> QpDigits:
    """One jump: power-law radius, then uniform on that sphere."""
    gen = _gen_of(rng)
    k = int(_radii_from_uniforms(law, _open_uniforms(gen, 1))[0])
    return sample_sphere_point(law.prime, k, gen)
