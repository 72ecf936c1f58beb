"""Scaled single-prime walk paths and adelic product walks.

A single-prime path stores the raw cumulative lattice sums at every step
together with the scale parameter m; the observable trajectory at time t
is the cumulative sum at step ``floor(rate * t)`` shifted by m, a cadlag
step function jumping at times ``j / rate``.

The Monte Carlo engines below the path API work on an integer encoding of
the same arithmetic: a lattice element supported on indices -L..-1 is the
integer ``u = x * p**L`` in [0, p**L), lattice addition is addition mod
``p**L``, and the absolute value exponent is ``L - v_p(u)``.  For p = 2
this vectorizes over whole replica blocks in uint64 (addition mod 2**64
then masking to 2**L is exact); other primes fold with exact Python
integers.  Both engines and the path builder consume randomness through
the same batched calls, so one stream yields one walk regardless of the
engine.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from adelic_walks import oracles, sampling
from adelic_walks.padic import QpDigits, RadialValue, gp_add, qp_abs, qp_shift, require_prime
from adelic_walks.oracles import SigmaSpec
from adelic_walks.sampling import JumpLaw, RngStream

__all__ = [
    "CHUNK",
    "ZERO_EXP",
    "SigmaSpec",
    "WalkParams",
    "SinglePrimePath",
    "AdelicPath",
    "simulate_single",
    "path_value",
    "sup_scaled_norm",
    "choose_prime_cutoff",
    "simulate_adelic",
    "chunk_count",
    "walk_sup_exponents",
    "walk_final_exponents",
]

# sentinel exponent for a zero value (norm 0); far below any real exponent
ZERO_EXP = -(2**31)

# replicas per substream block in the array engines
CHUNK = 1024


@dataclass(frozen=True)
class WalkParams:
    """Parameters of one scaled walk: prime, tail exponent, diffusion
    coefficient, and scale index m."""

    prime: int
    b: float
    sigma_p: float
    m: int

    def __post_init__(self) -> None:
        require_prime(self.prime)
        if not self.b > 0:
            raise ValueError("b must be positive")
        if self.sigma_p < 0:
            raise ValueError("sigma_p must be nonnegative")
        if self.m < 0:
            raise ValueError("m must be nonnegative")

    @property
    def law(self) -> JumpLaw:
        return JumpLaw(self.prime, self.b)

    def diffusion(self) -> float:
        return oracles.diffusion_constant(self.prime, self.b, self.sigma_p)

    def step_rate(self) -> float:
        """Jump rate of the scaled walk: D * p**(m*b)."""
        return self.diffusion() * float(self.prime) ** (self.m * self.b)

    def step_count(self, T: float) -> int:
        return oracles.scaled_step_count(self.prime, self.b, self.sigma_p, self.m, T)


@dataclass(frozen=True)
class SinglePrimePath:
    """One realized walk: cumulative lattice sums at steps 1..n.

    ``jumps[j - 1] = (j, S_j)`` where S_j is the raw (unscaled) cumulative
    sum; the scaled trajectory value is ``qp_shift(S_j, m)``.  Jump j takes
    effect at time ``j / step_rate`` inclusive (right continuity).
    """

    params: WalkParams
    jumps: tuple[tuple[int, QpDigits], ...]
    horizon: float

    @cached_property
    def norm_exponents(self) -> tuple[int, ...]:
        """Exponent of |S_j|_p per jump (ZERO_EXP where the sum is zero)."""
        out = []
        for _, s in self.jumps:
            e = qp_abs(s).exponent
            out.append(ZERO_EXP if e is None else e)
        return tuple(out)

    def jump_time(self, j: int) -> float:
        return j / self.params.step_rate()

    def jump_times(self, T: float | None = None) -> list[float]:
        n = len(self.jumps) if T is None else min(self.params.step_count(T), len(self.jumps))
        rate = self.params.step_rate()
        return [j / rate for j in range(1, n + 1)]

    def steps_through(self, t: float) -> int:
        """Jumps in effect at time t: count of j with ``j / rate <= t``.

        Aligned with the float jump times so evaluation at an emitted jump
        time lands on the post-jump value.
        """
        rate = self.params.step_rate()
        if rate == 0.0 or not self.jumps:
            return 0
        n = min(max(math.floor(rate * t), 0), len(self.jumps))
        while n < len(self.jumps) and (n + 1) / rate <= t:
            n += 1
        while n > 0 and n / rate > t:
            n -= 1
        return n


@dataclass(frozen=True)
class AdelicPath:
    """Independent single-prime walks over the active primes.

    Primes at or above ``cutoff`` are left out; ``truncation_bound`` bounds
    the probability that any omitted component leaves its unit ball before
    the horizon.
    """

    components: tuple[tuple[int, SinglePrimePath], ...]
    cutoff: int
    truncation_bound: float
    horizon: float

    def component(self, p: int) -> SinglePrimePath | None:
        for q, path in self.components:
            if q == p:
                return path
        return None

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.components)


def _sample_jump_batch(params: WalkParams, n: int, gen: np.random.Generator):
    """Radii and payload integers for n jumps, canonical consumption order."""
    ks = sampling._radii_from_uniforms(params.law, sampling._open_uniforms(gen, n))
    lead, rest = sampling._sphere_digit_batches(params.prime, ks, gen)
    payloads = sampling._assemble_payloads(params.prime, ks, lead, rest)
    return ks, payloads


def simulate_single(
    params: WalkParams, T: float, rng: RngStream | np.random.Generator
) -> SinglePrimePath:
    """Run one walk to horizon T: exactly ``step_count(T)`` iid jumps,
    cumulative sums by lattice addition.  sigma_p = 0 gives the constant
    zero path."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    n = params.step_count(T)
    if n == 0:
        return SinglePrimePath(params, (), T)
    gen = rng.generator if isinstance(rng, RngStream) else rng
    ks, payloads = _sample_jump_batch(params, n, gen)
    jumps = []
    acc = QpDigits.zero(params.prime)
    for j in range(n):
        step = sampling.payload_to_digits(params.prime, int(ks[j]), payloads[j])
        acc = gp_add(acc, step)
        jumps.append((j + 1, acc))
    return SinglePrimePath(params, tuple(jumps), T)


def path_value(path: SinglePrimePath, t: float) -> QpDigits:
    """Scaled trajectory value at time t, right continuous at jump times."""
    if not 0 <= t <= path.horizon:
        raise ValueError(f"t={t} outside [0, {path.horizon}]")
    n = path.steps_through(t)
    if n == 0:
        return QpDigits.zero(path.params.prime)
    return qp_shift(path.jumps[n - 1][1], path.params.m)


def sup_scaled_norm(path: SinglePrimePath, T: float) -> RadialValue:
    """Max of |scaled value|_p over [0, T]: attained at jump points."""
    if T > path.horizon:
        raise ValueError("T exceeds the simulated horizon")
    n = min(path.params.step_count(T), len(path.jumps))
    best = ZERO_EXP
    for e in path.norm_exponents[:n]:
        if e > best:
            best = e
    if best == ZERO_EXP:
        return RadialValue.zero(path.params.prime)
    return RadialValue(path.params.prime, best - path.params.m)


def _verify_exp_bound(cutoff: int, b: float, m: int, c: float) -> None:
    """Check exp(-c * x) <= 1 - x at x = cutoff**(-m*b).

    Every omitted prime is >= cutoff and x decreases in p, so the check at
    the cutoff covers them all.  Fails loudly when the exponential lower
    bound on survival is not usable (e.g. m = 0)."""
    x = float(cutoff) ** (-m * b)
    if math.exp(-c * x) > 1.0 - x:
        raise ValueError(
            f"exp(-{c}*x) <= 1 - x fails at the cutoff {cutoff} with m={m}, b={b} "
            f"(x={x}); the tail survival bound does not apply"
        )


def choose_prime_cutoff(
    sigma: SigmaSpec, b: float, m: int, T: float, eps: float, c: float = 2.0
) -> tuple[int, float]:
    """Smallest cutoff M with ``1 - exp(-c*T*tail(M)) <= eps``.

    ``tail(M)`` is the coefficient-weighted sigma tail including its
    remainder bound, so the returned bound is safe.  The exponential step
    needs ``exp(-c * p**(-m*b)) <= 1 - p**(-m*b)`` for all omitted primes,
    which is verified at the smallest of them.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if not c > 1:
        raise ValueError("c must exceed 1")
    if sigma.tail is not None and not sigma.tail[1] > 1:
        raise ValueError("sigma is not summable")

    def failure(M: int) -> float:
        value, remainder = oracles.prime_tail_sum(sigma, b, M)
        return -math.expm1(-c * T * (value + remainder)), value + remainder

    # the tail only changes across primes: candidates are 2 and prime+1
    candidates = [2] + [int(p) + 1 for p in oracles.primes_up_to(oracles.DEFAULT_TAIL_CUTOFF)]
    for cand in candidates:
        f, tail = failure(cand)
        if f <= eps:
            if tail > 0:
                _verify_exp_bound(cand, b, m, c)
            return cand, f
    raise ValueError("no cutoff below the sieve limit achieves the requested eps")


def _assemble_adelic(
    sigma: SigmaSpec, b: float, m: int, T: float, cutoff: int, bound: float, rng: RngStream
) -> AdelicPath:
    comps = []
    for p in sigma.active_primes_below(cutoff):
        params = WalkParams(p, b, sigma.value(p), m)
        comps.append((p, simulate_single(params, T, rng.substream(p))))
    return AdelicPath(tuple(comps), cutoff, bound, T)


def simulate_adelic(
    sigma: SigmaSpec, b: float, m: int, T: float, eps: float, rng: RngStream
) -> AdelicPath:
    """Independent component walks over the active primes below the cutoff,
    one RNG substream per prime."""
    cutoff, bound = choose_prime_cutoff(sigma, b, m, T, eps)
    return _assemble_adelic(sigma, b, m, T, cutoff, bound, rng)


# ---------------------------------------------------------------------------
# array engines: per-replica norm exponents without building path objects


def _exponent_of(acc: int, depth: int, p: int) -> int:
    if acc == 0:
        return ZERO_EXP
    v = 0
    while acc % p == 0:
        acc //= p
        v += 1
    return depth - v


def _fold_exponents_generic(p, ks, payloads, rows, n, want_sup, checkpoints):
    """Exact integer fold for any prime; ks/payloads are flat, row-major.

    The accumulator encodes the cumulative sum as ``value * p**depth`` and
    deepens whenever a jump has a larger radius than anything seen so far.
    """
    n_checks = len(checkpoints) if checkpoints else 0
    out = np.full((rows, n_checks) if checkpoints else rows, ZERO_EXP, dtype=np.int64)
    pw = [1, p]

    def power(j: int) -> int:
        while len(pw) <= j:
            pw.append(pw[-1] * p)
        return pw[j]

    for r in range(rows):
        base = r * n
        acc = 0
        depth = 0
        best = ZERO_EXP
        ci = 0
        for j in range(n):
            k = int(ks[base + j])
            u = int(payloads[base + j])
            if k > depth:
                acc = acc * power(k - depth) + u
                depth = k
            else:
                acc += u * power(depth - k)
            mod = power(depth)
            if acc >= mod:
                acc -= mod
            if want_sup or checkpoints:
                e = _exponent_of(acc, depth, p)
                if e > best:
                    best = e
                if checkpoints:
                    while ci < n_checks and checkpoints[ci] == j + 1:
                        out[r, ci] = best if want_sup else e
                        ci += 1
        if checkpoints:
            continue
        out[r] = best if want_sup else _exponent_of(acc, depth, p)
    return out


def _exponents_vectorized_p2(ks, payloads, rows, n, want_sup, checkpoints):
    """uint64 fold for p = 2: cumulative sums mod 2**64 masked to 2**L.

    Exact because 2**L divides 2**64; the lowest set bit read off through
    frexp gives the valuation.  Not used for sup-at-checkpoints.
    """
    k2 = ks.reshape(rows, n)
    L = int(k2.max())
    shifts = (L - k2).astype(np.uint64)
    vals = payloads.astype(np.uint64).reshape(rows, n) << shifts
    csum = np.cumsum(vals, axis=1)
    csum &= np.uint64((1 << L) - 1)
    if checkpoints:
        csum = csum[:, np.asarray(checkpoints, dtype=np.int64) - 1]
    lsb = csum & np.negative(csum)
    _, expo = np.frexp(lsb.astype(np.float64))
    e = L - (expo.astype(np.int64) - 1)
    e[csum == np.uint64(0)] = ZERO_EXP
    if checkpoints:
        return e
    if want_sup:
        return e.max(axis=1)
    return e[:, -1]


def chunk_count(n_replicas: int) -> int:
    """Number of CHUNK-sized replica blocks covering n_replicas."""
    return -(-n_replicas // CHUNK)


def _walk_exponents(
    params: WalkParams,
    T: float,
    stream: RngStream,
    n_replicas: int,
    want_sup: bool,
    checkpoints: tuple[int, ...] | None = None,
    chunk_span: tuple[int, int] | None = None,
):
    """Norm exponents per replica, in fixed blocks of CHUNK replicas.

    Block c draws from ``stream.substream(c)``; the block split is part of
    the stream layout, so results do not depend on how blocks are assigned
    to workers.  ``chunk_span`` restricts the computation to blocks
    [a, b) of the full plan for ``n_replicas`` (for worker pools).
    Returns sup exponents, final exponents, or a matrix of exponents at
    the requested step checkpoints.
    """
    n = params.step_count(T)
    n_checks = len(checkpoints) if checkpoints else 0
    lo, hi = chunk_span if chunk_span is not None else (0, chunk_count(n_replicas))
    span_rows = min(hi * CHUNK, n_replicas) - lo * CHUNK
    if n == 0:
        shape = (max(span_rows, 0), n_checks) if checkpoints else max(span_rows, 0)
        return np.full(shape, ZERO_EXP, dtype=np.int64)
    if checkpoints:
        if list(checkpoints) != sorted(checkpoints):
            raise ValueError("checkpoints must be ascending step indices")
        if checkpoints[0] < 1 or checkpoints[-1] > n:
            raise ValueError("checkpoints must be step indices in 1..n")
    outs = []
    for c in range(lo, hi):
        rows = min(CHUNK, n_replicas - c * CHUNK)
        if rows <= 0:
            break
        gen = stream.substream(c).generator
        ks, payloads = _sample_jump_batch(params, rows * n, gen)
        if (
            params.prime == 2
            and payloads.dtype != object
            and int(ks.max()) <= 62
            and not (want_sup and checkpoints)
        ):
            outs.append(_exponents_vectorized_p2(ks, payloads, rows, n, want_sup, checkpoints))
        else:
            outs.append(
                _fold_exponents_generic(params.prime, ks, payloads, rows, n, want_sup, checkpoints)
            )
    return np.concatenate(outs, axis=0)


def walk_sup_exponents(
    params: WalkParams,
    T: float,
    stream: RngStream,
    n_replicas: int,
    chunk_span: tuple[int, int] | None = None,
) -> np.ndarray:
    """Per replica: max exponent of |S_j|_p over steps j <= step_count(T).

    ZERO_EXP marks a path whose every cumulative sum is zero.  The scaled
    sup norm has exponent ``value - m`` and the component norm divides by
    one more power of p.
    """
    return _walk_exponents(params, T, stream, n_replicas, want_sup=True, chunk_span=chunk_span)


def walk_final_exponents(
    params: WalkParams,
    T: float,
    stream: RngStream,
    n_replicas: int,
    checkpoints: tuple[int, ...] | None = None,
    chunk_span: tuple[int, int] | None = None,
) -> np.ndarray:
    """Per replica: exponent of |S_n|_p at the horizon or at given steps."""
    return _walk_exponents(
        params, T, stream, n_replicas, want_sup=False, checkpoints=checkpoints, chunk_span=chunk_span
    )
