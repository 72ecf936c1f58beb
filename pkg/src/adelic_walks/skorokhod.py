"""Oscillation and the modified modulus of continuity on step paths.

The modulus functional is the infimum, over partitions of [0, T) whose
intervals all exceed delta except possibly the last, of the largest
interval oscillation.  For a step path the attained-value sets only change
when a partition endpoint crosses a jump time, so the infimum over a
candidate grid of {0, T}, the jump times, and each jump time pushed
forward by delta*(1 + 2**-20) is computed by dynamic programming; a
brute-force enumeration over the same grid is kept as the test oracle.

Interval oscillations use half-open intervals [t_{i-1}, t_i).  All the
norms involved are ultrametric, so the diameter of a value set equals the
largest distance from any one of its points; oscillation over an interval
is a single cumulative max per left endpoint.

Distances between lattice values never go through subtraction: the p-adic
distance of two digit expansions is ``p**(-k)`` for the smallest index k
where the digit maps differ.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from adelic_walks.padic import QpDigits, qp_abs
from adelic_walks.walks import ZERO_EXP, AdelicPath, SinglePrimePath

__all__ = [
    "Norm",
    "Partition",
    "LatticeSteps",
    "oscillation",
    "modified_modulus",
    "brute_force_modulus",
    "adelic_modulus",
    "adelic_modulus_profile",
    "path_sup_norm",
]

BRUTE_FORCE_MAX_JUMPS = 12
_GRID_NUDGE = 1.0 + 2.0**-20


class Norm(Enum):
    """Which absolute value distances are measured in."""

    P_ADIC = "p-adic"          # |.|_p
    COMPONENT = "component"    # |.|_p / p, the restriction of the adelic norm
    ADELIC = "adelic"          # max_p |.|_p / p


@dataclass(frozen=True)
class Partition:
    """A partition 0 = t_0 < ... < t_v = T, essentially delta-sparse:
    every interval except the final one is longer than delta."""

    times: tuple[float, ...]
    delta: float

    def __post_init__(self) -> None:
        ts = self.times
        if len(ts) < 2 or ts[0] != 0.0:
            raise ValueError("partition must start at 0 and contain at least [0, T]")
        if any(b <= a for a, b in zip(ts, ts[1:])):
            raise ValueError("partition times must be strictly increasing")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        for a, b in zip(ts[:-2], ts[1:-1]):
            if b - a <= self.delta:
                raise ValueError(f"interval [{a}, {b}] is not longer than delta={self.delta}")


@dataclass(frozen=True)
class LatticeSteps:
    """A hand-built cadlag step function with lattice values.

    ``values[i]`` holds on ``[times[i-1], times[i])`` with ``times[-1]``
    read as 0; ``shift`` scales every value by p**shift, as the walk paths
    do.  Used for synthetic modulus tests with arbitrary jump times.
    """

    prime: int
    times: tuple[float, ...]
    values: tuple[QpDigits, ...]
    shift: int = 0

    def __post_init__(self) -> None:
        if len(self.values) != len(self.times) + 1:
            raise ValueError("need exactly one more value than jump times")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("jump times must be strictly increasing")
        if any(v.prime != self.prime for v in self.values):
            raise ValueError("all values must share the path's prime")


def _first_diff_exponent(x: QpDigits, y: QpDigits) -> int | None:
    """Smallest index where the digit maps differ; None when equal."""
    a, b = x.digits, y.digits
    i = j = 0
    while i < len(a) and j < len(b):
        ka, da = a[i]
        kb, db = b[j]
        if ka < kb:
            return ka
        if kb < ka:
            return kb
        if da != db:
            return ka
        i += 1
        j += 1
    if i < len(a):
        return a[i][0]
    if j < len(b):
        return b[j][0]
    return None


def _norm_drop(norm: Norm) -> int:
    # extra power of p divided out relative to the plain p-adic norm
    return 0 if norm is Norm.P_ADIC else 1


def _pair_distances(p: int, values: list[QpDigits], shift: int, drop: int) -> np.ndarray:
    """Matrix of |p**shift * (v_i - v_j)|_p / p**drop as floats."""
    nv = len(values)
    out = np.zeros((nv, nv))
    for i in range(nv):
        for j in range(i + 1, nv):
            k = _first_diff_exponent(values[i], values[j])
            if k is not None:
                out[i, j] = out[j, i] = float(p) ** (-(k + shift) - drop)
    return out


@dataclass(frozen=True)
class _Track:
    """Normalized step function: jump times in (0, T) plus the pairwise
    distance matrix of the values between them."""

    times: np.ndarray   # shape (E,)
    dvals: np.ndarray   # shape (E+1, E+1)
    horizon: float


def _single_prime_track(path: SinglePrimePath, T: float, norm: Norm) -> _Track:
    if norm is Norm.ADELIC:
        raise ValueError("a single-prime path has no adelic max norm")
    params = path.params
    n = min(params.step_count(T), len(path.jumps))
    rate = params.step_rate()
    times = [j / rate for j in range(1, n + 1)]
    while times and times[-1] >= T:
        times.pop()
    values = [QpDigits.zero(params.prime)] + [path.jumps[j][1] for j in range(len(times))]
    dvals = _pair_distances(params.prime, values, params.m, _norm_drop(norm))
    return _Track(np.asarray(times), dvals, T)


def _lattice_steps_track(steps: LatticeSteps, T: float, norm: Norm) -> _Track:
    if norm is Norm.ADELIC:
        raise ValueError("a single-prime step function has no adelic max norm")
    keep = [i for i, t in enumerate(steps.times) if t < T]
    times = [steps.times[i] for i in keep]
    values = list(steps.values[: len(times) + 1])
    dvals = _pair_distances(steps.prime, values, steps.shift, _norm_drop(norm))
    return _Track(np.asarray(times), dvals, T)


def _adelic_track(path: AdelicPath, T: float, norm: Norm) -> _Track:
    if norm is not Norm.ADELIC:
        raise ValueError("an adelic path is measured in the adelic max norm")
    comp_tracks = []
    merged: set[float] = set()
    for p, comp in path.components:
        tr = _single_prime_track(comp, T, Norm.COMPONENT)
        comp_tracks.append(tr)
        merged.update(tr.times.tolist())
    times = np.asarray(sorted(merged))
    ne = times.size
    if not comp_tracks:
        return _Track(times, np.zeros((1, 1)), T)
    # merged value i is the state just after the first i merged events
    lefts = np.concatenate(([0.0], times))
    dvals = np.zeros((ne + 1, ne + 1))
    for tr in comp_tracks:
        idx = np.searchsorted(tr.times, lefts, side="right")
        np.maximum(dvals, tr.dvals[np.ix_(idx, idx)], out=dvals)
    return _Track(times, dvals, T)


def _as_track(path, T: float, norm: Norm | None) -> _Track:
    if isinstance(path, SinglePrimePath):
        return _single_prime_track(path, T, norm or Norm.COMPONENT)
    if isinstance(path, LatticeSteps):
        return _lattice_steps_track(path, T, norm or Norm.COMPONENT)
    if isinstance(path, AdelicPath):
        return _adelic_track(path, T, norm or Norm.ADELIC)
    raise TypeError(f"not a step path: {type(path).__name__}")


def _candidate_grid(track: _Track, delta: float) -> np.ndarray:
    T = track.horizon
    pts = {0.0, T}
    off = delta * _GRID_NUDGE
    for t in track.times.tolist():
        pts.add(t)
        s = t + off
        if s < T:
            pts.add(s)
    return np.asarray(sorted(pts))


def _osc_cum(track: _Track, grid: np.ndarray) -> np.ndarray:
    """osc_cum[j, l]: oscillation over grid segments j..l (ultrametric
    diameter = cumulative max of distances from the first value)."""
    seg_val = np.searchsorted(track.times, grid[:-1], side="right")
    dm = track.dvals[np.ix_(seg_val, seg_val)]
    ns = dm.shape[0]
    if ns:
        dm[np.tril_indices(ns, k=-1)] = -np.inf
    return np.maximum.accumulate(dm, axis=1)


def _check_modulus_args(delta: float, T: float) -> None:
    if not 0 < delta < T:
        raise ValueError(f"need 0 < delta < T, got delta={delta}, T={T}")


def _dp_modulus(track: _Track, delta: float) -> float:
    grid = _candidate_grid(track, delta)
    osc = _osc_cum(track, grid)
    nv = grid.size
    f = np.full(nv, math.inf)
    f[0] = 0.0
    for i in range(1, nv):
        cand = np.maximum(f[:i], osc[:i, i - 1])
        if i == nv - 1:
            return float(cand.min())  # final interval is exempt from sparsity
        allowed = grid[i] - grid[:i] > delta
        if allowed.any():
            f[i] = cand[allowed].min()
    return 0.0  # nv == 1 cannot happen (grid always holds 0 and T)


def _brute_modulus(track: _Track, delta: float) -> float:
    grid = _candidate_grid(track, delta)
    osc = _osc_cum(track, grid)
    nv = grid.size
    best = math.inf

    def descend(j: int, cur: float) -> None:
        nonlocal best
        for i in range(j + 1, nv):
            w = max(cur, osc[j, i - 1])
            if w >= best:
                break  # osc grows with i: everything further is no better
            if i == nv - 1:
                best = w
            elif grid[i] - grid[j] > delta:
                descend(i, w)

    descend(0, 0.0)
    return best


def modified_modulus(path, delta: float, T: float, norm: Norm | None = None) -> float:
    """Infimum over essentially delta-sparse partitions of [0, T) of the
    largest half-open interval oscillation, on the candidate endpoint grid.
    """
    _check_modulus_args(delta, T)
    return _dp_modulus(_as_track(path, T, norm), delta)


def brute_force_modulus(path, delta: float, T: float, norm: Norm | None = None) -> float:
    """Exhaustive minimization over the same candidate grid; the oracle for
    :func:`modified_modulus`, restricted to small paths."""
    _check_modulus_args(delta, T)
    track = _as_track(path, T, norm)
    if track.times.size > BRUTE_FORCE_MAX_JUMPS:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_MAX_JUMPS} jumps")
    return _brute_modulus(track, delta)


def adelic_modulus(path: AdelicPath, delta: float, T: float) -> float:
    """Modulus of an adelic path: component jump times merge into one event
    sequence and interval oscillations take the max over components of the
    component oscillation divided by its prime, all under one shared
    partition (not the max of per-component moduli)."""
    _check_modulus_args(delta, T)
    return _dp_modulus(_adelic_track(path, T, Norm.ADELIC), delta)


def adelic_modulus_profile(path: AdelicPath, deltas, T: float) -> list[float]:
    """:func:`adelic_modulus` across a delta grid, preparing the merged
    event sequence only once."""
    track = _adelic_track(path, T, Norm.ADELIC)
    out = []
    for delta in deltas:
        _check_modulus_args(delta, T)
        out.append(_dp_modulus(track, delta))
    return out


def _attained_indices(times: np.ndarray, s: float, t: float) -> list[int]:
    """Value indices attained on [s, t) for a step function with the given
    jump times: the value at s plus every jump inside (s, t)."""
    if t <= s:
        return []
    first = int(np.searchsorted(times, s, side="right"))
    last = int(np.searchsorted(times, t, side="left"))
    return list(range(first, last + 1))


def oscillation(path, interval: tuple[float, float], norm: Norm | None = None) -> float:
    """Largest pairwise distance among the values attained on [s, t)."""
    s, t = interval
    if t <= s:
        return 0.0
    if isinstance(path, (SinglePrimePath, AdelicPath)) and not (0 <= s and t <= path.horizon):
        raise ValueError(f"interval [{s}, {t}) outside [0, {path.horizon}]")
    if s < 0:
        raise ValueError("interval must start at or after 0")
    if isinstance(path, AdelicPath):
        # suprema exchange: the adelic oscillation over a fixed interval is
        # the max over components of the component oscillation
        return max(
            (oscillation(comp, interval, Norm.COMPONENT) for _, comp in path.components),
            default=0.0,
        )
    if isinstance(path, SinglePrimePath):
        track = _single_prime_track(path, path.horizon, norm or Norm.COMPONENT)
    elif isinstance(path, LatticeSteps):
        track = _lattice_steps_track(path, t, norm or Norm.COMPONENT)
    else:
        raise TypeError(f"not a step path: {type(path).__name__}")
    idx = _attained_indices(track.times, s, t)
    if len(idx) < 2:
        return 0.0
    return float(track.dvals[np.ix_(idx, idx)].max())


def path_sup_norm(path, T: float, norm: Norm | None = None) -> float:
    """Max norm over the initial value and every jump value up to T."""
    if isinstance(path, AdelicPath):
        if norm not in (None, Norm.ADELIC):
            raise ValueError("an adelic path is measured in the adelic max norm")
        return max(
            (path_sup_norm(comp, T, Norm.COMPONENT) for _, comp in path.components),
            default=0.0,
        )
    if isinstance(path, SinglePrimePath):
        norm = norm or Norm.COMPONENT
        if norm is Norm.ADELIC:
            raise ValueError("a single-prime path has no adelic max norm")
        n = min(path.params.step_count(T), len(path.jumps))
        best = max(path.norm_exponents[:n], default=ZERO_EXP)
        if best == ZERO_EXP:
            return 0.0
        p = path.params.prime
        return float(p) ** (best - path.params.m - _norm_drop(norm))
    if isinstance(path, LatticeSteps):
        norm = norm or Norm.COMPONENT
        if norm is Norm.ADELIC:
            raise ValueError("a single-prime step function has no adelic max norm")
        keep = len([t for t in path.times if t <= T])
        best = 0.0
        for v in path.values[: keep + 1]:
            e = qp_abs(v).exponent
            if e is not None:
                best = max(best, float(path.prime) ** (e - path.shift - _norm_drop(norm)))
        return best
    raise TypeError(f"not a step path: {type(path).__name__}")
