"""Experiment configuration: a line-based "key = value" format.

Lines are UTF-8 ``key = value`` with ``#`` comments and blank lines
allowed.  List values are comma separated, sigma entries are ``p:value``,
the tail is ``a,s`` and k_range is ``lo,hi``.  Unknown keys are errors;
every parse or validation error names the key and line.

Recognized keys (defaults in parentheses):

    experiment   one of jump-law, survival, marginal, moments, adelic,
                 tightness, oracle (may instead come from the CLI)
    p            prime for single-prime experiments (2)
    b            diffusion exponent (1.0)
    sigma        explicit diffusion coefficients, "2:1.0,3:0.5" ({p: 1.0})
    tail         power-law tail "a,s" meaning sigma_p = a * p**-s (none)
    m            scale indices, "1,2,3" (3)
    T            time horizon (1.0)
    lambda       norm thresholds, "1,2,4" (1.0)
    delta        modulus sparsity grid, decreasing for tightness (0.4,0.2,0.1)
    k_range      radii exponent window "lo,hi" (-10,10)
    r            moment order, must lie in (0, b) for moments (0.5)
    t_grid       times for the moment fit (2**-6 .. 1, geometric)
    n_samples    Monte Carlo replicas (100000)
    seed         RNG seed (0)
    workers      worker processes (1)
    out_dir      output directory (".")
    series_tol   radial series truncation tolerance (1e-9)
    alpha        significance level for bands and CIs (1e-3)
    epsilon      adelic truncation probability budget (1e-3)
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from adelic_walks.oracles import SeriesTolerance, SigmaSpec
from adelic_walks.padic import is_prime

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "EXPERIMENTS"]

EXPERIMENTS = ("jump-law", "survival", "marginal", "moments", "adelic", "tightness", "oracle")


class ConfigError(ValueError):
    """A malformed or invalid experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str = ""
    p: int = 2
    b: float = 1.0
    sigma: tuple[tuple[int, float], ...] | None = None
    tail: tuple[float, float] | None = None
    m_list: tuple[int, ...] = (3,)
    T: float = 1.0
    lambdas: tuple[float, ...] = (1.0,)
    deltas: tuple[float, ...] = (0.4, 0.2, 0.1)
    k_range: tuple[int, int] = (-10, 10)
    r: float = 0.5
    t_grid: tuple[float, ...] = tuple(2.0**e for e in range(-6, 1))
    n_samples: int = 100000
    seed: int = 0
    workers: int = 1
    out_dir: str = "."
    series_tol: float = 1e-9
    alpha: float = 1e-3
    epsilon: float = 1e-3
    explicit_keys: frozenset[str] = field(default_factory=frozenset, compare=False)

    def validate(self) -> "ExperimentConfig":
        if self.experiment and self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if not is_prime(self.p):
            raise ConfigError(f"p = {self.p} is not prime")
        if not self.b > 0:
            raise ConfigError("b must be positive")
        if self.n_samples < 1:
            raise ConfigError("n_samples must be at least 1")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.T < 0:
            raise ConfigError("T must be nonnegative")
        if any(m < 0 for m in self.m_list):
            raise ConfigError("m values must be nonnegative")
        if any(lam <= 0 for lam in self.lambdas):
            raise ConfigError("lambda values must be positive")
        if any(not 0 < d < self.T for d in self.deltas) and self.T > 0:
            raise ConfigError("delta values must be positive and smaller than T")
        if self.k_range[0] > self.k_range[1]:
            raise ConfigError("k_range must be lo,hi with lo <= hi")
        if self.experiment == "moments" or "r" in self.explicit_keys:
            if not 0 < self.r < self.b:
                raise ConfigError("r must lie in (0, b)")
        if any(t < 0 for t in self.t_grid):
            raise ConfigError("t_grid times must be nonnegative")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie in (0, 1)")
        if not 0 < self.epsilon < 1:
            raise ConfigError("epsilon must lie in (0, 1)")
        # these constructors enforce their own invariants
        self.sigma_spec()
        self.series_tolerance()
        return self

    def sigma_spec(self) -> SigmaSpec:
        if self.sigma is None and self.tail is None:
            explicit = {self.p: 1.0}
        else:
            explicit = dict(self.sigma) if self.sigma is not None else {}
        try:
            return SigmaSpec.from_mapping(explicit, self.tail)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sigma_p(self) -> float:
        return self.sigma_spec().value(self.p)

    def series_tolerance(self) -> SeriesTolerance:
        try:
            return SeriesTolerance(self.series_tol)
        except ValueError as exc:
            raise ConfigError(f"series_tol: {exc}") from exc


def _parse_int(raw: str) -> int:
    return int(raw.strip())


def _parse_float(raw: str) -> float:
    return float(raw.strip())


def _parse_floats(raw: str) -> tuple[float, ...]:
    return tuple(float(x) for x in raw.split(","))


def _parse_ints(raw: str) -> tuple[int, ...]:
    return tuple(int(x) for x in raw.split(","))


def _parse_sigma(raw: str) -> tuple[tuple[int, float], ...]:
    entries = {}
    for item in raw.split(","):
        p_txt, sep, v_txt = item.partition(":")
        if not sep:
            raise ValueError(f"sigma entry {item.strip()!r} is not 'p:value'")
        entries[int(p_txt)] = float(v_txt)
    return tuple(sorted(entries.items()))


def _parse_tail(raw: str) -> tuple[float, float]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise ValueError("tail must be 'a,s'")
    return float(parts[0]), float(parts[1])


def _parse_k_range(raw: str) -> tuple[int, int]:
    parts = raw.split(",")
    if len(parts) != 2:
        raise ValueError("k_range must be 'lo,hi'")
    return int(parts[0]), int(parts[1])


_PARSERS = {
    "experiment": lambda raw: raw.strip(),
    "p": _parse_int,
    "b": _parse_float,
    "sigma": _parse_sigma,
    "tail": _parse_tail,
    "m": _parse_ints,
    "T": _parse_float,
    "lambda": _parse_floats,
    "delta": _parse_floats,
    "k_range": _parse_k_range,
    "r": _parse_float,
    "t_grid": _parse_floats,
    "n_samples": _parse_int,
    "seed": _parse_int,
    "workers": _parse_int,
    "out_dir": lambda raw: raw.strip(),
    "series_tol": _parse_float,
    "alpha": _parse_float,
    "epsilon": _parse_float,
}

_FIELD_OF_KEY = {
    "m": "m_list",
    "lambda": "lambdas",
    "delta": "deltas",
}


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate config text; unknown keys and bad values raise
    :class:`ConfigError` naming the key and line."""
    updates: dict[str, object] = {}
    seen: set[str] = set()
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, raw_value = line.partition("=")
        key = key.strip()
        if not eq:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw_line.strip()!r}")
        if key not in _PARSERS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        try:
            value = _PARSERS[key](raw_value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from exc
        updates[_FIELD_OF_KEY.get(key, key)] = value
    config = replace(ExperimentConfig(), **updates, explicit_keys=frozenset(seen))
    try:
        return config.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
