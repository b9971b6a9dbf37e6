"""Channel-equalization experiment: source, ISI channel, equalizer loop, MSE.

A run draws i.i.d. symbols from a 16-level PAM alphabet, passes them through
an FIR channel, adds white Gaussian noise and trains an equalizer against the
transmitted symbol delayed to the reference tap. The ensemble MSE curve is
the per-symbol mean of ``e(n)**2`` over independent runs.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .filters import AlgorithmKind, CordicBackend, Mode, TrigBackend, init_state, step

N_LEVELS = 16
# Mean square of {±1, ±3, ..., ±15}.
_ODD_MEAN_SQUARE = 85.0

REFERENCE_FACTORS = (2.0, -0.5, 1.1, -0.6)
REFERENCE_NOISE_VARIANCE = 0.077
REFERENCE_POWER_DB = 10.0

_SYMBOL_STREAM = 0
_NOISE_STREAM = 1
_CHUNK = 256


@dataclass(frozen=True)
class SourceSpec:
    levels: tuple[float, ...]
    spacing: float
    power_db: float


@dataclass(frozen=True)
class ChannelSpec:
    taps: tuple[float, ...]
    noise_variance: float

    def __post_init__(self):
        if self.noise_variance < 0:
            raise ValueError("noise variance must be non-negative")
        if not self.taps:
            raise ValueError("channel needs at least one tap")


def make_source(power_db: float = REFERENCE_POWER_DB) -> SourceSpec:
    """16 equispaced levels ``±(2k-1)*spacing`` with mean power ``10**(power_db/10)``."""
    if not math.isfinite(power_db):
        raise ValueError("power_db must be finite")
    spacing = math.sqrt(10.0 ** (power_db / 10.0) / _ODD_MEAN_SQUARE)
    levels = tuple(spacing * k for k in range(-(N_LEVELS - 1), N_LEVELS, 2))
    return SourceSpec(levels, spacing, float(power_db))


def gen_symbols(spec: SourceSpec, n: int, seed) -> np.ndarray:
    """``n`` equiprobable i.i.d. symbols; the same seed gives the same sequence."""
    if n < 1:
        raise ValueError("need at least one symbol")
    rng = np.random.default_rng(seed)
    return np.asarray(spec.levels)[rng.integers(0, len(spec.levels), size=n)]


def channel_taps_from_factors(factors: Sequence[float]) -> list[float]:
    """Coefficients of ``prod(1 + c z^-1)`` in ascending delay order."""
    taps = np.array([1.0])
    for c in factors:
        taps = np.convolve(taps, [1.0, float(c)])
    return taps.tolist()


def reference_channel(noise_variance: float = REFERENCE_NOISE_VARIANCE) -> ChannelSpec:
    return ChannelSpec(tuple(channel_taps_from_factors(REFERENCE_FACTORS)), noise_variance)


def channel_output(taps, symbols, noise_variance: float, seed) -> np.ndarray:
    """FIR-filter ``symbols`` (zero history) and add N(0, noise_variance) noise."""
    if noise_variance < 0:
        raise ValueError("noise variance must be non-negative")
    a = np.asarray(symbols, dtype=float)
    if a.size == 0:
        raise ValueError("symbol sequence is empty")
    r = np.convolve(a, np.asarray(taps, dtype=float))[: a.size]
    if noise_variance > 0:
        r = r + np.random.default_rng(seed).normal(0.0, math.sqrt(noise_variance), a.size)
    return r


@dataclass(frozen=True)
class ExperimentConfig:
    source: SourceSpec = field(default_factory=make_source)
    channel: ChannelSpec = field(default_factory=reference_channel)
    kind: AlgorithmKind = AlgorithmKind.TLMS
    backend: TrigBackend = field(default_factory=CordicBackend)
    N: int = 15
    center: int = 8
    mu: float = 0.0004
    n_symbols: int = 5000
    n_runs: int = 200
    training_len: int | None = None
    base_seed: int = 0
    smoothing_window: int = 100

    def __post_init__(self):
        object.__setattr__(self, "kind", AlgorithmKind(self.kind))
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if not 1 <= self.center <= self.N:
            raise ValueError(f"center must lie in [1, N={self.N}], got {self.center}")
        if self.n_runs < 1:
            raise ValueError("n_runs must be >= 1")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be >= 1")
        if not (self.mu > 0 and math.isfinite(self.mu)):
            raise ValueError("mu must be positive")
        if self.training_len is not None and self.training_len < 0:
            raise ValueError("training_len must be >= 0")
        if self.base_seed < 0:
            raise ValueError("base_seed must be >= 0")
        if self.smoothing_window < 1:
            raise ValueError("smoothing_window must be >= 1")

    @property
    def delay(self) -> int:
        """Training delay between transmitted and desired symbol."""
        return self.center - 1

    @property
    def train_symbols(self) -> int:
        return self.n_symbols if self.training_len is None else min(self.training_len, self.n_symbols)

    def with_(self, **changes) -> "ExperimentConfig":
        return replace(self, **changes)


def run_streams(config: ExperimentConfig, run_seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Transmitted symbols and received samples of one run.

    The symbol and noise generators are seeded independently from
    ``run_seed``, so the symbol stream does not depend on the noise.
    """
    a = gen_symbols(config.source, config.n_symbols, [run_seed, _SYMBOL_STREAM])
    r = channel_output(config.channel.taps, a, config.channel.noise_variance, [run_seed, _NOISE_STREAM])
    return a, r


def _simulate(config: ExperimentConfig, seeds: Sequence[int]) -> np.ndarray:
    streams = [run_streams(config, s) for s in seeds]
    a = np.stack([s[0] for s in streams])
    r = np.stack([s[1] for s in streams])
    n_runs, n_sym = a.shape
    delay = config.delay
    state = init_state(config.kind, config.N, config.mu, config.backend, batch=n_runs, alphabet=config.source.levels)
    e2 = np.empty((n_runs, n_sym))
    zero = np.zeros(n_runs)
    train = config.train_symbols
    for n in range(n_sym):
        if n == train:
            state.mode = Mode.DECISION
        d = a[:, n - delay] if n >= delay else zero
        res = step(state, r[:, n], d if n < train else None)
        e2[:, n] = res.e * res.e
    return e2


def run_single(config: ExperimentConfig, run_seed: int) -> np.ndarray:
    """Per-symbol squared error ``e(n)**2`` of one run."""
    return _simulate(config, [run_seed])[0]


def run_ensemble_raw(config: ExperimentConfig) -> np.ndarray:
    """Squared-error matrix of shape ``(n_runs, n_symbols)``; row ``i`` uses seed ``base_seed + i``."""
    seeds = [config.base_seed + i for i in range(config.n_runs)]
    return np.concatenate([_simulate(config, seeds[i : i + _CHUNK]) for i in range(0, len(seeds), _CHUNK)])


def ensemble_mean(e2: np.ndarray) -> np.ndarray:
    # fsum is exactly rounded, so the mean does not depend on run order.
    e2 = np.asarray(e2, dtype=float)
    return np.array([math.fsum(col) for col in e2.T]) / e2.shape[0]


def smooth(values, window: int) -> np.ndarray:
    """Trailing moving average; the first ``window-1`` points average what is available."""
    v = np.asarray(values, dtype=float)
    if window < 1:
        raise ValueError("window must be >= 1")
    c = np.concatenate([[0.0], np.cumsum(v)])
    n = np.arange(v.size)
    start = np.maximum(0, n - window + 1)
    return (c[n + 1] - c[start]) / (n + 1 - start)


def to_db(values):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(values)


@dataclass
class MseCurve:
    mse: np.ndarray
    smoothing_window: int = 100
    label: str = ""

    def __post_init__(self):
        self.mse = np.asarray(self.mse, dtype=float)

    def __len__(self):
        return self.mse.size

    @property
    def mse_db(self) -> np.ndarray:
        return to_db(self.mse)

    @property
    def smoothed(self) -> np.ndarray:
        return smooth(self.mse, self.smoothing_window)

    def band(self, start: int, stop: int) -> float:
        """Mean ensemble MSE over symbols ``start..stop`` inclusive."""
        if not 0 <= start <= stop < self.mse.size:
            raise IndexError(f"band [{start}, {stop}] outside curve of length {self.mse.size}")
        return math.fsum(self.mse[start : stop + 1]) / (stop - start + 1)

    def summary(self) -> dict:
        """Initial/final smoothed MSE and the first symbol 10 dB below the start.

        The initial value is the first full smoothing window, the final value
        the last one.
        """
        s = self.smoothed
        w = min(self.smoothing_window, s.size)
        initial, final = float(s[w - 1]), float(s[-1])
        below = np.nonzero(s[w - 1 :] <= initial / 10.0)[0]
        return {
            "initial_db": float(to_db(initial)),
            "final_db": float(to_db(final)),
            "drop_10db_at": int(below[0] + w - 1) if below.size else None,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["n", "mse", "mse_db"])
        for n, (m, db) in enumerate(zip(self.mse.tolist(), self.mse_db.tolist())):
            writer.writerow([n, repr(m), repr(db)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, smoothing_window: int = 100) -> "MseCurve":
        rows = list(csv.DictReader(io.StringIO(text)))
        return cls(np.array([float(r["mse"]) for r in rows]), smoothing_window)


def run_ensemble(config: ExperimentConfig) -> MseCurve:
    return MseCurve(ensemble_mean(run_ensemble_raw(config)), config.smoothing_window)


def runs_to_csv(e2: np.ndarray) -> str:
    """Per-run squared errors, header ``n,run_0,...``, for debugging."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["n"] + [f"run_{i}" for i in range(e2.shape[0])])
    for n, col in enumerate(np.asarray(e2).T.tolist()):
        writer.writerow([n] + [repr(v) for v in col])
    return buf.getvalue()

