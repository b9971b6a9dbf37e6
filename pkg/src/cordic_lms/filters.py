"""Transversal equalizers with trigonometric and hyperbolic weight maps.

Tap ``k`` carries an angle ``theta_k`` rather than a weight:

* TLMS: ``w_k = sin(theta_k)``, update ``theta_k += mu * e * cos(theta_k) * x(n-k)``
* HLMS: ``w_k = sinh(theta_k)``, update ``theta_k += mu * e * cosh(theta_k) * x(n-k)``
* LMS:  ``w_k = theta_k``, update ``theta_k += mu * e * x(n-k)`` (baseline)

The sin/cos (or sinh/cosh) pair of a tap comes from one evaluation of the
state's :class:`TrigBackend`, either an exact floating-point reference or a
step-by-step fixed-point CORDIC rotation, and is shared between the output
and the update of the same symbol.

States may carry leading batch dimensions (``thetas`` of shape ``(..., N)``);
every operation is elementwise over the batch, so a batch of independent runs
evolves bit-identically to the same runs stepped one at a time.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cordic import CordicMode, _rotate_unit, build_angle_table
from .fixed import DEFAULT_FRAC_BITS, DEFAULT_WORD_BITS

# Keeps cos(theta) strictly positive at the TLMS boundary.
TLMS_MARGIN = 2.0**-20
TLMS_LIMIT = math.pi / 2 - TLMS_MARGIN


class AlgorithmKind(str, enum.Enum):
    TLMS = "tlms"
    HLMS = "hlms"
    LMS = "lms"


class Mode(str, enum.Enum):
    TRAINING = "training"
    DECISION = "decision"


class ExactBackend:
    """Reference trigonometry from numpy in double precision."""

    name = "exact"

    def pair(self, kind: AlgorithmKind, thetas):
        if kind is AlgorithmKind.TLMS:
            return np.sin(thetas), np.cos(thetas)
        return np.sinh(thetas), np.cosh(thetas)

    def hyperbolic_limit(self) -> float:
        # Same saturation as the default 32-stage CORDIC, so both backends
        # clamp identically.
        return float(build_angle_table(CordicMode.HYPERBOLIC, 32).domain)

    def __eq__(self, other):
        return isinstance(other, ExactBackend)

    def __hash__(self):
        return hash(self.name)

    def __repr__(self):
        return "ExactBackend()"


@dataclass(frozen=True)
class CordicBackend:
    """Fixed-point CORDIC with ``steps`` stages per evaluation."""

    steps: int = 32
    schedule: str = "standard"
    frac_bits: int = DEFAULT_FRAC_BITS
    word_bits: int = DEFAULT_WORD_BITS

    name = "cordic"

    def table(self, kind: AlgorithmKind):
        mode = CordicMode.CIRCULAR if kind is AlgorithmKind.TLMS else CordicMode.HYPERBOLIC
        return build_angle_table(mode, self.steps, self.schedule, self.frac_bits, self.word_bits)

    def pair(self, kind: AlgorithmKind, thetas):
        return _rotate_unit(thetas, self.table(kind))

    def hyperbolic_limit(self) -> float:
        return float(self.table(AlgorithmKind.HLMS).domain)


TrigBackend = ExactBackend | CordicBackend


@dataclass(frozen=True)
class StepResult:
    y: float | np.ndarray
    e: float | np.ndarray
    z_ref: float | np.ndarray


@dataclass
class EqualizerState:
    kind: AlgorithmKind
    mu: float
    backend: TrigBackend
    thetas: np.ndarray
    delay_line: np.ndarray
    mode: Mode = Mode.TRAINING
    alphabet: np.ndarray | None = None
    clamp_count: int = 0
    _pair: tuple | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.thetas.shape[-1]

    @property
    def theta_limit(self) -> float:
        if self.kind is AlgorithmKind.TLMS:
            return TLMS_LIMIT
        if self.kind is AlgorithmKind.HLMS:
            return self.backend.hyperbolic_limit()
        return math.inf

    def trig_pair(self):
        """``(weights, gradient factors)`` for the current angles, computed once."""
        if self._pair is None:
            if self.kind is AlgorithmKind.LMS:
                self._pair = (self.thetas.copy(), np.ones_like(self.thetas))
            else:
                self._pair = self.backend.pair(self.kind, self.thetas)
        return self._pair

    @property
    def weights(self) -> np.ndarray:
        return self.trig_pair()[0]


def init_state(kind, N: int, mu: float, backend: TrigBackend | None = None, *, batch: int | None = None, alphabet=None) -> EqualizerState:
    """Fresh equalizer with all angles (hence all weights) at zero.

    ``batch`` adds a leading dimension of independent equalizers sharing the
    same configuration. ``alphabet`` is the decision set used once the state
    is switched to decision-directed mode.
    """
    kind = AlgorithmKind(kind)
    if int(N) != N or N < 1:
        raise ValueError(f"tap count must be a positive integer, got {N}")
    if not (mu > 0 and math.isfinite(mu)):
        raise ValueError(f"step size must be positive and finite, got {mu}")
    backend = ExactBackend() if backend is None else backend
    shape = () if batch is None else (int(batch),)
    return EqualizerState(
        kind=kind,
        mu=float(mu),
        backend=backend,
        thetas=np.zeros(shape + (int(N),)),
        delay_line=np.zeros(shape + (int(N),)),
        alphabet=None if alphabet is None else np.asarray(alphabet, dtype=float),
    )


def weight(theta, kind, backend: TrigBackend | None = None):
    """Tap weight for angle ``theta`` under ``kind``."""
    kind = AlgorithmKind(kind)
    if kind is AlgorithmKind.LMS:
        return theta
    backend = ExactBackend() if backend is None else backend
    if kind is AlgorithmKind.TLMS:
        if np.any(np.abs(theta) >= math.pi / 2):
            raise ValueError("TLMS angle must lie in (-pi/2, pi/2)")
    elif np.any(np.abs(theta) > backend.hyperbolic_limit()):
        raise ValueError(f"HLMS angle outside |theta| <= {backend.hyperbolic_limit()}")
    w, _ = backend.pair(kind, theta)
    return float(w) if np.ndim(theta) == 0 else w


def _dot(x, w):
    # Fixed k-ascending accumulation; np.sum's pairwise order could differ
    # between batched and unbatched calls.
    acc = x[..., 0] * w[..., 0]
    for k in range(1, x.shape[-1]):
        acc = acc + x[..., k] * w[..., k]
    return acc


def filter_output(state: EqualizerState):
    """``y(n) = sum_k x(n-k) * w_k`` over the current delay line."""
    y = _dot(state.delay_line, state.weights)
    return float(y) if np.ndim(y) == 0 else y


def update_thetas(state: EqualizerState, e) -> EqualizerState:
    """Apply one angle update with error ``e`` and clamp to the domain."""
    e = np.asarray(e, dtype=float)
    if not np.all(np.isfinite(e)):
        raise ValueError("error signal must be finite")
    if not e.any():
        return state
    _, g = state.trig_pair()
    thetas = state.thetas + state.mu * e[..., None] * g * state.delay_line
    limit = state.theta_limit
    if math.isfinite(limit):
        over = np.abs(thetas) > limit
        if over.any():
            state.clamp_count += int(over.sum())
            thetas = np.clip(thetas, -limit, limit)
    state.thetas = thetas
    state._pair = None
    return state


def decide(y, alphabet: Sequence[float]):
    """Nearest alphabet level to ``y``; ties go to the lower level."""
    levels = np.asarray(alphabet, dtype=float)
    if levels.ndim != 1 or levels.size == 0:
        raise ValueError("alphabet must be a non-empty 1-D sequence")
    yv = np.asarray(y, dtype=float)
    if levels.size == 1:
        out = np.full(yv.shape, levels[0])
    else:
        idx = np.clip(np.searchsorted(levels, yv), 1, levels.size - 1)
        lo, hi = levels[idx - 1], levels[idx]
        out = np.where(np.abs(yv - lo) <= np.abs(hi - yv), lo, hi)
    return float(out) if out.ndim == 0 else out


def step(state: EqualizerState, x_new, d=None) -> StepResult:
    """Shift ``x_new`` in, filter, form the error and adapt."""
    if state.mode is Mode.TRAINING:
        if d is None:
            raise ValueError("training mode requires a desired symbol d")
    elif state.alphabet is None:
        raise ValueError("decision-directed mode requires an alphabet")
    dl = state.delay_line
    dl[..., 1:] = dl[..., :-1]
    dl[..., 0] = x_new
    y = filter_output(state)
    if state.mode is Mode.TRAINING:
        z_ref = np.broadcast_to(np.asarray(d, dtype=float), np.shape(y))
    else:
        z_ref = np.asarray(decide(y, state.alphabet))
    e = z_ref - y
    update_thetas(state, e)
    if np.ndim(e) == 0:
        return StepResult(float(y), float(e), float(z_ref))
    return StepResult(y, e, z_ref)


class TraceWriter:
    """Per-step CSV dump with header ``n,y,e,theta_0..theta_{N-1}``."""

    def __init__(self, fh, N: int):
        self._w = csv.writer(fh, lineterminator="\n")
        self._w.writerow(["n", "y", "e"] + [f"theta_{k}" for k in range(N)])

    def write(self, n: int, result: StepResult, state: EqualizerState):
        if state.thetas.ndim != 1:
            raise ValueError("trace dumps are per run; state must be unbatched")
        self._w.writerow([n, repr(float(result.y)), repr(float(result.e))] + [repr(float(t)) for t in state.thetas])
