"""Exchange-pulse dynamics for two coupled three-spin qubits.

Durations are in units of ``h/Jmax`` and couplings in units of ``Jmax``, so a
pulse of strength ``J`` and duration ``t`` accumulates the exchange angle
``theta = 2*pi*J*t`` in ``exp(-i*theta*S_i.S_j)``.

The intra-dot pairs ``a1a2`` and ``b1b2`` are always on at
``jmax_fraction_fixed`` (0.5 by default), including during waits.

Two composition modes are supported for steps with several pulses:

``sequential``
    the pulses of a step are applied one after another in listed order,
    each for its own duration (default).
``simultaneous``
    all pulses switch on together and each switches off after its own
    duration; the step lasts as long as its longest pulse.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterable, Sequence, Union

import numpy as np

from .spin import (
    DIM,
    Pair,
    PairLike,
    build_subspace_basis,
    canonical_pair,
    exchange_op,
    pair_name,
)

MODES = ("sequential", "simultaneous")
DEFAULT_MODE = "sequential"

FIXED_PAIRS: frozenset[Pair] = frozenset({("a1", "a2"), ("b1", "b2")})
_INTRA_TUNABLE = frozenset({("a1", "a3"), ("a2", "a3"), ("b1", "b3"), ("b2", "b3")})


@dataclass(frozen=True)
class Configuration:
    """Which exchange pairs can be pulsed and which are always on."""

    name: str
    tunable_pairs: frozenset
    fixed_pairs: frozenset = FIXED_PAIRS

    def is_tunable(self, pair: PairLike) -> bool:
        return canonical_pair(pair) in self.tunable_pairs

    def pair_names(self) -> list[str]:
        return sorted(pair_name(p) for p in self.tunable_pairs)


CONFIG_A = Configuration("A", _INTRA_TUNABLE | {("a3", "b1"), ("a3", "b2")})
CONFIG_B = Configuration("B", _INTRA_TUNABLE | {("a1", "b1"), ("a2", "b2")})


def all_controllable(base: Configuration | str) -> Configuration:
    """Toy model of ``base`` where the intra-dot pairs are tunable too and nothing is fixed."""
    base = get_configuration(base) if isinstance(base, str) else base
    return Configuration(f"{base.name}-free", base.tunable_pairs | base.fixed_pairs, frozenset())


def get_configuration(name: str) -> Configuration:
    table = {"A": CONFIG_A, "B": CONFIG_B}
    if name in table:
        return table[name]
    if name.endswith("-free") and name[:-5] in table:
        return all_controllable(table[name[:-5]])
    raise ValueError(f"unknown configuration {name!r}")


@dataclass(frozen=True)
class Pulse:
    pair: Pair
    duration: float
    strength: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "pair", canonical_pair(self.pair))
        if not np.isfinite(self.duration) or self.duration < 0:
            raise ValueError(f"pulse duration must be >= 0, got {self.duration}")
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"pulse strength must lie in [0, 1], got {self.strength}")

    @property
    def name(self) -> str:
        return pair_name(self.pair)


@dataclass(frozen=True)
class PulseStep:
    """Either a nonempty set of pulses or a wait of the given duration."""

    pulses: tuple = ()
    wait: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.wait is None:
            if not self.pulses:
                raise ValueError("a pulse step needs at least one pulse or a wait duration")
            pairs = [p.pair for p in self.pulses]
            if len(set(pairs)) != len(pairs):
                raise ValueError(f"pair repeated within one step: {[pair_name(p) for p in pairs]}")
        else:
            if self.pulses:
                raise ValueError("a wait step cannot also carry pulses")
            if not np.isfinite(self.wait) or self.wait < 0:
                raise ValueError(f"wait duration must be >= 0, got {self.wait}")

    @classmethod
    def of(cls, *pulses: Pulse | tuple) -> "PulseStep":
        return cls(tuple(p if isinstance(p, Pulse) else Pulse(*p) for p in pulses))

    @classmethod
    def waiting(cls, duration: float) -> "PulseStep":
        return cls(wait=float(duration))

    @property
    def is_wait(self) -> bool:
        return self.wait is not None

    def duration(self, mode: str = "simultaneous") -> float:
        """Wall time of the step: longest pulse, or the sum of pulses when sequential."""
        if self.is_wait:
            return float(self.wait)
        ds = [p.duration for p in self.pulses]
        return float(sum(ds) if mode == "sequential" else max(ds))

    def scaled(self, factor: float) -> "PulseStep":
        if self.is_wait:
            return PulseStep.waiting(self.wait * factor)
        return PulseStep(tuple(replace(p, duration=p.duration * factor) for p in self.pulses))


@dataclass(frozen=True)
class PulseSequence:
    configuration: Configuration
    steps: tuple = ()
    jmax_fraction_fixed: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if not 0.0 < self.jmax_fraction_fixed <= 1.0:
            raise ValueError(f"jmax_fraction_fixed must lie in (0, 1], got {self.jmax_fraction_fixed}")
        for k, step in enumerate(self.steps, start=1):
            for p in step.pulses:
                if p.pair not in self.configuration.tunable_pairs:
                    raise ValueError(
                        f"step {k}: pair {p.name} is not tunable in configuration {self.configuration.name}"
                    )

    def __add__(self, other: "PulseSequence") -> "PulseSequence":
        if other.configuration != self.configuration or other.jmax_fraction_fixed != self.jmax_fraction_fixed:
            raise ValueError("can only concatenate sequences with the same configuration")
        return replace(self, steps=self.steps + other.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def total_time(self, mode: str = "simultaneous") -> float:
        """Dimensionless gate time: the sum of step durations."""
        return float(sum(s.duration(mode) for s in self.steps))

    def scaled(self, factor: float) -> "PulseSequence":
        return replace(self, steps=tuple(s.scaled(factor) for s in self.steps))


@dataclass(frozen=True)
class TransformationMatrix:
    """A propagator restricted to one total-spin sector (``"S0"`` or ``"S1"``)."""

    sector: str
    entries: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)


# ---------------------------------------------------------------------------
# propagators
# ---------------------------------------------------------------------------


def exchange_propagator(pair: PairLike, theta: float) -> np.ndarray:
    """``exp(-i*theta*S_i.S_j)`` on the 64-dim space, from the pair's singlet/triplet projectors."""
    ss = exchange_op(pair)
    p_singlet = 0.25 * np.eye(DIM) - ss
    p_triplet = np.eye(DIM) - p_singlet
    return np.exp(-0.25j * theta) * p_triplet + np.exp(0.75j * theta) * p_singlet


def hermitian_expm(h: np.ndarray, duration: float) -> np.ndarray:
    """``exp(-2*pi*i*duration*h)`` for Hermitian ``h`` via eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-2j * np.pi * duration * w)) @ v.conj().T


# Each "space" is either the full 64-dim space or one sector basis. Exchange
# operators commute with total spin, so projecting onto a sector before
# exponentiating is exact.
_SPACES = ("full", "S0", "S1")


@lru_cache(maxsize=None)
def _space_exchange(space: str, pair: Pair) -> np.ndarray:
    op = exchange_op(pair)
    if space == "full":
        return op
    out = build_subspace_basis(space).project(op)
    out = 0.5 * (out + out.conj().T)
    out.setflags(write=False)
    return out


@lru_cache(maxsize=4096)
def _eig(space: str, terms: tuple) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of ``sum strength * S_i.S_j`` over ``terms``; cached by term set."""
    dim = DIM if space == "full" else build_subspace_basis(space).dim
    h = np.zeros((dim, dim), dtype=float if space == "full" else complex)
    for pair, strength in terms:
        h = h + strength * _space_exchange(space, pair)
    w, v = np.linalg.eigh(h)
    w.setflags(write=False)
    v.setflags(write=False)
    return w, v


def _segment(space: str, terms: Iterable, duration: float) -> np.ndarray:
    w, v = _eig(space, tuple(sorted(terms)))
    return (v * np.exp(-2j * np.pi * duration * w)) @ v.conj().T


def _background(config: Configuration, fraction: float) -> tuple:
    return tuple((p, float(fraction)) for p in sorted(config.fixed_pairs))


def _segments(step: PulseStep, mode: str) -> list[tuple[tuple, float]]:
    """Split a step into constant-Hamiltonian segments of (pulse terms, duration)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if step.is_wait:
        return [((), step.wait)]
    if mode == "sequential":
        return [(((p.pair, p.strength),), p.duration) for p in step.pulses]
    out = []
    t0 = 0.0
    for t in sorted({p.duration for p in step.pulses}):
        active = tuple((p.pair, p.strength) for p in step.pulses if p.duration >= t)
        if t > t0:
            out.append((active, t - t0))
        t0 = t
    return out


def _merge_terms(background: tuple, active: tuple) -> tuple:
    acc: dict = {}
    for pair, s in background + active:
        if s != 0.0:
            acc[pair] = acc.get(pair, 0.0) + s
    return tuple(acc.items())


def _step_in_space(step: PulseStep, config: Configuration, fraction: float, mode: str, space: str) -> np.ndarray:
    background = _background(config, fraction)
    dim = DIM if space == "full" else build_subspace_basis(space).dim
    u = np.eye(dim, dtype=complex)
    for active, dt in _segments(step, mode):
        if dt == 0.0:
            continue
        u = _segment(space, _merge_terms(background, active), dt) @ u
    return u


def step_propagator(
    step: PulseStep,
    config: Configuration,
    jmax_fraction_fixed: float = 0.5,
    mode: str = DEFAULT_MODE,
) -> np.ndarray:
    """64x64 propagator of one step including the always-on fixed pairs."""
    for p in step.pulses:
        if p.pair not in config.tunable_pairs:
            raise ValueError(f"pair {p.name} is not tunable in configuration {config.name}")
    return _step_in_space(step, config, jmax_fraction_fixed, mode, "full")


def _sequence_in_space(seq: PulseSequence, mode: str, space: str) -> np.ndarray:
    dim = DIM if space == "full" else build_subspace_basis(space).dim
    u = np.eye(dim, dtype=complex)
    for step in seq.steps:
        u = _step_in_space(step, seq.configuration, seq.jmax_fraction_fixed, mode, space) @ u
    return u


def full_propagator(seq: PulseSequence, mode: str = DEFAULT_MODE) -> np.ndarray:
    """Product of all step propagators on the 64-dim space (step 1 acts first)."""
    return _sequence_in_space(seq, mode, "full")


def sequence_propagator(
    seq: PulseSequence, mode: str = DEFAULT_MODE
) -> tuple[TransformationMatrix, TransformationMatrix]:
    """Sector propagators ``(S0 5x5, S1 9x9)`` in the encoded basis order."""
    return (
        TransformationMatrix("S0", _sequence_in_space(seq, mode, "S0")),
        TransformationMatrix("S1", _sequence_in_space(seq, mode, "S1")),
    )


def project_full(u: np.ndarray) -> tuple[TransformationMatrix, TransformationMatrix]:
    """Restrict a 64-dim propagator to the two encoded sectors."""
    return tuple(
        TransformationMatrix(s, build_subspace_basis(s).project(u)) for s in ("S0", "S1")
    )  # type: ignore[return-value]


def is_intra_qubit(pair: PairLike) -> bool:
    i, j = canonical_pair(pair)
    return i[0] == j[0]


Central = Union[PulseSequence, Sequence]


def wrap_with_local_ops(
    central: Central,
    before: PulseSequence,
    after: PulseSequence,
    mode: str = DEFAULT_MODE,
) -> tuple[TransformationMatrix, TransformationMatrix]:
    """Sector matrices of ``after . central . before``.

    ``central`` is a pulse sequence or a ``(S0, S1)`` pair of matrices.
    The wrappers may only contain intra-qubit pairs.
    """
    for name, seq in (("before", before), ("after", after)):
        for step in seq.steps:
            for p in step.pulses:
                if not is_intra_qubit(p.pair):
                    raise ValueError(f"{name} wrapper contains inter-qubit pair {p.name}")
    if isinstance(central, PulseSequence):
        c5, c9 = sequence_propagator(central, mode)
    else:
        c5, c9 = central
    b5, b9 = sequence_propagator(before, mode)
    a5, a9 = sequence_propagator(after, mode)
    return (
        TransformationMatrix("S0", a5.entries @ np.asarray(c5) @ b5.entries),
        TransformationMatrix("S1", a9.entries @ np.asarray(c9) @ b9.entries),
    )
