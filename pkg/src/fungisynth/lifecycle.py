"""Time axis and population bookkeeping for spores, hyphae and mycelium."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

from .stochastics import RandomSource, derive_stream, sample_normal, sample_uniform

__all__ = [
    "Stage",
    "JitterLaw",
    "TransitionClock",
    "Spore",
    "GrowthAnchor",
    "WorldState",
    "LifecycleParams",
    "transition_ratio",
    "round_half_away",
    "initialize_spores",
    "jitter_spores",
    "target_counts",
    "advance_frame",
    "spore_size",
    "growth_factor",
    "simulate_lifecycle",
]


class Stage(str, enum.Enum):
    SPORE = "spore"
    HYPHA = "hypha"
    MYCELIUM = "mycelium"

    @property
    def rank(self) -> int:
        return _STAGE_RANK[self]


_STAGE_RANK = {Stage.SPORE: 0, Stage.HYPHA: 1, Stage.MYCELIUM: 2}


class JitterLaw(str, enum.Enum):
    UNIFORM = "uniform"
    NORMAL = "normal"


def round_half_away(x: float) -> int:
    """Round to nearest integer, ties away from zero (Python's round() ties to even)."""
    return int(math.floor(abs(x) + 0.5)) * (1 if x >= 0 else -1)


def transition_ratio(i: int, N: int) -> float:
    if N < 2:
        raise ValueError(f"total_frames must be >= 2, got {N}")
    if not 0 <= i <= N - 1:
        raise ValueError(f"frame index {i} outside [0, {N - 1}]")
    return i / (N - 1)


@dataclass(frozen=True)
class TransitionClock:
    frame_index: int
    total_frames: int

    def __post_init__(self):
        transition_ratio(self.frame_index, self.total_frames)

    @property
    def T(self) -> float:
        return transition_ratio(self.frame_index, self.total_frames)

    def next(self) -> "TransitionClock":
        return TransitionClock(self.frame_index + 1, self.total_frames)


@dataclass(frozen=True)
class Spore:
    id: int
    x: float
    y: float
    size: float


@dataclass(frozen=True)
class GrowthAnchor:
    id: int
    stage: Stage
    x: float
    y: float
    birth_frame: int
    parent_spore_id: int


@dataclass(frozen=True)
class LifecycleParams:
    """Tunables for population dynamics. Defaults reproduce the reference setup."""

    initial_spores: int = 200
    spore_bounds: tuple[float, float, float, float] = (0.1, 0.9, 0.1, 0.9)  # x_lo, x_hi, y_lo, y_hi
    jitter_law: JitterLaw = JitterLaw.UNIFORM
    jitter_range: float = 0.01  # half-range for the uniform law
    jitter_sigma: float = 0.005  # standard deviation for the normal law
    initial_spore_radius: float = 0.012
    min_spore_radius: float = 0.002
    hypha_rate: float = 1.0  # c_H
    mycelium_rate: float = 2.0  # c_M
    mycelium_threshold: float = 0.5  # T beyond which hyphae start promoting

    def __post_init__(self):
        if self.initial_spores < 0:
            raise ValueError("initial_spores must be >= 0")
        x0, x1, y0, y1 = self.spore_bounds
        if not (0.0 <= x0 <= x1 <= 1.0 and 0.0 <= y0 <= y1 <= 1.0):
            raise ValueError(f"spore_bounds {self.spore_bounds} must be ordered and inside [0, 1]^2")
        if self.jitter_range < 0 or self.jitter_sigma < 0:
            raise ValueError("jitter_range and jitter_sigma must be >= 0")
        if self.initial_spore_radius <= 0:
            raise ValueError("initial_spore_radius must be > 0")
        if not 0 < self.min_spore_radius <= self.initial_spore_radius:
            raise ValueError("min_spore_radius must lie in (0, initial_spore_radius]")
        if self.hypha_rate < 0 or self.mycelium_rate < 0:
            raise ValueError("hypha_rate and mycelium_rate must be >= 0")
        if not 0.0 <= self.mycelium_threshold < 1.0:
            raise ValueError("mycelium_threshold must lie in [0, 1)")


@dataclass(frozen=True)
class WorldState:
    spores: tuple[Spore, ...]
    anchors: tuple[GrowthAnchor, ...]
    clock: TransitionClock
    initial_count: int

    @property
    def T(self) -> float:
        return self.clock.T

    @property
    def hyphae(self) -> tuple[GrowthAnchor, ...]:
        return tuple(a for a in self.anchors if a.stage is Stage.HYPHA)

    @property
    def mycelia(self) -> tuple[GrowthAnchor, ...]:
        return tuple(a for a in self.anchors if a.stage is Stage.MYCELIUM)

    def counts(self) -> tuple[int, int, int]:
        n_myc = sum(1 for a in self.anchors if a.stage is Stage.MYCELIUM)
        return len(self.spores), len(self.anchors) - n_myc, n_myc

    def stage_of(self) -> dict[int, Stage]:
        out = {s.id: Stage.SPORE for s in self.spores}
        out.update({a.id: a.stage for a in self.anchors})
        return out


def initialize_spores(
    S0: int,
    bounds: tuple[float, float, float, float],
    src: RandomSource,
    total_frames: int = 2,
    initial_radius: float = LifecycleParams.initial_spore_radius,
) -> WorldState:
    """Scatter ``S0`` spores uniformly over ``bounds`` = (x_lo, x_hi, y_lo, y_hi)."""
    if S0 < 0:
        raise ValueError("S0 must be >= 0")
    x0, x1, y0, y1 = bounds
    if not (0.0 <= x0 <= x1 <= 1.0 and 0.0 <= y0 <= y1 <= 1.0):
        raise ValueError(f"bounds {bounds} must be ordered and inside the unit square")
    spores = []
    for k in range(S0):
        x = sample_uniform(src, x0, x1)
        y = sample_uniform(src, y0, y1)
        spores.append(Spore(k, x, y, initial_radius))
    return WorldState(tuple(spores), (), TransitionClock(0, total_frames), S0)


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


def jitter_spores(
    state: WorldState,
    src: RandomSource,
    law: JitterLaw = JitterLaw.UNIFORM,
    half_range: float = 0.01,
    sigma: float = 0.005,
) -> WorldState:
    """Displace every spore independently per axis, then clamp to the unit square."""
    law = JitterLaw(law)
    moved = []
    for s in state.spores:
        if law is JitterLaw.UNIFORM:
            dx = sample_uniform(src, -half_range, half_range)
            dy = sample_uniform(src, -half_range, half_range)
        else:
            dx = sample_normal(src, 0.0, sigma)
            dy = sample_normal(src, 0.0, sigma)
        moved.append(replace(s, x=_clamp01(s.x + dx), y=_clamp01(s.y + dy)))
    return replace(state, spores=tuple(moved))


def target_counts(
    T: float, S0: int, c_H: float = 1.0, c_M: float = 2.0, threshold: float = 0.5
) -> tuple[int, int, int]:
    """(spores, hyphae, mycelia) expected at transition ratio ``T``.

    Spores deplete as ``S0 * (1 - T)``; every depleted spore becomes a hypha,
    and a share ``clamp(c_M * max(0, T - threshold), 0, 1)`` of those is
    mycelium. ``c_H`` is validated but does not change the counts, since
    hyphae are whatever is left after spores and mycelia are accounted for.
    """
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transition ratio {T} outside [0, 1]")
    if S0 < 0 or c_H < 0 or c_M < 0:
        raise ValueError("S0, c_H and c_M must be >= 0")
    n_spores = round_half_away(S0 * (1.0 - T))
    converted = S0 - n_spores
    share = min(1.0, max(0.0, c_M * max(0.0, T - threshold)))
    n_myc = round_half_away(converted * share)
    return n_spores, converted - n_myc, n_myc


def spore_size(T: float, initial_radius: float, min_radius: float = 0.0) -> float:
    """Quadratically eased radius ``r0 * (1 - T)^2``, never below ``min_radius``."""
    return max(min_radius, initial_radius * (1.0 - T) ** 2)


def growth_factor(T: float, threshold: float = 0.5) -> float:
    """Zero up to ``threshold``, then rising quadratically to 1 at T = 1."""
    if not 0.0 <= T <= 1.0:
        raise ValueError(f"transition ratio {T} outside [0, 1]")
    return (max(0.0, T - threshold) / (1.0 - threshold)) ** 2


def advance_frame(
    state: WorldState,
    clock: TransitionClock,
    src: RandomSource,
    params: LifecycleParams = LifecycleParams(),
) -> WorldState:
    """Step the population from ``state.clock`` to ``clock``.

    Order within a step: spores convert to hyphae, hyphae promote to
    mycelium, surviving spores jitter, spore sizes shrink.
    """
    if clock.frame_index != state.clock.frame_index + 1 or clock.total_frames != state.clock.total_frames:
        raise ValueError(
            f"clock must advance by exactly one frame: {state.clock} -> {clock}"
        )
    T = clock.T
    S0 = state.initial_count
    n_spores, _, n_myc = target_counts(
        T, S0, params.hypha_rate, params.mycelium_rate, params.mycelium_threshold
    )

    # spores -> hyphae: uniform subset without replacement
    n_convert = len(state.spores) - n_spores
    if n_convert < 0:
        raise RuntimeError(f"spore target {n_spores} exceeds current population {len(state.spores)}")
    order = src.permutation(len(state.spores))
    chosen = set(order[:n_convert])
    survivors = []
    anchors = list(state.anchors)
    for idx, s in enumerate(state.spores):
        if idx in chosen:
            anchors.append(GrowthAnchor(s.id, Stage.HYPHA, s.x, s.y, clock.frame_index, s.id))
        else:
            survivors.append(s)

    # hyphae -> mycelium: seeded shuffle, then oldest first
    current_myc = sum(1 for a in anchors if a.stage is Stage.MYCELIUM)
    n_promote = n_myc - current_myc
    hyphae_idx = [k for k, a in enumerate(anchors) if a.stage is Stage.HYPHA]
    if n_promote < 0 or n_promote > len(hyphae_idx):
        raise RuntimeError(
            f"cannot reach mycelium target {n_myc} from {current_myc} mycelia and {len(hyphae_idx)} hyphae"
        )
    perm = src.permutation(len(hyphae_idx))
    shuffled = [hyphae_idx[p] for p in perm]
    shuffled.sort(key=lambda k: anchors[k].birth_frame)  # stable: ties keep shuffled order
    for k in shuffled[:n_promote]:
        anchors[k] = replace(anchors[k], stage=Stage.MYCELIUM)
    anchors.sort(key=lambda a: a.id)

    radius = spore_size(T, params.initial_spore_radius, params.min_spore_radius)
    staged = replace(state, spores=tuple(survivors), anchors=tuple(anchors), clock=clock)
    staged = jitter_spores(staged, src, params.jitter_law, params.jitter_range, params.jitter_sigma)
    staged = replace(staged, spores=tuple(replace(s, size=radius) for s in staged.spores))

    counts = staged.counts()
    if sum(counts) != S0 or counts[0] != n_spores or counts[2] != n_myc:
        raise RuntimeError(f"population invariant broken at frame {clock.frame_index}: {counts}")
    return staged


def simulate_lifecycle(params: LifecycleParams, total_frames: int, master_seed: int):
    """Yield the WorldState for every frame 0..N-1."""
    state = initialize_spores(
        params.initial_spores,
        params.spore_bounds,
        derive_stream(master_seed, "spores/init"),
        total_frames=total_frames,
        initial_radius=params.initial_spore_radius,
    )
    yield state
    for i in range(1, total_frames):
        state = advance_frame(
            state, TransitionClock(i, total_frames), derive_stream(master_seed, f"lifecycle/frame={i}"), params
        )
        yield state
