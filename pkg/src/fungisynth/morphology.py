"""Recursive branch growth for hyphae and mycelium.

Each anchor's body is regrown every frame from its own substream
``branch/frame=<i>/entity=<id>``, so geometry for one entity never depends on
any other entity or on evaluation order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .lifecycle import GrowthAnchor, Stage, WorldState, growth_factor
from .stochastics import RandomSource, derive_stream, sample_normal, sample_poisson, sample_uniform

__all__ = [
    "BranchParams",
    "EnvironmentParams",
    "Segment",
    "SegmentBudget",
    "SegmentBudgetExceeded",
    "HYPHA_DEFAULTS",
    "MYCELIUM_DEFAULTS",
    "branch_endpoint",
    "next_branch_length",
    "sample_temperature_factor",
    "sub_branch_count",
    "grow_branch",
    "grow_anchor",
    "build_frame_geometry",
]

TWO_PI = 2.0 * math.pi
MIN_TEMPERATURE_FACTOR = 0.05
DEFAULT_SEGMENT_BUDGET = 1_000_000


@dataclass(frozen=True)
class BranchParams:
    """Per-stage branching law.

    Lengths are in normalized plot units. The root length is
    ``initial_length * N(length_mu, length_sigma)``; every child is
    ``parent * decay_factor * N(1, decay_noise_sigma)``.
    """

    initial_length: float = 0.06
    initial_width: float = 0.006
    mean_sub_branches: float = 2.0
    length_mu: float = 1.0
    length_sigma: float = 0.2
    width_lo: float = 0.6
    width_hi: float = 1.0
    decay_factor: float = 0.7
    decay_noise_sigma: float = 0.2
    max_depth: int = 4
    length_threshold: float = 0.004
    density_alpha: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.decay_factor <= 1.0:
            raise ValueError(f"decay_factor must lie in (0, 1], got {self.decay_factor}")
        if not 0.0 < self.width_lo <= self.width_hi:
            raise ValueError(f"width range must satisfy 0 < lo <= hi, got ({self.width_lo}, {self.width_hi})")
        if self.length_threshold <= 0:
            raise ValueError("length_threshold must be > 0")
        if self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        if self.mean_sub_branches < 0 or self.density_alpha < 0:
            raise ValueError("mean_sub_branches and density_alpha must be >= 0")
        if self.length_sigma < 0 or self.decay_noise_sigma < 0:
            raise ValueError("length_sigma and decay_noise_sigma must be >= 0")
        if self.initial_length < 0 or self.initial_width <= 0:
            raise ValueError("initial_length must be >= 0 and initial_width > 0")


HYPHA_DEFAULTS = BranchParams()
MYCELIUM_DEFAULTS = BranchParams(
    initial_width=0.008,
    mean_sub_branches=3.0,
    length_mu=0.8,
    length_sigma=0.15,
    width_lo=0.7,
    width_hi=1.0,
    decay_factor=0.85,
    max_depth=5,
    density_alpha=0.15,
)


@dataclass(frozen=True)
class EnvironmentParams:
    temperature_mu: float = 1.0
    temperature_sigma: float = 0.1
    growth_time_constant: float = 0.5  # T at which mycelium growth starts accelerating

    def __post_init__(self):
        if self.temperature_sigma < 0:
            raise ValueError("temperature_sigma must be >= 0")
        if not 0.0 <= self.growth_time_constant < 1.0:
            raise ValueError("growth_time_constant must lie in [0, 1)")


@dataclass(frozen=True, slots=True)
class Segment:
    x0: float
    y0: float
    x1: float
    y1: float
    width: float
    depth: int
    stage: Stage
    owner_id: int

    @property
    def length(self) -> float:
        return math.hypot(self.x1 - self.x0, self.y1 - self.y0)


class SegmentBudgetExceeded(RuntimeError):
    pass


class SegmentBudget:
    """Shared counter that stops runaway recursion."""

    def __init__(self, limit: int = DEFAULT_SEGMENT_BUDGET):
        self.limit = limit
        self.used = 0

    def take(self) -> None:
        self.used += 1
        if self.used > self.limit:
            raise SegmentBudgetExceeded(f"segment budget of {self.limit} exceeded")


def branch_endpoint(x: float, y: float, L: float, theta: float) -> tuple[float, float]:
    if L < 0:
        raise ValueError(f"branch length must be >= 0, got {L}")
    return x + L * math.cos(theta), y + L * math.sin(theta)


def next_branch_length(
    L_current: float, src: RandomSource, decay: float = 0.7, noise_sigma: float = 0.2
) -> float:
    """Child length ``L * decay * N(1, noise_sigma)``, floored at zero."""
    if L_current < 0:
        raise ValueError(f"branch length must be >= 0, got {L_current}")
    n = sample_normal(src, 1.0, noise_sigma)
    return max(0.0, L_current * decay * n)


def sample_temperature_factor(env: EnvironmentParams, src: RandomSource) -> float:
    return max(MIN_TEMPERATURE_FACTOR, sample_normal(src, env.temperature_mu, env.temperature_sigma))


def sub_branch_count(
    lam: float,
    depth: int,
    alpha: float,
    stage: Stage,
    src: RandomSource,
    max_depth: int = 0,
) -> int:
    """Poisson child count. Mycelium rate decays as ``exp(-alpha * levels_below_root)``."""
    if lam < 0 or alpha < 0:
        raise ValueError("lambda and alpha must be >= 0")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    rate = lam
    if Stage(stage) is Stage.MYCELIUM:
        rate = lam * math.exp(-alpha * max(0, max_depth - depth))
    return sample_poisson(src, rate)


def grow_branch(
    origin: tuple[float, float],
    L: float,
    theta: float,
    depth: int,
    W: float,
    stage: Stage,
    params: BranchParams,
    env: EnvironmentParams,
    src: RandomSource,
    owner_id: int = -1,
    budget: SegmentBudget | None = None,
    out: list[Segment] | None = None,
) -> list[Segment]:
    """Emit the segment for this branch, then recurse into its children.

    Draw order per node: temperature factor, child count, then per child
    angle, length noise, width factor.
    """
    if out is None:
        out = []
    if depth <= 0 or L < params.length_threshold:
        return out
    if budget is None:
        budget = SegmentBudget()
    budget.take()

    tf = sample_temperature_factor(env, src)
    x, y = origin
    ex, ey = branch_endpoint(x, y, L * tf, theta)
    out.append(Segment(x, y, ex, ey, W * tf, depth, stage, owner_id))

    k = sub_branch_count(params.mean_sub_branches, depth, params.density_alpha, stage, src, params.max_depth)
    for _ in range(k):
        child_theta = sample_uniform(src, 0.0, TWO_PI)
        child_L = next_branch_length(L, src, params.decay_factor, params.decay_noise_sigma)
        child_W = W * sample_uniform(src, params.width_lo, params.width_hi)
        grow_branch(
            (ex, ey), child_L, child_theta, depth - 1, child_W, stage, params, env, src, owner_id, budget, out
        )
    return out


def root_length(stage: Stage, params: BranchParams, env: EnvironmentParams, T: float, src: RandomSource) -> float:
    L = params.initial_length * max(0.0, sample_normal(src, params.length_mu, params.length_sigma))
    if Stage(stage) is Stage.MYCELIUM:
        L *= 1.0 + growth_factor(T, env.growth_time_constant)
    return L


def grow_anchor(
    anchor: GrowthAnchor,
    T: float,
    params: BranchParams,
    env: EnvironmentParams,
    src: RandomSource,
    budget: SegmentBudget | None = None,
) -> list[Segment]:
    L = root_length(anchor.stage, params, env, T, src)
    theta = sample_uniform(src, 0.0, TWO_PI)
    return grow_branch(
        (anchor.x, anchor.y), L, theta, params.max_depth, params.initial_width,
        anchor.stage, params, env, src, anchor.id, budget,
    )


def anchor_stream(master_seed: int, frame_index: int, entity_id: int) -> RandomSource:
    return derive_stream(master_seed, f"branch/frame={frame_index}/entity={entity_id}")


def build_frame_geometry(
    state: WorldState,
    hypha_params: BranchParams,
    mycelium_params: BranchParams,
    env: EnvironmentParams,
    master_seed: int,
    segment_budget: int = DEFAULT_SEGMENT_BUDGET,
) -> list[Segment]:
    """All segments for one frame, hyphae first, each stage in anchor-id order."""
    budget = SegmentBudget(segment_budget)
    frame = state.clock.frame_index
    T = state.T
    segments: list[Segment] = []
    for stage, params in ((Stage.HYPHA, hypha_params), (Stage.MYCELIUM, mycelium_params)):
        for anchor in sorted((a for a in state.anchors if a.stage is stage), key=lambda a: a.id):
            try:
                segments.extend(grow_anchor(anchor, T, params, env, anchor_stream(master_seed, frame, anchor.id), budget))
            except SegmentBudgetExceeded as exc:
                raise SegmentBudgetExceeded(f"frame {frame}, entity {anchor.id}: {exc}") from None
    return segments
