"""The switch chain and the (modified) triangle-switch chain.

One step draws a uniform pair of vertex-disjoint edges, one of the three
perfect matchings on their endpoints (the current one meaning "stay"),
and one uniform real for the Metropolis test. The uniform is drawn on
every step so trajectories depend only on the seed.
"""
import time
import logging
from dataclasses import dataclass, asdict
from enum import Enum
from typing import Dict, Optional, Tuple

import numpy as np

from .analysis import SampleStats, default_nu
from .errors import InvalidInput
from .graph_core import (
    Graph,
    Switch,
    apply_switch,
    is_tri_switch,
    random_nonincident_edge_pair,
    triangle_delta,
)

logger = logging.getLogger(__name__)

__all__ = [
    'ChainConfig', 'ChainKind', 'OutcomeKind', 'StepOutcome', 'default_nu', 'make_rng',
    'capped', 'acceptance_probability', 'tri_switch_step', 'switch_step', 'run_chain',
]


class ChainKind(Enum):
    SWITCH = 'switch'
    TRI_SWITCH = 'triswitch'


class OutcomeKind(Enum):
    MOVED = 'moved'
    REJECTED_METROPOLIS = 'rejected_metropolis'
    REJECTED_NOT_TRI_SWITCH = 'rejected_not_tri_switch'
    REJECTED_MULTI_EDGE = 'rejected_multi_edge'
    LAZY_IDENTITY = 'lazy_identity'


@dataclass(frozen=True)
class StepOutcome:
    kind: OutcomeKind
    delta_t: int = 0


@dataclass
class ChainConfig:
    lam: float = 1.0
    nu_cap: Optional[int] = None
    seed: int = 0
    steps: int = 0
    burn_in: int = 0
    thin: int = 1
    keep_graphs: bool = False

    def __post_init__(self):
        """Validate parameter ranges"""
        if not self.lam >= 1:
            raise InvalidInput(f"lambda must be >= 1, got {self.lam}")
        if self.nu_cap is not None and self.nu_cap < 1:
            raise InvalidInput(f"nu cap must be >= 1, got {self.nu_cap}")
        if self.steps < 0 or self.burn_in < 0:
            raise InvalidInput("steps and burn-in must be non-negative")
        if self.thin < 1:
            raise InvalidInput(f"thin must be >= 1, got {self.thin}")

    def to_dict(self) -> Dict:
        return asdict(self)


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 stream for one chain"""
    return np.random.Generator(np.random.PCG64(seed))


def capped(t: int, nu_cap: Optional[int]) -> int:
    return t if nu_cap is None else min(t, nu_cap)


def acceptance_probability(g: Graph, s: Switch, lam: float, nu_cap: Optional[int],
                           which: ChainKind) -> float:
    """Probability that proposal s (a non-lazy matching) moves the chain"""
    if g.has_edge(*s.added[0]) or g.has_edge(*s.added[1]):
        return 0.0
    if which is ChainKind.SWITCH:
        return 1.0
    if not is_tri_switch(g, s):
        return 0.0
    exponent = capped(g.t + triangle_delta(g, s), nu_cap) - capped(g.t, nu_cap)
    return min(1.0, lam ** exponent)


def _propose(g: Graph, rng: np.random.Generator) -> Tuple[Optional[Switch], float]:
    (x1, x2), (x3, x4) = random_nonincident_edge_pair(g, rng)
    matching = int(rng.integers(3))
    u = float(rng.random())
    if matching == 0:
        return None, u
    if matching == 1:
        return Switch(x1, x2, x3, x4), u
    return Switch(x1, x2, x4, x3), u


def tri_switch_step(g: Graph, cfg: ChainConfig, rng: np.random.Generator) -> StepOutcome:
    s, u = _propose(g, rng)
    if s is None:
        return StepOutcome(OutcomeKind.LAZY_IDENTITY)
    if g.has_edge(*s.added[0]) or g.has_edge(*s.added[1]):
        return StepOutcome(OutcomeKind.REJECTED_MULTI_EDGE)
    if not is_tri_switch(g, s):
        return StepOutcome(OutcomeKind.REJECTED_NOT_TRI_SWITCH)
    delta = triangle_delta(g, s)
    exponent = capped(g.t + delta, cfg.nu_cap) - capped(g.t, cfg.nu_cap)
    if exponent < 0 and u >= cfg.lam ** exponent:
        return StepOutcome(OutcomeKind.REJECTED_METROPOLIS)
    apply_switch(g, s)
    return StepOutcome(OutcomeKind.MOVED, delta)


def switch_step(g: Graph, rng: np.random.Generator) -> StepOutcome:
    s, _ = _propose(g, rng)
    if s is None:
        return StepOutcome(OutcomeKind.LAZY_IDENTITY)
    if g.has_edge(*s.added[0]) or g.has_edge(*s.added[1]):
        return StepOutcome(OutcomeKind.REJECTED_MULTI_EDGE)
    delta = apply_switch(g, s)
    return StepOutcome(OutcomeKind.MOVED, delta)


def run_chain(g: Graph, cfg: ChainConfig, which: ChainKind = ChainKind.TRI_SWITCH) -> SampleStats:
    """Burn in, then record t every `thin` steps over `steps` steps.

    Works on a copy of g; the final state is returned in the stats.
    """
    rng = make_rng(cfg.seed)
    graph = g.copy()
    if which is ChainKind.SWITCH:
        step = lambda: switch_step(graph, rng)
    else:
        step = lambda: tri_switch_step(graph, cfg, rng)

    started = time.perf_counter()
    burn = {kind.value: 0 for kind in OutcomeKind}
    for _ in range(cfg.burn_in):
        burn[step().kind.value] += 1
    logger.debug(f"Burn-in of {cfg.burn_in} steps done, t={graph.t}")

    counters = {kind.value: 0 for kind in OutcomeKind}
    samples = []
    snapshots = []
    for i in range(1, cfg.steps + 1):
        counters[step().kind.value] += 1
        if i % cfg.thin == 0:
            samples.append(graph.t)
            if cfg.keep_graphs:
                snapshots.append(graph.edge_key())

    elapsed = time.perf_counter() - started
    logger.info(f"{which.value} chain: {cfg.burn_in + cfg.steps} steps, "
                f"{len(samples)} samples, {counters['moved']} moves in {elapsed:.2f}s")
    return SampleStats(
        samples=samples,
        acceptance=counters,
        burn_in_acceptance=burn,
        final_graph=graph,
        snapshots=snapshots,
        wall_time=elapsed,
    )
