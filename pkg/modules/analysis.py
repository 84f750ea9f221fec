"""Closed-form scalars, Poisson references and sample comparisons.

Nothing in here hard-fails on a distributional comparison: thresholds
belong to callers (CLI config, tests).
"""
import csv
import math
import logging
from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Union

import networkx as nx
import numpy as np
from scipy.special import gammaln

from .graph_core import DegreeSequence, Graph

logger = logging.getLogger(__name__)

Distribution = Union[Mapping[int, float], Sequence[float]]


def default_nu(n: int) -> int:
    """Triangle cap floor(ln n / ln ln n), at least 1.

    ln ln n is close to 0 for small n, so the cap is large there
    (11 at n = 3, 4 at n = 4) and does not bind on small spaces.
    Pass an explicit cap when testing those.
    """
    if n < 3:
        return 1
    return max(1, int(math.floor(math.log(n) / math.log(math.log(n)))))


def mu_of(d: DegreeSequence) -> float:
    """Asymptotic mean triangle count M2^3 / (6 M^3)"""
    if d.M == 0:
        return 0.0
    return d.M2 ** 3 / (6.0 * d.M ** 3)


@dataclass
class ScalarReport:
    M: int
    M2: int
    mu: float
    mu_without_sixth: float
    a_d: int
    nu: int
    lam: float
    lambda_mu: float
    max_triangles: int

    def to_dict(self) -> Dict:
        return dict(self.__dict__)


def scalar_report(d: DegreeSequence, lam: float = 1.0, nu: Optional[int] = None) -> ScalarReport:
    mu = mu_of(d)
    return ScalarReport(
        M=d.M,
        M2=d.M2,
        mu=mu,
        # the intro writes M2^3/M^3; kept for reference only
        mu_without_sixth=6.0 * mu,
        a_d=d.a_d,
        nu=default_nu(d.n) if nu is None else nu,
        lam=lam,
        lambda_mu=lam * mu,
        max_triangles=d.max_triangles,
    )


@dataclass
class SampleStats:
    """Triangle counts recorded by a chain run plus step accounting"""
    samples: List[int] = field(default_factory=list)
    acceptance: Dict[str, int] = field(default_factory=dict)
    burn_in_acceptance: Dict[str, int] = field(default_factory=dict)
    final_graph: Optional[Graph] = None
    snapshots: List[tuple] = field(default_factory=list)
    wall_time: float = 0.0
    chains: int = 1

    @property
    def n_samples(self) -> int:
        return len(self.samples)

    @property
    def counts(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.samples).items()))

    @property
    def mean(self) -> float:
        return float(np.mean(self.samples)) if self.samples else float('nan')

    @property
    def variance(self) -> float:
        if len(self.samples) < 2:
            return 0.0
        return float(np.var(self.samples, ddof=1))

    @property
    def stderr(self) -> float:
        if len(self.samples) < 2:
            return float('nan')
        return math.sqrt(self.variance / len(self.samples))

    def pmf(self) -> Dict[int, float]:
        total = self.n_samples
        return {k: c / total for k, c in self.counts.items()} if total else {}

    def merge(self, other: 'SampleStats') -> 'SampleStats':
        acceptance = Counter(self.acceptance)
        acceptance.update(other.acceptance)
        burn = Counter(self.burn_in_acceptance)
        burn.update(other.burn_in_acceptance)
        return SampleStats(
            samples=self.samples + other.samples,
            acceptance=dict(acceptance),
            burn_in_acceptance=dict(burn),
            final_graph=other.final_graph if other.final_graph is not None else self.final_graph,
            snapshots=self.snapshots + other.snapshots,
            wall_time=self.wall_time + other.wall_time,
            chains=self.chains + other.chains,
        )

    def to_dict(self) -> Dict:
        return {
            'n_samples': self.n_samples,
            'chains': self.chains,
            'mean': self.mean if self.samples else None,
            'variance': self.variance,
            'histogram': {str(k): v for k, v in self.counts.items()},
            'counters': dict(sorted(self.acceptance.items())),
            'burn_in_counters': dict(sorted(self.burn_in_acceptance.items())),
            'samples': list(self.samples),
            'wall_time': round(self.wall_time, 6),
        }


def _as_mapping(p: Distribution) -> Dict[int, float]:
    if isinstance(p, Mapping):
        return {int(k): float(v) for k, v in p.items()}
    return {k: float(v) for k, v in enumerate(p)}


def tv_distance(p: Distribution, q: Distribution) -> float:
    """Half the L1 distance, clipped to [0, 1]"""
    p, q = _as_mapping(p), _as_mapping(q)
    support = set(p) | set(q)
    total = 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in support)
    return min(1.0, max(0.0, total))


@lru_cache(maxsize=4096)
def _log_factorial(k: int) -> float:
    return float(gammaln(k + 1))


def poisson_pmf(mu: float, k: int) -> float:
    if k < 0:
        return 0.0
    if mu == 0:
        return 1.0 if k == 0 else 0.0
    return math.exp(-mu + k * math.log(mu) - _log_factorial(k))


def poisson_distribution(mu: float, kmax: int) -> Dict[int, float]:
    return {k: poisson_pmf(mu, k) for k in range(kmax + 1)}


def compare_to_poisson(stats: Union[SampleStats, Mapping[int, float]], mu: float) -> Dict:
    """Empirical pmf against Pois(mu), with the Poisson tail beyond the
    largest observed value counted toward the TV distance."""
    if isinstance(stats, SampleStats):
        empirical = stats.pmf()
        mean, variance, n = stats.mean, stats.variance, stats.n_samples
    else:
        empirical = {int(k): float(v) for k, v in stats.items() if v}
        mean = sum(k * v for k, v in empirical.items())
        variance = sum((k - mean) ** 2 * v for k, v in empirical.items())
        n = None
    kmax = max(empirical) if empirical else 0
    reference = poisson_distribution(mu, kmax)
    tail = max(0.0, 1.0 - sum(reference.values()))
    tv = 0.5 * (sum(abs(empirical.get(k, 0.0) - reference[k]) for k in range(kmax + 1)) + tail)
    return {
        'mu': mu,
        'n_samples': n,
        'tv': min(1.0, tv),
        'mean': mean,
        'variance': variance,
        'poisson_tail': tail,
        'rows': [
            {'k': k, 'empirical_pmf': empirical.get(k, 0.0), 'poisson_pmf': reference[k]}
            for k in range(kmax + 1)
        ],
    }


def write_pmf_csv(report: Dict, path: str) -> None:
    with open(path, 'w', newline='') as fh:
        writer = csv.DictWriter(fh, fieldnames=['k', 'empirical_pmf', 'poisson_pmf'])
        writer.writeheader()
        writer.writerows(report['rows'])
    logger.info(f"Wrote {len(report['rows'])} pmf rows to {path}")


def _is_path_component(sub: nx.Graph) -> bool:
    if sub.number_of_nodes() < 2:
        return False
    return nx.is_tree(sub) and max(dict(sub.degree()).values()) <= 2


def degree_sequence_checks(d: DegreeSequence, graph: Optional[Graph] = None) -> Dict:
    """M2 against M and the mean degree; per-component path facts for a graph.

    The mean degree >= 2 case always gives M2 >= M. The reverse direction
    does not hold in general, e.g. (3, 1, 1, 1) has M2 = M = 6.
    """
    m2_ge_m = d.M2 >= d.M
    mean_ge_2 = d.mean_degree >= 2
    report = {
        'M': d.M,
        'M2': d.M2,
        'mean_degree': d.mean_degree,
        'm2_ge_m': m2_ge_m,
        'mean_ge_2': mean_ge_2,
        'implication_holds': (not mean_ge_2) or m2_ge_m,
        'converse_holds': (not m2_ge_m) or mean_ge_2,
    }
    if graph is not None:
        nxg = nx.Graph()
        nxg.add_nodes_from(range(graph.n))
        nxg.add_edges_from(graph.edges())
        components = []
        for nodes in nx.connected_components(nxg):
            sub = nxg.subgraph(nodes)
            degs = [deg for _, deg in sub.degree()]
            m = sum(degs)
            m2 = sum(x * (x - 1) for x in degs)
            components.append({
                'size': len(nodes),
                'is_path': _is_path_component(sub),
                'M': m,
                'M2': m2,
            })
        report['components'] = components
        report['paths_ok'] = all(c['M'] - c['M2'] == 2 for c in components if c['is_path'])
        report['non_paths_ok'] = all(c['M2'] >= c['M'] for c in components if not c['is_path'])
    return report
