"""Exhaustive state spaces for small degree sequences.

Enumerates every labeled realization of a degree sequence and builds the
exact transition matrix of either chain on it, so stationarity,
irreducibility, spectral quantities and the path statistics can be
checked exactly instead of by sampling.
"""
import math
import hashlib
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import spsolve

from .analysis import compare_to_poisson, mu_of, tv_distance
from .chains import ChainKind, acceptance_probability
from .errors import ConvergenceFailure, MinDegreeTooSmall, NotIrreducible, SpaceTooLarge
from .graph_core import DegreeSequence, Edge, Graph, Switch, is_tri_switch
from .simulation_paths import CaseLabel, simulate_switch

logger = logging.getLogger(__name__)

DEFAULT_LIMIT = 2_000_000
GTH_MAX_STATES = 2000
ROW_SUM_TOL = 1e-12

StateKey = Tuple[Edge, ...]


def state_digest(state: StateKey) -> bytes:
    """128-bit key of a sorted edge tuple"""
    raw = np.asarray(state, dtype=np.int32).tobytes()
    return hashlib.blake2b(raw, digest_size=16).digest()


@dataclass
class StateSpace:
    d: DegreeSequence
    states: List[StateKey]
    t_values: np.ndarray
    census: Dict[int, int]
    transitions: Optional[sparse.csr_matrix] = None
    chain: Optional[ChainKind] = None
    lam: float = 1.0
    nu_cap: Optional[int] = None
    _index: Dict[bytes, List[int]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            for i, state in enumerate(self.states):
                self._index.setdefault(state_digest(state), []).append(i)

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, state: StateKey) -> int:
        for i in self._index.get(state_digest(state), ()):
            if self.states[i] == state:
                return i
        raise KeyError(f"State not in space: {state}")

    def graph(self, i: int) -> Graph:
        return Graph.from_edges(self.d.n, self.states[i])

    def census_list(self) -> List[int]:
        top = max(self.census) if self.census else 0
        return [self.census.get(t, 0) for t in range(top + 1)]


def _switched(state: StateKey, s: Switch) -> StateKey:
    removed = set(s.removed)
    return tuple(sorted([e for e in state if e not in removed] + list(s.added)))


def _proposals(g: Graph):
    """The two non-identity matchings of every vertex-disjoint edge pair"""
    for (x1, x2), (x3, x4) in combinations(g.edges(), 2):
        if x1 in (x3, x4) or x2 in (x3, x4):
            continue
        yield Switch(x1, x2, x3, x4)
        yield Switch(x1, x2, x4, x3)


def enumerate_space(d: DegreeSequence, limit: int = DEFAULT_LIMIT) -> StateSpace:
    """All labeled graphs realizing d, by backtracking in vertex order.

    Vertex v picks its neighbours among later vertices; a branch is cut as
    soon as the residual degrees of the later vertices fail Erdos-Gallai.
    """
    n = d.n
    residual = list(d.degrees)
    edges: List[Edge] = []
    states: List[StateKey] = []

    def feasible(start: int) -> bool:
        rest = [residual[w] for w in range(start, n) if residual[w] > 0]
        return nx.is_valid_degree_sequence_erdos_gallai(rest)

    def extend(v: int):
        if v == n:
            states.append(tuple(sorted(edges)))
            if len(states) > limit:
                raise SpaceTooLarge(f"More than {limit} states for {d.label()}")
            return
        need = residual[v]
        candidates = [w for w in range(v + 1, n) if residual[w] > 0]
        for chosen in combinations(candidates, need):
            residual[v] = 0
            for w in chosen:
                residual[w] -= 1
                edges.append((v, w))
            if feasible(v + 1):
                extend(v + 1)
            for w in chosen:
                residual[w] += 1
                edges.pop()
            residual[v] = need

    logger.info(f"Enumerating realizations of {d.label()} (limit {limit})")
    extend(0)
    states.sort()
    t_values = np.array([Graph.from_edges(n, s).t for s in states], dtype=np.int64)
    census = dict(sorted(Counter(int(t) for t in t_values).items()))
    logger.info(f"Found {len(states)} states, census {census}")
    return StateSpace(d=d, states=states, t_values=t_values, census=census)


def build_matrix(space: StateSpace, which: ChainKind = ChainKind.TRI_SWITCH,
                 lam: float = 1.0, nu_cap: Optional[int] = None) -> sparse.csr_matrix:
    """Exact transition matrix; every move has weight acceptance / (3 a(d))"""
    size = space.size
    a_d = space.d.a_d
    rows, cols, vals = [], [], []
    if a_d > 0:
        scale = 1.0 / (3 * a_d)
        for i, state in enumerate(space.states):
            g = Graph.from_edges(space.d.n, state)
            out = defaultdict(float)
            for s in _proposals(g):
                p = acceptance_probability(g, s, lam, nu_cap, which)
                if p > 0:
                    out[space.index_of(_switched(state, s))] += p * scale
            leaving = 0.0
            for j, p in sorted(out.items()):
                rows.append(i)
                cols.append(j)
                vals.append(p)
                leaving += p
            rows.append(i)
            cols.append(i)
            vals.append(1.0 - leaving)
    else:
        rows, cols, vals = list(range(size)), list(range(size)), [1.0] * size
    matrix = sparse.csr_matrix((vals, (rows, cols)), shape=(size, size))
    space.transitions = matrix
    space.chain = which
    space.lam = lam
    space.nu_cap = nu_cap
    logger.info(f"Built {which.value} matrix on {size} states (lambda={lam}, nu={nu_cap}), "
                f"{matrix.nnz} non-zeros")
    return matrix


def _require_matrix(space: StateSpace, which: Optional[ChainKind] = None) -> sparse.csr_matrix:
    if space.transitions is None or (which is not None and space.chain is not which):
        build_matrix(space, which or ChainKind.TRI_SWITCH, space.lam, space.nu_cap)
    return space.transitions


def check_irreducible(space: StateSpace, which: Optional[ChainKind] = None) -> bool:
    matrix = _require_matrix(space, which)
    support = matrix.copy()
    support.setdiag(0)
    support.eliminate_zeros()
    count, _ = connected_components(support, directed=False)
    return count == 1


_BUILT = object()


def closed_form_stationary(space: StateSpace, lam: Optional[float] = None,
                           nu_cap=_BUILT) -> np.ndarray:
    """pi proportional to lam ** min(t, nu), computed in log-space.

    Parameters default to those of the built matrix; the switch chain's
    stationary law is uniform.
    """
    if lam is None:
        lam = 1.0 if space.chain is ChainKind.SWITCH else space.lam
    if nu_cap is _BUILT:
        nu_cap = space.nu_cap
    exponents = np.minimum(space.t_values, nu_cap) if nu_cap is not None else space.t_values
    logw = exponents * math.log(lam)
    logw -= logw.max()
    w = np.exp(logw)
    return w / w.sum()


def gth_stationary(matrix: np.ndarray) -> np.ndarray:
    """Grassmann-Taksar-Heyman elimination on a row-stochastic matrix"""
    P = np.array(matrix, dtype=float)
    size = P.shape[0]
    for k in range(size - 1, 0, -1):
        s = P[k, :k].sum()
        if s <= 0:
            raise NotIrreducible(f"State {k} cannot reach lower-numbered states")
        P[:k, k] /= s
        P[:k, :k] += np.outer(P[:k, k], P[k, :k])
    pi = np.zeros(size)
    pi[0] = 1.0
    for k in range(1, size):
        pi[k] = pi[:k] @ P[:k, k]
    return pi / pi.sum()


def stationary_exact(space: StateSpace, tol: float = 1e-10) -> np.ndarray:
    """Solve pi P = pi; GTH on small spaces, a sparse solve otherwise"""
    matrix = _require_matrix(space)
    if not check_irreducible(space):
        raise NotIrreducible(f"{space.chain.value} chain on {space.d.label()} is reducible")
    size = space.size
    if size <= GTH_MAX_STATES:
        pi = gth_stationary(matrix.toarray())
    else:
        system = (matrix.T - sparse.identity(size, format='csr')).tolil()
        system[size - 1, :] = np.ones(size)
        rhs = np.zeros(size)
        rhs[-1] = 1.0
        pi = spsolve(system.tocsr(), rhs)
    residual = float(np.abs(matrix.T @ pi - pi).max())
    if residual > tol:
        raise ConvergenceFailure(f"Stationary residual {residual:.3e} above {tol:.1e}",
                                 {'residual': residual, 'states': size})
    logger.debug(f"Stationary vector residual {residual:.3e}")
    return pi


def detailed_balance_error(space: StateSpace, pi: np.ndarray) -> float:
    """Largest |pi(G) P(G,H) - pi(H) P(H,G)| over all state pairs"""
    matrix = _require_matrix(space)
    flow = sparse.diags(pi) @ matrix
    return float(abs(flow - flow.T).max()) if flow.nnz else 0.0


@dataclass
class SpectralReport:
    mu1: float
    mu_min: float
    mu_star: float
    pi_star: float
    epsilon: float
    tau_bound: float
    smallest_eigen_lhs: float
    self_loop_bound: float
    iterations: Dict[str, int] = field(default_factory=dict)
    trivial: bool = False

    @property
    def smallest_eigen_ok(self) -> bool:
        return self.smallest_eigen_lhs <= self.self_loop_bound + 1e-9 and self.self_loop_bound <= 1.5 + 1e-12

    def to_dict(self) -> Dict:
        data = dict(self.__dict__)
        data['smallest_eigen_ok'] = self.smallest_eigen_ok
        return data


def _dominant(operator, root: np.ndarray, size: int, tol: float, max_iter: int, seed: int) -> Tuple[float, int]:
    """Largest eigenvalue of a symmetric PSD operator on the complement of root"""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=size)
    x -= (x @ root) * root
    x /= np.linalg.norm(x)
    value = 0.0
    for it in range(1, max_iter + 1):
        y = operator(x)
        y -= (y @ root) * root
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0, it
        value = float(x @ y)
        x_next = y / norm
        z = operator(x_next)
        z -= (z @ root) * root
        res = np.linalg.norm(z - value * x_next)
        x = x_next
        if res < tol:
            return float(x @ z), it
    raise ConvergenceFailure(f"Power iteration did not reach residual {tol:.1e} in {max_iter} steps",
                             {'iterations': max_iter, 'estimate': value})


def spectral_report(space: StateSpace, epsilon: float = 0.25, tol: float = 1e-10,
                    max_iter: int = 500_000, seed: int = 0) -> SpectralReport:
    """Second largest and smallest eigenvalues and the resulting mixing bound.

    Works on S = D^1/2 P D^-1/2 (symmetric for a reversible chain) with the
    top eigenvector sqrt(pi) projected out on every iteration.
    """
    matrix = _require_matrix(space)
    diag = matrix.diagonal()
    self_loop_bound = float(np.max(1.0 / (2.0 * diag)))
    if space.size == 1:
        return SpectralReport(0.0, 0.0, 0.0, 1.0, epsilon, 0.0, 0.0, self_loop_bound, trivial=True)
    pi = stationary_exact(space)
    root = np.sqrt(pi)
    S = sparse.diags(root) @ matrix @ sparse.diags(1.0 / root)
    S = (S + S.T) * 0.5

    upper, it_upper = _dominant(lambda x: 0.5 * (x + S @ x), root, space.size, tol, max_iter, seed)
    lower, it_lower = _dominant(lambda x: 0.5 * (x - S @ x), root, space.size, tol, max_iter, seed + 1)
    mu1 = 2.0 * upper - 1.0
    mu_min = 1.0 - 2.0 * lower
    mu_star = max(mu1, abs(mu_min))
    pi_star = float(pi.min())
    tau = (math.log(1.0 / pi_star) + math.log(1.0 / epsilon)) / (1.0 - mu_star)
    logger.info(f"Spectrum: mu1={mu1:.6f}, mu_min={mu_min:.6f}, tau({epsilon})<={tau:.2f}")
    return SpectralReport(
        mu1=mu1,
        mu_min=mu_min,
        mu_star=mu_star,
        pi_star=pi_star,
        epsilon=epsilon,
        tau_bound=tau,
        smallest_eigen_lhs=1.0 / (1.0 + mu_min),
        self_loop_bound=self_loop_bound,
        iterations={'mu1': it_upper, 'mu_min': it_lower},
    )


@dataclass
class PathEnsembleStats:
    ell: int
    b_sigma: int
    d_gap: float
    r_ratio: float
    bound: int
    switches: int
    tri_transitions: int
    case_counts: Dict[str, int] = field(default_factory=dict)
    case_max_length: Dict[str, int] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.ell <= 5 and self.b_sigma <= self.bound

    def to_dict(self) -> Dict:
        data = dict(self.__dict__)
        data['ok'] = self.ok
        return data


def simulation_gap(pi: np.ndarray, transitions: Sequence[Tuple[int, int]]) -> float:
    """max over triangle-switch moves uv of (1/|Omega|) / min(pi(u), pi(v))"""
    if not transitions:
        return 1.0
    worst = min(min(pi[u], pi[v]) for u, v in transitions)
    return float((1.0 / len(pi)) / worst)


def stationary_ratio(pi: np.ndarray) -> float:
    """(max pi / pi')^2 with pi' uniform"""
    return float((len(pi) * pi.max()) ** 2)


def path_ensemble_stats(space: StateSpace, lam: float = 1.0, nu_cap: Optional[int] = None) -> PathEnsembleStats:
    """Simulate every switch of the space and tally triangle-switch usage"""
    if space.d.min_degree < 3:
        raise MinDegreeTooSmall(f"Minimum degree {space.d.min_degree} is below 3")
    tally: Counter = Counter()
    tri_moves = set()
    cases: Counter = Counter()
    case_len: Dict[str, int] = {}
    ell = 0
    switches = 0
    for i, state in enumerate(space.states):
        g = Graph.from_edges(space.d.n, state)
        for s in _proposals(g):
            if g.has_edge(*s.added[0]) or g.has_edge(*s.added[1]):
                continue
            j = space.index_of(_switched(state, s))
            if is_tri_switch(g, s):
                tri_moves.add((min(i, j), max(i, j)))
            if j < i:
                continue
            path = simulate_switch(g, s)
            switches += 1
            cases[path.case.value] += 1
            case_len[path.case.value] = max(case_len.get(path.case.value, 0), len(path))
            ell = max(ell, len(path))
            used = set()
            x, x_state = i, state
            for step in path.steps:
                y_state = _switched(x_state, step.switch)
                y = space.index_of(y_state)
                used.add((min(x, y), max(x, y)))
                x, x_state = y, y_state
            tally.update(used)
        if i and i % 5000 == 0:
            logger.debug(f"Path ensemble: {i}/{space.size} states processed")

    pi = closed_form_stationary(space, lam, nu_cap)
    d1 = space.d.max_degree
    stats = PathEnsembleStats(
        ell=ell,
        b_sigma=max(tally.values()) if tally else 0,
        d_gap=simulation_gap(pi, sorted(tri_moves)),
        r_ratio=stationary_ratio(pi),
        bound=20 * d1 ** 2 * (2 * space.d.M + d1 ** 2),
        switches=switches,
        tri_transitions=len(tri_moves),
        case_counts={c.value: cases[c.value] for c in CaseLabel if cases[c.value]},
        case_max_length=case_len,
    )
    logger.info(f"Path ensemble on {space.d.label()}: {switches} switches, ell={stats.ell}, "
                f"B={stats.b_sigma} (bound {stats.bound}), D={stats.d_gap:.4g}, R={stats.r_ratio:.4g}")
    return stats


def census_ratio_check(space: StateSpace, t0: Optional[int] = None) -> Dict:
    """N_{t+1}/N_t against mu/(t+1), tail masses and the Poisson TV"""
    mu = mu_of(space.d)
    total = space.size
    rows = []
    for t, count in space.census.items():
        following = space.census.get(t + 1, 0)
        if count and following:
            ratio = following / count
            reference = mu / (t + 1)
            rows.append({'t': t, 'N_t': count, 'N_t1': following, 'ratio': ratio,
                         'mu_over_t1': reference, 'quotient': ratio / reference})
    tails = {}
    for start in sorted(space.census):
        tails[start] = sum(c for t, c in space.census.items() if t >= start) / total
    uniform = {t: c / total for t, c in space.census.items()}
    report = {
        'mu': mu,
        'size': total,
        'census': {str(t): c for t, c in space.census.items()},
        'census_total_ok': sum(space.census.values()) == total,
        'rows': rows,
        'tail_mass': {str(t): m for t, m in tails.items()},
        'poisson_tv': compare_to_poisson(uniform, mu)['tv'],
    }
    if t0 is not None:
        report['tail_at_t0'] = {'t0': t0, 'mass': sum(c for t, c in space.census.items() if t >= t0) / total}
    return report


def convergence_profile(space: StateSpace, steps: int, starts: int = 10, seed: int = 0) -> List[float]:
    """Mean TV(P^k(x, .), pi) over seeded start states x, for k = 0..steps"""
    matrix = _require_matrix(space)
    pi = stationary_exact(space)
    rng = np.random.default_rng(seed)
    chosen = rng.choice(space.size, size=min(starts, space.size), replace=False)
    profile = np.zeros(steps + 1)
    for x in chosen:
        row = np.zeros(space.size)
        row[x] = 1.0
        for k in range(steps + 1):
            profile[k] += tv_distance(row, pi)
            row = matrix.T @ row
    return list(profile / len(chosen))


def summary(space: StateSpace, checks: Optional[Dict] = None) -> Dict:
    return {
        'n': space.d.n,
        'degrees': list(space.d.degrees),
        'size': space.size,
        'census': {str(t): c for t, c in space.census.items()},
        'chain': space.chain.value if space.chain else None,
        'lambda': space.lam,
        'nu': space.nu_cap,
        'checks': checks or {},
    }
