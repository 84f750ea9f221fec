import logging
import threading
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Dict, List

from .analysis import SampleStats
from .chains import ChainConfig, ChainKind, run_chain
from .errors import InvalidInput
from .graph_core import Graph

logger = logging.getLogger(__name__)


def chain_seed(master: int, index: int) -> int:
    """Per-chain seed: master seed XOR chain index"""
    return master ^ index


def _run_one(graph: Graph, cfg: ChainConfig, which: ChainKind) -> SampleStats:
    return run_chain(graph, cfg, which)


class ChainPool:
    def __init__(self, jobs: int = 1):
        """Initialize the pool of chain workers"""
        self.jobs = max(1, int(jobs))
        self.lock = threading.Lock()
        self.submitted = 0
        self.completed = 0
        self.failed = 0

    def run(self, graph: Graph, cfg: ChainConfig, which: ChainKind = ChainKind.TRI_SWITCH,
            chains: int = 1) -> SampleStats:
        """Run independent chains and merge them in chain order"""
        if chains < 1:
            raise InvalidInput(f"Need at least one chain, got {chains}")
        configs = [replace(cfg, seed=chain_seed(cfg.seed, i)) for i in range(chains)]
        with self.lock:
            self.submitted += len(configs)
        logger.info(f"Running {chains} {which.value} chain(s) on {self.jobs} worker(s)")

        results: List[SampleStats] = []
        try:
            if self.jobs == 1 or chains == 1:
                for c in configs:
                    results.append(_run_one(graph, c, which))
                    self._done()
            else:
                with ProcessPoolExecutor(max_workers=self.jobs) as executor:
                    futures = [executor.submit(_run_one, graph, c, which) for c in configs]
                    for future in futures:
                        results.append(future.result())
                        self._done()
        except Exception as e:
            with self.lock:
                self.failed += len(configs) - len(results)
            logger.error(f"Error running chains: {str(e)}")
            raise

        merged = results[0]
        for stats in results[1:]:
            merged = merged.merge(stats)
        return merged

    def _done(self):
        with self.lock:
            self.completed += 1

    def status(self) -> Dict:
        """Counters for submitted, completed and failed chains"""
        with self.lock:
            return {
                'jobs': self.jobs,
                'submitted': self.submitted,
                'completed': self.completed,
                'failed': self.failed,
            }
