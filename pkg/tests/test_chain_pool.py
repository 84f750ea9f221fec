import pytest

from modules.chain_pool import ChainPool, chain_seed
from modules.chains import ChainConfig, ChainKind, run_chain
from modules.errors import InvalidInput
from modules.graph_core import DegreeSequence, from_degree_sequence


@pytest.fixture
def start():
    return from_degree_sequence(DegreeSequence((3,) * 10), seed=1)


class TestChainPool:
    def test_seeds(self):
        assert chain_seed(42, 0) == 42
        assert chain_seed(42, 1) == 43
        assert chain_seed(42, 2) == 40

    def test_single_chain_matches_run_chain(self, start):
        cfg = ChainConfig(lam=2.0, seed=7, steps=200, thin=10)
        pooled = ChainPool(jobs=1).run(start, cfg)
        assert pooled.samples == run_chain(start, cfg).samples

    def test_merge_order_independent_of_workers(self, start):
        cfg = ChainConfig(seed=3, steps=150, thin=5)
        serial = ChainPool(jobs=1).run(start, cfg, ChainKind.SWITCH, chains=3)
        parallel = ChainPool(jobs=2).run(start, cfg, ChainKind.SWITCH, chains=3)
        assert serial.samples == parallel.samples
        assert serial.chains == parallel.chains == 3
        assert serial.n_samples == 3 * 30

    def test_status(self, start):
        pool = ChainPool(jobs=1)
        pool.run(start, ChainConfig(steps=10), chains=2)
        assert pool.status() == {'jobs': 1, 'submitted': 2, 'completed': 2, 'failed': 0}

    def test_needs_a_chain(self, start):
        with pytest.raises(InvalidInput):
            ChainPool().run(start, ChainConfig(steps=10), chains=0)
