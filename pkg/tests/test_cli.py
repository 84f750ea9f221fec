import json

import pytest

from app import main
from modules import __version__
from modules.database import SpaceCache
from modules.graph_core import read_graph, write_graph


@pytest.fixture(autouse=True)
def no_cache(monkeypatch):
    monkeypatch.setenv('TRICHAIN_CACHE_DB', '')


def load(path):
    with open(path) as fh:
        return json.load(fh)


class TestRealize:
    def test_writes_graph_file(self, tmp_path):
        out = str(tmp_path / "g.txt")
        assert main(['realize', '--degrees', '3x8', '--seed', '4', '--out', out]) == 0
        assert read_graph(out).degrees() == [3] * 8

    def test_non_graphical(self, tmp_path):
        assert main(['realize', '--degrees', '3,3,3', '--out', str(tmp_path / "g.txt")]) == 2


class TestSample:
    def test_json_report(self, tmp_path):
        out = str(tmp_path / "run.json")
        code = main(['sample', '--degrees', '3x10', '--steps', '1e3', '--thin', '10',
                     '--lambda', '2', '--nu', 'auto', '--seed', '5', '--out', out])
        assert code == 0
        data = load(out)
        assert data['n_samples'] == 100
        assert sum(data['counters'].values()) == 1000
        assert data['chain'] == 'triswitch'
        assert data['scalars']['lambda_mu'] == pytest.approx(8 / 3)
        assert 0 <= data['poisson']['tv'] <= 1
        assert data['manifest']['command'] == 'sample'
        assert data['manifest']['version'] == __version__
        assert data['manifest']['outputs'] == [out]

    def test_reproducible(self, tmp_path):
        runs = []
        for name in ("a.json", "b.json"):
            out = str(tmp_path / name)
            main(['sample', '--degrees', '3x8', '--steps', '300', '--seed', '9', '--chain', 'switch', '--out', out])
            runs.append(load(out)['samples'])
        assert runs[0] == runs[1]

    def test_csv_to_stdout(self, capsys):
        assert main(['sample', '--degrees', '3x8', '--steps', '50', '--thin', '10', '--format', 'csv']) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "sample,step,t"
        assert len(lines) == 6
        assert lines[-1].split(',')[1] == '50'

    def test_from_graph_file(self, tmp_path, petersen):
        graph = str(tmp_path / "petersen.txt")
        write_graph(petersen, graph)
        out = str(tmp_path / "run.json")
        assert main(['sample', '--graph', graph, '--steps', '100', '--out', out]) == 0
        assert load(out)['manifest']['inputs'] == [graph]

    @pytest.mark.parametrize("argv,code", [
        (['sample', '--degrees', '3,3,3'], 2),
        (['sample', '--degrees', '3x8', '--lambda', '0.5'], 2),
        (['sample', '--degrees', '3x8', '--nu', 'lots'], 2),
        (['sample', '--degrees', '1,1,1,1,1,1', '--chains', '0'], 2),
    ])
    def test_bad_input(self, argv, code):
        assert main(argv) == code

    def test_no_disjoint_edges(self):
        assert main(['sample', '--degrees', '2,2,2', '--steps', '5']) == 3


class TestPath:
    def test_emits_verified_path(self, tmp_path, k33):
        graph = str(tmp_path / "k33.txt")
        write_graph(k33, graph)
        out = str(tmp_path / "path.json")
        assert main(['path', '--graph', graph, '--switch', '0,3,1,4', '--out', out]) == 0
        data = load(out)
        assert data['case'] == 'I'
        assert data['length'] == 1
        assert data['verified']

    @pytest.mark.parametrize("switch", ['0,3,x,4', '0,3,1', '0,1,3,4'])
    def test_bad_switch(self, tmp_path, k33, switch):
        graph = str(tmp_path / "k33.txt")
        write_graph(k33, graph)
        assert main(['path', '--graph', graph, '--switch', switch]) == 2

    def test_minimum_degree(self, tmp_path, cycle5):
        graph = str(tmp_path / "c5.txt")
        write_graph(cycle5, graph)
        assert main(['path', '--graph', graph, '--switch', '0,1,2,3']) == 6

    def test_missing_graph(self, tmp_path):
        assert main(['path', '--graph', str(tmp_path / "nope.txt"), '--switch', '0,1,2,3']) == 2


class TestVerify:
    def test_cubic_six_passes(self, tmp_path, capsys):
        out = str(tmp_path / "verify.json")
        assert main(['verify', '--degrees', '3x6', '--lambda', '1', '2', '--nu', '1', '--out', out]) == 0
        table = capsys.readouterr().out
        assert 'PASS' in table
        assert 'FAIL' not in table
        data = load(out)
        assert data['size'] == 70
        assert data['checks']['ell(Sigma) <= 5']['status'] == 'PASS'

    def test_low_degree_is_reported_only(self, capsys):
        assert main(['verify', '--degrees', '2x4']) == 0
        table = capsys.readouterr().out
        assert 'INFO' in table
        assert 'FAIL' not in table

    def test_limit(self):
        assert main(['verify', '--degrees', '3x6', '--limit', '10']) == 4

    def test_uses_the_cache(self, tmp_path, monkeypatch):
        db = str(tmp_path / "cache.db")
        monkeypatch.setenv('TRICHAIN_CACHE_DB', db)
        assert main(['census', '--degrees', '3x6']) == 0
        assert main(['census', '--degrees', '3x6']) == 0
        assert [s['size'] for s in SpaceCache(db).list_spaces()] == [70]


class TestCensus:
    def test_report(self, tmp_path):
        out = str(tmp_path / "census.json")
        pmf = str(tmp_path / "pmf.csv")
        assert main(['census', '--degrees', '3x6', '--t0', '2', '--out', out, '--pmf-csv', pmf]) == 0
        data = load(out)
        assert data['size'] == 70
        assert data['census'] == {'0': 10, '2': 60}
        assert data['manifest']['outputs'] == [out, pmf]


class TestCache:
    def test_list_and_clear(self, tmp_path, monkeypatch):
        db = str(tmp_path / "cache.db")
        monkeypatch.setenv('TRICHAIN_CACHE_DB', db)
        assert main(['census', '--degrees', '3x6']) == 0

        listed = str(tmp_path / "list.json")
        assert main(['cache', 'list', '--out', listed]) == 0
        spaces = load(listed)['spaces']
        assert [s['size'] for s in spaces] == [70]
        assert load(listed)['manifest']['command'] == 'cache'

        cleared = str(tmp_path / "clear.json")
        assert main(['cache', 'clear', '--db', db, '--out', cleared]) == 0
        assert load(cleared)['removed'] == 1
        assert SpaceCache(db).list_spaces() == []

    def test_needs_a_database(self, monkeypatch):
        monkeypatch.delenv('TRICHAIN_CACHE_DB', raising=False)
        assert main(['cache', 'list']) == 2
