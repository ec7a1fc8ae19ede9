import csv
import io
import json
from pathlib import Path

import numpy as np
import pytest

from attrikernel.datasets import AttributeModel, sbm_generate, save_canonical
from attrikernel.evaluation import KMEANS, NO
from attrikernel.experiment import (
    ConfigError,
    ExperimentConfig,
    cell_seed,
    default_grid,
    evaluate,
    load_config,
    parse_grid,
    run_cell,
    run_experiment,
)
from attrikernel.graph import Graph, build_graph


def attributed_sbm(seed=0, sizes=(20, 20)):
    g = sbm_generate(list(sizes), 0.4, 0.03, seed=seed, attributes=AttributeModel(40, flip=0.05, density=0.2))
    return Graph(g.adjacency, g.attributes, g.labels, name=f"sbm{seed}")


SMALL_GRIDS = {
    "communicability": [0.05, 0.2],
    "heat": [0.1, 1.0],
    "pagerank": [0.5, 0.9],
    "fe": [0.5, 2.0],
    "scct": [1.0, 5.0],
}


def small_config(tmp_path, **kw):
    cfg = ExperimentConfig(
        datasets=["sbm0"], grids=dict(SMALL_GRIDS), restarts=3, output=str(tmp_path / "out"), **kw
    )
    return cfg.validate()


class TestConfig:
    def test_defaults_cover_benchmark_grid(self):
        cfg = ExperimentConfig().validate()
        assert len(cfg.datasets) == 6 and len(cfg.kernels) == 5
        kernel_cells = len(cfg.kernels) * (len(cfg.options) - 1)
        assert len(cfg.datasets) * (kernel_cells + 1) == 186

    def test_load(self, tmp_path):
        path = tmp_path / "exp.ini"
        path.write_text(
            "# comment\n"
            "datasets = cornell, texas\n"
            "data_dir = data\n"
            "kernels = FE, Heat\n"
            "options = CS, JS, No, kmeans\n"
            "beta = 0.3\n"
            "seed = 7\n"
            "alpha.fe = logspace(0.1, 10, 3)\n"
            "alpha.heat = 0.1, 1\n"
            "fe_diagonal_correction = no\n"
        )
        cfg = load_config(path)
        assert cfg.datasets == ["cornell", "texas"]
        assert cfg.data_dir == str((tmp_path / "data").resolve())
        assert cfg.kernels == ["fe", "heat"]
        assert cfg.options == ["CS", "JS", NO, KMEANS]
        assert cfg.beta == 0.3 and cfg.seed == 7
        np.testing.assert_allclose(cfg.grids["fe"], [0.1, 1.0, 10.0])
        assert cfg.grids["heat"] == [0.1, 1.0]
        assert cfg.fe_diagonal_correction is False

    @pytest.mark.parametrize(
        "text",
        ["beta = 2\n", "kernels = walk\n", "options = XX\n", "colour = red\n", "alpha.pagerank = 0.5, 1.0\n",
         "alpha.fe = -1\n", "restarts = 0\n", "fe_diagonal_correction = maybe\n", "seed = x\n"],
    )
    def test_rejects(self, tmp_path, text):
        path = tmp_path / "bad.ini"
        path.write_text(text)
        with pytest.raises(ConfigError):
            load_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.ini")

    def test_parse_grid(self):
        assert parse_grid("0.1 0.2,0.3") == [0.1, 0.2, 0.3]
        np.testing.assert_allclose(parse_grid("logspace(1, 100, 3)"), [1, 10, 100])

    def test_default_grids(self):
        A = sbm_generate([10, 10], 0.5, 0.1).adjacency
        assert default_grid("pagerank", A)[0] == 0.05 and default_grid("pagerank", A)[-1] == 0.95
        assert len(default_grid("fe", A)) == 10 and len(default_grid("scct", A)) == 8
        for kern in ("communicability", "heat"):
            grid = default_grid(kern, A)
            assert len(grid) == 12 and grid[0] == pytest.approx(0.01)
            # The largest exponent stays under the overflow guard.
            bound = A.sum(axis=1).max() * (2 if kern == "heat" else 1)
            assert grid[-1] * bound <= 700 + 1e-9


class TestCells:
    def test_two_cliques_every_kernel(self, tmp_path):
        g = sbm_generate([8, 8], 1.0, 0.0, seed=0)
        g = Graph(g.adjacency, None, g.labels, name="cliques")
        # Join the cliques with one edge so FE and SCCT stay defined.
        A = np.array(g.adjacency)
        A[0, 8] = A[8, 0] = 1.0
        g = Graph(A, None, g.labels, name="cliques")
        cfg = small_config(tmp_path)
        for kern in SMALL_GRIDS:
            assert run_cell(g, kern, NO, cfg).ari == 1.0

    def test_best_is_max_of_points(self, tmp_path):
        g = attributed_sbm(1)
        cfg = small_config(tmp_path)
        for kern in SMALL_GRIDS:
            for opt in ("CS", NO):
                cell = run_cell(g, kern, opt, cfg)
                scored = [p for p in cell.points if p.ari is not None]
                assert cell.ari == max(p.ari for p in scored)
                assert cell.alpha == min(p.alpha for p in scored if p.ari == cell.ari)

    def test_disconnected_fe_records_failure(self):
        g = build_graph([(0, 1), (2, 3)], labels=[0, 0, 1, 1], name="split")
        cells = evaluate(
            ExperimentConfig(datasets=["split"], kernels=["fe"], options=[NO], grids={"fe": [1.0]}).validate(),
            {"split": g},
        )
        assert cells[0].failed and "unreachable" in cells[0].error

    def test_no_option_ignores_beta(self, tmp_path):
        g = attributed_sbm(2)
        a = run_cell(g, "heat", NO, small_config(tmp_path, beta=0.1))
        b = run_cell(g, "heat", NO, small_config(tmp_path, beta=0.9))
        assert (a.ari, a.alpha, a.points) == (b.ari, b.alpha, b.points)

    def test_kmeans_cell(self, tmp_path):
        cell = run_cell(attributed_sbm(3), "", KMEANS, small_config(tmp_path))
        assert cell.kernel == "" and -1 <= cell.ari <= 1

    def test_seed_derivation(self):
        assert cell_seed(0, "a", "fe", "CS") == cell_seed(0, "a", "fe", "CS")
        assert len({cell_seed(0, "a", k, "CS") for k in SMALL_GRIDS}) == 5


class TestRun:
    def test_artifacts_and_determinism(self, tmp_path):
        graphs = {"sbm0": attributed_sbm(0), "sbm1": attributed_sbm(1)}
        outputs = []
        for tag, jobs in (("a", 1), ("b", 2)):
            cfg = small_config(tmp_path, jobs=jobs)
            cfg.datasets = ["sbm0", "sbm1"]
            cfg.output = str(tmp_path / tag)
            res = run_experiment(cfg, graphs)
            assert not res.failures
            outputs.append({name: p.read_bytes() for name, p in res.files.items()})
        a, b = outputs
        assert set(a) == {
            "table1.csv", "grid.csv", "table1.md", "table2.csv", "run.json",
            *(f"fig1_{k}.csv" for k in SMALL_GRIDS),
        }
        for name in a:
            if name != "run.json":
                assert a[name] == b[name], name
        rows = list(csv.DictReader(io.StringIO(a["table1.csv"].decode())))
        assert len(rows) == 2 * (5 * 6 + 1)
        manifest = json.loads(a["run.json"])
        assert manifest["failed_cells"] == 0 and len(manifest["cells"]) == len(rows)
        assert "numpy" in manifest["versions"]

    def test_canonical_dataset_entry(self, tmp_path):
        save_canonical(attributed_sbm(4), tmp_path / "g.graph")
        cfg = small_config(tmp_path, data_dir=str(tmp_path))
        cfg.datasets = ["g.graph"]
        cfg.kernels = ["heat"]
        cfg.options = ["CS"]
        cells = evaluate(cfg)
        assert cells[0].dataset == "g" and not cells[0].failed


def test_shipped_config_matches_defaults():
    path = Path(__file__).parents[1] / "configs" / "benchmark.ini"
    cfg = load_config(path)
    ref = ExperimentConfig().validate()
    assert (cfg.datasets, cfg.kernels, cfg.options, cfg.beta, cfg.seed, cfg.restarts, cfg.grids) == (
        ref.datasets, ref.kernels, ref.options, ref.beta, ref.seed, ref.restarts, ref.grids,
    )
