import json

import numpy as np
import pytest

from phipart import harness
from phipart.errors import ConfigError, ParseError
from phipart.harness import ExperimentConfig, replication_seeds, run_bound_suite, run_convergence
from phipart.io import SCHEMA_VERSION, dumps_report, load_samples, write_report, write_samples
from phipart.synthdata import draw, gaussian


class TestIO:
    def test_three_by_two(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("a,b\n1,2\n3,4\n5,6\n")
        np.testing.assert_array_equal(load_samples(f), [[1, 2], [3, 4], [5, 6]])

    def test_ragged_row_named(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("1,2\n3\n")
        with pytest.raises(ParseError, match="row 2"):
            load_samples(f)

    def test_bad_cell_named(self, tmp_path):
        f = tmp_path / "x.csv"
        f.write_text("1,2\n3,abc\n")
        with pytest.raises(ParseError, match="column 2"):
            load_samples(f)

    def test_round_trip_exact(self, tmp_path):
        x = draw(gaussian([0, 1, 2], 1.0, 3), 200, 0) * np.pi * 1e-7
        f = tmp_path / "x.csv"
        write_samples(f, x)
        np.testing.assert_array_equal(load_samples(f), x)

    def test_report_has_schema_version(self, tmp_path):
        f = tmp_path / "r.json"
        write_report(f, {"a": np.float64(1.5), "b": np.arange(3)})
        obj = json.loads(f.read_text())
        assert obj == {"schema_version": SCHEMA_VERSION, "a": 1.5, "b": [0, 1, 2]}
        assert dumps_report({}).endswith("\n")


def small_config(**kw):
    base = dict(
        p_spec=gaussian(0.0), q_spec=gaussian(1.0), family="kl",
        n_schedule=[256, 1024], m0_schedule=[4, 16], replications=4, base_seed=3,
    )
    base.update(kw)
    return ExperimentConfig(**base)


class TestConfig:
    def test_divisibility(self):
        with pytest.raises(ConfigError):
            small_config(n_schedule=[1000], m0_schedule=[3])
        assert small_config(n_schedule=[1000], m0_schedule=[3], round_q_up=True)

    def test_validation(self):
        with pytest.raises(ConfigError):
            small_config(replications=0)
        with pytest.raises(ConfigError):
            small_config(n_schedule=[])
        with pytest.raises(ConfigError):
            small_config(q_spec=gaussian(0.0, 1.0, 2))

    def test_json_round_trip(self):
        cfg = small_config()
        assert ExperimentConfig.from_json(json.loads(json.dumps(cfg.to_json()))) == cfg

    def test_missing_distribution(self):
        with pytest.raises(ConfigError):
            ExperimentConfig.from_json({"p": {"kind": "GaussianDiag"}})


class TestConvergence:
    def test_rows_sorted_and_decomposed(self):
        rows = run_convergence(small_config())
        assert [(r.n, r.m) for r in rows] == [(256, 4), (256, 16), (1024, 4), (1024, 16)]
        for r in rows:
            assert r.oracle_value == pytest.approx(0.5)
            assert r.std_estimate >= 0
            assert r.triangle_violations == 0
            est = np.array(r.estimates)
            assert np.all(np.abs(est - 0.5) <= np.array(r.T1) + np.array(r.T2) + 1e-12)

    def test_deterministic_report(self):
        a = dumps_report({"rows": [r.to_json() for r in run_convergence(small_config())]})
        b = dumps_report({"rows": [r.to_json() for r in run_convergence(small_config(), threads=3)]})
        assert a == b

    def test_replication_order_irrelevant(self):
        cfg = small_config(n_schedule=[256], m0_schedule=[4])
        ks = list(range(cfg.replications))
        fwd = [harness._replicate(cfg, 256, 4, k, 0.5)[0] for k in ks]
        rev = [harness._replicate(cfg, 256, 4, k, 0.5)[0] for k in reversed(ks)]
        assert np.mean(fwd) == pytest.approx(np.mean(rev), rel=1e-15)
        assert np.std(fwd) == pytest.approx(np.std(rev), rel=1e-12)

    def test_identical_distributions(self):
        rows = run_convergence(small_config(q_spec=gaussian(0.0), n_schedule=[256, 4096], m0_schedule=[4]))
        assert rows[0].oracle_value == 0.0
        assert rows[1].mean_abs_error < rows[0].mean_abs_error

    def test_seed_streams_distinct(self):
        sp, sq = replication_seeds(0, 0)
        assert not np.array_equal(draw(gaussian(), 5, sp), draw(gaussian(), 5, sq))

    def test_round_q_up(self):
        cfg = small_config(n_schedule=[1000], m0_schedule=[32], replications=2, round_q_up=True)
        (row,) = run_convergence(cfg)
        assert row.n == 1000 and row.n2 == 1024


class TestSuites:
    def test_growth(self):
        rep = run_bound_suite("growth")
        assert rep["passed"] and rep["violations"] == 0
        d1 = {c["name"]: c for c in rep["checks"]}
        assert d1["growth d=1 n=3 m0=2"]["observed"] == 7
        assert d1["growth d=1 n=3 m0=2"]["bound"] == pytest.approx(28)

    def test_chernoff(self):
        assert run_bound_suite("chernoff")["passed"]

    def test_gamma_small(self):
        checks = harness.gamma_suite(seeds=5, m0s=(2, 5))
        assert all(c["passed"] for c in checks)

    def test_gamma2_small(self):
        checks = harness.gamma2_suite(seeds=40, m0s=(4,))
        assert all(c["passed"] for c in checks)

    def test_count_1d_matches_hand(self):
        assert harness.count_induced_partitions_1d(6, 2) == 7
        assert harness.count_induced_partitions_1d(3, 1) == 1

    def test_unknown_suite(self):
        with pytest.raises(ConfigError):
            run_bound_suite("nope")
