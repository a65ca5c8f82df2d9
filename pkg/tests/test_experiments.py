import numpy as np
import pytest

from cqdec.budgets import Budgets
from cqdec.channel import builtin_channel
from cqdec.config import experiment_config_from_document
from cqdec.experiments import binomial_interval, point_seed, run_grid, run_point


def make_config(**overrides):
    doc = {
        "channel": "pure_pair",
        "overlap": 0.5,
        "n_grid": [3, 4],
        "R_grid": [0.25],
        "delta": 0.3,
        "trials": 100,
        "seed": 13,
    }
    doc.update(overrides)
    return experiment_config_from_document(doc)


class TestPointSeed:
    def test_deterministic_and_distinct(self):
        assert point_seed(1, 0, 0) == point_seed(1, 0, 0)
        seeds = {point_seed(1, i, j) for i in range(4) for j in range(4)}
        assert len(seeds) == 16


class TestBinomialInterval:
    def test_degenerate(self):
        assert binomial_interval(0, 100) == (0.0, 0.0)
        assert binomial_interval(100, 100) == (1.0, 1.0)

    def test_contains_truth(self, rng):
        p = 0.3
        hits = 0
        for _ in range(200):
            k = rng.binomial(500, p)
            lo, hi = binomial_interval(int(k), 500)
            hits += lo <= p <= hi
        assert hits >= 195  # 3-sigma interval rarely misses


class TestRunPoint:
    def test_ok_row(self):
        cfg = make_config()
        ch = builtin_channel("pure_pair", overlap=0.5)
        res = run_point(ch, cfg, 4, 0.25, "rank_one", seed=99)
        assert res.status == "ok"
        assert res.trials == 100
        assert res.err == pytest.approx(res.errors / res.trials)
        assert res.exact_err is not None  # auto policy at this size
        assert res.margin == pytest.approx(res.chi - 0.3 - 0.25)

    def test_pgm_variant(self):
        cfg = make_config()
        ch = builtin_channel("pure_pair", overlap=0.5)
        res = run_point(ch, cfg, 4, 0.25, "pgm", seed=99)
        assert res.status == "ok"
        assert res.err == res.exact_err
        assert res.trials == 0

    def test_budget_skip_reason(self):
        cfg = make_config()
        ch = builtin_channel("pure_pair", overlap=0.5)
        res = run_point(ch, cfg, 4, 0.25, "rank_one", seed=99, budgets=Budgets(dim_limit=4))
        assert res.status == "skipped"
        assert res.reason == "dim"

    def test_exact_never_policy(self):
        cfg = make_config(exact="never")
        ch = builtin_channel("pure_pair", overlap=0.5)
        res = run_point(ch, cfg, 4, 0.25, "rank_one", seed=99)
        assert res.exact_err is None


class TestRunGrid:
    def test_rows_sorted_and_seed_shared_across_variants(self):
        cfg = make_config()
        ch = builtin_channel("pure_pair", overlap=0.5)
        rows = run_grid(ch, cfg, variants=("rank_one", "pgm"))
        assert [(r.n, r.rate, r.variant) for r in rows] == sorted(
            (r.n, r.rate, r.variant) for r in rows
        )
        by_point = {}
        for r in rows:
            by_point.setdefault((r.n, r.rate), set()).add(r.seed)
        assert all(len(seeds) == 1 for seeds in by_point.values())

    def test_env_override_budget(self, monkeypatch, tmp_path):
        from cqdec.cli import main

        cfg_text = (
            "channel = pure_pair\noverlap = 0.5\nn_grid = [4]\nR_grid = [0.25]\n"
            "delta = 0.3\ntrials = 10\nseed = 3\n"
        )
        path = tmp_path / "e.cfg"
        path.write_text(cfg_text)
        out = tmp_path / "o.csv"
        monkeypatch.setenv("CQDEC_DIM_BUDGET", "4")
        assert main(["simulate", "--config", str(path), "--out", str(out)]) == 0
        row = out.read_text().strip().splitlines()[1]
        assert ",skipped,dim," in row
