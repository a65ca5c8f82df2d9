import math

import pytest

from cqdec.cli import main
from cqdec.config import experiment_config_from_document, parse_kv_text
from cqdec.errors import ConfigError


def write_config(tmp_path, text, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


BASE_CONFIG = """\
channel = pure_pair
overlap = 0.70710678118654752
n_grid = [4]
R_grid = [0.25]
delta = 0.3
trials = 200
seed = 7
"""


class TestConfigParsing:
    def test_kv_parsing(self):
        doc = parse_kv_text("a = 1\nb = [1, 2]\n# comment\nc = text\n")
        assert doc == {"a": 1, "b": [1, 2], "c": "text"}

    def test_duplicate_key(self):
        with pytest.raises(ConfigError):
            parse_kv_text("a = 1\na = 2\n")

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "trine", "bogus": 1})

    def test_defaults(self):
        cfg = experiment_config_from_document({"channel": "classical_bit"})
        assert cfg.variants == ("rank_one",)
        assert cfg.ordering == "lexicographic"

    def test_channel_file_consistency(self):
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "file"})
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "trine", "channel_file": "x"})

    def test_bad_values(self):
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "trine", "n_grid": "nope"})
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "trine", "variants": ["bogus"]})
        with pytest.raises(ConfigError):
            experiment_config_from_document({"channel": "trine", "ordering": "bogus"})


class TestCapacity:
    def test_known_value(self, tmp_path, capsys):
        cfg = write_config(tmp_path, BASE_CONFIG)
        assert main(["capacity", "--config", cfg]) == 0
        out = capsys.readouterr().out
        header, row = out.strip().splitlines()
        assert header.startswith("channel,chi,")
        chi = float(row.split(",")[1])
        assert abs(chi - 0.600876) < 1e-5

    def test_classical_bit(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "channel = classical_bit\n")
        assert main(["capacity", "--config", cfg]) == 0
        chi = float(capsys.readouterr().out.strip().splitlines()[1].split(",")[1])
        assert abs(chi - 1.0) < 1e-9

    def test_identical_outputs(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "channel = pure_pair\noverlap = 1.0\n")
        assert main(["capacity", "--config", cfg]) == 0
        chi = float(capsys.readouterr().out.strip().splitlines()[1].split(",")[1])
        assert abs(chi) < 1e-9

    def test_channel_from_file(self, tmp_path, capsys):
        chan = tmp_path / "chan.cfg"
        chan.write_text(
            "letter_dim = 2\npriors = [0.5, 0.5]\n"
            "outputs = [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.0, 1.0]]]\n"
        )
        cfg = write_config(tmp_path, f"channel = file\nchannel_file = {chan}\n")
        assert main(["capacity", "--config", cfg]) == 0
        chi = float(capsys.readouterr().out.strip().splitlines()[1].split(",")[1])
        assert abs(chi - 1.0) < 1e-9


class TestVerify:
    def test_fixture_passes(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = pure_pair\noverlap = 0.5\nn_grid = [3, 4]\nR_grid = [0.25]\n"
            "delta = 0.3\nseed = 3\n",
        )
        out = tmp_path / "verify.csv"
        assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
        text = out.read_text()
        assert "mixture_identity" in text and "povm_completeness" in text
        assert ",fail" not in text

    def test_empty_window_reports_skip(self, tmp_path):
        # delta = 0 on a nondegenerate spectrum: empty window, skip not crash
        cfg = write_config(
            tmp_path,
            "channel = pure_pair\noverlap = 0.5\nn_grid = [3]\nR_grid = [0.25]\n"
            "delta = 0.0\ndelta_source = 0.4\nseed = 3\n",
        )
        out = tmp_path / "verify.csv"
        assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
        assert "skip" in out.read_text()

    def test_over_budget_point_is_skipped(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = pure_pair\noverlap = 0.5\nn_grid = [8]\nR_grid = [0.25]\n"
            "delta = 0.3\nseed = 3\ndim_budget = 16\n",
        )
        out = tmp_path / "verify.csv"
        assert main(["verify", "--config", cfg, "--out", str(out)]) == 0
        assert "skip:dim" in out.read_text()


class TestSimulate:
    def test_rows_and_reproducibility(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["simulate", "--config", cfg, "--out", str(out2)]) == 0
        assert out1.read_text() == out2.read_text()
        header, row = out1.read_text().strip().splitlines()
        cols = dict(zip(header.split(","), row.split(",")))
        assert cols["status"] == "ok"
        assert cols["N_n"] == "2"
        assert float(cols["err"]) == pytest.approx(
            (int(cols["errors"])) / int(cols["trials"])
        )
        assert float(cols["exact_err"]) == pytest.approx(0.867302, abs=1e-5)

    def test_seed_override_changes_output(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["simulate", "--config", cfg, "--seed", "8", "--out", str(out2)]) == 0
        assert out1.read_text() != out2.read_text()

    def test_classical_bit_error_free(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = classical_bit\nn_grid = [4, 6]\nR_grid = [0.5]\ndelta = 0.5\n"
            "delta_source = 2.0\ndelta_cond = 2.0\ntrials = 300\nseed = 5\n"
            "distinct_codewords = true\n",
        )
        out = tmp_path / "c.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        for line in out.read_text().strip().splitlines()[1:]:
            cols = dict(zip(CSV_HEADER, line.split(",")))
            assert cols["err"] == "0.0"
            assert cols["exact_err"] == "0.0"

    def test_skipped_points_have_reason(self, tmp_path):
        # rate too high for the typical set in distinct mode
        cfg = write_config(
            tmp_path,
            "channel = classical_bit\nn_grid = [4]\nR_grid = [1.5]\ndelta = 0.0\n"
            "trials = 10\nseed = 5\ndistinct_codewords = true\n",
        )
        out = tmp_path / "d.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        row = out.read_text().strip().splitlines()[1]
        cols = dict(zip(CSV_HEADER, row.split(",")))
        assert cols["status"] == "skipped"
        assert cols["reason"] != ""

    def test_report_format(self, tmp_path):
        cfg = write_config(tmp_path, BASE_CONFIG)
        out = tmp_path / "r.txt"
        assert main(["simulate", "--config", cfg, "--format", "report", "--out", str(out)]) == 0
        assert "[record 0]" in out.read_text()

    def test_parallel_jobs_match_serial(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = pure_pair\noverlap = 0.5\nn_grid = [3, 4]\nR_grid = [0.25, 0.5]\n"
            "delta = 0.3\ntrials = 100\nseed = 11\n",
        )
        out1, out2 = tmp_path / "s.csv", tmp_path / "p.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out1)]) == 0
        assert main(["simulate", "--config", cfg, "--jobs", "2", "--out", str(out2)]) == 0
        assert out1.read_text() == out2.read_text()


class TestCompare:
    def test_three_variants_share_codebooks(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = pure_pair\noverlap = 0.70710678118654752\nn_grid = [4]\n"
            "R_grid = [0.5]\ndelta = 0.3\ntrials = 200\nseed = 9\n",
        )
        out = tmp_path / "cmp.csv"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()[1:]
        rows = [dict(zip(CSV_HEADER, l.split(","))) for l in lines]
        assert sorted(r["variant"] for r in rows) == ["pgm", "rank_one", "subspace"]
        assert len({r["seed"] for r in rows}) == 1  # shared codebook seed
        assert len({r["N_n"] for r in rows}) == 1

    def test_orthogonal_alphabet_all_zero(self, tmp_path):
        cfg = write_config(
            tmp_path,
            "channel = classical_bit\nn_grid = [4]\nR_grid = [0.5]\ndelta = 0.5\n"
            "delta_source = 2.0\ndelta_cond = 2.0\ntrials = 200\nseed = 9\n"
            "distinct_codewords = true\n",
        )
        out = tmp_path / "cmp0.csv"
        assert main(["compare", "--config", cfg, "--out", str(out)]) == 0
        for line in out.read_text().strip().splitlines()[1:]:
            cols = dict(zip(CSV_HEADER, line.split(",")))
            assert float(cols["err"]) == 0.0


class TestExitCodes:
    def test_config_error(self, tmp_path, capsys):
        cfg = write_config(tmp_path, "channel = pure_pair\noverlap = 0.5\nbogus = 1\n")
        assert main(["simulate", "--config", cfg]) == 1

    def test_missing_file(self):
        assert main(["simulate", "--config", "/nonexistent/x.cfg"]) == 1


CSV_HEADER = (
    "n,R,variant,seed,status,reason,N_n,M,dim_H,trials,errors,err,ci_low,ci_high,"
    "abort_frac,misdecode_frac,exact_err,exact_abort_frac,exact_misdecode_frac,"
    "chi,margin"
).split(",")
