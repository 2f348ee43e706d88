import os

import numpy as np
import pytest

from litehar.cli import main
from litehar.kernels import load_kernels

SYNTH_ARGS = [
    "--classes", "3", "--channels", "6", "--length", "300",
    "--samples-per-class", "4", "--snr-db", "20", "--data-seed", "1",
]
RELOAD_ARGS = [
    "--source-rate", "500", "--target-rate", "500", "--amplitude-columns", "1,7",
]


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(root)] + SYNTH_ARGS) == 0
    return root


@pytest.fixture(scope="module")
def model_dir(tmp_path_factory, synth_dir):
    out = tmp_path_factory.mktemp("model")
    rc = main(
        ["train", "--data", str(synth_dir), "--out", str(out),
         "--num-kernels", "50", "--kernel-seed", "2"] + RELOAD_ARGS
    )
    assert rc == 0
    return out


class TestParser:
    def test_help_exits_zero(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--help"])
        assert exc.value.code == 0
        assert "extract" in capsys.readouterr().out

    def test_unknown_command_exits_nonzero(self):
        with pytest.raises(SystemExit) as exc:
            main(["frobnicate"])
        assert exc.value.code != 0

    def test_errors_are_reported_not_raised(self, capsys, tmp_path):
        rc = main(["evaluate", "--data", str(tmp_path / "nope"), "--out", str(tmp_path)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "litehar: error:" in err and "nope" in err

    def test_requires_a_data_source(self, capsys, tmp_path):
        assert main(["train", "--out", str(tmp_path)]) == 2
        assert "--data" in capsys.readouterr().err


class TestSynth:
    def test_writes_loadable_recordings(self, synth_dir):
        names = sorted(p.name for p in synth_dir.iterdir())
        assert len(names) == 12
        assert all(n.startswith("input_") and n.endswith(".csv") for n in names)
        assert sum("class00" in n for n in names) == 4

    def test_reload_hint_is_printed(self, tmp_path, capsys):
        main(["synth", "--out", str(tmp_path / "d"), "--classes", "2",
              "--channels", "3", "--length", "64", "--samples-per-class", "1"])
        out = capsys.readouterr().out
        assert "--amplitude-columns 1,4" in out


class TestExtract:
    def test_feature_csv_width_tracks_kernel_count(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "feats"
        rc = main(
            ["extract", "--data", str(synth_dir), "--out", str(out),
             "--num-kernels", "30"] + RELOAD_ARGS
        )
        assert rc == 0
        lines = (out / "features.csv").read_text().splitlines()
        header = [l for l in lines if not l.startswith("#")][0]
        first = [l for l in lines if not l.startswith("#")][1]
        assert len(first.split(",")) == len(header.split(","))
        assert len(first.split(",")) == 2 + 2 * 30
        assert (out / "kernels.csv").exists()


class TestTrainPredict:
    def test_model_artifacts(self, model_dir):
        assert (model_dir / "model.npz").exists()
        kernel_set = load_kernels(model_dir / "kernels.csv")
        assert len(kernel_set) == 50
        assert kernel_set.seed == 2

    def test_predictions_recover_the_labels(self, synth_dir, model_dir, capsys):
        inputs = sorted(str(p) for p in synth_dir.iterdir())[:4]
        rc = main(["predict", "--model", str(model_dir)] + RELOAD_ARGS + inputs)
        assert rc == 0
        out = capsys.readouterr().out
        lines = [l for l in out.splitlines() if ": class" in l]
        assert len(lines) == 4
        for line in lines:
            # files are named after their true class
            name, _, rest = line.partition(": ")
            predicted = rest.split()[0]
            assert predicted in os.path.basename(name)
            assert "votes:" in rest

    def test_predict_is_repeatable(self, synth_dir, model_dir, capsys):
        target = sorted(str(p) for p in synth_dir.iterdir())[0]
        main(["predict", "--model", str(model_dir)] + RELOAD_ARGS + [target])
        first = capsys.readouterr().out
        main(["predict", "--model", str(model_dir)] + RELOAD_ARGS + [target])
        assert capsys.readouterr().out == first

    def test_masked_predict_runs(self, synth_dir, model_dir, capsys):
        target = sorted(str(p) for p in synth_dir.iterdir())[0]
        rc = main(
            ["predict", "--model", str(model_dir), "--mask", "channels:1-3",
             "--channels-per-antenna", "3"] + RELOAD_ARGS + [target]
        )
        assert rc == 0
        assert "votes:" in capsys.readouterr().out

    def test_channel_count_mismatch(self, model_dir, tmp_path, capsys):
        four = tmp_path / "four"
        main(["synth", "--out", str(four), "--classes", "2", "--channels", "4",
              "--length", "300", "--samples-per-class", "1"])
        target = sorted(str(p) for p in four.iterdir())[0]
        rc = main(
            ["predict", "--model", str(model_dir), "--source-rate", "500",
             "--target-rate", "500", "--amplitude-columns", "1,5", target]
        )
        assert rc == 2
        assert "expected 6 channels, got 4" in capsys.readouterr().err

    def test_missing_input_names_the_path(self, model_dir, capsys):
        rc = main(["predict", "--model", str(model_dir)] + RELOAD_ARGS + ["/no/such.csv"])
        assert rc == 2
        assert "/no/such.csv" in capsys.readouterr().err

    def test_tampered_kernel_file_is_rejected(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "model"
        main(["train", "--data", str(synth_dir), "--out", str(out),
              "--num-kernels", "20", "--kernel-seed", "2"] + RELOAD_ARGS)
        kernels_csv = out / "kernels.csv"
        text = kernels_csv.read_text()
        kernels_csv.write_text(text.replace("seed=2", "seed=9", 1))
        target = sorted(str(p) for p in synth_dir.iterdir())[0]
        rc = main(["predict", "--model", str(out)] + RELOAD_ARGS + [target])
        assert rc == 2
        assert "model/kernel mismatch" in capsys.readouterr().err


class TestEvaluate:
    def _evaluate(self, synth_dir, out, extra=()):
        return main(
            ["evaluate", "--data", str(synth_dir), "--out", str(out),
             "--num-kernels", "40", "--folds", "3", "--runs", "1"]
            + RELOAD_ARGS + list(extra)
        )

    def test_writes_all_reports(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "reports"
        assert self._evaluate(synth_dir, out) == 0
        for name in ("report.csv", "confusion.csv", "subcarrier_accuracy.csv", "timing.csv"):
            assert (out / name).exists(), name
        stdout = capsys.readouterr().out
        assert "overall" in stdout and "average" in stdout

    def test_reruns_are_byte_identical(self, synth_dir, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert self._evaluate(synth_dir, a) == 0
        assert self._evaluate(synth_dir, b) == 0
        for name in ("report.csv", "confusion.csv", "subcarrier_accuracy.csv"):
            assert (a / name).read_bytes() == (b / name).read_bytes(), name

    def test_antenna_sweep(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "sweep"
        rc = self._evaluate(
            synth_dir, out, extra=["--antenna-sweep", "--channels-per-antenna", "2"]
        )
        assert rc == 0
        sweep = (out / "antenna_sweep.csv").read_text().splitlines()
        body = [l for l in sweep if l and not l.startswith("#") and not l.startswith("antennas")]
        assert len(body) >= 4  # full set, pairs, singles for 3 antennas
        for line in body:
            acc = float(line.split(",")[1])
            assert 0.0 <= acc <= 1.0


class TestConfigFile:
    def test_config_supplies_defaults_and_flags_override(self, synth_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "# kernel settings\n"
            "num-kernels = 25\n"
            "kernel_seed = 4   # underscores work too\n"
        )
        out_cfg = tmp_path / "from_cfg"
        main(["extract", "--data", str(synth_dir), "--out", str(out_cfg),
              "--config", str(cfg)] + RELOAD_ARGS)
        assert len(load_kernels(out_cfg / "kernels.csv")) == 25
        assert load_kernels(out_cfg / "kernels.csv").seed == 4

        out_flag = tmp_path / "overridden"
        main(["extract", "--data", str(synth_dir), "--out", str(out_flag),
              "--config", str(cfg), "--num-kernels", "35"] + RELOAD_ARGS)
        assert len(load_kernels(out_flag / "kernels.csv")) == 35

    def test_unknown_key_is_an_error(self, synth_dir, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("kernels = 10\n")
        rc = main(["extract", "--data", str(synth_dir), "--out", str(tmp_path / "o"),
                   "--config", str(cfg)])
        assert rc == 2
        err = capsys.readouterr().err
        assert "bad.cfg:1" in err and "kernels" in err

    def test_boolean_keys(self, synth_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("normalize = false\n")
        out = tmp_path / "raw"
        rc = main(["extract", "--data", str(synth_dir), "--out", str(out),
                   "--config", str(cfg), "--num-kernels", "10"] + RELOAD_ARGS)
        assert rc == 0

    def test_missing_config_argument(self, capsys):
        assert main(["extract", "--config"]) == 2
        assert "--config needs" in capsys.readouterr().err


class TestThreads:
    def test_thread_flag_is_accepted(self, synth_dir, tmp_path):
        rc = main(["extract", "--data", str(synth_dir), "--out", str(tmp_path / "t"),
                   "--num-kernels", "10", "--threads", "1"] + RELOAD_ARGS)
        assert rc == 0
