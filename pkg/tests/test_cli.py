import csv
import json
from pathlib import Path

import numpy as np
import pytest

from wavefarm.cli import main
from wavefarm.dataset import SCENARIOS, generate_synthetic_dataset, write_dataset_csv


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli_data")
    for i, name in enumerate(SCENARIOS):
        ds = generate_synthetic_dataset(name, 120, seed=50 + i)
        write_dataset_csv(ds, out / f"{name}.csv")
    return out


def data_flags(data_dir, *scenarios):
    flags = []
    for name in scenarios or SCENARIOS:
        flags += ["--data", f"{name}={data_dir / name}.csv"]
    return flags


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


TRAIN_FAST = ["--epochs", "3", "--hidden", "8", "--batch-size", "32"]


class TestStats:
    def test_outputs_written(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(["stats", *data_flags(data_dir, "Sydney"), "--out", str(out)])
        assert rc == 0
        doc = json.loads((out / "Sydney_summary.json").read_text())
        assert doc["record_count"] == 120
        assert doc["min_distance"] <= doc["mean_distance"] <= doc["max_distance"]
        rows = read_csv(out / "Sydney_distance_power.csv")
        assert rows[0] == ["farm_mean_distance", "total_power"]
        assert len(rows) == 121
        assert (out / "Sydney_distance_power_binned.csv").exists()
        dist_rows = read_csv(out / "Sydney_distributions.csv")
        assert dist_rows[0] == ["variable", "bin_left", "bin_right", "count"]
        assert {r[0] for r in dist_rows[1:]} == {"distance", "power"}
        assert (out / "resolved_config.json").exists()
        assert (out / "Sydney_distance_power.png").exists()
        assert (out / "Sydney_distributions.png").exists()

    def test_no_plots_flag(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(["stats", *data_flags(data_dir, "Perth"), "--out", str(out), "--no-plots"])
        assert rc == 0
        assert not (out / "Perth_distance_power.png").exists()

    def test_missing_file_fails_fast(self, tmp_path):
        rc = main(["stats", "--data", "Sydney=/nonexistent.csv", "--out", str(tmp_path)])
        assert rc == 2

    def test_no_data_configured(self, tmp_path):
        rc = main(["stats", "--out", str(tmp_path)])
        assert rc == 2

    def test_idempotent_outputs(self, data_dir, tmp_path):
        args = ["stats", *data_flags(data_dir, "Adelaide"), "--no-plots"]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main([*args, "--out", str(out1)]) == 0
        assert main([*args, "--out", str(out2)]) == 0
        for name in ("Adelaide_summary.json", "Adelaide_distance_power.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


class TestOutliers:
    def test_uniform_fixture_unflagged(self, data_dir, tmp_path):
        # positions are uniform on the site square, so LOF sees uniform density
        out = tmp_path / "out"
        rc = main(
            [
                "outliers", *data_flags(data_dir, "Sydney"), "--out", str(out),
                "--k", "10", "--feature-space", "positions",
            ]
        )
        assert rc == 0
        doc = json.loads((out / "Sydney_outliers.json").read_text())
        assert doc["counts"]["lof"] == 0
        rows = read_csv(out / "Sydney_outlier_records.csv")
        assert rows[0] == [
            "record_index", "lof_score", "z_score", "lof_flag", "z_flag", "iqr_flag",
        ]
        assert len(rows) == 121

    def test_planted_extreme_flagged(self, tmp_path):
        ds = generate_synthetic_dataset("Perth", 100, seed=3, noise=0.001)
        # plant one record with absurd total power far outside the cloud
        ds.powers[40] *= 40.0
        ds.totals[40] = ds.powers[40].sum()
        path = tmp_path / "Perth.csv"
        write_dataset_csv(ds, path)
        out = tmp_path / "out"
        rc = main(["outliers", "--data", f"Perth={path}", "--out", str(out), "--k", "10"])
        assert rc == 0
        doc = json.loads((out / "Perth_outliers.json").read_text())
        assert doc["lof_flags"][40]
        assert doc["z_flags"][40]
        assert doc["iqr_flags"][40]

    def test_positions_feature_space(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(
            [
                "outliers", *data_flags(data_dir, "Tasmania"), "--out", str(out),
                "--k", "10", "--feature-space", "positions",
            ]
        )
        assert rc == 0
        assert (out / "Tasmania_outliers.json").exists()


class TestTrainEvaluate:
    def test_train_then_evaluate(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(
            ["train", *data_flags(data_dir, "Sydney"), "--out", str(out), *TRAIN_FAST]
        )
        assert rc == 0
        history = json.loads((out / "Sydney_history.json").read_text())
        assert len(history["train_loss"]) == len(history["val_loss"]) > 0
        best = history["best_epoch"]
        assert history["val_loss"][best] == min(history["val_loss"])
        rows = read_csv(out / "Sydney_loss_curve.csv")
        assert rows[0] == ["epoch", "train_mse", "val_mse"]
        assert (out / "Sydney_loss_curve.png").exists()

        rc = main(
            [
                "evaluate", *data_flags(data_dir, "Sydney"), "--out", str(out),
                "--model", str(out / "Sydney_model.json"), "--eval-scenario", "Sydney",
            ]
        )
        assert rc == 0
        report = json.loads((out / "Sydney_metrics.json").read_text())
        assert report["mse"] == pytest.approx(history["val_loss"][best], abs=1e-12)

    def test_combined_mode(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(
            [
                "train", *data_flags(data_dir, "Sydney", "Perth"), "--out", str(out),
                "--combined", *TRAIN_FAST, "--no-plots",
            ]
        )
        assert rc == 0
        assert (out / "combined_model.json").exists()
        for name in ("Sydney", "Perth"):
            doc = json.loads((out / f"combined_{name}_metrics.json").read_text())
            assert doc["mse"] >= 0

    def test_byte_identical_reruns(self, data_dir, tmp_path):
        args = [
            "train", *data_flags(data_dir, "Adelaide"), *TRAIN_FAST,
            "--seed", "7", "--no-plots",
        ]
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main([*args, "--out", str(out1)]) == 0
        assert main([*args, "--out", str(out2)]) == 0
        for name in ("Adelaide_model.json", "Adelaide_history.json", "Adelaide_loss_curve.csv"):
            assert (out1 / name).read_bytes() == (out2 / name).read_bytes()

    def test_evaluate_width_mismatch(self, data_dir, tmp_path):
        out = tmp_path / "out"
        assert (
            main(["train", *data_flags(data_dir, "Sydney"), "--out", str(out), *TRAIN_FAST])
            == 0
        )
        # corrupt the scaler width so the model no longer matches the data
        doc = json.loads((out / "Sydney_model.json").read_text())
        doc["feature_scaler"]["stat_a"] = doc["feature_scaler"]["stat_a"][:16]
        doc["feature_scaler"]["stat_b"] = doc["feature_scaler"]["stat_b"][:16]
        bad = out / "bad_model.json"
        bad.write_text(json.dumps(doc))
        rc = main(
            [
                "evaluate", *data_flags(data_dir, "Sydney"), "--out", str(out),
                "--model", str(bad), "--eval-scenario", "Sydney",
            ]
        )
        assert rc == 1


class TestPlotdata:
    def test_outputs(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(
            ["plotdata", *data_flags(data_dir, "Perth"), "--out", str(out), "--sample", "10"]
        )
        assert rc == 0
        pca_rows = read_csv(out / "Perth_pca_scores.csv")
        assert pca_rows[0] == ["record_index", "pc1", "pc2"]
        assert len(pca_rows) == 121
        layout_rows = read_csv(out / "Perth_layouts.csv")
        assert layout_rows[0] == ["record_index", "wec", "x", "y"]
        assert len(layout_rows) == 1 + 10 * 16  # 160 scatter points
        assert (out / "Perth_pca_scores.png").exists()
        assert (out / "Perth_layouts.png").exists()


class TestConfigFile:
    def test_config_file_with_flag_override(self, data_dir, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(
            json.dumps(
                {
                    "scenario_paths": {"Sydney": str(data_dir / "Sydney.csv")},
                    "output_dir": str(tmp_path / "from_file"),
                    "seed": 5,
                    "render_plots": False,
                }
            )
        )
        out = tmp_path / "override"
        rc = main(["stats", "--config", str(cfg_path), "--out", str(out)])
        assert rc == 0  # --out wins over the file
        assert (out / "Sydney_summary.json").exists()
        resolved = json.loads((out / "resolved_config.json").read_text())
        assert resolved["seed"] == 5
        assert resolved["output_dir"] == str(out)

    def test_unknown_config_key(self, tmp_path):
        cfg_path = tmp_path / "run.json"
        cfg_path.write_text(json.dumps({"bogus": 1}))
        assert main(["stats", "--config", str(cfg_path)]) == 2

    def test_scenario_restriction(self, data_dir, tmp_path):
        out = tmp_path / "out"
        rc = main(
            [
                "stats", *data_flags(data_dir), "--scenario", "Perth",
                "--out", str(out), "--no-plots",
            ]
        )
        assert rc == 0
        assert (out / "Perth_summary.json").exists()
        assert not (out / "Sydney_summary.json").exists()


class TestFixtures:
    def test_generates_all_scenarios(self, tmp_path):
        rc = main(["fixtures", "--out", str(tmp_path / "fx"), "--rows", "20", "--seed", "3"])
        assert rc == 0
        for name in SCENARIOS:
            assert (tmp_path / "fx" / f"{name}.csv").exists()
        from wavefarm.dataset import load_dataset

        ds = load_dataset(tmp_path / "fx" / "Sydney.csv", "Sydney")
        assert len(ds) == 20
