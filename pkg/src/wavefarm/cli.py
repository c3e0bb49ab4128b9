"""Command-line pipeline: stats, outliers, train, evaluate, plotdata, fixtures.

Configuration comes from an optional JSON file plus flag overrides (flags
win). A copy of the resolved configuration is written next to the outputs
so every run is reproducible from its artifacts. JSON/CSV outputs are
byte-deterministic for a fixed config and seed; rendered PNG figures sit
alongside them as a convenience.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from wavefarm import geometry, metrics, mlp, outliers, plots, preprocess
from wavefarm.dataset import (
    SCENARIOS,
    DatasetError,
    FarmDataset,
    generate_synthetic_dataset,
    load_dataset,
    validate_dataset,
    write_dataset_csv,
)


@dataclass
class RunConfig:
    """Fully resolved run configuration; all paths checked before work starts."""

    scenario_paths: dict[str, str] = field(default_factory=dict)
    output_dir: str = "out"
    seed: int = 42
    test_fraction: float = 0.2
    shuffled: bool = True
    scaler_kind: str = "minmax"
    hidden_layers: tuple[int, ...] = (64, 64)
    activation: str = "relu"
    learning_rate: float = 1e-3
    batch_size: int = 256
    max_epochs: int = 100
    early_stop_patience: int = 10
    optimizer: str = "adam"
    lof_k: int = outliers.DEFAULT_LOF_K
    lof_threshold: float = outliers.DEFAULT_LOF_THRESHOLD
    z_threshold: float = outliers.DEFAULT_Z_THRESHOLD
    iqr_multiplier: float = outliers.DEFAULT_IQR_MULTIPLIER
    feature_space: str = "distance-power"  # or "positions"
    combined_mode: bool = False
    layout_sample: int = 10
    strict: bool = False
    render_plots: bool = True

    def to_dict(self) -> dict:
        return {
            "scenario_paths": dict(self.scenario_paths),
            "output_dir": self.output_dir,
            "seed": self.seed,
            "test_fraction": self.test_fraction,
            "shuffled": self.shuffled,
            "scaler_kind": self.scaler_kind,
            "hidden_layers": list(self.hidden_layers),
            "activation": self.activation,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "early_stop_patience": self.early_stop_patience,
            "optimizer": self.optimizer,
            "lof_k": self.lof_k,
            "lof_threshold": self.lof_threshold,
            "z_threshold": self.z_threshold,
            "iqr_multiplier": self.iqr_multiplier,
            "feature_space": self.feature_space,
            "combined_mode": self.combined_mode,
            "layout_sample": self.layout_sample,
            "strict": self.strict,
            "render_plots": self.render_plots,
        }

    def split_spec(self) -> preprocess.SplitSpec:
        return preprocess.SplitSpec(
            test_fraction=self.test_fraction, seed=self.seed, shuffled=self.shuffled
        )

    def mlp_config(self) -> mlp.MlpConfig:
        return mlp.MlpConfig(
            hidden_layers=self.hidden_layers,
            activation=self.activation,
            learning_rate=self.learning_rate,
            batch_size=self.batch_size,
            max_epochs=self.max_epochs,
            early_stop_patience=self.early_stop_patience,
            optimizer=self.optimizer,
            seed=self.seed,
        )


class CliError(Exception):
    pass


def _load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.is_file():
            raise CliError(f"config file not found: {path}")
        doc = json.loads(path.read_text(encoding="utf-8"))
        known = set(RunConfig().to_dict())
        for key, value in doc.items():
            if key not in known:
                raise CliError(f"unknown config key {key!r}")
            if key == "hidden_layers":
                value = tuple(int(v) for v in value)
            setattr(cfg, key, value)

    # flag overrides win over the file
    if getattr(args, "data", None):
        for item in args.data:
            if "=" not in item:
                raise CliError(f"--data expects SCENARIO=PATH, got {item!r}")
            name, path = item.split("=", 1)
            if name not in SCENARIOS:
                raise CliError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
            cfg.scenario_paths[name] = path
    if getattr(args, "out", None):
        cfg.output_dir = args.out
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "scenario", None):
        unknown = set(args.scenario) - set(SCENARIOS)
        if unknown:
            raise CliError(f"unknown scenario(s): {sorted(unknown)}")
        cfg.scenario_paths = {
            s: p for s, p in cfg.scenario_paths.items() if s in args.scenario
        }
    if getattr(args, "k", None) is not None:
        cfg.lof_k = args.k
    if getattr(args, "hidden", None):
        cfg.hidden_layers = tuple(int(w) for w in args.hidden.split(","))
    if getattr(args, "epochs", None) is not None:
        cfg.max_epochs = args.epochs
    if getattr(args, "batch_size", None) is not None:
        cfg.batch_size = args.batch_size
    if getattr(args, "combined", False):
        cfg.combined_mode = True
    if getattr(args, "no_shuffle", False):
        cfg.shuffled = False
    if getattr(args, "strict", False):
        cfg.strict = True
    if getattr(args, "no_plots", False):
        cfg.render_plots = False
    if getattr(args, "feature_space", None):
        cfg.feature_space = args.feature_space
    if getattr(args, "sample", None) is not None:
        cfg.layout_sample = args.sample

    if not cfg.scenario_paths:
        raise CliError("no scenario files configured; use --data SCENARIO=PATH or a config file")
    for name, path in cfg.scenario_paths.items():
        if not Path(path).is_file():
            raise CliError(f"{name}: dataset file not found: {path}")
    return cfg


def _prepare_outdir(cfg: RunConfig) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(
        json.dumps(cfg.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return out


def _load_scenario(cfg: RunConfig, name: str) -> FarmDataset:
    ds = load_dataset(cfg.scenario_paths[name], name)
    report = validate_dataset(ds)
    if report.status != "pass":
        msg = (
            f"{name}: validation {report.status}: "
            f"{len(report.range_violations)} range violation(s), "
            f"{len(report.sum_mismatches)} sum mismatch(es)"
        )
        if cfg.strict:
            raise DatasetError(msg)
        print(msg, file=sys.stderr)
    return ds


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _binned_means(dist: np.ndarray, power: np.ndarray, width: float = 10.0):
    """Mean power in fixed-width distance bins; empty bins are dropped."""
    lo = np.floor(dist.min() / width) * width
    idx = ((dist - lo) // width).astype(int)
    centers, means = [], []
    for b in np.unique(idx):
        mask = idx == b
        centers.append(lo + (b + 0.5) * width)
        means.append(float(power[mask].mean()))
    return np.array(centers), np.array(means)


def _for_each_scenario(cfg: RunConfig, fn) -> int:
    """Run fn(name, out) per configured scenario; report failures, keep going."""
    out = _prepare_outdir(cfg)
    failed = []
    for name in sorted(cfg.scenario_paths):
        try:
            fn(name, out)
        except Exception as exc:  # noqa: BLE001 - CLI boundary
            failed.append(name)
            print(f"{name}: {exc}", file=sys.stderr)
    if failed:
        print(f"failed scenarios: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_stats(cfg: RunConfig) -> int:
    def run(name: str, out: Path) -> None:
        ds = _load_scenario(cfg, name)
        summary = geometry.farm_summary(ds)
        (out / f"{name}_summary.json").write_text(
            summary.to_json(indent=2) + "\n", encoding="utf-8"
        )

        dist = geometry.farm_mean_distances(ds)
        power = ds.totals
        _write_csv(
            out / f"{name}_distance_power.csv",
            ["farm_mean_distance", "total_power"],
            ([repr(float(d)), repr(float(p))] for d, p in zip(dist, power)),
        )
        centers, means = _binned_means(dist, power)
        _write_csv(
            out / f"{name}_distance_power_binned.csv",
            ["bin_center", "mean_power"],
            ([repr(float(c)), repr(float(m))] for c, m in zip(centers, means)),
        )

        rows = []
        for label, series in (("distance", dist), ("power", power)):
            counts, edges = np.histogram(series, bins=50)
            rows.extend(
                [label, repr(float(edges[i])), repr(float(edges[i + 1])), int(counts[i])]
                for i in range(len(counts))
            )
        _write_csv(
            out / f"{name}_distributions.csv",
            ["variable", "bin_left", "bin_right", "count"],
            rows,
        )

        if cfg.render_plots:
            plots.plot_distance_power(
                dist, power, out / f"{name}_distance_power.png", name, centers, means
            )
            plots.plot_distributions(dist, power, out / f"{name}_distributions.png", name)
        print(
            f"{name}: {len(ds)} records, mean distance {summary.mean_distance:.6f} m, "
            f"mean power {summary.mean_power:.1f} W, r {summary.pearson_r:.4f}"
        )

    return _for_each_scenario(cfg, run)


def _outlier_features(cfg: RunConfig, ds: FarmDataset) -> np.ndarray:
    if cfg.feature_space == "positions":
        return ds.positions  # already on one scale (meters)
    dist = geometry.farm_mean_distances(ds)
    feats = np.column_stack([dist, ds.totals])
    # meters vs watts differ by ~4 orders of magnitude; standardize so LOF
    # distances weigh both columns
    std = feats.std(axis=0)
    return (feats - feats.mean(axis=0)) / np.where(std > 0, std, 1.0)


def cmd_outliers(cfg: RunConfig) -> int:
    def run(name: str, out: Path) -> None:
        ds = _load_scenario(cfg, name)
        features = _outlier_features(cfg, ds)
        report = outliers.screen(
            features,
            ds.totals,
            lof_params=outliers.LofParams(k=cfg.lof_k),
            lof_threshold=cfg.lof_threshold,
            z_threshold=cfg.z_threshold,
            iqr_multiplier=cfg.iqr_multiplier,
        )
        (out / f"{name}_outliers.json").write_text(
            report.to_json(indent=2) + "\n", encoding="utf-8"
        )
        _write_csv(
            out / f"{name}_outlier_records.csv",
            ["record_index", "lof_score", "z_score", "lof_flag", "z_flag", "iqr_flag"],
            (
                [
                    i,
                    repr(float(report.lof_scores[i])),
                    repr(float(report.z_scores[i])),
                    int(report.lof_flags[i]),
                    int(report.z_flags[i]),
                    int(report.iqr_flags[i]),
                ]
                for i in range(len(ds))
            ),
        )
        if cfg.render_plots:
            dist = geometry.farm_mean_distances(ds)
            plots.plot_outlier_scores(
                dist, ds.totals, report.lof_scores, report.lof_flags,
                out / f"{name}_outliers.png", name,
            )
        counts = report.to_dict()["counts"]
        print(
            f"{name}: {len(ds)} records, flagged lof={counts['lof']} "
            f"z={counts['zscore']} iqr={counts['iqr']}"
        )

    return _for_each_scenario(cfg, run)


def _split_and_scale(cfg: RunConfig, ds: FarmDataset):
    """Split one scenario, fit scalers on its training rows, return arrays."""
    train_idx, test_idx = preprocess.train_test_split(len(ds), cfg.split_spec())
    x_scaler = preprocess.fit_scaler(ds.positions[train_idx], cfg.scaler_kind)
    y_scaler = preprocess.fit_scaler(ds.totals[train_idx].reshape(-1, 1), cfg.scaler_kind)
    xs = preprocess.transform(x_scaler, ds.positions)
    ys = preprocess.transform(y_scaler, ds.totals.reshape(-1, 1))[:, 0]
    return train_idx, test_idx, x_scaler, y_scaler, xs, ys


def _train_one(cfg: RunConfig, name: str, out: Path, ds: FarmDataset):
    train_idx, test_idx, x_scaler, y_scaler, xs, ys = _split_and_scale(cfg, ds)
    model = mlp.init_model(cfg.mlp_config(), n_inputs=ds.positions.shape[1])
    model, history = mlp.train(
        model, xs[train_idx], ys[train_idx], xs[test_idx], ys[test_idx], cfg.mlp_config()
    )
    mlp.save_model(model, x_scaler, y_scaler, out / f"{name}_model.json")
    (out / f"{name}_history.json").write_text(
        history.to_json(indent=2) + "\n", encoding="utf-8"
    )
    _write_csv(
        out / f"{name}_loss_curve.csv",
        ["epoch", "train_mse", "val_mse"],
        (
            [e, repr(tr), repr(vl)]
            for e, (tr, vl) in enumerate(zip(history.train_loss, history.val_loss))
        ),
    )
    if cfg.render_plots:
        plots.plot_loss_curves(
            history.train_loss, history.val_loss, out / f"{name}_loss_curve.png", name
        )
    print(
        f"{name}: trained {len(history.val_loss)} epochs, "
        f"best val MSE {history.val_loss[history.best_epoch]:.3e} "
        f"(epoch {history.best_epoch})"
    )
    return model, history


def cmd_train(cfg: RunConfig) -> int:
    datasets: dict[str, FarmDataset] = {}

    def run(name: str, out: Path) -> None:
        ds = _load_scenario(cfg, name)
        datasets[name] = ds
        _train_one(cfg, name, out, ds)

    rc = _for_each_scenario(cfg, run)
    if cfg.combined_mode and datasets:
        out = Path(cfg.output_dir)
        try:
            _train_combined(cfg, out, datasets)
        except Exception as exc:  # noqa: BLE001 - CLI boundary
            print(f"combined: {exc}", file=sys.stderr)
            rc = 1
    return rc


def _train_combined(cfg: RunConfig, out: Path, datasets: dict[str, FarmDataset]) -> None:
    """One model on the concatenated training sets, evaluated per scenario."""
    parts = {}
    train_x, train_y = [], []
    for name in sorted(datasets):
        ds = datasets[name]
        train_idx, test_idx = preprocess.train_test_split(len(ds), cfg.split_spec())
        parts[name] = (ds, train_idx, test_idx)
        train_x.append(ds.positions[train_idx])
        train_y.append(ds.totals[train_idx])
    all_x = np.vstack(train_x)
    all_y = np.concatenate(train_y)

    x_scaler = preprocess.fit_scaler(all_x, cfg.scaler_kind)
    y_scaler = preprocess.fit_scaler(all_y.reshape(-1, 1), cfg.scaler_kind)
    xs = preprocess.transform(x_scaler, all_x)
    ys = preprocess.transform(y_scaler, all_y.reshape(-1, 1))[:, 0]

    val_x = np.vstack(
        [preprocess.transform(x_scaler, ds.positions[ti]) for ds, _, ti in parts.values()]
    )
    val_y = np.concatenate(
        [
            preprocess.transform(y_scaler, ds.totals[ti].reshape(-1, 1))[:, 0]
            for ds, _, ti in parts.values()
        ]
    )

    model = mlp.init_model(cfg.mlp_config(), n_inputs=all_x.shape[1])
    model, history = mlp.train(model, xs, ys, val_x, val_y, cfg.mlp_config())
    mlp.save_model(model, x_scaler, y_scaler, out / "combined_model.json")
    (out / "combined_history.json").write_text(
        history.to_json(indent=2) + "\n", encoding="utf-8"
    )

    for name, (ds, _, test_idx) in parts.items():
        xt = preprocess.transform(x_scaler, ds.positions[test_idx])
        yt = preprocess.transform(y_scaler, ds.totals[test_idx].reshape(-1, 1))[:, 0]
        pred = mlp.forward(model, xt)
        report = metrics.evaluate_with_physical(yt, pred, y_scaler)
        (out / f"combined_{name}_metrics.json").write_text(
            report.to_json(indent=2) + "\n", encoding="utf-8"
        )
        print(f"combined on {name}: test MSE {report.mse:.3e}")


def cmd_evaluate(cfg: RunConfig, model_path: str, scenario: str) -> int:
    out = _prepare_outdir(cfg)
    if scenario not in cfg.scenario_paths:
        print(f"scenario {scenario!r} not configured", file=sys.stderr)
        return 1
    try:
        model, x_scaler, y_scaler = mlp.load_model(model_path)
        ds = _load_scenario(cfg, scenario)
        if x_scaler.n_features != ds.positions.shape[1]:
            raise CliError(
                f"model expects {x_scaler.n_features} features but {scenario} "
                f"has {ds.positions.shape[1]}"
            )
        _, test_idx = preprocess.train_test_split(len(ds), cfg.split_spec())
        xt = preprocess.transform(x_scaler, ds.positions[test_idx])
        yt = preprocess.transform(y_scaler, ds.totals[test_idx].reshape(-1, 1))[:, 0]
        pred = mlp.forward(model, xt)
        report = metrics.evaluate_with_physical(yt, pred, y_scaler)
        (out / f"{scenario}_metrics.json").write_text(
            report.to_json(indent=2) + "\n", encoding="utf-8"
        )
        print(f"{scenario} test metrics ({len(test_idx)} rows)")
        print(f"  {'mse':<14}{report.mse:.6e}")
        print(f"  {'rmse':<14}{report.rmse:.6e}")
        print(f"  {'mae':<14}{report.mae:.6e}")
        print(f"  {'r2':<14}{report.r2:.6f}")
        print(f"  {'rmse_physical':<14}{report.rmse_physical:.3f} W")
        print(f"  {'mae_physical':<14}{report.mae_physical:.3f} W")
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"{scenario}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_plotdata(cfg: RunConfig) -> int:
    def run(name: str, out: Path) -> None:
        ds = _load_scenario(cfg, name)
        projection = geometry.pca_2d(ds.positions)
        _write_csv(
            out / f"{name}_pca_scores.csv",
            ["record_index", "pc1", "pc2"],
            (
                [i, repr(float(s[0])), repr(float(s[1]))]
                for i, s in enumerate(projection.scores)
            ),
        )
        n_sample = min(cfg.layout_sample, len(ds))
        sample = np.random.default_rng(cfg.seed).choice(len(ds), n_sample, replace=False)
        sample.sort()
        pts = ds.layout_points()[sample]
        _write_csv(
            out / f"{name}_layouts.csv",
            ["record_index", "wec", "x", "y"],
            (
                [int(ri), w + 1, repr(float(pts[s, w, 0])), repr(float(pts[s, w, 1]))]
                for s, ri in enumerate(sample)
                for w in range(pts.shape[1])
            ),
        )
        if cfg.render_plots:
            plots.plot_pca_scatter(projection.scores, out / f"{name}_pca_scores.png", name)
            plots.plot_layout_scatter(pts, out / f"{name}_layouts.png", name)
        print(f"{name}: wrote PCA scores for {len(ds)} records, {n_sample} sampled layouts")

    return _for_each_scenario(cfg, run)


def cmd_fixtures(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for i, name in enumerate(SCENARIOS):
        ds = generate_synthetic_dataset(name, args.rows, seed=args.seed + i)
        path = out / f"{name}.csv"
        write_dataset_csv(ds, path)
        print(f"wrote {path} ({args.rows} rows)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavefarm",
        description="Wave-farm layout statistics, outlier screening, and MLP power prediction.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument(
            "--data", action="append", metavar="SCENARIO=PATH",
            help="scenario dataset file (repeatable)",
        )
        p.add_argument("--scenario", action="append", help="restrict to this scenario (repeatable)")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="run seed")
        p.add_argument("--strict", action="store_true", help="fail on validation warnings")
        p.add_argument("--no-plots", action="store_true", help="skip PNG rendering")

    p = sub.add_parser("stats", help="summary statistics and distance/power plot data")
    common(p)

    p = sub.add_parser("outliers", help="LOF, z-score, and IQR screening")
    common(p)
    p.add_argument("--k", type=int, help="LOF neighbour count")
    p.add_argument(
        "--feature-space", choices=["distance-power", "positions"],
        help="feature space for LOF",
    )

    p = sub.add_parser("train", help="train the MLP regressor per scenario")
    common(p)
    p.add_argument("--hidden", help="comma-separated hidden widths, e.g. 64,64")
    p.add_argument("--epochs", type=int, help="max training epochs")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--combined", action="store_true", help="also train one combined model")
    p.add_argument("--no-shuffle", action="store_true", help="unshuffled tail split")

    p = sub.add_parser("evaluate", help="evaluate a saved model on a scenario's test split")
    common(p)
    p.add_argument("--model", required=True, help="saved model file")
    p.add_argument("--eval-scenario", required=True, help="scenario to evaluate on")
    p.add_argument("--no-shuffle", action="store_true", help="unshuffled tail split")

    p = sub.add_parser("plotdata", help="PCA scores and sampled layout scatter data")
    common(p)
    p.add_argument("--sample", type=int, help="number of layouts to sample")

    p = sub.add_parser("fixtures", help="generate synthetic scenario files")
    p.add_argument("--out", default="fixtures", help="output directory")
    p.add_argument("--rows", type=int, default=500, help="records per scenario")
    p.add_argument("--seed", type=int, default=0, help="generator seed")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "fixtures":
            return cmd_fixtures(args)
        cfg = _load_config(args)
        if args.command == "stats":
            return cmd_stats(cfg)
        if args.command == "outliers":
            return cmd_outliers(cfg)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            return cmd_evaluate(cfg, args.model, args.eval_scenario)
        if args.command == "plotdata":
            return cmd_plotdata(cfg)
        raise CliError(f"unknown command {args.command!r}")
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
