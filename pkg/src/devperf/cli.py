"""``devperf`` command line: predict, edp, rules and report subcommands.

Options may also come from a TOML file (``--config``); flags win over the
file, the file wins over defaults. ``DEVPERF_SEED`` supplies the seed when
neither sets one.

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 data error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import re
import sys
import warnings
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Sequence

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .cv import (LEARNERS, PredictionSet, cross_val_predict, global_distribution,
                 import_predictions, make_learner)
from .edp import compute_edp, edp_to_csv, error_zoom, write_edp_json
from .ingest import DataError, Dataset, default_schemes, load_csv, load_schemes
from .rules import (MiningConfig, build_mining_table, format_rule, format_rules,
                    mine_rules, parse_query, query_subgroup, rules_to_json)
from .svg import render_edp_svg

FORMATS = ("svg", "json", "csv", "txt")


class ConfigError(Exception):
    """Invalid or incomplete run configuration."""


@dataclass
class RunConfig:
    data: str | None = None
    target: str | None = None
    learner: str = "nb"
    k: int = 10
    seed: int = 0
    predictions: str | None = None
    predictors: list[str] | str = "all"
    bins: str | None = None
    minsup: float = 0.01
    alpha: float = 0.05
    max_len: int = 4
    pool_min_expected: float | None = None
    query: str | None = None
    out: str = "."
    formats: list[str] = field(default_factory=lambda: list(FORMATS))

    @property
    def mode(self) -> str:
        return "import" if self.predictions else "builtin-cv"

    def mining(self) -> MiningConfig:
        try:
            return MiningConfig(self.minsup, self.alpha, self.max_len, self.pool_min_expected)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def validate(self, need_cv: bool = False) -> None:
        if not self.data:
            raise ConfigError("--data: dataset path is required")
        if not Path(self.data).is_file():
            raise ConfigError(f"--data: no such file {self.data!r}")
        if not self.target:
            raise ConfigError("--target: target column is required")
        if need_cv or self.mode == "builtin-cv":
            if self.k < 2:
                raise ConfigError("--k: k must be ≥ 2")
            if self.learner not in LEARNERS:
                raise ConfigError(
                    f"--learner: unknown learner {self.learner!r}; supported: "
                    f"{', '.join(sorted(LEARNERS))} (import predictions for other models)")
        if self.predictions and not Path(self.predictions).is_file():
            raise ConfigError(f"--predictions: no such file {self.predictions!r}")
        if self.bins and not Path(self.bins).is_file():
            raise ConfigError(f"--bins: no such file {self.bins!r}")
        bad = [f for f in self.formats if f not in FORMATS]
        if bad:
            raise ConfigError(f"--format: unknown format(s) {bad}; choose from {FORMATS}")
        self.mining()


def _split(value: str | list) -> list[str]:
    if isinstance(value, list):
        return [str(v) for v in value]
    return [v.strip() for v in value.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="devperf",
        description="Explain where a classifier's errors deviate from its average behaviour.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    S = argparse.SUPPRESS
    common.add_argument("--config", default=None, help="TOML file with option defaults")
    common.add_argument("--data", default=S, help="dataset CSV (header row required)")
    common.add_argument("--target", default=S, help="name of the class column")
    common.add_argument("--learner", default=S, help="built-in learner: nb or majority")
    common.add_argument("--k", type=int, default=S, help="cross-validation folds (default 10)")
    common.add_argument("--seed", type=int, default=S, help="fold permutation seed")
    common.add_argument("--predictions", default=S,
                        help="row_id,true,pred CSV from an external model (skips CV)")
    common.add_argument("--predictors", default=S,
                        help="comma-separated predictor names or 'all'")
    common.add_argument("--bins", default=S, help="JSON file of user-defined bins")
    common.add_argument("--minsup", type=float, default=S)
    common.add_argument("--alpha", type=float, default=S)
    common.add_argument("--max-len", dest="max_len", type=int, default=S)
    common.add_argument("--pool-min-expected", dest="pool_min_expected", type=float, default=S)
    common.add_argument("--query", default=S, help='subgroup to test, e.g. "a=1 & b=x"')
    common.add_argument("--out", default=S, help="output directory")
    common.add_argument("--format", dest="formats", default=S,
                        help=f"comma-separated subset of {','.join(FORMATS)}")
    for name, help_ in (("predict", "cross-validated predictions of a built-in learner"),
                        ("edp", "error dependence plots per predictor"),
                        ("rules", "mine distribution rules"),
                        ("report", "predictions, all EDPs and rules with a manifest")):
        sub.add_parser(name, parents=[common], help=help_)
    return parser


def resolve_config(args: argparse.Namespace, environ=os.environ) -> RunConfig:
    values: dict = {}
    if "DEVPERF_SEED" in environ:
        try:
            values["seed"] = int(environ["DEVPERF_SEED"])
        except ValueError:
            raise ConfigError("DEVPERF_SEED must be an integer") from None
    if args.config:
        try:
            doc = tomllib.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"--config: {exc}") from None
        doc = {k.replace("-", "_"): v for k, v in doc.items()}
        if "format" in doc:
            doc["formats"] = doc.pop("format")
        known = {f.name for f in fields(RunConfig)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ConfigError(f"--config: unknown keys {unknown}")
        values.update(doc)
    values.update({k: v for k, v in vars(args).items() if k not in ("command", "config")})
    cfg = RunConfig(**values)
    if cfg.predictors != "all":
        cfg.predictors = _split(cfg.predictors)
        if cfg.predictors == ["all"]:
            cfg.predictors = "all"
    cfg.formats = _split(cfg.formats)
    return cfg


# --------------------------------------------------------------------------

def _slug(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", name)


class Writer:
    """Single point for file output; remembers what it wrote for the manifest."""

    def __init__(self, out: str | Path):
        self.out = Path(out)
        try:
            self.out.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(f"--out: cannot create {self.out}: {exc}") from None
        self.written: list[tuple[str, str]] = []

    def path(self, name: str) -> Path:
        return self.out / name

    def text(self, name: str, content: str, step: str) -> Path:
        p = self.path(name)
        p.write_text(content, encoding="utf-8")
        self.record(name, step)
        return p

    def record(self, name: str, step: str) -> None:
        self.written.append((name, step))


def _load(cfg: RunConfig) -> Dataset:
    return load_csv(cfg.data, cfg.target)


def _predictions(cfg: RunConfig, ds: Dataset) -> PredictionSet:
    if cfg.predictions:
        return import_predictions(ds, cfg.predictions)
    return cross_val_predict(ds, make_learner(cfg.learner), cfg.k, cfg.seed)


def _schemes(cfg: RunConfig, ds: Dataset, predictors=None):
    overrides = load_schemes(cfg.bins) if cfg.bins else {}
    for p in overrides:
        if p not in ds.predictors:
            raise DataError(f"--bins: unknown predictor {p!r}")
    return default_schemes(ds, overrides, predictors)


def run_predict(cfg: RunConfig, writer: Writer, ds: Dataset) -> PredictionSet:
    preds = cross_val_predict(ds, make_learner(cfg.learner), cfg.k, cfg.seed)
    preds.write(writer.path("predictions.csv"), ds)
    writer.record("predictions.csv", "predict")
    writer.record("predictions.json", "predict")
    print(global_distribution(preds).format_cm())
    return preds


def run_edp(cfg: RunConfig, writer: Writer, ds: Dataset, preds: PredictionSet) -> None:
    names = ds.predictors if cfg.predictors == "all" else cfg.predictors
    for p in names:
        if p == ds.target:
            raise DataError(f"--predictors: {p!r} is the target column")
        if p not in ds.names:
            raise DataError(f"--predictors: unknown predictor {p!r}")
    schemes = _schemes(cfg, ds, names)
    for p in names:
        edp = compute_edp(ds, preds, p, schemes[p])
        zoom = error_zoom(edp)
        stem = f"edp_{_slug(p)}"
        if "svg" in cfg.formats:
            writer.text(f"{stem}.svg", render_edp_svg(edp), "edp")
            writer.text(f"{stem}_zoom.svg", render_edp_svg(zoom), "edp")
        if "json" in cfg.formats:
            write_edp_json(edp, writer.path(f"{stem}.json"), zoom)
            writer.record(f"{stem}.json", "edp")
        if "csv" in cfg.formats:
            writer.text(f"{stem}.csv", edp_to_csv(edp), "edp")


def run_rules(cfg: RunConfig, writer: Writer, ds: Dataset, preds: PredictionSet) -> None:
    mining = cfg.mining()
    table = build_mining_table(ds, preds, _schemes(cfg, ds))
    reference = table.reference
    if cfg.query:
        sub = query_subgroup(table, parse_query(cfg.query, table), reference,
                             mining.pool_min_expected)
        print(reference.format_cm())
        if sub.empty:
            print(f"empty subgroup: no case satisfies {cfg.query!r}")
        else:
            print(format_rule(sub))
            print(f"size = {sub.size}  chi2 = {sub.chi2:.6g}  df = {sub.df}")
        return
    rules = mine_rules(table, mining, reference)
    text = format_rules(rules, reference)
    if "txt" in cfg.formats:
        writer.text("rules.txt", text, "rules")
    if "json" in cfg.formats:
        writer.text("rules.json", rules_to_json(rules), "rules")
    sys.stdout.write(text)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_report(cfg: RunConfig, writer: Writer) -> int:
    steps: dict[str, dict] = {}
    ds = _load(cfg)
    preds = None
    try:
        if cfg.predictions:
            preds = import_predictions(ds, cfg.predictions)
            steps["import"] = {"status": "ok"}
        else:
            preds = run_predict(cfg, writer, ds)
            steps["predict"] = {"status": "ok"}
    except (DataError, RuntimeError) as exc:
        steps["predict"] = {"status": "failed", "error": str(exc)}
    report_cfg = RunConfig(**{**vars(cfg), "predictors": "all", "query": None})
    for name, fn in (("edp", run_edp), ("rules", run_rules)):
        if preds is None:
            steps[name] = {"status": "skipped", "error": "no predictions"}
            continue
        try:
            fn(report_cfg, writer, ds, preds)
            steps[name] = {"status": "ok"}
        except DataError as exc:
            steps[name] = {"status": "failed", "error": str(exc)}
    manifest = {
        "dataset": Path(cfg.data).name,
        "target": cfg.target,
        "mode": cfg.mode,
        "learner": None if cfg.predictions else cfg.learner,
        "k": None if cfg.predictions else cfg.k,
        "seed": None if cfg.predictions else cfg.seed,
        "steps": steps,
        "artifacts": [{"path": name, "step": step, "sha256": _sha256(writer.path(name))}
                      for name, step in writer.written],
    }
    writer.text("manifest.json", json.dumps(manifest, indent=2) + "\n", "report")
    return 0 if all(s["status"] == "ok" for s in steps.values()) else 3


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        cfg.validate(need_cv=args.command == "predict")
        if args.command == "predict" and cfg.predictions:
            raise ConfigError("--predictions: predict runs built-in cross-validation only")
        writer = Writer(cfg.out)
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            if args.command == "report":
                return run_report(cfg, writer)
            ds = _load(cfg)
            if args.command == "predict":
                run_predict(cfg, writer, ds)
                return 0
            preds = _predictions(cfg, ds)
            if args.command == "edp":
                run_edp(cfg, writer, ds, preds)
            else:
                run_rules(cfg, writer, ds, preds)
            return 0
    except ConfigError as exc:
        print(f"devperf: configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"devperf: data error: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001
        print(f"devperf: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
