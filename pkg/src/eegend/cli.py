"""Command-line front end: ``eegend {synth,rank,extract,run,sweep}``.

Settings come from an optional JSON config file (``--config``) and are
overridden by command-line flags. Every command writes the resolved
configuration to ``<out>/config.json`` before doing any work.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .errors import ConfigError, ConvergenceError, DataError, EegendError
from .evaluation import (
    STRATEGIES, UNITS, EvaluationReport, PipelineConfig, PipelineContext, SplitPlan,
    run_pipeline, sweep_channels, sweep_to_csv,
)
from .features import EXTRACTORS, extract_features
from .classifiers import CLASSIFIERS
from .ranking import METHODS, rank_channels, select_channels
from .signals import DEFAULT_WINDOW, SynthSpec, load_dataset, segment_dataset, synthesize_dataset, write_synthetic

logger = logging.getLogger("eegend")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_CONVERGENCE = 0, 2, 3, 4

# key -> (default, help). List-valued keys accept a single value or a list.
CONFIG_KEYS = {
    "dataset": (None, "path to a dataset manifest.json; null means synthesize from 'synth'"),
    "synth": ({}, "synthetic generator settings: n_per_class, n_samples, n_channels, "
                  "planted_channels, effect_size, sample_rate_hz"),
    "window_len": (DEFAULT_WINDOW, "segment length in samples"),
    "seed": (0, "master seed for synthesis, splits and the ensemble"),
    "out": ("out", "output directory"),
    "workers": (1, "worker threads; results do not depend on this"),
    "ranking": (["end"], "ranking method(s): en, end"),
    "n_channels": ([3], "number(s) of top-ranked channels to keep"),
    "extractor": (["SLBP"], "feature extractor(s): EMD, DWT, SLBP"),
    "classifier": (["KNN"], "classifier(s): KNN, SVM, ENS"),
    "strategy": (["kfold"], "validation strategy(ies): chrono, random, kfold"),
    "repeats": (10, "repeats of the random 70/30 split"),
    "folds": (10, "number of folds for kfold"),
    "split_unit": ("segment", "what a split assigns: segment or subject"),
    "entropy_bins": (256, "histogram bins for channel entropy"),
    "standardize": (True, "z-score features with training statistics"),
    "keep_fraction": (0.5, "fraction of features kept by chi-square selection"),
    "chi2_bins": (10, "equal-frequency bins used by chi-square selection"),
    "channel_order": ("ranking", "feature block order: ranking or canonical"),
    "knn_k": (5, "k-NN neighbours"),
    "svm_C": (1.0, "SVM box constraint"),
    "svm_gamma": (None, "RBF gamma; null means 1/(d * mean feature variance)"),
    "svm_tol": (1e-3, "SMO stopping tolerance on the KKT gap"),
    "svm_max_iter": (1_000_000, "SMO update cap; exceeding it exits with status 4"),
    "ens_n_trees": (100, "trees in the bagged ensemble"),
    "ens_max_depth": (10, "maximum tree depth; null for unlimited"),
    "save_features": (False, "also write features_<EXTRACTOR>.csv (extract always does)"),
    "sweep_max_channels": (None, "largest N in sweep; null means all channels"),
}
LIST_KEYS = ("ranking", "n_channels", "extractor", "classifier", "strategy")
PIPELINE_KEYS = ("entropy_bins", "standardize", "keep_fraction", "chi2_bins", "channel_order",
                 "knn_k", "svm_C", "svm_gamma", "svm_tol", "svm_max_iter", "ens_n_trees",
                 "ens_max_depth")


def _epilog() -> str:
    lines = ["config keys (JSON file via --config; flags override the file):"]
    for k, (default, text) in CONFIG_KEYS.items():
        lines.append(f"  {k:<20} {text} [default: {json.dumps(default)}]")
    lines.append("")
    lines.append("exit status: 0 ok, 2 config error, 3 data error, 4 non-convergence")
    return "\n".join(lines)


def _csv_list(kind):
    def parse(text):
        return [kind(v) for v in text.split(",") if v.strip()]
    return parse


def _opt_int(text):
    return None if text.lower() in ("none", "null") else int(text)


def _opt_float(text):
    return None if text.lower() in ("none", "null") else float(text)


def _bool(text):
    t = text.lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--config", type=Path, help="JSON config file")
    g.add_argument("--seed", type=int)
    g.add_argument("--out", type=Path)
    g.add_argument("--workers", type=int)
    g.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    p = common.add_argument_group("pipeline")
    p.add_argument("--dataset", type=str, help="dataset manifest.json")
    p.add_argument("--window-len", dest="window_len", type=int)
    p.add_argument("--ranking", type=_csv_list(str), help="comma list of en,end")
    p.add_argument("--n-channels", dest="n_channels", type=_csv_list(int), help="comma list")
    p.add_argument("--extractor", type=_csv_list(str), help="comma list of EMD,DWT,SLBP")
    p.add_argument("--classifier", type=_csv_list(str), help="comma list of KNN,SVM,ENS")
    p.add_argument("--strategy", type=_csv_list(str), help="comma list of chrono,random,kfold")
    p.add_argument("--repeats", type=int)
    p.add_argument("--folds", type=int)
    p.add_argument("--split-unit", dest="split_unit", choices=UNITS)
    p.add_argument("--entropy-bins", dest="entropy_bins", type=int)
    p.add_argument("--standardize", type=_bool)
    p.add_argument("--keep-fraction", dest="keep_fraction", type=float)
    p.add_argument("--chi2-bins", dest="chi2_bins", type=int)
    p.add_argument("--channel-order", dest="channel_order", choices=("ranking", "canonical"))
    p.add_argument("--knn-k", dest="knn_k", type=int)
    p.add_argument("--svm-C", dest="svm_C", type=float)
    p.add_argument("--svm-gamma", dest="svm_gamma", type=_opt_float)
    p.add_argument("--svm-tol", dest="svm_tol", type=float)
    p.add_argument("--svm-max-iter", dest="svm_max_iter", type=int)
    p.add_argument("--ens-n-trees", dest="ens_n_trees", type=int)
    p.add_argument("--ens-max-depth", dest="ens_max_depth", type=_opt_int)
    p.add_argument("--save-features", dest="save_features", type=_bool)
    p.add_argument("--sweep-max-channels", dest="sweep_max_channels", type=_opt_int)

    parser = argparse.ArgumentParser(
        prog="eegend", description="EEG channel ranking and classification pipeline",
        epilog=_epilog(), formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "synth": "write a synthetic dataset (CSV files, manifest.json, truth.json)",
        "rank": "write En and EnD channel rankings computed on the whole dataset",
        "extract": "write the feature matrix for the top-ranked channels",
        "run": "evaluate every configuration in the grid and write report.{csv,json}",
        "sweep": "accuracy against the number of channels for both rankings",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text, epilog=_epilog(),
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    return parser


# ---------------------------------------------------------------------------
# configuration


def resolve_config(args: argparse.Namespace) -> dict:
    """Defaults, then the config file, then flags; validated and normalised."""
    cfg = {k: v for k, (v, _) in CONFIG_KEYS.items()}
    if args.config is not None:
        try:
            loaded = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(loaded) - set(CONFIG_KEYS))
        if unknown:
            raise ConfigError(f"unknown config key(s): {unknown}")
        cfg.update(loaded)
    for k in CONFIG_KEYS:
        v = getattr(args, k, None)
        if v is not None:
            cfg[k] = str(v) if isinstance(v, Path) else v
    for k in LIST_KEYS:
        if not isinstance(cfg[k], list):
            cfg[k] = [cfg[k]]
        if not cfg[k]:
            raise ConfigError(f"{k} must not be empty")
    cfg["ranking"] = [str(m).lower() for m in cfg["ranking"]]
    cfg["extractor"] = [str(e).upper() for e in cfg["extractor"]]
    cfg["classifier"] = [str(c).upper() for c in cfg["classifier"]]
    cfg["strategy"] = [str(s).lower() for s in cfg["strategy"]]
    _validate(cfg)
    return cfg


def _check_in(name, values, allowed):
    for v in values:
        if v not in allowed:
            raise ConfigError(f"unknown {name} {v!r}; expected one of {allowed}")


def _validate(cfg: dict) -> None:
    _check_in("ranking", cfg["ranking"], METHODS)
    _check_in("extractor", cfg["extractor"], EXTRACTORS)
    _check_in("classifier", cfg["classifier"], CLASSIFIERS)
    _check_in("strategy", cfg["strategy"], STRATEGIES)
    for key in ("seed", "workers", "window_len", "repeats", "folds"):
        if not isinstance(cfg[key], int) or isinstance(cfg[key], bool):
            raise ConfigError(f"{key} must be an integer")
    if cfg["workers"] < 1:
        raise ConfigError("workers must be >= 1")
    if cfg["window_len"] < 1:
        raise ConfigError("window_len must be >= 1")
    if not isinstance(cfg["synth"], dict):
        raise ConfigError("synth must be a JSON object")
    SynthSpec.from_dict(cfg["synth"])
    # constructing the objects runs their own checks
    for n in cfg["n_channels"]:
        pipeline_config(cfg, n_channels=n)
    split_plans(cfg)


def pipeline_config(cfg: dict, **override) -> PipelineConfig:
    base = {k: cfg[k] for k in PIPELINE_KEYS}
    base.update(ranking=cfg["ranking"][0], extractor=cfg["extractor"][0],
                classifier=cfg["classifier"][0], n_channels=cfg["n_channels"][0])
    base.update(override)
    try:
        return PipelineConfig(**base)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def split_plans(cfg: dict) -> list[SplitPlan]:
    return [SplitPlan(s, repeats=cfg["repeats"], folds=cfg["folds"], seed=cfg["seed"],
                      unit=cfg["split_unit"]) for s in cfg["strategy"]]


def _load(cfg: dict):
    if cfg["dataset"] is not None:
        ds = load_dataset(cfg["dataset"])
    else:
        ds = synthesize_dataset(SynthSpec.from_dict(cfg["synth"]), cfg["seed"])
    ds = segment_dataset(ds, cfg["window_len"])
    for n in cfg["n_channels"]:
        if n > ds.n_channels:
            raise ConfigError(f"n_channels={n} exceeds the {ds.n_channels} channels available")
    return ds


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def _write_ranking(out: Path, ranking) -> None:
    with open(out / f"ranking_{ranking.method}.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rank", "channel_index", "channel", "score"))
        for r, s in enumerate(ranking.scores, start=1):
            w.writerow((r, s.channel_index, s.channel_name, repr(s.score)))
    _write(out / f"ranking_{ranking.method}.json", json.dumps(ranking.to_dict(), indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands


def cmd_synth(cfg: dict, out: Path) -> None:
    spec = SynthSpec.from_dict(cfg["synth"])
    write_synthetic(spec, cfg["seed"], out)
    logger.info("wrote %d recordings to %s", 2 * spec.n_per_class, out)


def cmd_rank(cfg: dict, out: Path) -> None:
    ds = _load(cfg)
    for method in METHODS:
        _write_ranking(out, rank_channels(ds, method, cfg["entropy_bins"]))


def cmd_extract(cfg: dict, out: Path) -> None:
    ds = _load(cfg)
    ranking = rank_channels(ds, cfg["ranking"][0], cfg["entropy_bins"])
    _write_ranking(out, ranking)
    chans = select_channels(ranking, cfg["n_channels"][0])
    if cfg["channel_order"] == "canonical":
        chans = sorted(chans)
    for ex in cfg["extractor"]:
        fm = extract_features(ds.segments, chans, ex, ds.channels, workers=cfg["workers"])
        fm.to_csv(out / f"features_{ex}.csv")


def cmd_run(cfg: dict, out: Path) -> None:
    ds = _load(cfg)
    ctx = PipelineContext(ds)
    report = EvaluationReport()
    for method in cfg["ranking"]:
        for ex in cfg["extractor"]:
            for clf in cfg["classifier"]:
                for n in cfg["n_channels"]:
                    pc = pipeline_config(cfg, ranking=method, extractor=ex, classifier=clf,
                                         n_channels=n)
                    for plan in split_plans(cfg):
                        logger.info("run %s/%s/%s N=%d %s", method, ex, clf, n, plan.strategy)
                        report.rows.append(run_pipeline(ds, plan, pc, ctx, cfg["workers"]))
    _write(out / "report.csv", report.to_csv())
    _write(out / "report.json", report.to_json())
    if cfg["save_features"]:
        cmd_extract(cfg, out)


def cmd_sweep(cfg: dict, out: Path) -> None:
    ds = _load(cfg)
    top = cfg["sweep_max_channels"] or ds.n_channels
    if not 1 <= top <= ds.n_channels:
        raise ConfigError(f"sweep_max_channels must lie in 1..{ds.n_channels}")
    ctx = PipelineContext(ds)
    rows = []
    for ex in cfg["extractor"]:
        for clf in cfg["classifier"]:
            for plan in split_plans(cfg):
                pc = pipeline_config(cfg, extractor=ex, classifier=clf)
                rows += sweep_channels(ds, plan, pc, cfg["ranking"], range(1, top + 1), ctx,
                                       cfg["workers"])
    _write(out / "sweep.csv", sweep_to_csv(rows))


COMMANDS = {"synth": cmd_synth, "rank": cmd_rank, "extract": cmd_extract,
            "run": cmd_run, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = resolve_config(args)
        if cfg["dataset"] is not None and not Path(cfg["dataset"]).is_file():
            raise DataError(f"dataset manifest not found: {cfg['dataset']}")
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        _write(out / "config.json", json.dumps(dict(cfg, command=args.command),
                                               indent=2, sort_keys=True) + "\n")
        COMMANDS[args.command](cfg, out)
    except ConfigError as exc:
        print(f"eegend: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        print(f"eegend: did not converge: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (DataError, OSError) as exc:
        print(f"eegend: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EegendError as exc:
        print(f"eegend: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
