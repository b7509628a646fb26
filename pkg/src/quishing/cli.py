"""Command-line front end.

    quishing dataset      --input urls.csv --output set.qset [--images DIR] [--seed S]
    quishing experiment1  --set set.qset --out DIR [--split 0.8] [--seed S] [--search space.json]
    quishing experiment23 --models DIR/models --set set.qset --out DIR2

Every flag can also come from a JSON file given with --config; flags on the
command line win. Exit codes: 0 success, 1 internal failure, 2 usage or input
error. Each run writes manifest.json (digests of inputs and outputs, seeds,
timings) next to its outputs, including runs that fail after starting.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
import traceback
from contextlib import contextmanager
from pathlib import Path

import numpy as np

from . import analysis, dataset, evaluation, models
from .errors import DatasetError, MissingCell, QuishingError
from .seeding import sub_seed

log = logging.getLogger("quishing")

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

REQUIRED = {
    "dataset": ("input", "output"),
    "experiment1": ("set", "out"),
    "experiment23": ("models", "set", "out"),
}


class UsageError(Exception):
    pass


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class RunManifest:
    def __init__(self, command, config, path):
        self.path = Path(path)
        self.data = {
            "command": command,
            "config": config,
            "seeds": {},
            "inputs": {},
            "artifacts": {},
            "timings": {},
            "error": None,
        }

    def add_input(self, path):
        self.data["inputs"][str(path)] = sha256_file(path)

    def add_artifact(self, path):
        self.data["artifacts"][str(path)] = sha256_file(path)

    @contextmanager
    def timed(self, step):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.data["timings"][step] = round(time.perf_counter() - t0, 3)

    def write(self):
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w") as fh:
            json.dump(self.data, fh, indent=2, sort_keys=True)
            fh.write("\n")


# ---------------------------------------------------------------------------
# dataset
# ---------------------------------------------------------------------------

def cmd_dataset(args, manifest: RunManifest):
    out = Path(args.output)
    with manifest.timed("load"):
        records = dataset.load_url_csv(args.input)
    manifest.add_input(args.input)
    with manifest.timed("filter"):
        kept, rejected = dataset.filter_encodable(records)
    with manifest.timed("encode"):
        samples = dataset.build_feature_matrix(kept)
    out.parent.mkdir(parents=True, exist_ok=True)
    dataset.save_sample_set(samples, out)
    manifest.add_artifact(out)

    rej_path = out.with_name(out.name + ".rejected.csv")
    with open(rej_path, "w") as fh:
        fh.write("length,url\n")
        for url, length in rejected:
            fh.write(f"{length},{url.decode('utf-8', errors='replace')}\n")
    manifest.add_artifact(rej_path)

    if args.images:
        with manifest.timed("images"):
            for p in dataset.export_pgms(samples, args.images, limit=args.images_limit):
                manifest.add_artifact(p)

    counts = np.bincount(samples.labels, minlength=2) if len(samples) else np.zeros(2, int)
    manifest.data["counts"] = {
        "read": len(records), "kept": len(kept), "rejected": len(rejected),
        "legitimate": int(counts[0]), "phishing": int(counts[1]),
    }
    log.info("read %d urls, kept %d, rejected %d", len(records), len(kept), len(rejected))


# ---------------------------------------------------------------------------
# experiment 1
# ---------------------------------------------------------------------------

def _load_search_space(path):
    with open(path) as fh:
        spaces = json.load(fh)
    unknown = set(spaces) - set(models.FAMILIES)
    if unknown:
        raise UsageError(f"search space names unknown families: {sorted(unknown)}")
    return spaces


def cmd_experiment1(args, manifest: RunManifest):
    out = Path(args.out)
    model_dir = out / "models"
    model_dir.mkdir(parents=True, exist_ok=True)

    samples = dataset.load_sample_set(args.set)
    manifest.add_input(args.set)
    spaces = {}
    if args.search:
        spaces = _load_search_space(args.search)
        manifest.add_input(args.search)

    split_seed = sub_seed(args.seed, "split")
    manifest.data["seeds"] = {"root": args.seed, "split": split_seed}
    train_idx, test_idx = dataset.split_indices(
        samples.labels, dataset.SplitSpec(train_fraction=args.split, seed=split_seed))
    train, test = samples.subset(train_idx), samples.subset(test_idx)
    split_path = model_dir / "split.json"
    with open(split_path, "w") as fh:
        json.dump({"train_fraction": args.split, "seed": split_seed,
                   "train": train_idx.tolist(), "test": test_idx.tolist()}, fh)
        fh.write("\n")
    manifest.add_artifact(split_path)

    reports, failures, search_log = {}, {}, {}
    for fam in models.FAMILIES:
        seed = sub_seed(args.seed, "model", fam)
        manifest.data["seeds"][f"model.{fam}"] = seed
        try:
            with manifest.timed(f"train.{fam}"):
                config = models.ModelConfig(fam)
                if fam in spaces:
                    config, cv, history = evaluation.random_search(
                        fam, spaces[fam], train.features, train.labels, n_iter=args.search_iter,
                        k=args.folds, seed=sub_seed(args.seed, "search"), n_jobs=args.threads)
                    search_log[fam] = {"best": config.params, "cv": cv.mean,
                                       "history": [{"params": p, "mean_auc": s} for p, s in history]}
                model = models.train(config, train.features, train.labels, seed=seed, n_jobs=args.threads)
            reports[fam] = evaluation.evaluate(model, test.features, test.labels)
            path = model_dir / f"{fam}.npz"
            models.save_model(model, path)
            manifest.add_artifact(path)
            log.info("%s: auc %.4f", fam, reports[fam].auc)
        except Exception as exc:  # recorded per model; the run still fails overall
            failures[fam] = f"{type(exc).__name__}: {exc}"
            log.error("%s failed: %s", fam, exc)

    metrics_csv = out / "metrics.csv"
    evaluation.write_metrics_csv(reports, metrics_csv)
    evaluation.write_report_json(reports, out / "metrics.json")
    manifest.add_artifact(metrics_csv)
    manifest.add_artifact(out / "metrics.json")
    if search_log:
        with open(out / "search.json", "w") as fh:
            json.dump(search_log, fh, indent=2, sort_keys=True)
            fh.write("\n")
        manifest.add_artifact(out / "search.json")
    manifest.data["split"] = {"train": int(train_idx.size), "test": int(test_idx.size)}
    if failures:
        manifest.data["model_failures"] = failures
        raise QuishingError(f"{len(failures)} model(s) failed: {', '.join(failures)}")


# ---------------------------------------------------------------------------
# experiments 2 + 3
# ---------------------------------------------------------------------------

def cmd_experiment23(args, manifest: RunManifest):
    model_dir = Path(args.models)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    split_path = model_dir / "split.json"
    if not split_path.exists():
        raise UsageError(f"{split_path} not found; run experiment1 first")
    loaded = {}
    for fam in models.FAMILIES:
        path = model_dir / f"{fam}.npz"
        if not path.exists():
            raise UsageError(f"missing model for {fam}: {path}")
        loaded[fam] = models.load_model(path)
        manifest.add_input(path)
    samples = dataset.load_sample_set(args.set)
    manifest.add_input(args.set)
    manifest.add_input(split_path)
    with open(split_path) as fh:
        split = json.load(fh)
    train = samples.subset(split["train"])
    test = samples.subset(split["test"])
    seeds = {fam: m.seed for fam, m in loaded.items()}
    manifest.data["seeds"] = {f"model.{k}": v for k, v in seeds.items()}

    # experiment 2: importance maps
    vectors = {}
    with manifest.timed("importance"):
        for fam in analysis.SELECTION_SOURCES:
            vec = analysis.ImportanceVector.from_model(loaded[fam])
            vectors[fam] = vec
            grid = analysis.importance_grid(vec)
            paths = {
                "importance": out / f"importance_{fam}.csv",
                "heatmap": out / f"heatmap_{fam}.pgm",
                "included": out / f"included_{fam}.pgm",
                "excluded": out / f"excluded_{fam}.pgm",
            }
            analysis.write_importance_csv(vec, paths["importance"])
            analysis.export_heatmap(grid, paths["heatmap"])
            analysis.export_heatmap(grid, paths["included"], binary=True)
            analysis.export_excluded_map(grid, paths["excluded"])
            for p in paths.values():
                manifest.add_artifact(p)
        hist = out / "importance_histogram.csv"
        analysis.write_histogram_csv(vectors, hist)
        manifest.add_artifact(hist)

    # experiment 3: retrain on selected pixels
    configs = [loaded[fam].config for fam in models.FAMILIES]
    results = {analysis.NO_SELECTION: {
        fam: evaluation.auc(test.labels, models.predict_proba(m, test.features))
        for fam, m in loaded.items()}}
    selection_sizes = {}
    for src in analysis.SELECTION_SOURCES:
        mask = analysis.select_features(vectors[src], top_k=args.top_k)
        selection_sizes[src] = len(mask)
        with manifest.timed(f"retrain.{src}"):
            results[src] = analysis.retrain_with_selection(mask, configs, train, test,
                                                           seeds=seeds, n_jobs=args.threads)
    manifest.data["selected_features"] = selection_sizes
    rows = analysis.comparison_table(results)
    analysis.write_comparison_csv(rows, out / "comparison.csv")
    analysis.write_comparison_json(rows, out / "comparison.json")
    manifest.add_artifact(out / "comparison.csv")
    manifest.add_artifact(out / "comparison.json")


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quishing", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON file of flag values (command-line flags win)")
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)

    p = sub.add_parser("dataset", help="encode a labelled URL CSV into a sample set")
    common(p)
    p.add_argument("--input")
    p.add_argument("--output")
    p.add_argument("--images", help="directory for per-sample PGM images")
    p.add_argument("--images-limit", type=int)

    p = sub.add_parser("experiment1", help="train and test the six models")
    common(p)
    p.add_argument("--set")
    p.add_argument("--split", type=float)
    p.add_argument("--out")
    p.add_argument("--search", help="JSON {family: {param: [values]}} for randomized search")
    p.add_argument("--search-iter", type=int)
    p.add_argument("--folds", type=int)

    p = sub.add_parser("experiment23", help="importance maps and retraining on selected pixels")
    common(p)
    p.add_argument("--models")
    p.add_argument("--set")
    p.add_argument("--out")
    p.add_argument("--top-k", type=int)
    return parser


DEFAULTS = {"seed": 0, "threads": 1, "split": 0.8, "search_iter": 10, "folds": 10,
            "images": None, "images_limit": None, "search": None, "top_k": None}


def resolve_args(argv=None) -> argparse.Namespace:
    """Parse flags, then fill anything unset from --config, then from DEFAULTS."""
    args = build_parser().parse_args(argv)
    from_file = {}
    if args.config:
        try:
            with open(args.config) as fh:
                from_file = {k.replace("-", "_"): v for k, v in json.load(fh).items()}
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
    for key, value in vars(args).items():
        if value is None:
            if key in from_file:
                setattr(args, key, from_file[key])
            elif key in DEFAULTS:
                setattr(args, key, DEFAULTS[key])
    missing = [k for k in REQUIRED[args.command] if getattr(args, k, None) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    return args


def _manifest_path(args) -> Path:
    if args.command == "dataset":
        out = Path(args.output)
        return out.with_name(out.name + ".manifest.json")
    return Path(args.out) / "manifest.json"


def _check_inputs(args):
    paths = {"dataset": ("input",), "experiment1": ("set", "search"), "experiment23": ("set", "models")}
    for key in paths[args.command]:
        value = getattr(args, key, None)
        if value is not None and not Path(value).exists():
            raise UsageError(f"--{key}: {value} does not exist")
    if args.command == "experiment1" and not 0.0 < args.split < 1.0:
        raise UsageError("--split must lie strictly between 0 and 1")


COMMANDS = {"dataset": cmd_dataset, "experiment1": cmd_experiment1, "experiment23": cmd_experiment23}


def main(argv=None) -> int:
    try:
        args = resolve_args(argv)
        _check_inputs(args)
    except UsageError as exc:
        print(f"quishing: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    config = {k: v for k, v in sorted(vars(args).items())}
    manifest = RunManifest(args.command, config, _manifest_path(args))
    code = EXIT_OK
    t0 = time.perf_counter()
    try:
        COMMANDS[args.command](args, manifest)
    except (UsageError, DatasetError, MissingCell) as exc:
        manifest.data["error"] = f"{type(exc).__name__}: {exc}"
        print(f"quishing: error: {exc}", file=sys.stderr)
        code = EXIT_USAGE
    except Exception as exc:
        manifest.data["error"] = f"{type(exc).__name__}: {exc}"
        manifest.data["traceback"] = traceback.format_exc()
        print(f"quishing: failed: {exc}", file=sys.stderr)
        code = EXIT_FAILURE
    manifest.data["timings"]["total"] = round(time.perf_counter() - t0, 3)
    manifest.data["exit_code"] = code
    manifest.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
