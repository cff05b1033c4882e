"""Batch front-end: ingest, synthesize, extract, evaluate, compare, report.

Run configuration is a JSON document (see README for the schema); every
command takes --config/--seed/--out/--workers and is byte-reproducible
for a fixed (config, seed).
"""

from __future__ import annotations

import argparse
import itertools
import json
import math
import sys
from pathlib import Path

from . import evaluation, pipeline, signal_io, similarity, synth
from . import models as models_mod
from .errors import ConfigError, DataFormatError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

DEFAULT_CLASSIFIERS = ("C1", "C2", "C3", "C4", "C5")


def load_config(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from None


def _pipeline_params(cfg: dict) -> dict:
    p = cfg.get("pipeline", {})
    return {
        "window_s": float(p.get("window_s", 60.0)),
        "shift_s": float(p.get("shift_s", 0.25)),
        "prune_threshold": float(p.get("prune_threshold", 0.75)),
        "prune_scope": p.get("prune_scope", "global"),
    }


def _dataset_entries(cfg: dict) -> dict:
    datasets = cfg.get("datasets")
    if not datasets:
        raise ConfigError("config has no datasets section")
    return datasets


def _load_dataset_labels(entry: dict, base: Path) -> dict:
    if "paq" in entry:
        responses = signal_io.load_paq(base / entry["paq"])
        return pipeline.labels_from_paq(responses)
    if "labels" in entry:
        return signal_io.load_labels(base / entry["labels"])
    raise DataFormatError("labels unavailable: dataset needs a paq or labels file")


def _load_dataset_recordings(entry: dict, base: Path) -> list:
    if "dir" not in entry:
        raise ConfigError("dataset entry needs a 'dir' with signal CSVs")
    root = base / entry["dir"]
    if not root.is_dir():
        raise DataFormatError(f"dataset directory not found: {root}")
    skip = {Path(entry.get("paq", "")).name, Path(entry.get("labels", "")).name}
    recs = []
    for path in sorted(root.glob("*.csv")):
        if path.name in skip:
            continue
        recs.append(signal_io.load_recording(path))
    if not recs:
        raise DataFormatError(f"no signal CSVs under {root}")
    return recs


def _feature_path(out_dir: Path, dataset_id: str) -> Path:
    return out_dir / f"features_{dataset_id}.csv"


def cmd_features(cfg: dict, seed: int, out_dir: Path, workers: int,
                 base: Path) -> int:
    params = _pipeline_params(cfg)
    out_dir.mkdir(parents=True, exist_ok=True)
    for dataset_id in sorted(_dataset_entries(cfg)):
        entry = _dataset_entries(cfg)[dataset_id]
        labels = _load_dataset_labels(entry, base)
        recordings = _load_dataset_recordings(entry, base)
        matrix = pipeline.build_feature_matrix(
            recordings, labels, params["window_s"], params["shift_s"])
        counts = pipeline.per_set_counts(matrix)
        matrix = pipeline.drop_missing(matrix)
        pipeline.save_matrix(matrix, _feature_path(out_dir, dataset_id))
        print(f"dataset {dataset_id}: rows={matrix.n_rows} "
              f"features={len(matrix.feature_names)}")
        for fset, (ac, nac) in counts.items():
            print(f"  {fset}: AC={ac} NAC={nac}")
    return EXIT_OK


def _load_matrices(cfg: dict, out_dir: Path) -> dict:
    matrices = {}
    for dataset_id in sorted(_dataset_entries(cfg)):
        path = _feature_path(out_dir, dataset_id)
        if not path.exists():
            raise DataFormatError(
                f"feature matrix {path} missing; run the features command first")
        matrices[dataset_id] = pipeline.load_matrix(path)
    return matrices


def _prepare_matrices(cfg: dict, out_dir: Path) -> dict:
    params = _pipeline_params(cfg)
    matrices = pipeline.align_schemas(_load_matrices(cfg, out_dir))
    if params["prune_scope"] == "global":
        pooled = pipeline.concat_matrices(list(matrices.values()))
        pruned = pipeline.correlation_prune(pooled, params["prune_threshold"])
        keep = pruned.feature_names
        matrices = {k: m.select_columns([m.feature_names.index(n) for n in keep])
                    for k, m in matrices.items()}
    elif params["prune_scope"] == "per_dataset":
        matrices = pipeline.align_schemas(
            {k: pipeline.correlation_prune(m, params["prune_threshold"])
             for k, m in matrices.items()})
    else:
        raise ConfigError(f"unknown prune_scope {params['prune_scope']!r}")
    return matrices


def _matrix_configs(cfg: dict) -> list:
    section = cfg.get("matrix", {})
    cells = section.get("cells")
    if not cells:
        raise ConfigError("matrix.cells is empty")
    configs = []
    for cell in cells:
        try:
            configs.append(evaluation.TrainTestConfig(
                tuple(cell["train"]), cell["test"], cell["mode"]))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad matrix cell {cell}: {exc}") from None
    return configs


def _render_table(report, configs, combos) -> str:
    lines = []
    headers = [c.key for c in configs]
    lines.append("\t".join(["feature_set", *headers]))
    for combo in combos:
        name = pipeline.combo_name(combo)
        row = [name]
        for config in configs:
            best = report.best_per_cell[config.key][name]
            if best is None:
                row.append("-")
            else:
                mark = ""
                top = report.best_in_column.get(config.key)
                if top is not None and top[0] == name:
                    mark = "*"
                row.append(mark + best.as_text())
        lines.append("\t".join(row))
    lines.append(f"models_trained\t{report.model_count}")
    return "\n".join(lines) + "\n"


def cmd_matrix(cfg: dict, seed: int, out_dir: Path, workers: int,
               base: Path) -> int:
    section = cfg.get("matrix", {})
    classifiers = tuple(section.get("classifiers", DEFAULT_CLASSIFIERS))
    for cid in classifiers:
        if cid not in models_mod.CLASSIFIER_IDS:
            raise ConfigError(f"unknown classifier {cid!r}")
    configs = _matrix_configs(cfg)
    combos = pipeline.enumerate_combos()
    matrices = _prepare_matrices(cfg, out_dir)
    report = evaluation.run_matrix(configs, combos, classifiers, matrices,
                                   seed, hyper=section.get("hyper"),
                                   workers=workers)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "matrix_records.csv", "w") as fh:
        cols = ["config", "train", "test", "mode", "combo", "classifier",
                "auroc", "recall_anxious", "recall_non_anxious", "selected",
                "best_in_column"]
        fh.write(",".join(cols) + "\n")
        for rec in report.records:
            fh.write(",".join(_csv_cell(rec[c]) for c in cols) + "\n")
    with open(out_dir / "matrix_records.json", "w") as fh:
        json.dump({"model_count": report.model_count, "records": report.records},
                  fh, indent=1, sort_keys=True)
        fh.write("\n")
    table = _render_table(report, configs, combos)
    (out_dir / "matrix_table.txt").write_text(table)
    print(table, end="")
    print(f"trained {report.model_count} models "
          f"({len(configs)} configs x {len(combos)} combos x {len(classifiers)} classifiers)")
    return EXIT_OK


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def cmd_similarity(cfg: dict, seed: int, out_dir: Path, workers: int,
                   base: Path) -> int:
    section = cfg.get("similarity", {})
    epsilon = float(section.get("epsilon", similarity.DEFAULT_EPSILON))
    max_points = int(section.get("max_points", similarity.DEFAULT_MAX_POINTS))
    matrices = _prepare_matrices(cfg, out_dir)
    ids = sorted(matrices)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for a, b in itertools.combinations_with_replacement(ids, 2):
        for fset in pipeline.FEATURE_SETS:
            ma = pipeline.project(matrices[a], (fset,))
            mb = pipeline.project(matrices[b], (fset,))
            if not ma.feature_names:
                continue
            dist = similarity.otdd(ma, mb, epsilon=epsilon,
                                   max_points=max_points,
                                   seed=evaluation.subseed(seed, "otdd", a, b, fset))
            rows.append((a, b, fset, dist))
    with open(out_dir / "similarity.csv", "w") as fh:
        fh.write("dataset_a,dataset_b,feature_set,otdd\n")
        for a, b, fset, dist in rows:
            fh.write(f"{a},{b},{fset},{dist:.17g}\n")
    for a, b, fset, dist in rows:
        print(f"{a} vs {b} [{fset}]: {dist:.6g}")
    return EXIT_OK


def cmd_importance(cfg: dict, seed: int, out_dir: Path, workers: int,
                   base: Path) -> int:
    matrices = _prepare_matrices(cfg, out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for dataset_id, matrix in sorted(matrices.items()):
        model = models_mod.train("C2", matrix.values, matrix.labels,
                                 seed=evaluation.subseed(seed, "imp", dataset_id),
                                 feature_names=matrix.feature_names)
        imp = models_mod.gini_importance(model)
        ranked = sorted(imp.items(), key=lambda kv: (-kv[1], kv[0]))
        path = out_dir / f"importance_{dataset_id}.csv"
        with open(path, "w") as fh:
            fh.write("feature,importance\n")
            for name, value in ranked:
                fh.write(f"{name},{value:.17g}\n")
        top = ", ".join(name for name, _ in ranked[:3])
        print(f"dataset {dataset_id}: top features {top}")
    return EXIT_OK


def cmd_synth(cfg: dict, seed: int, out_dir: Path, workers: int,
              base: Path) -> int:
    section = cfg.get("synth", {})
    cohorts = section.get("cohorts")
    if not cohorts:
        raise ConfigError("synth.cohorts is empty")
    for entry in cohorts:
        spec = synth.CohortSpec.from_dict(entry)
        recordings, paq = synth.generate_cohort(spec, seed)
        ds_dir = out_dir / spec.dataset_id
        ds_dir.mkdir(parents=True, exist_ok=True)
        for rec in recordings:
            name = f"{rec.participant_id}_{rec.activity_id}_{rec.channel}.csv"
            signal_io.save_recording(rec, ds_dir / name)
        with open(ds_dir / "paq.csv", "w") as fh:
            fh.write("participant,activity,q1,q2,q3,q4,q5\n")
            for r in paq:
                fh.write(",".join([r.participant_id, r.activity_id,
                                   *map(str, r.scores)]) + "\n")
        print(f"cohort {spec.dataset_id}: {spec.n_participants} participants "
              f"-> {ds_dir}")
    return EXIT_OK


COMMANDS = {
    "features": cmd_features,
    "matrix": cmd_matrix,
    "similarity": cmd_similarity,
    "importance": cmd_importance,
    "synth": cmd_synth,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="physiobench",
        description="Biosignal feature extraction and generalizability benchmark")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="overrides the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=1,
                       help="parallel cells for the matrix command")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = args.seed if args.seed is not None else cfg.get("seed")
        if seed is None:
            raise ConfigError("a seed is mandatory (config 'seed' or --seed)")
        out_dir = Path(args.out if args.out is not None else cfg.get("out", "out"))
        base = Path(args.config).resolve().parent
        return COMMANDS[args.command](cfg, int(seed), out_dir, args.workers, base)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # internal invariant violation
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
