"""Command-line interface.

One executable, one subcommand per pipeline stage:

  count      corpus text -> frequency count dumps
  assoc      count dumps + word pairs -> association measures
  featurize  dataset + resources -> feature matrix TSV
  train      dataset + resources + params -> model JSON
  predict    model + dataset or matrix -> predictions TSV
  cv         k-fold cross-validation with per-fold Pearson r
  ablate     CV with feature groups removed, one at a time
  report     descriptive statistics (repeated targets)

Data goes to stdout unless --out is given; ablate and report additionally
render a figure next to their --out file. Every handled failure prints a
one-line diagnostic to stderr and exits nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from . import ablation, assoc, corpus, evaluate, gbdt, reports
from .errors import ConfigurationError, DataError, LexcompError
from .features import (
    FeatureMatrix,
    assemble_matrix,
    build_schema,
    dataset_task,
    format_cell,
    load_schema_config,
    normalize_group,
    read_dataset,
    read_matrix_rows,
    schema_from_dict,
    write_matrix,
)
from .lexicon import Resources, load_resources

log = logging.getLogger(__name__)


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_params(path: Optional[str], seed: Optional[int] = None) -> gbdt.GBDTParams:
    values: dict = {}
    if path:
        with open(path, "r", encoding="utf-8") as fh:
            values = json.load(fh)
        if not isinstance(values, dict):
            raise ConfigurationError(f"{path}: parameter file must hold a JSON object")
    if seed is not None:
        values["seed"] = seed
    return gbdt.GBDTParams.from_dict(values)


def _load_inputs(args) -> tuple[list, Resources, "FeatureMatrix"]:
    """Dataset + resources + assembled matrix for the schema config."""
    config = load_schema_config(args.schema)
    manifest = getattr(args, "manifest", None) or config["manifest"]
    resources = load_resources(manifest) if manifest else Resources()
    instances = read_dataset(args.data)
    task = dataset_task(instances)
    if task != config["task"]:
        raise ConfigurationError(
            f"{args.data} holds {task}-task targets but {args.schema} "
            f"declares the {config['task']} task")
    schema = build_schema(config["task"], config["groups"], resources)
    matrix = assemble_matrix(instances, resources, schema)
    return instances, resources, matrix


def cmd_count(args) -> int:
    model = None
    for path in args.input:
        counted = corpus.count_frequencies(corpus.read_corpus(path))
        model = counted if model is None else model.merge(counted)
    corpus.save_counts(model, args.out)
    print(f"counted {model.total_unigrams} tokens, {model.total_bigrams} bigrams "
          f"-> {args.out}.unigrams.tsv, {args.out}.bigrams.tsv, {args.out}.meta.json",
          file=sys.stderr)
    return 0


def cmd_assoc(args) -> int:
    model = corpus.load_counts(args.counts)
    lines = ["word1\tword2\t" + "\t".join(assoc.MEASURES)]
    with open(args.pairs, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) < 2:
            raise DataError(f"{args.pairs}: expected a 2-column TSV with header")
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) < 2:
                raise DataError(f"{args.pairs}:{lineno}: expected 2 columns")
            w1, w2 = parts[0].strip().lower(), parts[1].strip().lower()
            try:
                values = assoc.measures_from_counts(
                    f1=model.unigram(w1), f2=model.unigram(w2),
                    f12=model.bigram(w1, w2), n=model.total_bigrams)
            except DataError:
                log.warning("%s:%d: counts for (%s, %s) are inconsistent, "
                            "measures left empty", args.pairs, lineno, w1, w2)
                values = {m: None for m in assoc.MEASURES}
            cells = ["" if values[m] is None else repr(values[m])
                     for m in assoc.MEASURES]
            lines.append("\t".join([w1, w2] + cells))
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_featurize(args) -> int:
    _, _, matrix = _load_inputs(args)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            write_matrix(matrix, fh)
    else:
        write_matrix(matrix, sys.stdout)
    return 0


def cmd_train(args) -> int:
    _, _, matrix = _load_inputs(args)
    params = _load_params(args.params)
    model = evaluate.train_matrix(matrix, params, n_workers=args.workers)
    gbdt.save_model(model, args.model_out)
    print(f"trained {len(model.trees)} trees on {len(matrix.rows)} instances "
          f"-> {args.model_out}", file=sys.stderr)
    return 0


def cmd_predict(args) -> int:
    model = gbdt.load_model(args.model)
    with open(args.data, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")

    if header == list(model.feature_names):
        rows = read_matrix_rows(args.data, model.feature_names)
        preds = gbdt.predict(model, rows)
        labels = [str(i) for i in range(len(rows))]
        lines = ["row\tprediction"]
    else:
        if model.schema is None:
            raise ConfigurationError(
                "model carries no featurization schema; pass a feature-matrix "
                "TSV whose header matches the model's feature names")
        schema = schema_from_dict(model.schema)
        resources = load_resources(args.manifest) if args.manifest else Resources()
        instances = read_dataset(args.data)
        matrix = assemble_matrix(instances, resources, schema)
        if matrix.schema.names != model.feature_names:
            raise ConfigurationError(
                "featurization produced different columns than the model expects")
        preds = gbdt.predict(model, matrix.rows)
        labels = list(matrix.ids)
        lines = ["id\tprediction"]
    lines += [f"{label}\t{float(pred)!r}" for label, pred in zip(labels, preds)]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def _make_folds(args, instances, matrix) -> Optional[evaluate.FoldAssignment]:
    if args.group_by_target and args.stratify_corpus:
        raise ConfigurationError(
            "--group-by-target and --stratify-corpus cannot be combined")
    if args.group_by_target:
        keys = [" ".join(inst.target) for inst in instances]
        return evaluate.kfold_split_grouped(keys, args.folds, args.seed)
    if args.stratify_corpus:
        labels = [inst.corpus_id for inst in instances]
        return evaluate.kfold_split_stratified(labels, args.folds, args.seed)
    return None


def cmd_cv(args) -> int:
    instances, _, matrix = _load_inputs(args)
    params = _load_params(args.params)
    folds = _make_folds(args, instances, matrix)
    result = evaluate.run_cv(
        matrix, params, k=args.folds, seed=args.seed,
        folds=folds, pooled=args.pooled, n_workers=args.workers)
    _emit(evaluate.cv_to_tsv(result), args.out)
    return 0


def cmd_ablate(args) -> int:
    instances, resources, matrix = _load_inputs(args)
    params = _load_params(args.params)
    groups = [normalize_group(g) for g in args.groups.split(",") if g.strip()]
    test_matrix = None
    if args.test:
        test_instances = read_dataset(args.test)
        test_matrix = assemble_matrix(test_instances, resources, matrix.schema)
    report = ablation.ablate(
        matrix, groups, params, k=args.folds, seed=args.seed,
        test_matrix=test_matrix, pooled=args.pooled, n_workers=args.workers)
    _emit(ablation.ablation_to_tsv(report), args.out)
    if args.out:
        figure = str(Path(args.out).with_suffix(".png"))
        ablation.render_ablation_figure(report, figure)
        print(f"figure -> {figure}", file=sys.stderr)
    return 0


def cmd_report(args) -> int:
    if not args.repeats:
        raise ConfigurationError("nothing to report; pass --repeats")
    instances = read_dataset(args.data)
    report = reports.repetition_report(instances)
    _emit(reports.repetition_to_tsv(report), args.out)
    if args.out:
        figure = str(Path(args.out).with_suffix(".png"))
        reports.render_repetition_figure(report, figure)
        print(f"figure -> {figure}", file=sys.stderr)
    return 0


def _add_schema_flags(sub, manifest_help: str) -> None:
    sub.add_argument("--data", required=True, help="dataset TSV")
    sub.add_argument("--schema", required=True,
                     help="schema config JSON (task, groups, optional manifest)")
    sub.add_argument("--manifest", help=manifest_help)


def _add_cv_flags(sub) -> None:
    sub.add_argument("--params", help="model parameter JSON (defaults when omitted)")
    sub.add_argument("--folds", type=int, default=9, help="fold count (default 9)")
    sub.add_argument("--seed", type=int, default=0, help="fold shuffle seed (default 0)")
    sub.add_argument("--pooled", action="store_true",
                     help="also correlate pooled out-of-fold predictions")
    sub.add_argument("--stratify-corpus", action="store_true",
                     help="balance subcorpus proportions across folds")
    sub.add_argument("--group-by-target", action="store_true",
                     help="keep instances sharing a target string in one fold")
    sub.add_argument("--workers", type=int, default=1,
                     help="histogram worker threads (default 1)")
    sub.add_argument("--out", help="write TSV here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexcomp",
        description="Lexical complexity prediction: corpus statistics, "
                    "collocation measures, boosted-tree regression, and an "
                    "evaluation harness.")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("count", help="count unigrams and bigrams in text")
    sub.add_argument("--input", action="append", required=True,
                     help="text file, one sentence per line (repeatable)")
    sub.add_argument("--out", required=True, help="output path prefix")
    sub.set_defaults(func=cmd_count)

    sub = commands.add_parser("assoc", help="association measures for word pairs")
    sub.add_argument("--counts", required=True, help="count dump prefix from `count`")
    sub.add_argument("--pairs", required=True, help="TSV with header: word1<TAB>word2")
    sub.add_argument("--out", help="write TSV here instead of stdout")
    sub.set_defaults(func=cmd_assoc)

    sub = commands.add_parser("featurize", help="dataset to feature matrix TSV")
    _add_schema_flags(sub, "resource manifest JSON (overrides the schema config)")
    sub.add_argument("--out", help="write TSV here instead of stdout")
    sub.set_defaults(func=cmd_featurize)

    sub = commands.add_parser("train", help="train a model on a labeled dataset")
    _add_schema_flags(sub, "resource manifest JSON (overrides the schema config)")
    sub.add_argument("--params", help="model parameter JSON (defaults when omitted)")
    sub.add_argument("--workers", type=int, default=1,
                     help="histogram worker threads (default 1)")
    sub.add_argument("--model-out", required=True, help="model JSON output path")
    sub.set_defaults(func=cmd_train)

    sub = commands.add_parser("predict", help="score a dataset or feature matrix")
    sub.add_argument("--model", required=True, help="model JSON from `train`")
    sub.add_argument("--data", required=True,
                     help="dataset TSV, or a feature-matrix TSV whose header "
                          "matches the model")
    sub.add_argument("--manifest", help="resource manifest JSON (dataset input only)")
    sub.add_argument("--out", help="write TSV here instead of stdout")
    sub.set_defaults(func=cmd_predict)

    sub = commands.add_parser("cv", help="k-fold cross-validation")
    _add_schema_flags(sub, "resource manifest JSON (overrides the schema config)")
    _add_cv_flags(sub)
    sub.set_defaults(func=cmd_cv)

    sub = commands.add_parser("ablate", help="remove feature groups one at a time")
    _add_schema_flags(sub, "resource manifest JSON (overrides the schema config)")
    _add_cv_flags(sub)
    sub.add_argument("--groups", required=True,
                     help="comma-separated groups to remove, e.g. "
                          "length,corpus,norms,freq,assoc")
    sub.add_argument("--test", help="held-out labeled dataset TSV")
    sub.set_defaults(func=cmd_ablate)

    sub = commands.add_parser("report", help="descriptive dataset statistics")
    sub.add_argument("--data", required=True, help="labeled dataset TSV")
    sub.add_argument("--repeats", action="store_true",
                     help="repeated-target occurrence and score-range report")
    sub.add_argument("--out", help="write TSV here instead of stdout")
    sub.set_defaults(func=cmd_report)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except LexcompError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
