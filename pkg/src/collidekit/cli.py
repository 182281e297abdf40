"""Command-line pipeline: ingest, detect, eval, merge, bench.

Every command writes its primary output plus a ``<out>.manifest.json``
recording the command, flags, input digests, seed, and tool version. Given
identical inputs and seed, outputs are byte-identical across runs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__
from .bench import BenchConfig, load_external_scores, run_benchmark
from .confusion import ConfusionConfig, detect_collision_confusion, train_classifier
from .corpus import (Corpus, CorpusError, load_collection, load_corpus,
                     save_corpus_jsonl)
from .coverage import CoverageConfig, coverage_matrix
from .evaluation import (ExperimentConfig, run_confusion_experiment,
                         run_coverage_experiment)
from .graph import IntentRef, load_meta
from .merge import (BuildConfig, OOSSet, apply_merge, build_arbitrated,
                    build_naive, load_plan, plan_merge, save_plan)
from .similarity import NGramConfig, SimilarityKind, load_embeddings

__all__ = ["main"]


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, ensure_ascii=False, indent=2, sort_keys=True)
        fh.write("\n")


def _write_manifest(out: Path, command: str, args: argparse.Namespace,
                    inputs: list[Path], outputs: list[Path]) -> None:
    snapshot = {k: (str(v) if isinstance(v, Path) else v)
                for k, v in sorted(vars(args).items()) if k != "func"}
    manifest = {
        "command": command,
        "config": snapshot,
        "inputs": {str(p): _sha256(p) for p in sorted(set(inputs))},
        "outputs": [str(p) for p in outputs],
        "seed": getattr(args, "seed", None),
        "version": __version__,
    }
    _write_json(Path(str(out) + ".manifest.json"), manifest)


def _load_corpora(paths: list[str]) -> list[Corpus]:
    corpora: list[Corpus] = []
    seen: set[str] = set()
    for p in paths:
        for corpus in load_collection(p):
            if corpus.dataset_id in seen:
                raise CorpusError(f"duplicate dataset_id {corpus.dataset_id!r} "
                                  f"across input files")
            seen.add(corpus.dataset_id)
            corpora.append(corpus)
    return corpora


def _similarity_kind(args: argparse.Namespace) -> SimilarityKind:
    if args.sim == "ngram":
        return SimilarityKind.for_ngram(NGramConfig(max_order=args.max_order))
    if not args.embeddings or not args.embedding_index:
        raise ValueError("--sim embedding requires --embeddings and --embedding-index")
    return SimilarityKind.for_embeddings(
        load_embeddings(args.embeddings, args.embedding_index))


def _ref_obj(ref: IntentRef) -> dict:
    return {"dataset": ref.dataset, "intent": ref.intent}


def cmd_ingest(args: argparse.Namespace) -> None:
    out = Path(args.out)
    corpora: list[Corpus] = []
    seen: set[str] = set()
    for p in args.inputs:
        if args.format == "csv":
            if args.dataset_id is None:
                raise CorpusError("--dataset-id is required for csv input")
            loaded = [load_corpus(p, format="csv", dataset_id=args.dataset_id)]
        else:
            loaded = load_collection(p)
        for corpus in loaded:
            if corpus.dataset_id in seen:
                raise CorpusError(f"duplicate dataset_id {corpus.dataset_id!r}")
            seen.add(corpus.dataset_id)
            corpora.append(corpus)
    with open(out, "w", encoding="utf-8") as fh:
        for corpus in corpora:
            for intent in corpus.intents.values():
                for q in intent.queries:
                    obj = {"dataset": corpus.dataset_id, "intent": intent.name,
                           "text": q.text}
                    if q.split is not None:
                        obj["split"] = q.split
                    fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    _write_manifest(out, "ingest", args, [Path(p) for p in args.inputs], [out])


def cmd_detect(args: argparse.Namespace) -> None:
    out = Path(args.out)
    corpora = _load_corpora(args.corpora)
    results = []
    if args.method == "coverage":
        kind = _similarity_kind(args)
        cfg = CoverageConfig(kind=kind, kappa=args.kappa,
                             pair_aggregation=args.aggregation)
        named = [(IntentRef(dataset=c.dataset_id, intent=n), it)
                 for c in corpora for n, it in c.intents.items()]
        for i, (ra, ia) in enumerate(named):
            row_refs = [(rb, ib) for rb, ib in named[i + 1:] if rb.dataset != ra.dataset]
            if not row_refs:
                continue
            table = coverage_matrix([ia], [ib for _, ib in row_refs], cfg)[0]
            for (rb, _), res in zip(row_refs, table):
                results.append({"a": _ref_obj(ra), "b": _ref_obj(rb),
                                "score_ab": res.score_ab, "score_ba": res.score_ba,
                                "aggregate": res.aggregate, "collide": res.collide})
        report = {"method": "coverage", "kappa": args.kappa,
                  "aggregation": args.aggregation, "pairs": results}
    else:
        cfg = ConfusionConfig(tau=args.tau, seed=args.seed)
        multi = [c for c in corpora if len(c.intents) >= 2]
        if not multi:
            raise ValueError("confusion detection needs a dataset with >= 2 intents")
        for trained in multi:
            model = train_classifier(trained, cfg)
            for other in corpora:
                if other.dataset_id == trained.dataset_id:
                    continue
                for name, intent in other.intents.items():
                    collide, target, score = detect_collision_confusion(model, intent, cfg)
                    results.append({"trained_dataset": trained.dataset_id,
                                    "candidate": {"dataset": other.dataset_id,
                                                  "intent": name},
                                    "target": target, "score": score,
                                    "collide": collide})
        report = {"method": "confusion", "tau": args.tau, "results": results}
    _write_json(out, report)
    inputs = [Path(p) for p in args.corpora]
    _write_manifest(out, "detect", args, inputs, [out])


def cmd_eval(args: argparse.Namespace) -> None:
    out = Path(args.out)
    meta = Path(args.meta)
    if not meta.exists():
        raise FileNotFoundError(f"meta-dataset file not found: {meta}")
    graph = load_meta(meta)
    corpora = _load_corpora(args.corpora)
    cfg = ExperimentConfig(min_queries=args.min_queries,
                           n_non_collision_sample=args.sample, seed=args.seed)
    if args.method == "coverage":
        kind = _similarity_kind(args)
        cov_cfg = CoverageConfig(kind=kind, kappa=args.kappa,
                                 pair_aggregation=args.aggregation)
        result, scored = run_coverage_experiment(graph, corpora, cfg, cov_cfg)
    else:
        conf_cfg = ConfusionConfig(tau=args.tau, seed=args.seed)
        result, scored = run_confusion_experiment(graph, corpora, cfg, conf_cfg)
    report = {
        "method": args.method,
        "auc": result.auc,
        "auc_high_means_collision": result.auc_high_means_collision,
        "orientation": result.orientation,
        "n_pos": result.n_pos,
        "n_neg": result.n_neg,
        "pairs": [{"a": _ref_obj(p.a), "b": _ref_obj(p.b),
                   "score": p.score, "label": p.label} for p in scored],
    }
    _write_json(out, report)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("a_dataset,a_intent,b_dataset,b_intent,score,label\n")
            for p in scored:
                fh.write(f"{p.a.dataset},{p.a.intent},{p.b.dataset},{p.b.intent},"
                         f"{p.score!r},{p.label}\n")
    inputs = [meta] + [Path(p) for p in args.corpora]
    outputs = [out] + ([Path(args.csv)] if args.csv else [])
    _write_manifest(out, "eval", args, inputs, outputs)


def cmd_merge(args: argparse.Namespace) -> None:
    out = Path(args.out)
    corpora = _load_corpora(args.corpora)
    inputs = [Path(p) for p in args.corpora]
    if args.merge_cmd == "plan":
        graph = load_meta(args.meta)
        renames = json.loads(Path(args.renames).read_text()) if args.renames else None
        plan = plan_merge(graph, corpora, drop_hierarchical=args.drop_hierarchical,
                          renames=renames, rho=args.rho)
        save_plan(plan, out)
        inputs.append(Path(args.meta))
    elif args.merge_cmd == "apply":
        plan = load_plan(args.plan)
        merged = apply_merge(plan, corpora)
        save_corpus_jsonl(merged, out)
        inputs.append(Path(args.plan))
    else:  # build
        cfg = BuildConfig(min_queries=args.min_queries,
                          cap=args.cap,
                          train_fraction=args.train_fraction, seed=args.seed)
        if args.naive:
            built = build_naive(corpora, cfg)
        else:
            if not args.meta:
                raise ValueError("arbitrated build requires --meta (or pass --naive)")
            graph = load_meta(args.meta)
            built = build_arbitrated(corpora, graph, cfg,
                                     drop_hierarchical=args.drop_hierarchical)
            inputs.append(Path(args.meta))
        with open(out, "w", encoding="utf-8") as fh:
            for corpus in (built.train, built.test):
                for intent in corpus.intents.values():
                    for q in intent.queries:
                        obj = {"dataset": corpus.dataset_id, "intent": intent.name,
                               "text": q.text, "split": q.split}
                        if q.source_dataset is not None:
                            obj["source_dataset"] = q.source_dataset
                        if q.source_intent is not None:
                            obj["source_intent"] = q.source_intent
                        fh.write(json.dumps(obj, ensure_ascii=False) + "\n")
    _write_manifest(out, f"merge {args.merge_cmd}", args, inputs, [out])


def _load_split(path: str, split: str) -> Corpus:
    corpora = load_collection(path)
    if len(corpora) != 1:
        raise CorpusError(f"{path}: expected a single merged dataset")
    corpus = corpora[0]
    picked = Corpus(dataset_id=corpus.dataset_id)
    for name, intent in corpus.intents.items():
        kept = [q for q in intent.queries if q.split == split or q.split is None]
        if kept:
            picked.intents[name] = type(intent)(dataset_id=intent.dataset_id,
                                                name=name, queries=kept)
    if not picked.intents:
        raise CorpusError(f"{path}: no {split!r} rows")
    return picked


def cmd_bench(args: argparse.Namespace) -> None:
    out = Path(args.out)
    train = _load_split(args.train, "train")
    test = _load_split(args.test, "test")
    inputs = [Path(args.train), Path(args.test)]
    oos_sets: dict[str, OOSSet] = {}
    for spec_arg in args.oos or []:
        name, _, path = spec_arg.partition("=")
        if not path:
            name, path = Path(spec_arg).stem, spec_arg
        oos_corpora = load_collection(path)
        queries = [q for c in oos_corpora for q in c.all_queries()]
        oos_sets[name] = OOSSet(queries=queries)
        inputs.append(Path(path))
    graph = None
    if args.meta:
        graph = load_meta(args.meta)
        inputs.append(Path(args.meta))
    external = None
    if args.import_scores:
        external = load_external_scores(args.import_scores)
        inputs.append(Path(args.import_scores))
    cfg = BenchConfig(threshold=args.threshold, seed=args.seed)
    report = run_benchmark(train, test, oos_sets, cfg, graph=graph,
                           external_scores=external)
    doc = {
        "threshold": report.threshold,
        "in_scope_accuracy": report.in_scope_accuracy,
        "per_intent_accuracy": report.per_intent_accuracy,
        "oos_auc": report.oos_auc,
        "per_collision_count": {str(k): v for k, v in report.per_collision_count.items()},
    }
    _write_json(out, doc)
    _write_manifest(out, "bench", args, inputs, [out])


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sim", choices=("ngram", "embedding"), default="ngram")
    p.add_argument("--max-order", type=int, default=3)
    p.add_argument("--embeddings", help="embedding matrix file")
    p.add_argument("--embedding-index", help="embedding index JSONL")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collidekit",
                                     description="Intent collision detection and "
                                                 "corpus merging toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("ingest", help="convert corpora to canonical JSONL")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    p.add_argument("--dataset-id", help="dataset id for csv input")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("detect", help="run a collision detector over corpora")
    p.add_argument("corpora", nargs="+")
    p.add_argument("--method", choices=("coverage", "confusion"), required=True)
    _add_sim_flags(p)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--aggregation", choices=("directed", "max_of_both", "mean_of_both"),
                   default="max_of_both")
    p.add_argument("--seed", type=int, default=13)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="AUC evaluation against a collision meta-dataset")
    p.add_argument("corpora", nargs="+")
    p.add_argument("--meta", required=True)
    p.add_argument("--method", choices=("coverage", "confusion"), default="coverage")
    _add_sim_flags(p)
    p.add_argument("--kappa", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--aggregation", choices=("directed", "max_of_both", "mean_of_both"),
                   default="max_of_both")
    p.add_argument("--min-queries", type=int, default=10)
    p.add_argument("--sample", type=int, default=300,
                   help="number of non-colliding pairs to sample")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="also write per-pair scores as CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("merge", help="plan, apply, or build merged corpora")
    msub = p.add_subparsers(dest="merge_cmd", required=True)
    mp = msub.add_parser("plan")
    mp.add_argument("corpora", nargs="+")
    mp.add_argument("--meta", required=True)
    mp.add_argument("--drop-hierarchical", action="store_true")
    mp.add_argument("--rho", type=float, default=2.0)
    mp.add_argument("--renames", help="JSON file mapping default names to new names")
    mp.add_argument("--out", required=True)
    mp.set_defaults(func=cmd_merge)
    ma = msub.add_parser("apply")
    ma.add_argument("corpora", nargs="+")
    ma.add_argument("--plan", required=True)
    ma.add_argument("--out", required=True)
    ma.set_defaults(func=cmd_merge)
    mb = msub.add_parser("build")
    mb.add_argument("corpora", nargs="+")
    mb.add_argument("--meta")
    mb.add_argument("--naive", action="store_true")
    mb.add_argument("--drop-hierarchical", action="store_true", default=True)
    mb.add_argument("--min-queries", type=int, default=50)
    mb.add_argument("--cap", type=int, default=None,
                    help="per-intent query cap (naive default: 150)")
    mb.add_argument("--train-fraction", type=float, default=0.85)
    mb.add_argument("--seed", type=int, default=0)
    mb.add_argument("--out", required=True)
    mb.set_defaults(func=cmd_merge)

    p = sub.add_parser("bench", help="intent classification benchmark")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--oos", action="append",
                   help="OOS JSONL, optionally as name=path; repeatable")
    p.add_argument("--meta", help="collision meta-dataset for per-degree accuracy")
    p.add_argument("--import-scores",
                   help="JSONL of {id,label,confidence} from an external model")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "cmd", None) == "merge" and args.merge_cmd == "build" \
            and args.naive and args.cap is None:
        args.cap = 150
    try:
        args.func(args)
    except (ValueError, OSError) as exc:
        json.dump({"error": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
