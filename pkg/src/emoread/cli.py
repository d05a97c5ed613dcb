"""Experiment orchestration CLI.

Subcommands cover the full desk-scale pipeline: ``prepare`` (clean, label,
split, stats), ``counterfit`` (affect-enrich a vector table), ``train``,
``eval`` (metric row, plus paired significance tests when comparing two
checkpoints) and ``behavior`` (attention-map audits and heatmaps).

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import behavior as behavior_mod
from . import context as context_mod
from . import corpus as corpus_mod
from . import embedding as embedding_mod
from . import fusion, metrics
from .errors import DataError, EmoreadError, NumericalError

THREADS_ENV = "REDAFF_THREADS"


def worker_count() -> int:
    """Worker cap from the environment; defaults to 1 (fully sequential)."""
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise DataError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if n < 1:
        raise DataError(f"{THREADS_ENV} must be >= 1, got {n}")
    return n


def load_config_file(path) -> dict:
    """Read a config file: JSON object, or simple key=value lines."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.strip()
    if stripped.startswith("{"):
        config = json.loads(text)
        if not isinstance(config, dict):
            raise DataError(f"{path}: config must be a JSON object")
        return config
    config: dict = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataError(f"{path}:{line_no}: expected key=value")
        key, _, value = line.partition("=")
        value = value.strip()
        try:
            config[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            config[key.strip()] = value
    return config


# --- prepare ----------------------------------------------------------------

def cmd_prepare(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    noise_terms = corpus_mod.DEFAULT_NOISE_TERMS
    if args.noise_terms:
        noise_terms = tuple(
            line.strip() for line in Path(args.noise_terms).read_text(
                encoding="utf-8").splitlines() if line.strip())
    corpus, rejects = corpus_mod.load_corpus(args.corpus, noise_terms, seed=args.seed)
    corpus_mod.save_prepared_corpus(corpus, out_dir / "prepared.jsonl")
    stats = corpus_mod.corpus_stats(corpus)
    (out_dir / "stats.tsv").write_text(stats.to_tsv(), encoding="utf-8")
    if len(corpus) >= 2:
        corr = corpus_mod.emotion_correlations(corpus)
        (out_dir / "correlations.tsv").write_text(
            corpus_mod.correlations_to_tsv(corr), encoding="utf-8")
    if rejects:
        lines = ["line\tid\treason"]
        lines += [f"{r.line_no}\t{r.doc_id or ''}\t{r.reason}" for r in rejects]
        (out_dir / "rejected.tsv").write_text("\n".join(lines) + "\n", encoding="utf-8")
        for r in rejects:
            print(f"rejected line {r.line_no}: {r.reason}", file=sys.stderr)
    counts = {s: 0 for s in corpus_mod.SPLIT_NAMES}
    for split in corpus.split_assignment.values():
        counts[split] += 1
    print(f"prepared {len(corpus)} documents "
          f"(train={counts['train']} val={counts['val']} test={counts['test']}, "
          f"rejected={len(rejects)}) -> {out_dir}")
    return 0


# --- counterfit ---------------------------------------------------------------

def cmd_counterfit(args) -> int:
    table, skipped = embedding_mod.load_embeddings(args.vectors, args.dim)
    if skipped:
        print(f"skipped {skipped} malformed vector lines", file=sys.stderr)
    lexicon = embedding_mod.load_lexicon(args.lexicon)
    constraints = embedding_mod.build_constraints(
        lexicon, threshold=args.threshold, max_pairs=args.max_pairs, seed=args.seed,
        source=str(args.lexicon))
    result = embedding_mod.counterfit(
        table, constraints, epochs=args.epochs, lr=args.lr,
        margins=(args.attract_margin, args.repel_margin),
        preserve_weight=args.preserve_weight, seed=args.seed)
    embedding_mod.save_embeddings(result.table, args.out)
    if args.constraints_out:
        embedding_mod.save_constraints(constraints, args.constraints_out)
    if result.dropped_oov_pairs:
        print(f"dropped {result.dropped_oov_pairs} out-of-vocabulary pairs",
              file=sys.stderr)
    classes = embedding_mod.lexicon_classes(lexicon, args.threshold)
    try:
        before = embedding_mod.cohesion_report(table, classes)
        after = embedding_mod.cohesion_report(result.table, classes)
    except DataError as exc:
        print(f"cohesion report unavailable: {exc}", file=sys.stderr)
    else:
        print(f"within-class cosine: {before.within_class_cosine:.4f} -> "
              f"{after.within_class_cosine:.4f}")
        print(f"cross-class cosine:  {before.cross_class_cosine:.4f} -> "
              f"{after.cross_class_cosine:.4f}")
    if result.epoch_losses:
        print(f"final epoch loss: {result.epoch_losses[-1]:.6f}")
    return 0


# --- train --------------------------------------------------------------------

def _build_model_config(config: dict) -> fusion.ModelConfig:
    encoder_spec = str(config.get("encoder", "toy"))
    encoder = "precomputed" if encoder_spec.startswith("precomputed") else "toy"
    kwargs = dict(
        mode=config.get("mode", "full"),
        hidden_size=int(config.get("hidden_size", 100)),
        max_tokens=int(config.get("max_tokens", 64)),
        dropout=float(config.get("dropout", 0.5)),
        l2_lstm=float(config.get("l2_lstm", 0.001)),
        encoder=encoder,
        context_dim=int(config.get("context_dim", 64)),
        encoder_layers=int(config.get("encoder_layers", 2)),
        encoder_heads=int(config.get("encoder_heads", 4)),
        encoder_model_dim=int(config.get("encoder_model_dim", 64)),
        encoder_ff_dim=int(config.get("encoder_ff_dim", 128)),
        encoder_max_len=int(config.get("encoder_max_len", 64)),
    )
    if config.get("attn_dim") is not None:
        kwargs["attn_dim"] = int(config["attn_dim"])
    if config.get("head_widths") is not None:
        kwargs["head_widths"] = tuple(int(w) for w in config["head_widths"])
    return fusion.ModelConfig(**kwargs)


def _precomputed_path(config: dict) -> str | None:
    encoder_spec = str(config.get("encoder", "toy"))
    if encoder_spec.startswith("precomputed:"):
        return encoder_spec.split(":", 1)[1]
    if encoder_spec == "precomputed":
        path = config.get("vectors_precomputed")
        if not path:
            raise DataError("encoder 'precomputed' needs 'precomputed:<path>' "
                            "or a 'vectors_precomputed' entry")
        return str(path)
    return None


def run_training(config: dict, seed: int, out_dir: Path) -> dict:
    """One training run: returns a small summary dict (used by grid runs)."""
    out_dir.mkdir(parents=True, exist_ok=True)
    if "corpus" not in config:
        raise DataError("train: config needs a 'corpus' entry")
    corpus = corpus_mod.load_prepared_corpus(config["corpus"])
    if not corpus.split_assignment:
        raise DataError("train: corpus has no split assignment; run prepare first")
    model_config = _build_model_config(config)

    embedding = None
    if model_config.mode != "context-only":
        if "vectors" not in config or "dim" not in config:
            raise DataError("train: config needs 'vectors' and 'dim' for affect modes")
        embedding, _ = embedding_mod.load_embeddings(
            config["vectors"], int(config["dim"]))

    tokenizer = None
    context_vectors = None
    vectors_path = _precomputed_path(config)
    if model_config.mode != "affect-only":
        if model_config.encoder == "toy":
            train_texts = [d.raw_text for d in corpus.subset("train").documents]
            tokenizer = context_mod.BpeTokenizer().fit(
                train_texts, num_merges=int(config.get("bpe_merges", 200)))
        else:
            context_vectors = context_mod.load_precomputed(
                vectors_path, model_config.context_dim)
            context_mod.resolve_vectors(
                context_vectors, corpus.ids(),
                allow_missing=bool(config.get("allow_missing", False)))

    model = fusion.init_model(model_config, embedding=embedding,
                              tokenizer=tokenizer,
                              context_vectors=context_vectors,
                              context_vectors_path=vectors_path,
                              seed=seed)
    train_config = fusion.TrainConfig(
        lr=float(config.get("lr", 0.000015)),
        batch_size=int(config.get("batch_size", 64)),
        epochs=int(config.get("epochs", 200)),
        seed=seed,
    )
    result = fusion.train(model, corpus, train_config)
    fusion.save_checkpoint(model, out_dir / "checkpoint.bin",
                           out_dir / "checkpoint.json")
    (out_dir / "trace.tsv").write_text(result.trace_tsv(), encoding="utf-8")
    return {
        "out": str(out_dir),
        "seed": seed,
        "best_epoch": result.best_epoch,
        "best_val_mse": result.best_val_mse,
        "final_train_mse": result.train_mse[-1] if result.train_mse else float("nan"),
    }


def cmd_train(args) -> int:
    config = load_config_file(args.config)
    if args.mode:
        config["mode"] = args.mode
    if args.encoder:
        config["encoder"] = args.encoder
    out_dir = Path(args.out or config.get("out", "runs"))
    seeds = config.get("seeds")
    if args.seed is not None:
        seeds = [args.seed]
    elif seeds is None:
        seeds = [int(config.get("seed", 0))]
    seeds = [int(s) for s in seeds]
    if len(seeds) == 1:
        summary = run_training(config, seeds[0], out_dir)
        print(json.dumps(summary, sort_keys=True))
        return 0
    workers = min(worker_count(), len(seeds))
    jobs = [(config, seed, out_dir / f"seed-{seed}") for seed in seeds]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            summaries = list(pool.map(_run_training_job, jobs))
    else:
        summaries = [_run_training_job(job) for job in jobs]
    for summary in summaries:
        print(json.dumps(summary, sort_keys=True))
    return 0


def _run_training_job(job) -> dict:
    config, seed, out_dir = job
    return run_training(config, seed, out_dir)


# --- eval ---------------------------------------------------------------------

def _load_checkpoint(prefix: str) -> fusion.EmotionModel:
    bin_path = Path(prefix + ".bin")
    manifest_path = Path(prefix + ".json")
    if not bin_path.exists() or not manifest_path.exists():
        raise DataError(f"missing checkpoint files {bin_path} / {manifest_path}")
    return fusion.load_checkpoint(bin_path, manifest_path)


def _eval_pairs(model: fusion.EmotionModel, corpus: corpus_mod.LabeledCorpus
                ) -> list[metrics.EvalPair]:
    preds = fusion.predict(model, corpus.documents)
    return [metrics.EvalPair(prediction=preds[i], truth=corpus.profiles[i],
                             doc_id=doc.id)
            for i, doc in enumerate(corpus.documents)]


def cmd_eval(args) -> int:
    corpus = corpus_mod.load_prepared_corpus(args.corpus)
    subset = corpus.subset(args.split) if args.split != "all" else corpus
    if len(subset) == 0:
        raise DataError(f"eval: split {args.split!r} is empty")
    model = _load_checkpoint(args.checkpoint)
    pairs = _eval_pairs(model, subset)
    report = metrics.evaluate(pairs)
    output = report.to_tsv_row(label=Path(args.checkpoint).name)
    if args.compare:
        other = _load_checkpoint(args.compare)
        other_pairs = _eval_pairs(other, subset)
        other_report = metrics.evaluate(other_pairs)
        output += other_report.to_tsv_row(
            label=Path(args.compare).name).splitlines()[1] + "\n"
        mc = metrics.mcnemar(metrics.acc_flags(pairs), metrics.acc_flags(other_pairs))
        d_stat, ks_p = metrics.ks_test(metrics.rmse_per_doc(pairs),
                                       metrics.rmse_per_doc(other_pairs))
        output += "significance\tvalue\n"
        if mc.no_discordance:
            output += "mcnemar\tno discordance\n"
        else:
            output += (f"mcnemar_chi2\t{mc.statistic:.4f}\n"
                       f"mcnemar_p\t{mc.p_value:.6g}\n")
        output += f"ks_d\t{d_stat:.6f}\nks_p\t{ks_p:.6g}\n"
    if args.out:
        Path(args.out).write_text(output, encoding="utf-8")
    print(output, end="")
    return 0


# --- behavior -------------------------------------------------------------------

def cmd_behavior(args) -> int:
    corpus = corpus_mod.load_prepared_corpus(args.corpus)
    subset = corpus.subset(args.split) if args.split != "all" else corpus
    if len(subset) == 0:
        raise DataError(f"behavior: split {args.split!r} is empty")
    model = _load_checkpoint(args.checkpoint)
    if model.config.mode == "context-only":
        raise DataError("behavior: context-only checkpoint has no attention to audit")
    gazetteer = set()
    if args.gazetteer:
        gazetteer = {line.strip().split("\t")[0]
                     for line in Path(args.gazetteer).read_text(
                         encoding="utf-8").splitlines() if line.strip()}
    tagger = behavior_mod.GazetteerTagger(
        gazetteer, capitalized_heuristic=not args.no_capitalized_heuristic)
    docs = list(subset.documents)
    model_maps = [behavior_mod.ModelAttentionMap(doc.id, fusion.attention_map(model, doc))
                  for doc in docs]
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports = []
    for lexicon_path in args.lexicon:
        lexicon = embedding_mod.load_lexicon(lexicon_path)
        words = behavior_mod.emotion_word_set(lexicon, threshold=args.threshold)
        eams = [behavior_mod.build_eam(doc, words, tagger) for doc in docs]
        empty = sum(1 for e in eams if e.is_empty)
        try:
            report = behavior_mod.behavior_report(
                docs, model_maps, eams, lexicon_name=Path(lexicon_path).stem)
        except DataError as exc:
            print(f"warning: {Path(lexicon_path).stem}: {exc} "
                  f"({empty}/{len(docs)} documents without key terms)", file=sys.stderr)
            continue
        reports.append(report)
    (out_dir / "behavior.tsv").write_text(
        behavior_mod.behavior_table(reports) if reports
        else "lexicon\tbeh_sim\tword_sim\tword_prob\tskipped_auc\texcluded_d_prime\n",
        encoding="utf-8")
    capped = docs[:args.max_heatmaps]
    page = behavior_mod.render_heatmap_page(
        [(model_maps[i].weights, doc) for i, doc in enumerate(capped)])
    (out_dir / "heatmaps.html").write_text(page, encoding="utf-8")
    dump = "".join(behavior_mod.attention_dump(doc, model_maps[i].weights)
                   for i, doc in enumerate(docs))
    (out_dir / "attention.tsv").write_text(dump, encoding="utf-8")
    print(behavior_mod.behavior_table(reports) if reports else "no behavior rows",
          end="" if reports else "\n")
    return 0


# --- entry point ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="emoread",
        description="Readers' emotion pipeline: prepare, counterfit, train, eval, behavior.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="clean, label-map, split a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-terms", default=None,
                   help="file with one noise term per line (default: built-in list)")
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("counterfit", help="affect-enrich a word vector table")
    p.add_argument("--vectors", required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--lexicon", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--constraints-out", default=None)
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--attract-margin", type=float, default=0.8)
    p.add_argument("--repel-margin", type=float, default=0.3)
    p.add_argument("--preserve-weight", type=float, default=0.1)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--max-pairs", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_counterfit)

    p = sub.add_parser("train", help="train a model from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--mode", choices=fusion.MODES, default=None)
    p.add_argument("--encoder", default=None,
                   help="'toy' or 'precomputed:<path>'")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="metric row for a checkpoint (optionally paired tests)")
    p.add_argument("--checkpoint", required=True,
                   help="checkpoint prefix (expects <prefix>.bin and <prefix>.json)")
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="test",
                   choices=("train", "val", "test", "all"))
    p.add_argument("--compare", default=None,
                   help="second checkpoint prefix for McNemar / KS tests")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("behavior", help="attention-map audits and heatmaps")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon", required=True, action="append",
                   help="emotion lexicon tsv (repeatable)")
    p.add_argument("--gazetteer", default=None)
    p.add_argument("--split", default="test",
                   choices=("train", "val", "test", "all"))
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--no-capitalized-heuristic", action="store_true")
    p.add_argument("--max-heatmaps", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_behavior)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except EmoreadError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
