"""chartrole command line: corpus tooling, training harness, annotation service."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

def _corpus_from_path(path: str, format_tag: str = "native", require_roles=True):
    from chartrole import formats

    p = Path(path)
    if p.is_file() and p.suffix == ".manifest" or p.name == "corpus.manifest":
        return formats.load_manifest(p, require_roles=require_roles)
    if (p / "corpus.manifest").is_file():
        return formats.load_manifest(p / "corpus.manifest", require_roles=require_roles)
    return formats.load_corpus(p, format_tag, require_roles=require_roles)


def cmd_synth(args):
    from chartrole import formats, synth

    corpus = synth.generate_corpus(args.n, seed=args.seed, name=args.name)
    if args.strip_roles:
        export = synth.strip_roles(corpus)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for sample in export.samples:
            (out / f"{sample.sample_id}.json").write_text(
                json.dumps(formats.sample_to_native(sample), indent=1), encoding="utf-8")
            formats.write_image(out / f"{sample.sample_id}.png", sample.image)
    else:
        formats.export_annotations(corpus, args.out)
    print(f"wrote {len(corpus)} synthetic charts to {args.out}")


def cmd_ingest(args):
    from chartrole import formats

    corpus, report = formats.load_corpus(args.root, args.format, name=args.name,
                                         require_roles=not args.allow_unlabeled)
    print(report.summary())
    root = Path(args.root)
    ann, img = {}, {}
    for sample in corpus.samples:
        matches = sorted(root.rglob(f"{sample.sample_id}.json"))
        ann[sample.sample_id] = matches[0]
        img[sample.sample_id] = formats.find_image(matches[0], root)
    entries = formats.manifest_entries(corpus, ann, img)
    formats.write_manifest(args.out, corpus, root, args.format, entries)
    print(f"manifest: {args.out} ({len(corpus)} samples)")


def cmd_split(args):
    from chartrole import corpus as corpus_mod
    from chartrole import formats

    ratios = tuple(float(r) for r in args.ratios.split(","))
    names = tuple(args.names.split(",")) if args.names else None
    corpus, _ = formats.load_manifest(args.manifest, require_roles=False)
    corpus = corpus_mod.assign_splits(corpus, ratios, args.seed, names)
    doc = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    split_of = {}
    for split, members in corpus.splits.items():
        for sid in members:
            split_of[sid] = split
    for entry in doc["entries"]:
        entry["split"] = split_of.get(entry["sample_id"])
    Path(args.manifest).write_text(json.dumps(doc, indent=1), encoding="utf-8")
    sizes = {k: len(v) for k, v in corpus.splits.items()}
    print(f"splits: {sizes}")


def cmd_augment(args):
    from chartrole import augment, formats

    corpus, report = _corpus_from_path(args.root)
    if report.skipped:
        print(report.summary())
    methods = tuple(args.methods.split(","))
    if "noise" in methods:  # alias for both noise kinds
        methods = tuple(m for m in methods if m != "noise") + (
            "salt_pepper_noise", "gaussian_noise")
    out = augment.augment_corpus(corpus, methods, args.seed)
    formats.export_annotations(out, args.out)
    print(f"augmented corpus: {len(corpus)} -> {len(out)} samples at {args.out}")


def cmd_noisy_set(args):
    from chartrole import augment, formats

    corpus, _ = _corpus_from_path(args.root)
    noisy = augment.make_noisy_corpus(corpus, args.seed)
    formats.export_annotations(noisy, args.out)
    print(f"noisy set: {len(noisy)} samples at {args.out}")


def cmd_cutout(args):
    from chartrole import balancing, formats
    from chartrole.corpus import class_distribution

    corpus, _ = _corpus_from_path(args.root)
    hist = class_distribution(corpus)
    from chartrole.augment import derive_seed

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    plans = []
    for sample in corpus.samples:
        masked, plan = balancing.cutout_sample(
            sample, hist, derive_seed(args.seed, sample.sample_id, "cutout"))
        formats.write_image(out_dir / f"{sample.sample_id}.png", masked.image)
        (out_dir / f"{sample.sample_id}.json").write_text(
            json.dumps(formats.sample_to_native(masked), indent=1), encoding="utf-8")
        plans.append({"sample_id": sample.sample_id,
                      "target_class": plan.target_class.value,
                      "n_masks": plan.n_masks,
                      "masked_block_ids": list(plan.masked_block_ids)})
    (out_dir / "cutout_plans.json").write_text(json.dumps(plans, indent=1),
                                               encoding="utf-8")
    print(f"cutout corpus written to {out_dir}")


def cmd_train(args):
    from chartrole.train import TrainConfig, preset, train

    if args.preset:
        config = preset(args.preset)
    else:
        config = TrainConfig.from_dict(
            json.loads(Path(args.config).read_text(encoding="utf-8")))
    if args.seed is not None:
        from dataclasses import replace

        config = replace(config, seed=args.seed)
    train_corpus, _ = _corpus_from_path(args.train_root)
    val_corpus = None
    if args.val_root:
        val_corpus, _ = _corpus_from_path(args.val_root)
    result = train(config, train_corpus, val_corpus, out_dir=args.out)
    print(f"run dir: {result.run_dir}")
    print(f"final loss: {result.curves['loss'][-1]:.4f}")
    if result.val_report:
        print(f"val F1-macro: {result.val_report.f1_macro:.2f}")


def cmd_eval(args):
    from chartrole.evaluate import evaluate, write_predictions
    from chartrole.model.checkpoint import load_checkpoint

    model, vocab, _ = load_checkpoint(args.ckpt)
    corpus, _ = _corpus_from_path(args.corpus)
    report, records = evaluate(model, vocab, corpus, args.split,
                               macro_over=args.macro_over)
    print(report.summary())
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        write_predictions(Path(args.out) / "predictions.jsonl", records)
        (Path(args.out) / "report.json").write_text(
            json.dumps(report.to_dict(), indent=1), encoding="utf-8")
        print(f"report written to {args.out}")


def cmd_stage(args):
    from chartrole.protocol import build_stage_plan, build_synthetic_registry, \
        format_results_table, run_stage
    from chartrole.train import TrainConfig, preset

    if args.config:
        config = TrainConfig.from_dict(
            json.loads(Path(args.config).read_text(encoding="utf-8")))
    else:
        config = preset("toy/concat_fusion")
    if args.steps:
        from dataclasses import replace

        config = replace(config, max_steps=args.steps)
    if args.synthetic:
        registry = build_synthetic_registry(seed=args.seed)
    else:
        registry = _load_registry(args.registry)
    stages = [args.n] if args.n else [1, 2, 3, 4]
    reports = [run_stage(build_stage_plan(n), config, registry, out_dir=args.out)
               for n in stages]
    print(format_results_table(reports))


def _load_registry(path: str):
    from chartrole import formats
    from chartrole.corpus import assign_splits

    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    registry = {}
    for name, spec in doc.items():
        corpus, report = formats.load_corpus(spec["root"], spec.get("format", "native"),
                                             name=name)
        if report.skipped:
            print(report.summary(), file=sys.stderr)
        if "ratios" in spec:
            corpus = assign_splits(corpus, tuple(spec["ratios"]), spec.get("seed", 0),
                                   tuple(spec.get("names", ("train", "test"))))
        registry[name] = corpus
    return registry


def cmd_sweep(args):
    from chartrole.protocol import scheme_a_grid, scheme_b_grid, sweep
    from chartrole.train import TrainConfig, preset

    if args.grid == "scheme-a":
        grid = scheme_a_grid()
    elif args.grid == "scheme-b":
        grid = scheme_b_grid()
    else:
        grid = json.loads(Path(args.grid).read_text(encoding="utf-8"))
    config = (TrainConfig.from_dict(json.loads(Path(args.config).read_text()))
              if args.config else preset("toy/concat_fusion"))
    train_corpus, _ = _corpus_from_path(args.train_root)
    val_corpus, _ = _corpus_from_path(args.val_root)
    result = sweep(grid, config, train_corpus, val_corpus, out_dir=args.out,
                   steps_override=args.steps)
    print(result.table())


def cmd_ablate(args):
    from chartrole.protocol import ablate_dab
    from chartrole.train import TrainConfig, preset

    config = (TrainConfig.from_dict(json.loads(Path(args.config).read_text()))
              if args.config else preset("toy/concat_fusion"))
    train_corpus, _ = _corpus_from_path(args.train_root)
    eval_corpus, _ = _corpus_from_path(args.eval_root)
    rows = ablate_dab(config, train_corpus, eval_corpus, out_dir=args.out,
                      steps_override=args.steps)
    for r in rows:
        mark = " *" if r.selected else ""
        print(f"{r.method:<20} {r.f1_macro:8.2f} | {r.f1_micro:.2f}{mark}")


def cmd_score(args):
    from chartrole.evaluate import compare_corpora, read_predictions, score_records

    if args.pred:
        records = read_predictions(args.pred)
        report = score_records(records, macro_over=args.macro_over)
    else:
        gold, _ = _corpus_from_path(args.gold_root)
        pred, _ = _corpus_from_path(args.pred_root)
        report = compare_corpora(gold, pred, macro_over=args.macro_over)
    print(report.summary())


def cmd_serve(args):
    from chartrole.service import AnnotationStore, serve

    corpora = []
    for root in args.corpus:
        corpus, report = _corpus_from_path(root, require_roles=False)
        if report.skipped:
            print(report.summary(), file=sys.stderr)
        corpora.append(corpus)
    store = AnnotationStore(corpora, log_path=args.log)
    ui_dir = args.ui or _default_ui_dir()
    serve(store, port=args.port, host=args.host, ui_dir=ui_dir)


def _default_ui_dir():
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def cmd_bench(args):
    from chartrole.bench import bench_rotation, format_bench

    print(format_bench(bench_rotation(size=args.size, repeat=args.repeat)))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chartrole")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a labeled synthetic corpus")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="synth")
    p.add_argument("--strip-roles", action="store_true",
                   help="emit unlabeled annotations for the labeling workflow")
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("ingest", help="load a dataset directory into a manifest")
    p.add_argument("--root", required=True)
    p.add_argument("--format", choices=("icpr22", "native"), default="native")
    p.add_argument("--out", required=True)
    p.add_argument("--name")
    p.add_argument("--allow-unlabeled", action="store_true")
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("split", help="assign splits inside a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--ratios", required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--names")
    p.set_defaults(fn=cmd_split)

    p = sub.add_parser("augment", help="write corpus + augmented copies")
    p.add_argument("--root", required=True)
    p.add_argument("--methods", default="noise,char_delete_prefix,char_insert")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_augment)

    p = sub.add_parser("noisy-set", help="one random augmentation per image")
    p.add_argument("--root", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_noisy_set)

    p = sub.add_parser("cutout", help="mask one sampled role class per image")
    p.add_argument("--root", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_cutout)

    p = sub.add_parser("train")
    p.add_argument("--config")
    p.add_argument("--preset")
    p.add_argument("--train-root", required=True)
    p.add_argument("--val-root")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split")
    p.add_argument("--macro-over", choices=("present", "all"), default="present")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("stage", help="run stages of the train/eval protocol")
    p.add_argument("--n", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--config")
    p.add_argument("--registry")
    p.add_argument("--synthetic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", default="runs/stages")
    p.set_defaults(fn=cmd_stage)

    p = sub.add_parser("sweep")
    p.add_argument("--grid", required=True,
                   help="grid JSON path, or 'scheme-a' / 'scheme-b'")
    p.add_argument("--config")
    p.add_argument("--train-root", required=True)
    p.add_argument("--val-root", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", default="runs/sweep")
    p.set_defaults(fn=cmd_sweep)

    p = sub.add_parser("ablate")
    p.add_argument("--config")
    p.add_argument("--train-root", required=True)
    p.add_argument("--eval-root", required=True)
    p.add_argument("--steps", type=int)
    p.add_argument("--out", default="runs/ablation")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("score", help="score prediction files or corpus pairs")
    p.add_argument("--pred")
    p.add_argument("--gold-root")
    p.add_argument("--pred-root")
    p.add_argument("--macro-over", choices=("present", "all"), default="present")
    p.set_defaults(fn=cmd_score)

    p = sub.add_parser("serve", help="run the annotation service")
    p.add_argument("--port", type=int, default=8040)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--corpus", action="append", required=True)
    p.add_argument("--log", help="annotation event log path")
    p.add_argument("--ui", help="static UI directory")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("bench", help="compare resampling kernel backends")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--repeat", type=int, default=5)
    p.set_defaults(fn=cmd_bench)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.fn(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
