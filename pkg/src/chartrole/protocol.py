"""The four-stage train/eval protocol, hyperparameter sweeps, and the
per-method augmentation/balancing ablation harness."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path

from chartrole.augment import make_noisy_corpus
from chartrole.corpus import Corpus, assign_splits
from chartrole.evaluate import EvalReport, evaluate, write_predictions
from chartrole.synth import generate_corpus
from chartrole.train import DabConfig, TrainConfig, train

ICPR22 = "icpr22"
NOISY = "icpr22-n"
SMALL_SETS = ("chime-r", "degruyter", "econbiz")
DATASET_ORDER = (ICPR22, NOISY) + SMALL_SETS

STEP_RULE = {16: 20_000, 32: 10_000, 64: 5_000}  # same epoch budget per batch size


class StageError(RuntimeError):
    pass


@dataclass(frozen=True)
class StagePlan:
    stage: int
    train_sources: tuple[tuple[str, str | None], ...]
    val_source: tuple[str, str] | None
    dab: bool
    eval_targets: tuple[tuple[str, str | None], ...]

    def __post_init__(self):
        if any(name == NOISY for name, _ in self.train_sources):
            raise ValueError("the noisy corpus must never appear in a train source")

    @property
    def train_label(self) -> str:
        base = ICPR22 if self.stage in (1, 2) else "all datasets"
        return f"{base} with DAB" if self.dab else base


def build_stage_plan(stage: int) -> StagePlan:
    if stage not in (1, 2, 3, 4):
        raise ValueError(f"stage must be 1..4, got {stage}")
    if stage in (1, 2):
        train_sources = ((ICPR22, "train"),)
        eval_targets = ((ICPR22, "test"), (NOISY, None)) + tuple((s, None) for s in SMALL_SETS)
        val = (ICPR22, "val")
    else:
        train_sources = ((ICPR22, "train"), (ICPR22, "val")) + tuple(
            (s, "train") for s in SMALL_SETS)
        eval_targets = ((ICPR22, "test"), (NOISY, None)) + tuple(
            (s, "test") for s in SMALL_SETS)
        val = None
    return StagePlan(stage, train_sources, val, dab=stage in (2, 4),
                     eval_targets=eval_targets)


def combine_sources(registry: dict[str, Corpus],
                    sources, name: str = "combined") -> Corpus:
    """Concatenate splits from several corpora, prefixing ids to keep them unique."""
    samples = []
    for corpus_name, split in sources:
        corpus = registry[corpus_name]
        for s in corpus.split_samples(split):
            samples.append(replace(s, sample_id=f"{corpus_name}:{s.sample_id}"))
    return Corpus(name, tuple(samples))


@dataclass
class StageReport:
    stage: int
    train_label: str
    train_size: int
    reports: dict[str, EvalReport]

    def to_dict(self) -> dict:
        return {"stage": self.stage, "train_label": self.train_label,
                "train_size": self.train_size,
                "reports": {k: r.to_dict() for k, r in self.reports.items()}}


def format_results_table(stage_reports: list[StageReport]) -> str:
    """Text table: one row per trained setup, macro | micro per dataset column."""
    header = ["Train data".ljust(24)] + [d.ljust(16) for d in DATASET_ORDER]
    lines = ["  ".join(header).rstrip()]
    for sr in stage_reports:
        cells = [sr.train_label.ljust(24)]
        for d in DATASET_ORDER:
            r = sr.reports.get(d)
            cells.append((f"{r.f1_macro:.2f} | {r.f1_micro:.2f}" if r else "-").ljust(16))
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def run_stage(plan: StagePlan, base_config: TrainConfig,
              registry: dict[str, Corpus],
              out_dir: str | Path | None = None) -> StageReport:
    """Train per the stage plan and evaluate every target dataset."""
    needed = {name for name, _ in plan.train_sources + plan.eval_targets}
    if plan.val_source:
        needed.add(plan.val_source[0])
    missing = sorted(needed - set(registry))
    if missing:
        raise StageError(f"stage {plan.stage} refused, missing corpora: {missing}")

    train_corpus = combine_sources(registry, plan.train_sources,
                                   name=f"stage{plan.stage}-train")
    val_corpus = None
    if plan.val_source:
        name, split = plan.val_source
        val_corpus = registry[name].view(split)

    dab = replace(base_config.dab, augment=plan.dab, cutout=plan.dab) \
        if plan.dab else replace(base_config.dab, augment=False, cutout=False,
                                 weighted_ce=False)
    config = replace(base_config, dab=dab)

    stage_dir = Path(out_dir) / f"stage{plan.stage}" if out_dir else None
    result = train(config, train_corpus, val_corpus, out_dir=stage_dir)

    reports: dict[str, EvalReport] = {}
    for name, split in plan.eval_targets:
        report, records = evaluate(result.model, result.vocab, registry[name], split,
                                   macro_over=config.macro_over)
        reports[name] = report
        if stage_dir:
            write_predictions(stage_dir / f"predictions-{name}.jsonl", records)
    sr = StageReport(plan.stage, plan.train_label, len(train_corpus), reports)
    if stage_dir:
        (stage_dir / "stage_report.json").write_text(
            json.dumps(sr.to_dict(), indent=1), encoding="utf-8")
        (stage_dir / "table.txt").write_text(format_results_table([sr]) + "\n",
                                             encoding="utf-8")
    return sr


# -- synthetic stand-ins ------------------------------------------------------

def build_synthetic_registry(seed: int = 0, n_pool: int = 24, n_test: int = 8,
                             n_small: int = 10) -> dict[str, Corpus]:
    """Synthetic stand-ins shaped like the five-dataset registry: a main
    corpus with train/val/test splits, its noisy test twin, and three small
    corpora with 0.7/0.3 splits."""
    if n_pool < 10:
        raise ValueError("n_pool must be >= 10 so the 0.9/0.1 validation split "
                         "is non-empty")
    pool = generate_corpus(n_pool, seed=seed, name=ICPR22)
    pool = assign_splits(pool, (0.9, 0.1), seed=seed + 1, names=("train", "val"))
    test = generate_corpus(n_test, seed=seed + 2, name="icpr22-test")
    combined = Corpus(ICPR22, pool.samples + test.samples,
                      {**pool.splits, "test": tuple(test.sample_ids())})
    noisy = make_noisy_corpus(combined.view("test"), seed=seed + 3)
    registry = {ICPR22: combined, NOISY: Corpus(NOISY, noisy.samples)}
    for i, name in enumerate(SMALL_SETS):
        small = generate_corpus(n_small, seed=seed + 10 + i, name=name)
        registry[name] = assign_splits(small, (0.7, 0.3), seed=seed + 20 + i,
                                       names=("train", "test"))
    return registry


# -- hyperparameter sweep -----------------------------------------------------

@dataclass
class Trial:
    overrides: dict
    max_steps: int
    f1_macro: float
    f1_micro: float

    def to_dict(self) -> dict:
        return {"overrides": self.overrides, "max_steps": self.max_steps,
                "f1_macro": self.f1_macro, "f1_micro": self.f1_micro}


@dataclass
class SweepResult:
    trials: list[Trial]  # ranked, best first

    @property
    def best(self) -> Trial:
        return self.trials[0]

    def table(self) -> str:
        keys = sorted({k for t in self.trials for k in t.overrides})
        head = [k.ljust(14) for k in keys] + ["steps".ljust(8), "F1-macro", "F1-micro"]
        lines = ["  ".join(head)]
        for t in self.trials:
            row = [str(t.overrides.get(k, "-")).ljust(14) for k in keys]
            row += [str(t.max_steps).ljust(8), f"{t.f1_macro:8.2f}", f"{t.f1_micro:8.2f}"]
            lines.append("  ".join(row))
        return "\n".join(lines)


def scheme_a_grid() -> dict[str, list]:
    return {"batch_size": [16, 32, 64],
            "learning_rate": [1e-5, 2e-5, 3e-5, 4e-5, 5e-5]}


def scheme_b_grid() -> dict[str, list]:
    return {"batch_size": [16],
            "warmup_steps": [1_000, 5_000],
            "learning_rate": [1e-4, 2e-4, 3e-4, 4e-4, 5e-4],
            "weight_decay": [1e-2, 1e-3, 1e-4]}


def enumerate_grid(grid: dict[str, list]) -> list[dict]:
    keys = sorted(grid)
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


def sweep(grid: dict[str, list], base_config: TrainConfig,
          train_corpus: Corpus, val_corpus: Corpus,
          out_dir: str | Path | None = None,
          steps_override: int | None = None) -> SweepResult:
    """Grid search ranked by validation F1-macro.

    Step counts follow the batch-size rule (20k/10k/5k for batch 16/32/64)
    unless steps_override pins them, which test and demo runs use.
    """
    if not grid:
        raise ValueError("grid must be non-empty")
    trials = []
    for overrides in enumerate_grid(grid):
        config = replace(base_config, **overrides)
        steps = steps_override or STEP_RULE.get(config.batch_size, base_config.max_steps)
        config = replace(config, max_steps=steps)
        result = train(config, train_corpus, val_corpus,
                       out_dir=Path(out_dir) / "trials" if out_dir else None)
        trials.append(Trial(overrides, steps, result.val_report.f1_macro,
                            result.val_report.f1_micro))
    trials.sort(key=lambda t: (-t.f1_macro, json.dumps(t.overrides, sort_keys=True)))
    out = SweepResult(trials)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        (Path(out_dir) / "trials.json").write_text(
            json.dumps([t.to_dict() for t in out.trials], indent=1), encoding="utf-8")
        (Path(out_dir) / "table.txt").write_text(out.table() + "\n", encoding="utf-8")
    return out


# -- augmentation/balancing ablation ------------------------------------------

AUGMENTATION_ABLATIONS: dict[str, tuple[str, ...]] = {
    "color": ("color",),
    "noise": ("salt_pepper_noise", "gaussian_noise"),
    "rotation": ("rotation",),
    "char_delete_prefix": ("char_delete_prefix",),
    "char_insert": ("char_insert",),
    "char_substitute": ("char_substitute",),
}
BALANCER_ABLATIONS = ("cutout", "weighted_ce")


@dataclass
class AblationRow:
    method: str
    f1_macro: float
    f1_micro: float
    selected: bool = False


def ablation_dab_config(method: str) -> DabConfig:
    if method in AUGMENTATION_ABLATIONS:
        return DabConfig(augment=True, methods=AUGMENTATION_ABLATIONS[method])
    if method == "cutout":
        return DabConfig(cutout=True)
    if method == "weighted_ce":
        return DabConfig(weighted_ce=True)
    if method == "none":
        return DabConfig()
    raise ValueError(f"unknown ablation method {method!r}")


def ablate_dab(base_config: TrainConfig, train_corpus: Corpus,
               eval_corpus: Corpus, eval_split: str | None = None,
               methods: list[str] | None = None,
               out_dir: str | Path | None = None,
               steps_override: int | None = None,
               n_select_aug: int = 3, n_select_bal: int = 1) -> list[AblationRow]:
    """One run per individual method; the top augmentations and the top
    balancer by F1-macro are marked as the selected final set."""
    if methods is None:
        methods = list(AUGMENTATION_ABLATIONS) + list(BALANCER_ABLATIONS)
    if not methods:
        raise ValueError("methods must be non-empty")
    rows = []
    for method in ["none"] + list(methods):
        config = replace(base_config, dab=ablation_dab_config(method))
        if steps_override:
            config = replace(config, max_steps=steps_override)
        result = train(config, train_corpus,
                       out_dir=Path(out_dir) / "runs" if out_dir else None)
        report, _ = evaluate(result.model, result.vocab, eval_corpus, eval_split,
                             macro_over=config.macro_over)
        rows.append(AblationRow(method, report.f1_macro, report.f1_micro))

    aug_rows = [r for r in rows if r.method in AUGMENTATION_ABLATIONS]
    bal_rows = [r for r in rows if r.method in BALANCER_ABLATIONS]
    for r in sorted(aug_rows, key=lambda r: -r.f1_macro)[:n_select_aug]:
        r.selected = True
    for r in sorted(bal_rows, key=lambda r: -r.f1_macro)[:n_select_bal]:
        r.selected = True

    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
        lines = [f"{'method':<20}  F1-macro  F1-micro  selected"]
        for r in rows:
            lines.append(f"{r.method:<20}  {r.f1_macro:8.2f}  {r.f1_micro:8.2f}"
                         f"  {'*' if r.selected else ''}")
        (Path(out_dir) / "ablation.txt").write_text("\n".join(lines) + "\n",
                                                    encoding="utf-8")
        (Path(out_dir) / "ablation.json").write_text(
            json.dumps([vars(r) for r in rows], indent=1), encoding="utf-8")
    return rows
