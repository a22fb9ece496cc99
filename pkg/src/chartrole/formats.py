"""On-disk corpus formats.

Native layout: one UTF-8 JSON annotation file per image, sharing the image's
basename::

    {"task": {"chart_type": "bar"},
     "text_blocks": [{"id": 0, "text": "...",
                      "bbox": {"x": 1.0, "y": 2.0, "width": 3.0, "height": 4.0},
                      "role": "tick_label"}]}

`role` is null for blocks that still need labeling. The loader also accepts
the CHART-Infographics challenge layout (format tag "icpr22"), where the
chart type, text block geometry, and role labels live in the outputs of the
challenge's task 1/2/3 records.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from chartrole.corpus import ChartSample, Corpus, TextBlock
from chartrole.geometry import BoxOutsideImageError, clamp_bbox
from chartrole.roles import parse_role

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


@dataclass
class LoadReport:
    loaded: list[str] = field(default_factory=list)
    skipped: list[tuple[str, str]] = field(default_factory=list)  # (path, reason)

    def skip(self, path: Path | str, reason: str) -> None:
        self.skipped.append((str(path), reason))

    def summary(self) -> str:
        lines = [f"loaded {len(self.loaded)} samples, skipped {len(self.skipped)}"]
        for path, reason in self.skipped:
            lines.append(f"  SKIP {path}: {reason}")
        return "\n".join(lines)


class ExportError(ValueError):
    def __init__(self, unlabeled: list[tuple[str, int]]):
        self.unlabeled = unlabeled
        listing = ", ".join(f"{sid}#{bid}" for sid, bid in unlabeled[:20])
        super().__init__(f"refusing to export: {len(unlabeled)} unlabeled block(s): {listing}")


def read_image(path: Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.array(im.convert("RGB"), dtype=np.uint8)  # owned, writable


def write_image(path: Path, image: np.ndarray) -> None:
    Image.fromarray(image, mode="RGB").save(path, format="PNG")


def find_image(ann_path: Path, root: Path) -> Path | None:
    stem = ann_path.stem
    candidates = [ann_path.parent, root / "images", ann_path.parent.parent / "images", root]
    for directory in candidates:
        for ext in IMAGE_EXTENSIONS:
            p = directory / (stem + ext)
            if p.is_file():
                return p
    return None


# -- native format ----------------------------------------------------------

def _parse_native(doc: dict, image_dims: tuple[int, int],
                  require_roles: bool) -> tuple[str, list[TextBlock]]:
    chart_type = doc["task"]["chart_type"]
    blocks = []
    for entry in doc["text_blocks"]:
        bb = entry["bbox"]
        bbox = clamp_bbox(float(bb["x"]), float(bb["y"]),
                          float(bb["width"]), float(bb["height"]), image_dims)
        role_name = entry.get("role")
        if role_name is None and require_roles:
            raise ValueError(f"block {entry['id']} has no role label")
        role = parse_role(role_name) if role_name is not None else None
        blocks.append(TextBlock(int(entry["id"]), entry["text"], bbox, role))
    return chart_type, blocks


# -- challenge format -------------------------------------------------------

def _challenge_tasks(doc: dict) -> dict:
    """Pull the task1/2/3 output records out of the challenge JSON variants."""
    if "task6" in doc and isinstance(doc["task6"], dict):
        doc = doc["task6"].get("input", doc["task6"])
    out = {}
    for k in (1, 2, 3):
        rec = doc.get(f"task{k}_output") or doc.get(f"task{k}")
        if isinstance(rec, dict) and "output" in rec:
            rec = rec["output"]
        out[k] = rec
    return out


def _challenge_bbox(entry: dict) -> tuple[float, float, float, float]:
    if "bb" in entry:
        bb = entry["bb"]
        return float(bb["x0"]), float(bb["y0"]), float(bb["width"]), float(bb["height"])
    if "bbox" in entry:
        bb = entry["bbox"]
        return float(bb["x"]), float(bb["y"]), float(bb["width"]), float(bb["height"])
    if "polygon" in entry:
        poly = entry["polygon"]
        xs = [float(v) for k, v in poly.items() if k.startswith("x")]
        ys = [float(v) for k, v in poly.items() if k.startswith("y")]
        return min(xs), min(ys), max(xs) - min(xs), max(ys) - min(ys)
    raise ValueError(f"text block {entry.get('id')} has no geometry")


def _parse_challenge(doc: dict, image_dims: tuple[int, int],
                     require_roles: bool) -> tuple[str, list[TextBlock]]:
    tasks = _challenge_tasks(doc)
    if tasks[2] is None or "text_blocks" not in tasks[2]:
        raise ValueError("no text blocks (task 2 output missing)")
    chart_type = (tasks[1] or {}).get("chart_type", "") or "unknown"

    roles: dict[int, str] = {}
    if tasks[3] and "text_roles" in tasks[3]:
        roles = {int(r["id"]): r["role"] for r in tasks[3]["text_roles"]}

    blocks = []
    for entry in tasks[2]["text_blocks"]:
        bid = int(entry["id"])
        x, y, w, h = _challenge_bbox(entry)
        bbox = clamp_bbox(x, y, w, h, image_dims)
        role_name = roles.get(bid)
        if role_name is None and require_roles:
            raise ValueError(f"block {bid} has no role label")
        role = parse_role(role_name) if role_name is not None else None
        blocks.append(TextBlock(bid, entry["text"], bbox, role))
    return chart_type, blocks


_PARSERS = {"native": _parse_native, "icpr22": _parse_challenge}


# -- loading ----------------------------------------------------------------

def load_sample(ann_path: Path, image_path: Path, format_tag: str, *,
                require_roles: bool = True, provenance: str = "") -> ChartSample:
    image = read_image(image_path)
    doc = json.loads(ann_path.read_text(encoding="utf-8"))
    dims = (image.shape[1], image.shape[0])
    chart_type, blocks = _PARSERS[format_tag](doc, dims, require_roles)
    return ChartSample(ann_path.stem, image, chart_type, tuple(blocks), provenance)


def load_corpus(root_path: str | Path, format_tag: str = "native", *,
                name: str | None = None,
                require_roles: bool = True) -> tuple[Corpus, LoadReport]:
    """Load every usable (image, annotation) pair under root_path.

    Unusable samples are skipped and reported, never silently dropped:
    missing image, malformed annotation, empty text, a bbox entirely
    outside the image, or (when require_roles) an unlabeled block.
    """
    root = Path(root_path)
    if format_tag not in _PARSERS:
        raise ValueError(f"unknown format {format_tag!r}; expected one of {sorted(_PARSERS)}")
    report = LoadReport()
    samples = []
    ann_paths = sorted(p for p in root.rglob("*.json") if p.name != "corpus.manifest")
    for ann_path in ann_paths:
        image_path = find_image(ann_path, root)
        if image_path is None:
            report.skip(ann_path, "no image with matching basename")
            continue
        try:
            sample = load_sample(ann_path, image_path, format_tag,
                                 require_roles=require_roles,
                                 provenance=name or root.name)
        except (BoxOutsideImageError, ValueError, KeyError, TypeError, OSError) as exc:
            report.skip(ann_path, str(exc))
            continue
        samples.append(sample)
        report.loaded.append(sample.sample_id)
    samples.sort(key=lambda s: s.sample_id)
    return Corpus(name or root.name, tuple(samples)), report


# -- export -----------------------------------------------------------------

def sample_to_native(sample: ChartSample) -> dict:
    return {
        "task": {"chart_type": sample.chart_type},
        "text_blocks": [
            {
                "id": b.block_id,
                "text": b.text,
                "bbox": b.bbox.as_dict(),
                "role": b.role.value if b.role is not None else None,
            }
            for b in sample.blocks
        ],
    }


def export_annotations(corpus: Corpus, root_path: str | Path, *,
                       write_images: bool = True) -> list[Path]:
    """Write the corpus in the native layout; round-trips through load_corpus.

    Refuses to export when any block is unlabeled, listing the offenders.
    """
    unlabeled = [(s.sample_id, b.block_id)
                 for s in corpus.samples for b in s.blocks if b.role is None]
    if unlabeled:
        raise ExportError(unlabeled)
    root = Path(root_path)
    root.mkdir(parents=True, exist_ok=True)
    written = []
    for sample in corpus.samples:
        ann_path = root / f"{sample.sample_id}.json"
        ann_path.write_text(json.dumps(sample_to_native(sample), indent=1), encoding="utf-8")
        written.append(ann_path)
        if write_images:
            write_image(root / f"{sample.sample_id}.png", sample.image)
    return written


# -- manifest ---------------------------------------------------------------

def write_manifest(path: str | Path, corpus: Corpus, root: Path,
                   format_tag: str, entries: list[dict]) -> None:
    doc = {"name": corpus.name, "root": str(root), "format": format_tag, "entries": entries}
    Path(path).write_text(json.dumps(doc, indent=1), encoding="utf-8")


def manifest_entries(corpus: Corpus, ann_paths: dict[str, Path],
                     image_paths: dict[str, Path]) -> list[dict]:
    split_of = {}
    for split, members in corpus.splits.items():
        for sid in members:
            split_of[sid] = split
    return [
        {
            "sample_id": s.sample_id,
            "image": str(image_paths[s.sample_id]),
            "annotation": str(ann_paths[s.sample_id]),
            "split": split_of.get(s.sample_id),
        }
        for s in corpus.samples
    ]


def load_manifest(path: str | Path, *, require_roles: bool = True) -> tuple[Corpus, LoadReport]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    report = LoadReport()
    samples, splits = [], {}
    for entry in doc["entries"]:
        try:
            sample = load_sample(Path(entry["annotation"]), Path(entry["image"]),
                                 doc.get("format", "native"),
                                 require_roles=require_roles, provenance=doc["name"])
        except (ValueError, KeyError, TypeError, OSError) as exc:
            report.skip(entry["annotation"], str(exc))
            continue
        samples.append(sample)
        report.loaded.append(sample.sample_id)
        if entry.get("split"):
            splits.setdefault(entry["split"], []).append(sample.sample_id)
    samples.sort(key=lambda s: s.sample_id)
    return Corpus(doc["name"], tuple(samples),
                  {k: tuple(v) for k, v in splits.items()}), report
