"""Local HTTP backend for the role-labeling workflow.

Role assignments land in an append-only JSONL event log with per-block
revision counters (last write wins); the materialized view is rebuilt by
replaying the log, so restarts lose nothing. Reads serve the latest
committed revisions.
"""

from __future__ import annotations

import base64
import io
import json
import threading
import time
from dataclasses import asdict, dataclass
from pathlib import Path

from PIL import Image

from chartrole.augment import AugmentationRecipe, apply_recipe
from chartrole.corpus import ChartSample, Corpus
from chartrole.formats import ExportError, export_annotations
from chartrole.roles import ROLE_NAMES, TextRole, parse_role


@dataclass(frozen=True)
class AnnotationEvent:
    sample_id: str
    block_id: int
    role: str
    annotator: str
    timestamp: float
    revision: int


class AnnotationStore:
    """Corpora plus the materialized view of the annotation event log."""

    def __init__(self, corpora: list[Corpus], log_path: str | Path | None = None):
        if not corpora:
            raise ValueError("register at least one corpus")
        self.corpora: dict[str, Corpus] = {c.name: c for c in corpora}
        self._by_sample: dict[str, tuple[str, ChartSample]] = {}
        for c in corpora:
            for s in c.samples:
                if s.sample_id in self._by_sample:
                    raise ValueError(f"duplicate sample id across corpora: {s.sample_id}")
                self._by_sample[s.sample_id] = (c.name, s)
        self.log_path = Path(log_path) if log_path else None
        self._lock = threading.Lock()
        self._view: dict[tuple[str, int], AnnotationEvent] = {}
        if self.log_path and self.log_path.exists():
            self.replay(self.log_path)

    def replay(self, path: Path) -> None:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    ev = AnnotationEvent(**json.loads(line))
                    self._view[(ev.sample_id, ev.block_id)] = ev

    def sample(self, sample_id: str) -> ChartSample:
        if sample_id not in self._by_sample:
            raise KeyError(sample_id)
        _, raw = self._by_sample[sample_id]
        return self._materialize(raw)

    def _materialize(self, raw: ChartSample) -> ChartSample:
        blocks = []
        for b in raw.blocks:
            ev = self._view.get((raw.sample_id, b.block_id))
            blocks.append(b if ev is None
                          else type(b)(b.block_id, b.text, b.bbox, parse_role(ev.role)))
        return raw.with_blocks(blocks)

    def corpus_view(self, name: str) -> Corpus:
        corpus = self.corpora[name]
        return Corpus(name, tuple(self._materialize(s) for s in corpus.samples),
                      dict(corpus.splits))

    def save_annotation(self, sample_id: str, block_id: int, role: TextRole,
                        annotator: str) -> AnnotationEvent:
        with self._lock:
            if sample_id not in self._by_sample:
                raise KeyError(f"unknown sample {sample_id}")
            _, raw = self._by_sample[sample_id]
            raw.block(block_id)  # raises KeyError for unknown blocks
            prev = self._view.get((sample_id, block_id))
            ev = AnnotationEvent(sample_id, block_id, role.value, annotator,
                                 time.time(), (prev.revision if prev else 0) + 1)
            if self.log_path:
                with open(self.log_path, "a", encoding="utf-8") as fh:
                    fh.write(json.dumps(asdict(ev), sort_keys=True) + "\n")
            self._view[(sample_id, block_id)] = ev
            return ev

    def progress(self, name: str) -> tuple[int, int]:
        labeled = total = 0
        for s in self.corpora[name].samples:
            for b in s.blocks:
                total += 1
                ev = self._view.get((s.sample_id, b.block_id))
                if ev is not None or b.role is not None:
                    labeled += 1
        return labeled, total


def _png_bytes(image) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(image, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _sample_payload(sample: ChartSample) -> dict:
    h, w = sample.image.shape[:2]
    return {
        "sample_id": sample.sample_id,
        "chart_type": sample.chart_type,
        "width": w,
        "height": h,
        "image_url": f"/samples/{sample.sample_id}/image",
        "blocks": [
            {"block_id": b.block_id, "text": b.text, "bbox": b.bbox.as_dict(),
             "role": b.role.value if b.role else None}
            for b in sample.blocks
        ],
    }


def create_app(store: AnnotationStore, ui_dir: str | Path | None = None):
    from fastapi import Body, FastAPI, HTTPException
    from fastapi.responses import JSONResponse, RedirectResponse, Response

    app = FastAPI(title="chartrole annotation service")

    @app.get("/corpora")
    def corpora():
        out = []
        for name, corpus in store.corpora.items():
            labeled, total = store.progress(name)
            out.append({"name": name, "n_samples": len(corpus),
                        "splits": {k: len(v) for k, v in corpus.splits.items()},
                        "labeled": labeled, "total": total})
        return out

    @app.get("/corpora/{name}/samples")
    def corpus_samples(name: str, split: str | None = None):
        if name not in store.corpora:
            raise HTTPException(404, f"unknown corpus {name}")
        corpus = store.corpora[name]
        try:
            samples = corpus.split_samples(split)
        except KeyError as exc:
            raise HTTPException(404, str(exc))
        out = []
        for s in samples:
            current = store.sample(s.sample_id)
            out.append({"sample_id": s.sample_id,
                        "n_blocks": len(s.blocks),
                        "labeled": sum(b.role is not None for b in current.blocks)})
        return out

    @app.get("/samples/{sample_id}")
    def get_sample(sample_id: str):
        try:
            return _sample_payload(store.sample(sample_id))
        except KeyError:
            raise HTTPException(404, f"unknown sample {sample_id}")

    @app.get("/samples/{sample_id}/image")
    def get_image(sample_id: str):
        try:
            sample = store.sample(sample_id)
        except KeyError:
            raise HTTPException(404, f"unknown sample {sample_id}")
        return Response(content=_png_bytes(sample.image), media_type="image/png")

    @app.put("/samples/{sample_id}/blocks/{block_id}/role")
    def put_role(sample_id: str, block_id: int, payload: dict = Body(...)):
        try:
            role = parse_role(payload["role"])
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"invalid role: {exc}")
        try:
            ev = store.save_annotation(sample_id, block_id, role,
                                       payload.get("annotator", "anonymous"))
        except KeyError as exc:
            raise HTTPException(404, str(exc))
        return {"revision": ev.revision, "role": ev.role}

    @app.post("/preview")
    def preview(payload: dict = Body(...)):
        try:
            sample = store.sample(payload["sample_id"])
        except KeyError:
            raise HTTPException(404, "unknown sample")
        try:
            recipe = AugmentationRecipe(payload["recipe"]["method"],
                                        dict(payload["recipe"].get("params", {})),
                                        int(payload["recipe"].get("seed", 0)))
            out, plan = apply_recipe(sample, recipe)
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"invalid recipe: {exc}")
        body = _sample_payload(out)
        body["image_b64"] = base64.b64encode(_png_bytes(out.image)).decode("ascii")
        del body["image_url"]
        if plan is not None:
            body["plan"] = {"target_class": plan.target_class.value,
                            "n_masks": plan.n_masks,
                            "masked_block_ids": list(plan.masked_block_ids)}
        return body

    @app.post("/export")
    def export(payload: dict = Body(...)):
        name = payload.get("corpus")
        if name not in store.corpora:
            raise HTTPException(404, f"unknown corpus {name}")
        out = Path(payload.get("out") or f"export-{name}")
        try:
            written = export_annotations(store.corpus_view(name), out)
        except ExportError as exc:
            return JSONResponse(status_code=409, content={
                "error": str(exc),
                "unlabeled": [{"sample_id": sid, "block_id": bid}
                              for sid, bid in exc.unlabeled]})
        return {"path": str(out), "n_samples": len(written)}

    @app.get("/progress/{name}")
    def progress(name: str):
        if name not in store.corpora:
            raise HTTPException(404, f"unknown corpus {name}")
        labeled, total = store.progress(name)
        return {"labeled": labeled, "total": total}

    @app.get("/roles")
    def roles():
        return {"roles": list(ROLE_NAMES)}

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

        @app.get("/")
        def index():
            return RedirectResponse("/ui/")

    return app


def serve(store: AnnotationStore, port: int = 8040, host: str = "127.0.0.1",
          ui_dir: str | Path | None = None) -> None:
    import uvicorn

    uvicorn.run(create_app(store, ui_dir), host=host, port=port, log_level="warning")
