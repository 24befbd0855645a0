"""Local review service for human verification of candidate intervals.

Serves clips, aligned frame pairs, and candidate visible-time intervals over
localhost HTTP; records reviewer decisions in an append-only JSON Lines log;
exports verified manifests where the latest decision per clip wins. The log
is the single source of truth: replaying it after a restart reproduces the
exact same export.
"""

from __future__ import annotations

import datetime as dt
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from fastapi.responses import HTMLResponse, Response
from pydantic import BaseModel

from .dataset import ClipRecord, manifest_document
from .intervals import IntervalError, IntervalSet

VERDICTS = ("accept", "adjust", "reject_no_visibility")


class DecisionError(ValueError):
    """A submitted decision violates the verdict/interval invariants."""


@dataclass(frozen=True)
class ReviewDecision:
    clip_id: str
    reviewer_id: str
    verdict: str
    final_intervals: IntervalSet
    note: str = ""
    timestamp: str = ""
    decision_seq: int = 0

    def to_json_dict(self) -> dict:
        return {
            "clip_id": self.clip_id,
            "reviewer_id": self.reviewer_id,
            "verdict": self.verdict,
            "final_intervals": self.final_intervals.to_pairs(),
            "note": self.note,
            "timestamp": self.timestamp,
            "decision_seq": self.decision_seq,
        }

    @classmethod
    def from_json_dict(cls, doc: dict) -> "ReviewDecision":
        return cls(
            clip_id=doc["clip_id"],
            reviewer_id=doc["reviewer_id"],
            verdict=doc["verdict"],
            final_intervals=IntervalSet.from_pairs(doc["final_intervals"]),
            note=doc.get("note", ""),
            timestamp=doc.get("timestamp", ""),
            decision_seq=int(doc["decision_seq"]),
        )


def validate_decision(
    verdict: str, final: IntervalSet, candidates: IntervalSet
) -> None:
    if verdict not in VERDICTS:
        raise DecisionError(f"unknown verdict {verdict!r}; expected one of {VERDICTS}")
    if verdict == "accept" and final != candidates:
        raise DecisionError("verdict 'accept' requires final_intervals == candidates")
    if verdict == "adjust" and final == candidates:
        raise DecisionError(
            "verdict 'adjust' requires final_intervals to differ from candidates"
        )
    if verdict == "reject_no_visibility" and not final.is_empty:
        raise DecisionError(
            "verdict 'reject_no_visibility' requires empty final_intervals"
        )


@dataclass
class ReviewStore:
    """Queue state + append-only decision log for one manifest."""

    clips: list[ClipRecord]
    candidates: dict[str, IntervalSet] = field(default_factory=dict)
    log_path: Optional[Path] = None
    frame_root: Optional[Path] = None
    n_frames: int = 60
    replay_warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.by_id = {c.clip_id: c for c in self.clips}
        # Clips without a derived candidate document fall back to the
        # manifest's gt_intervals as the candidate set.
        for clip in self.clips:
            self.candidates.setdefault(clip.clip_id, clip.gt_intervals)
        self.decisions: dict[str, list[ReviewDecision]] = {}
        self._lock = threading.Lock()
        if self.log_path is not None:
            self.log_path = Path(self.log_path)
            if self.log_path.exists():
                self._replay()

    def _replay(self) -> None:
        with open(self.log_path, "r", encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, 1):
                line = line.strip()
                if not line:
                    continue
                decision = ReviewDecision.from_json_dict(json.loads(line))
                if decision.clip_id not in self.by_id:
                    self.replay_warnings.append(
                        f"line {lineno}: decision for unknown clip "
                        f"{decision.clip_id!r} skipped"
                    )
                    continue
                self.decisions.setdefault(decision.clip_id, []).append(decision)

    def candidate_for(self, clip_id: str) -> IntervalSet:
        return self.candidates[clip_id]

    def latest_decision(self, clip_id: str) -> Optional[ReviewDecision]:
        history = self.decisions.get(clip_id)
        if not history:
            return None
        return max(history, key=lambda d: d.decision_seq)

    def status_of(self, clip_id: str) -> str:
        return "done" if self.decisions.get(clip_id) else "pending"

    def queue_state(self) -> dict:
        pending = sorted(c.clip_id for c in self.clips if self.status_of(c.clip_id) == "pending")
        done = sorted(c.clip_id for c in self.clips if self.status_of(c.clip_id) == "done")
        return {"pending": pending, "done": done}

    def submit(
        self,
        clip_id: str,
        reviewer_id: str,
        verdict: str,
        final_intervals: Optional[list] = None,
        note: str = "",
    ) -> ReviewDecision:
        """Validate, assign a per-clip sequence number, and append durably."""
        if clip_id not in self.by_id:
            raise KeyError(clip_id)
        candidates = self.candidate_for(clip_id)
        if final_intervals is None:
            final = IntervalSet() if verdict == "reject_no_visibility" else candidates
        else:
            final = IntervalSet.from_pairs(
                final_intervals, self.by_id[clip_id].duration_sec
            )
        validate_decision(verdict, final, candidates)
        with self._lock:
            history = self.decisions.setdefault(clip_id, [])
            seq = max((d.decision_seq for d in history), default=0) + 1
            decision = ReviewDecision(
                clip_id=clip_id,
                reviewer_id=reviewer_id,
                verdict=verdict,
                final_intervals=final,
                note=note,
                timestamp=dt.datetime.now(dt.timezone.utc).isoformat(),
                decision_seq=seq,
            )
            if self.log_path is not None:
                with open(self.log_path, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps(decision.to_json_dict()) + "\n")
                    handle.flush()
                    os.fsync(handle.fileno())
            history.append(decision)
        return decision

    def export_manifest(self, protocol: str = "all") -> dict:
        """Manifest where the latest decision's intervals win per clip."""
        if protocol == "all":
            selected = self.clips
        elif protocol in ("standard", "unseen"):
            selected = [
                c for c in self.clips if any(t.startswith(protocol) for t in c.splits)
            ]
        else:
            raise ValueError(f"unknown protocol {protocol!r}")
        entries = []
        for clip in selected:
            latest = self.latest_decision(clip.clip_id)
            entry = clip.to_json_dict()
            if latest is not None:
                entry["gt_intervals"] = latest.final_intervals.to_pairs()
                entry["verified"] = True
            else:
                entry["gt_intervals"] = self.candidate_for(clip.clip_id).to_pairs()
                entry["verified"] = False
            entries.append(entry)
        doc = manifest_document([], protocol=protocol)
        doc["clips"] = entries
        return doc


def canonical_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


class DecisionRequest(BaseModel):
    reviewer_id: str
    verdict: str
    final_intervals: Optional[list[list[float]]] = None
    note: str = ""


def clip_summary(store: ReviewStore, clip: ClipRecord) -> dict:
    latest = store.latest_decision(clip.clip_id)
    return {
        "clip_id": clip.clip_id,
        "object_category": clip.object_category,
        "semantic_group": clip.semantic_group,
        "anomaly_status": clip.anomaly_status,
        "defect_type": clip.defect_type,
        "candidates": store.candidate_for(clip.clip_id).to_pairs(),
        "status": store.status_of(clip.clip_id),
        "latest_verdict": latest.verdict if latest else None,
        "final_intervals": latest.final_intervals.to_pairs() if latest else None,
    }


def create_app(store: ReviewStore, ui_dir: Optional[Path] = None) -> FastAPI:
    app = FastAPI(title="vianqa review service")

    @app.get("/api/health")
    def health():
        return {"status": "ok", "clips": len(store.clips)}

    @app.get("/clips")
    def list_clips(
        status: Optional[str] = Query(default=None),
        category: Optional[str] = Query(default=None),
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=50, ge=1, le=500),
    ):
        if status is not None and status not in ("pending", "done"):
            raise HTTPException(400, f"unknown status filter {status!r}")
        known_categories = {c.object_category for c in store.clips}
        if category is not None and category not in known_categories:
            raise HTTPException(400, f"unknown category filter {category!r}")
        selected = [
            clip
            for clip in store.clips
            if (status is None or store.status_of(clip.clip_id) == status)
            and (category is None or clip.object_category == category)
        ]
        # Pending first, then lexicographic by clip_id.
        selected.sort(key=lambda c: (store.status_of(c.clip_id) != "pending", c.clip_id))
        start = (page - 1) * page_size
        page_clips = selected[start : start + page_size]
        queue = store.queue_state()
        return {
            "clips": [clip_summary(store, c) for c in page_clips],
            "page": page,
            "page_size": page_size,
            "total": len(selected),
            "pending": len(queue["pending"]),
            "done": len(queue["done"]),
        }

    def _get_clip(clip_id: str) -> ClipRecord:
        clip = store.by_id.get(clip_id)
        if clip is None:
            raise HTTPException(404, f"unknown clip {clip_id!r}")
        return clip

    @app.get("/clips/{clip_id}")
    def clip_detail(clip_id: str):
        clip = _get_clip(clip_id)
        detail = clip_summary(store, clip)
        detail["gt_intervals"] = clip.gt_intervals.to_pairs()
        detail["n_frames"] = store.n_frames
        detail["fps"] = clip.fps
        detail["duration_sec"] = clip.duration_sec
        detail["decisions"] = [
            d.to_json_dict() for d in store.decisions.get(clip_id, [])
        ]
        return detail

    @app.get("/clips/{clip_id}/candidates")
    def clip_candidates(clip_id: str):
        _get_clip(clip_id)
        return {
            "clip_id": clip_id,
            "candidates": store.candidate_for(clip_id).to_pairs(),
        }

    @app.get("/clips/{clip_id}/frames/{variant}/{index}")
    def clip_frame(clip_id: str, variant: str, index: int):
        _get_clip(clip_id)
        if variant not in ("marked", "unmarked"):
            raise HTTPException(400, f"unknown frame variant {variant!r}")
        if not 0 <= index < store.n_frames:
            raise HTTPException(
                400, f"frame index {index} out of [0, {store.n_frames - 1}]"
            )
        if store.frame_root is None:
            raise HTTPException(404, "service started without a frame root")
        path = Path(store.frame_root) / clip_id / variant / f"frame_{index:04d}.png"
        if not path.exists():
            raise HTTPException(404, f"missing frame file for clip {clip_id!r}")
        return Response(content=path.read_bytes(), media_type="image/png")

    @app.post("/clips/{clip_id}/decision")
    def submit_decision(clip_id: str, request: DecisionRequest):
        _get_clip(clip_id)
        try:
            decision = store.submit(
                clip_id=clip_id,
                reviewer_id=request.reviewer_id,
                verdict=request.verdict,
                final_intervals=request.final_intervals,
                note=request.note,
            )
        except (DecisionError, IntervalError) as exc:
            raise HTTPException(400, str(exc)) from exc
        return decision.to_json_dict()

    @app.get("/export")
    def export(protocol: str = Query(default="all")):
        try:
            doc = store.export_manifest(protocol)
        except ValueError as exc:
            raise HTTPException(400, str(exc)) from exc
        return Response(content=canonical_json(doc), media_type="application/json")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    else:

        @app.get("/", response_class=HTMLResponse)
        def index():
            return (
                "<html><body><h1>vianqa review service</h1>"
                "<p>No UI bundle configured. API endpoints: /clips, "
                "/clips/{id}, /clips/{id}/frames/{variant}/{index}, "
                "/clips/{id}/candidates, POST /clips/{id}/decision, "
                "/export?protocol=</p></body></html>"
            )

    return app
