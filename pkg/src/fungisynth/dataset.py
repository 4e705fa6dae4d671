"""Frame loop, PNG export, manifest writing and dataset verification."""
from __future__ import annotations

import hashlib
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from PIL import Image

from .config import SimulationConfig, config_from_dict, ConfigError
from .lifecycle import Stage, WorldState, round_half_away, simulate_lifecycle, target_counts
from .morphology import Segment, build_frame_geometry
from .render import Raster, render_frame

__all__ = [
    "DatasetError",
    "FrameRecord",
    "Manifest",
    "CheckResult",
    "VerificationReport",
    "frame_filename",
    "encode_png",
    "generate_dataset",
    "verify_dataset",
]

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
HASH_ALGORITHM = "sha256"
FORMAT_VERSION = 1


class DatasetError(RuntimeError):
    pass


def frame_filename(i: int) -> str:
    return f"frame_{i:05d}.png"


@dataclass
class FrameRecord:
    frame_index: int
    transition_ratio: float
    spore_count: int
    hypha_count: int
    mycelium_count: int
    image_path: str
    image_sha256: str
    entities: list[dict] = field(default_factory=list)


@dataclass
class Manifest:
    config: dict
    frames: list[FrameRecord]
    image_hash_algorithm: str = HASH_ALGORITHM
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "image_hash_algorithm": self.image_hash_algorithm,
            "config": self.config,
            "frames": [dict(vars(r)) for r in self.frames],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), allow_nan=False) + "\n"


def encode_png(raster: Raster) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(raster.pixels, mode="RGB").save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def _clip01(v: float) -> float:
    return min(1.0, max(0.0, v))


def _segment_bbox(segments: list[Segment], size: tuple[int, int]) -> list[float] | None:
    """Normalized [x_min, y_min, x_max, y_max] covering every painted stroke, clipped to the canvas."""
    if not segments:
        return None
    w, h = size
    scale = min(w, h)
    x_lo = y_lo = math.inf
    x_hi = y_hi = -math.inf
    for s in segments:
        hx = 0.5 * s.width * scale / w
        hy = 0.5 * s.width * scale / h
        x_lo = min(x_lo, s.x0 - hx, s.x1 - hx)
        x_hi = max(x_hi, s.x0 + hx, s.x1 + hx)
        y_lo = min(y_lo, s.y0 - hy, s.y1 - hy)
        y_hi = max(y_hi, s.y0 + hy, s.y1 + hy)
    return [_clip01(x_lo), _clip01(y_lo), _clip01(x_hi), _clip01(y_hi)]


def annotate(state: WorldState, segments: list[Segment], size: tuple[int, int]) -> list[dict]:
    w, h = size
    scale = min(w, h)
    by_owner: dict[int, list[Segment]] = {}
    for seg in segments:
        by_owner.setdefault(seg.owner_id, []).append(seg)
    entities = []
    for s in state.spores:
        rx, ry = s.size * scale / w, s.size * scale / h
        entities.append({
            "id": s.id,
            "stage": Stage.SPORE.value,
            "position": [s.x, s.y],
            "radius": s.size,
            "bbox": [_clip01(s.x - rx), _clip01(s.y - ry), _clip01(s.x + rx), _clip01(s.y + ry)],
        })
    for a in state.anchors:
        own = by_owner.get(a.id, [])
        entities.append({
            "id": a.id,
            "stage": a.stage.value,
            "position": [a.x, a.y],
            "birth_frame": a.birth_frame,
            "parent_spore_id": a.parent_spore_id,
            "segment_count": len(own),
            "bbox": _segment_bbox(own, size),
        })
    entities.sort(key=lambda e: e["id"])
    return entities


def _produce_frame(job: tuple[WorldState, SimulationConfig, str]) -> FrameRecord:
    state, config, out_dir = job
    size = (config.render.width, config.render.height)
    segments = build_frame_geometry(
        state,
        config.branch_params(Stage.HYPHA),
        config.branch_params(Stage.MYCELIUM),
        config.environment_params(),
        config.seed,
        config.segment_budget,
    )
    raster = render_frame(
        state, segments, config.palette(), size, config.render.z_order, config.render.antialias
    )
    data = encode_png(raster)
    name = frame_filename(state.clock.frame_index)
    path = Path(out_dir) / name
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise DatasetError(f"cannot write {path}: {exc.strerror or exc}") from None
    n_spores, n_hyphae, n_myc = state.counts()
    return FrameRecord(
        frame_index=state.clock.frame_index,
        transition_ratio=state.T,
        spore_count=n_spores,
        hypha_count=n_hyphae,
        mycelium_count=n_myc,
        image_path=name,
        image_sha256=hashlib.sha256(data).hexdigest(),
        entities=annotate(state, segments, size),
    )


def generate_dataset(config: SimulationConfig, workers: int = 1, output_dir: str | Path | None = None) -> Manifest:
    """Run the full frame loop and write ``frame_%05d.png`` files plus ``manifest.json``.

    Lifecycle steps run serially; geometry, rendering and encoding of frames
    are distributed over ``workers`` processes. Output bytes do not depend on
    ``workers``.
    """
    out = Path(output_dir if output_dir is not None else config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DatasetError(f"cannot create output directory {out}: {exc.strerror or exc}") from None

    states = simulate_lifecycle(config.lifecycle_params(), config.total_frames, config.seed)
    jobs = ((state, config, str(out)) for state in states)
    if workers <= 1:
        records = [_produce_frame(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_produce_frame, jobs))
    for r in records:
        log.debug("frame %d: T=%.4f counts=(%d, %d, %d)", r.frame_index, r.transition_ratio,
                  r.spore_count, r.hypha_count, r.mycelium_count)

    manifest = Manifest(config=config.to_dict(), frames=records)
    path = out / MANIFEST_NAME
    try:
        path.write_text(manifest.dumps(), encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot write {path}: {exc.strerror or exc}") from None
    return manifest


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    failed_frames: list[int] = field(default_factory=list)


@dataclass
class VerificationReport:
    manifest_path: str
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return bool(self.checks) and all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def lines(self) -> list[str]:
        out = []
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'} {c.name}"
            if c.detail:
                line += f": {c.detail}"
            out.append(line)
        return out


def _frame_check(name: str, frames: Iterable[dict], predicate, describe) -> CheckResult:
    bad = []
    notes = []
    for rec in frames:
        try:
            ok = predicate(rec)
        except (KeyError, TypeError, ValueError) as exc:
            ok, notes = False, notes + [f"frame {rec.get('frame_index')}: malformed record ({exc})"]
        if not ok:
            bad.append(rec.get("frame_index"))
    if not bad:
        return CheckResult(name, True)
    detail = describe(bad) if not notes else "; ".join(notes[:3])
    return CheckResult(name, False, detail, bad)


def _first(bad: list, limit: int = 5) -> str:
    shown = ", ".join(str(b) for b in bad[:limit])
    return shown + (f" (+{len(bad) - limit} more)" if len(bad) > limit else "")


def verify_dataset(manifest_path: str | Path) -> VerificationReport:
    """Re-check a generated dataset. Problems are reported per check, never raised."""
    manifest_path = Path(manifest_path)
    report = VerificationReport(str(manifest_path))
    try:
        doc = json.loads(manifest_path.read_text(encoding="utf-8"))
        frames: list[dict] = doc["frames"]
        config = config_from_dict(doc["config"])
        if doc.get("image_hash_algorithm") != HASH_ALGORITHM:
            raise ValueError(f"unsupported hash algorithm {doc.get('image_hash_algorithm')!r}")
    except (OSError, ValueError, KeyError, TypeError, ConfigError) as exc:
        report.checks.append(CheckResult("manifest", False, f"unreadable manifest: {exc}"))
        return report
    report.checks.append(CheckResult("manifest", True))

    N = config.total_frames
    S0 = config.lifecycle.initial_spores
    base = manifest_path.parent

    indices = [rec.get("frame_index") for rec in frames]
    if indices != list(range(N)):
        report.checks.append(CheckResult("alignment", False, f"expected frame indices 0..{N - 1}, got {len(frames)} records"))
    else:
        report.checks.append(_frame_check(
            "alignment", frames,
            lambda r: r["image_path"] == frame_filename(r["frame_index"]),
            lambda bad: f"image_path does not match frame index at frames {_first(bad)}",
        ))

    report.checks.append(_frame_check(
        "transition_ratio", frames,
        lambda r: r["transition_ratio"] == r["frame_index"] / (N - 1),
        lambda bad: f"T != i/(N-1) at frames {_first(bad)}",
    ))

    def hash_ok(rec: dict) -> bool:
        try:
            data = (base / rec["image_path"]).read_bytes()
        except OSError:
            return False
        return hashlib.sha256(data).hexdigest() == rec["image_sha256"]

    report.checks.append(_frame_check(
        "image_hashes", frames, hash_ok,
        lambda bad: f"missing or modified images at frames {_first(bad)}",
    ))

    def conserved(rec: dict) -> bool:
        counts = (rec["spore_count"], rec["hypha_count"], rec["mycelium_count"])
        if min(counts) < 0 or sum(counts) != S0:
            return False
        tally = {s.value: 0 for s in Stage}
        for e in rec["entities"]:
            tally[e["stage"]] += 1
        ids = [e["id"] for e in rec["entities"]]
        return (tally["spore"], tally["hypha"], tally["mycelium"]) == counts and len(set(ids)) == len(ids)

    report.checks.append(_frame_check(
        "conservation", frames, conserved,
        lambda bad: f"counts do not sum to S0={S0} or disagree with annotations at frames {_first(bad)}",
    ))

    report.checks.append(_monotone_check(frames))

    report.checks.append(_frame_check(
        "spore_trajectory", frames,
        lambda r: r["spore_count"] == round_half_away(S0 * (1.0 - r["frame_index"] / (N - 1))),
        lambda bad: f"spore count != round(S0*(1-T)) at frames {_first(bad)}",
    ))

    lp = config.lifecycle
    report.checks.append(_frame_check(
        "stage_targets", frames,
        lambda r: (r["spore_count"], r["hypha_count"], r["mycelium_count"]) == target_counts(
            r["frame_index"] / (N - 1), S0, lp.hypha_rate, lp.mycelium_rate, lp.mycelium_threshold
        ),
        lambda bad: f"stage counts differ from the population targets at frames {_first(bad)}",
    ))
    return report


def _monotone_check(frames: list[dict]) -> CheckResult:
    bad: list[int] = []
    prev: dict[str, Any] | None = None
    last_rank: dict[int, int] = {}
    rank = {s.value: s.rank for s in Stage}
    for rec in frames:
        try:
            ok = True
            if prev is not None:
                ok = rec["spore_count"] <= prev["spore_count"] and rec["mycelium_count"] >= prev["mycelium_count"]
            for e in rec["entities"]:
                r = rank[e["stage"]]
                if r < last_rank.get(e["id"], 0):
                    ok = False
                last_rank[e["id"]] = max(r, last_rank.get(e["id"], 0))
        except (KeyError, TypeError):
            ok = False
        if not ok:
            bad.append(rec.get("frame_index"))
        prev = rec
    if not bad:
        return CheckResult("monotone_staging", True)
    return CheckResult(
        "monotone_staging", False,
        f"spores increased, mycelia decreased or an entity regressed a stage at frames {_first(bad)}", bad,
    )
