"""Run directory layout and the readers/writers for each artifact."""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

from .exceptions import ArtifactError
from .simulator import PopulationCounts

COUNTS = "counts.csv"
TRANSCRIPT = "transcript.jsonl"
METRICS = "metrics.json"
FIT = "fit.json"
CONFIG = "config.yaml"
MANIFEST = "manifest.json"
INTERACTIONS = "interactions.csv"
FAILED = "FAILED"

RUN_ARTIFACTS = (COUNTS, TRANSCRIPT, METRICS, FIT, CONFIG, MANIFEST)
COUNTS_HEADER = ["day", "S", "I", "R"]
RECORD_FIELDS = ("id", "day", "belief", "tweet", "reasoning", "short_term", "long_term", "label")


def _check_partition(rows: Sequence[PopulationCounts], population: int | None, where: str) -> int:
    if not rows:
        raise ArtifactError(f"{where}: no data rows")
    n = rows[0].total if population is None else population
    for k, row in enumerate(rows):
        if min(row.S, row.I, row.R) < 0:
            raise ArtifactError(f"{where}: row {k + 1} (day {row.day}) has a negative count")
        if row.total != n:
            raise ArtifactError(
                f"{where}: row {k + 1} (day {row.day}) has S+I+R={row.total}, expected {n}"
            )
        if row.day != k:
            raise ArtifactError(f"{where}: row {k + 1} has day {row.day}, expected {k}")
    return n


def format_counts(rows: Sequence[PopulationCounts], population: int | None = None) -> str:
    _check_partition(rows, population, "counts")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COUNTS_HEADER)
    for r in rows:
        w.writerow([r.day, r.S, r.I, r.R])
    return buf.getvalue()


def write_counts(path: str | Path, rows: Sequence[PopulationCounts], population: int | None = None) -> Path:
    path = Path(path)
    path.write_text(format_counts(rows, population), encoding="utf-8")
    return path


def read_counts(path: str | Path, population: int | None = None) -> list[PopulationCounts]:
    """Parse and validate a ``day,S,I,R`` file; errors name the offending row."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read counts file {path}: {exc.strerror}") from None
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != COUNTS_HEADER:
        raise ArtifactError(f"{path}: header must be {','.join(COUNTS_HEADER)}, got {header}")
    rows = []
    for k, raw in enumerate(reader, start=1):
        if not raw:
            continue
        if len(raw) != 4:
            raise ArtifactError(f"{path}: row {k} has {len(raw)} fields, expected 4")
        try:
            rows.append(PopulationCounts(*(int(v) for v in raw)))
        except ValueError:
            raise ArtifactError(f"{path}: row {k} is not all integers: {raw}") from None
    _check_partition(rows, population, str(path))
    return rows


def format_transcript(records: Iterable[Iterable[dict]]) -> str:
    lines = []
    for day_records in records:
        for rec in day_records:
            lines.append(json.dumps(rec, ensure_ascii=False, sort_keys=False))
    return "\n".join(lines) + "\n" if lines else ""


def write_transcript(path: str | Path, records: Iterable[Iterable[dict]]) -> Path:
    path = Path(path)
    path.write_text(format_transcript(records), encoding="utf-8")
    return path


def read_transcript(path: str | Path) -> list[list[dict]]:
    """Records grouped by day (index = day)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"cannot read transcript {path}: {exc.strerror}") from None
    by_day: dict[int, list[dict]] = {}
    for k, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ArtifactError(f"{path}: line {k} is not valid JSON ({exc.msg})") from None
        missing = [f for f in RECORD_FIELDS if f not in rec]
        if missing:
            raise ArtifactError(f"{path}: line {k} lacks field(s) {missing}")
        by_day.setdefault(int(rec["day"]), []).append(rec)
    if not by_day:
        raise ArtifactError(f"{path}: transcript is empty")
    days = sorted(by_day)
    if days != list(range(len(days))):
        raise ArtifactError(f"{path}: days are not contiguous from 0: {days}")
    return [by_day[d] for d in days]


def write_interactions(path: str | Path, edges: Sequence[Sequence[tuple[int, int]]]) -> Path:
    path = Path(path)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["day", "listener", "speaker"])
    for day, pairs in enumerate(edges):
        for listener, speaker in pairs:
            w.writerow([day, listener, speaker])
    path.write_text(buf.getvalue(), encoding="utf-8")
    return path


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_json(path: str | Path, data: dict) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_clean(data), indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path


def read_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ArtifactError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: invalid JSON ({exc.msg})") from None


def require(run_dir: str | Path, *names: str) -> list[Path]:
    """Paths of the named artifacts; raises naming the first missing one."""
    run_dir = Path(run_dir)
    if not run_dir.is_dir():
        raise ArtifactError(f"run directory {run_dir} does not exist")
    if (run_dir / FAILED).exists():
        raise ArtifactError(f"run in {run_dir} failed: {(run_dir / FAILED).read_text().strip()}")
    paths = []
    for name in names:
        p = run_dir / name
        if not p.is_file():
            raise ArtifactError(f"missing artifact {name} in {run_dir}")
        paths.append(p)
    return paths
