"""Command line entry point: ``run``, ``fit``, ``metrics`` and ``report``.

Exit codes: 0 success, 2 configuration error, 3 artifact error.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import math
import sys
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence, TextIO

import numpy as np

from . import __version__
from .artifacts import (
    CONFIG,
    COUNTS,
    FAILED,
    FIT,
    INTERACTIONS,
    MANIFEST,
    METRICS,
    TRANSCRIPT,
    read_counts,
    read_transcript,
    require,
    write_counts,
    write_interactions,
    write_json,
    write_transcript,
)
from .config import parse_config, write_config
from .epidemic import SISParams, fit_sis, infected_closed_form, relabel_for_sis
from .exceptions import ArtifactError, ConfigError
from .metrics import HALF_NEVER, MetricsReport, compute_metrics, metrics_from_parts
from .persona import TraitProfile
from .simulator import (
    InterventionSchedule,
    SimulationConfig,
    make_backend,
    run_simulation,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ARTIFACT = 3

logger = logging.getLogger("fpsim")


@dataclass(frozen=True)
class RunArtifacts:
    run_dir: Path
    counts: Path
    transcript: Path
    metrics: Path
    fit: Path
    config: Path
    manifest: Path
    interactions: Path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _backend_identity(backend) -> dict:
    ident = {"name": getattr(backend, "name", type(backend).__name__)}
    cfg = getattr(backend, "config", None)
    if ident["name"] == "llm" and cfg is not None:
        ident.update(model=cfg.model_name, endpoint=cfg.endpoint_url, temperature=cfg.temperature)
    elif cfg is not None and dataclasses.is_dataclass(cfg):
        ident["config"] = dataclasses.asdict(cfg)
    return ident


def fit_counts(rows) -> dict:
    """SIS fit of a counts table, with the fitted curve on every input day."""
    S_prime, I = relabel_for_sis(rows)
    N = int(S_prime[0] + I[0])
    days = np.array([r.day for r in rows])
    if len(rows) < 4:
        # too few days to identify two parameters; keep the artifact, flag it
        params = SISParams(math.nan, math.nan, N, status="insufficient_data")
    else:
        params = fit_sis(I[1:], N, float(I[0]), days[1:])
    if params.status in ("degenerate", "insufficient_data"):
        fitted = [None] * len(rows)
    else:
        fitted = infected_closed_form(params.beta, params.gamma, N, float(I[0]), days).tolist()
    overlay = [
        {"day": int(d), "S_prime": int(s), "I": int(i), "I_fit": f}
        for d, s, i, f in zip(days, S_prime, I, fitted)
    ]
    return {**params.as_record(), "overlay": overlay}


def run_command(
    cfg: SimulationConfig,
    out_dir: str | Path,
    backend=None,
    stream: TextIO | None = sys.stdout,
) -> RunArtifacts:
    """Simulate, then write every run artifact into ``out_dir``."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / FAILED).unlink(missing_ok=True)
    write_config(cfg, out / CONFIG)
    backend = backend or make_backend(cfg)
    started = _now()
    t0 = time.perf_counter()

    def echo(c):
        if stream is not None:
            print(f"day {c.day:3d}: S={c.S:4d} I={c.I:4d} R={c.R:4d}", file=stream)

    try:
        trace = run_simulation(cfg, backend, on_day=echo)
        write_counts(out / COUNTS, trace.counts, cfg.n_agents)
        write_transcript(out / TRANSCRIPT, trace.records)
        write_interactions(out / INTERACTIONS, trace.edges)
        write_json(out / METRICS, compute_metrics(trace).as_record())
        write_json(out / FIT, fit_counts(trace.counts))
        write_json(
            out / MANIFEST,
            {
                "seed": cfg.run_seed,
                "started_at": started,
                "finished_at": _now(),
                "elapsed_seconds": round(time.perf_counter() - t0, 3),
                "package_version": __version__,
                "backend": _backend_identity(backend),
                "calls": getattr(backend, "calls", None),
                "retries": getattr(backend, "retries", 0),
                "failures": getattr(backend, "failures", 0),
                "n_agents": cfg.n_agents,
                "horizon": cfg.horizon,
                "interventions": trace.interventions,
                "errors": trace.errors,
            },
        )
    except Exception as exc:
        (out / FAILED).write_text(f"{type(exc).__name__}: {exc}\n", encoding="utf-8")
        raise
    return RunArtifacts(
        out, out / COUNTS, out / TRANSCRIPT, out / METRICS, out / FIT, out / CONFIG,
        out / MANIFEST, out / INTERACTIONS,
    )


def fit_command(counts_path: str | Path, out_path: str | Path | None = None) -> dict:
    counts_path = Path(counts_path)
    rows = read_counts(counts_path)
    if len(rows) < 4:
        raise ArtifactError(f"{counts_path}: need day 0 plus at least 3 days to fit, got {len(rows)} rows")
    record = fit_counts(rows)
    write_json(Path(out_path) if out_path else counts_path.with_name(FIT), record)
    return record


def metrics_command(run_dir: str | Path) -> MetricsReport:
    counts_path, transcript_path = require(run_dir, COUNTS, TRANSCRIPT)
    rows = read_counts(counts_path)
    records = read_transcript(transcript_path)
    if len(records) != len(rows):
        raise ArtifactError(
            f"{transcript_path} covers {len(records)} days but {counts_path} has {len(rows)} rows"
        )
    final = [r["belief"] for r in sorted(records[-1], key=lambda r: r["id"])]
    tweets = [r["tweet"] for day in records[1:] for r in day]
    try:
        report = metrics_from_parts(rows, final, tweets)
    except ValueError as exc:
        raise ArtifactError(f"{run_dir}: {exc}") from None
    write_json(Path(run_dir) / METRICS, report.as_record())
    return report


REPORT_COLUMNS = (
    ("Belief Average", "belief_average"),
    ("Belief Variance", "belief_variance"),
    ("Infection Rate", "infection_rate"),
    ("Recovery Rate", "recovery_rate"),
    ("Peak Rate (fraction)*", "peak_fraction"),
    ("Peak Rate (time)*", "peak_time_norm"),
    ("Half Rate", "half_time_norm"),
    ("Distinct-1", "distinct_1"),
    ("Distinct-2", "distinct_2"),
)
REPORT_FOOTNOTE = (
    "* Peak Rate is ambiguous as a single number: it is shown both as the peak "
    "infected fraction and as the normalised day of the peak."
)


def render_report(rows: Sequence[tuple[str, MetricsReport]]) -> str:
    header = ["Settings", *(title for title, _ in REPORT_COLUMNS)]
    table = [header]
    for label, rep in rows:
        rec = rep.as_record()
        cells = [label]
        for _, key in REPORT_COLUMNS:
            v = rec[key]
            cells.append(v if v == HALF_NEVER else f"{v:.3f}")
        table.append(cells)
    widths = [max(len(r[i]) for r in table) for i in range(len(header))]
    lines = [" | ".join(c.ljust(w) for c, w in zip(r, widths)) for r in table]
    lines.insert(1, "-+-".join("-" * w for w in widths))
    return "\n".join(lines + ["", REPORT_FOOTNOTE])


def report_command(run_dirs: Sequence[str | Path]) -> str:
    rows = [(Path(d).name, metrics_command(d)) for d in run_dirs]
    return render_report(rows)


def _build_config(args) -> SimulationConfig:
    if args.config:
        cfg = parse_config(args.config)
    elif args.topic:
        cfg = SimulationConfig(topic=args.topic)
    else:
        raise ConfigError("either --config or --topic is required")
    if args.topic and args.config:
        cfg.topic = args.topic
    if args.backend:
        cfg.backend = args.backend
    if args.seed is not None:
        cfg.run_seed = args.seed
    if args.intervention:
        cfg.intervention = InterventionSchedule.parse(args.intervention)
    if args.profile:
        cfg.trait_profile = TraitProfile.from_name(args.profile)
    return cfg.validate()


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fpsim", description="Fake-news propagation simulator.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log backend retries and errors")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate and write a run directory")
    run.add_argument("--config", help="YAML config file")
    run.add_argument("--topic", help="news topic (overrides the config)")
    run.add_argument("--backend", choices=("mock", "llm"))
    run.add_argument("--seed", type=_u64)
    run.add_argument("--out", default="run", help="output directory (default: ./run)")
    run.add_argument("--intervention", help="none, on_days(d1,d2,...) or every_k(start,k)")
    run.add_argument("--profile", choices=("random", "credulous", "skeptical"))

    fit = sub.add_parser("fit", help="fit the SIS model to a counts file")
    fit.add_argument("counts", help="counts.csv (day,S,I,R)")
    fit.add_argument("--out", help="fit file (default: fit.json next to the counts)")

    met = sub.add_parser("metrics", help="recompute metrics.json for a run directory")
    met.add_argument("run_dir")

    rep = sub.add_parser("report", help="metrics table for one or more run directories")
    rep.add_argument("run_dirs", nargs="+")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.ERROR,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            arts = run_command(_build_config(args), args.out)
            print(f"wrote {arts.run_dir}")
        elif args.command == "fit":
            rec = fit_command(args.counts, args.out)
            print(f"beta={rec['beta']} gamma={rec['gamma']} residual={rec['residual']} status={rec['status']}")
        elif args.command == "metrics":
            rep = metrics_command(args.run_dir)
            for key, value in rep.as_record().items():
                print(f"{key}: {value}")
        elif args.command == "report":
            print(report_command(args.run_dirs))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ArtifactError as exc:
        print(f"artifact error: {exc}", file=sys.stderr)
        return EXIT_ARTIFACT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
