"""Plain-text persistence for traces and experiment summaries.

Traces are CSV files with one row per step and a single ``# meta`` comment
line carrying episode-level fields as JSON; forecasts attached to a trace
go to sibling ``<stem>.forecast<t>.csv`` files. Floats are written with
``repr`` so a re-read trace compares equal field for field.

Summaries produce a plot-ready cumulative-reward curve (``summary.csv``),
per-run posterior/prior parameters (``posteriors.json``), and a per-trace
index (``index.csv``).
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

from .episode import EpisodeTrace, ExperimentSummary, ForecastRecord, StepRecord
from .errors import ValidationError

_META_PREFIX = "# meta "


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_rows(path: Path, meta: dict, header: list[str], rows: Iterable[list]) -> None:
    try:
        with path.open("w", newline="") as handle:
            handle.write(_META_PREFIX + json.dumps(meta) + "\n")
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise ValidationError(f"cannot write {path}: {exc}") from exc


def _read_rows(path: Path) -> tuple[dict, list[str], list[list[str]]]:
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not lines or not lines[0].startswith(_META_PREFIX):
        raise ValidationError(f"{path} is missing its metadata line")
    meta = json.loads(lines[0][len(_META_PREFIX):])
    rows = list(csv.reader(lines[1:]))
    return meta, rows[0], rows[1:]


def write_trace(trace: EpisodeTrace, out_dir: str | Path, stem: str | None = None) -> Path:
    """Write one episode to ``<out_dir>/<stem>.csv`` plus forecast files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = stem or f"trace_{trace.mode}_seed{trace.seed}"
    n_states = len(trace.steps[0].belief) if trace.steps else 0
    meta = {
        "mode": trace.mode,
        "seed": trace.seed,
        "action_names": list(trace.action_names),
        "true_step_probs": [list(p) for p in trace.true_step_probs],
        "cumulative_reward": trace.cumulative_reward,
        "ever_failed": trace.ever_failed,
        "n_states": n_states,
        "forecast_starts": [fc.start for fc in trace.forecasts],
    }
    header = [
        "t", "location", "severity", "failed", "true_state", "observed",
        "map_state", "action", "reward", "cumulative_reward",
    ]
    header += [f"belief_{i}" for i in range(n_states)]
    for name, params in zip(trace.action_names, trace.steps[0].posteriors if trace.steps else ()):
        header += [f"post_{name}_{i}" for i in range(len(params))]
    rows = []
    for step in trace.steps:
        row = [
            step.t, step.location, _fmt(step.severity), int(step.failed), step.true_state,
            step.observed, step.map_state, step.action, _fmt(step.reward),
            _fmt(step.cumulative_reward),
        ]
        row += [_fmt(p) for p in step.belief]
        for params in step.posteriors:
            row += [_fmt(p) for p in params]
        rows.append(row)
    path = out_dir / f"{stem}.csv"
    _write_rows(path, meta, header, rows)
    for forecast in trace.forecasts:
        _write_forecast(forecast, out_dir / f"{stem}.forecast{forecast.start}.csv")
    return path


def _write_forecast(forecast: ForecastRecord, path: Path) -> None:
    n_actions = len(forecast.action_beliefs[0]) if forecast.action_beliefs else 0
    n_states = len(forecast.state_beliefs[0]) if forecast.state_beliefs else 0
    header = ["t"]
    header += [f"action_belief_{i}" for i in range(n_actions)]
    header += [f"belief_{i}" for i in range(n_states)]
    rows = []
    for offset, (state_b, action_b) in enumerate(zip(forecast.state_beliefs, forecast.action_beliefs)):
        rows.append(
            [forecast.start + 1 + offset]
            + [_fmt(p) for p in action_b]
            + [_fmt(p) for p in state_b]
        )
    _write_rows(path, {"start": forecast.start}, header, rows)


def read_trace(path: str | Path) -> EpisodeTrace:
    """Reconstruct an episode from its CSV file (and sibling forecast files)."""
    path = Path(path)
    meta, header, rows = _read_rows(path)
    n_states = int(meta["n_states"])
    action_names = tuple(meta["action_names"])
    true_probs = tuple(tuple(float(v) for v in p) for p in meta["true_step_probs"])
    posterior_widths = []
    for name in action_names:
        posterior_widths.append(sum(1 for col in header if col.startswith(f"post_{name}_")))
    steps = []
    for row in rows:
        fixed, rest = row[:10], row[10:]
        belief = tuple(float(v) for v in rest[:n_states])
        cursor = n_states
        posteriors = []
        for width in posterior_widths:
            posteriors.append(tuple(float(v) for v in rest[cursor:cursor + width]))
            cursor += width
        steps.append(
            StepRecord(
                t=int(fixed[0]),
                location=int(fixed[1]),
                severity=float(fixed[2]),
                failed=bool(int(fixed[3])),
                true_state=int(fixed[4]),
                observed=int(fixed[5]),
                map_state=int(fixed[6]),
                action=int(fixed[7]),
                reward=float(fixed[8]),
                cumulative_reward=float(fixed[9]),
                belief=belief,
                posteriors=tuple(posteriors),
            )
        )
    forecasts = []
    for start in meta["forecast_starts"]:
        forecasts.append(_read_forecast(path.with_name(f"{path.stem}.forecast{start}.csv")))
    return EpisodeTrace(
        mode=meta["mode"],
        seed=int(meta["seed"]),
        action_names=action_names,
        steps=tuple(steps),
        forecasts=tuple(forecasts),
        true_step_probs=true_probs,
        cumulative_reward=float(meta["cumulative_reward"]),
        ever_failed=bool(meta["ever_failed"]),
    )


def _read_forecast(path: Path) -> ForecastRecord:
    meta, header, rows = _read_rows(path)
    n_actions = sum(1 for col in header if col.startswith("action_belief_"))
    state_beliefs = []
    action_beliefs = []
    for row in rows:
        action_beliefs.append(tuple(float(v) for v in row[1:1 + n_actions]))
        state_beliefs.append(tuple(float(v) for v in row[1 + n_actions:]))
    return ForecastRecord(
        start=int(meta["start"]),
        state_beliefs=tuple(state_beliefs),
        action_beliefs=tuple(action_beliefs),
    )


def write_traces(traces: Sequence[EpisodeTrace], out_dir: str | Path) -> list[Path]:
    """Write every trace plus an index file; an empty list still produces
    the header-only index."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [write_trace(trace, out_dir) for trace in traces]
    index = out_dir / "index.csv"
    _write_rows(
        index,
        {"traces": len(traces)},
        ["file", "mode", "seed", "cumulative_reward", "ever_failed"],
        [
            [p.name, t.mode, t.seed, _fmt(t.cumulative_reward), int(t.ever_failed)]
            for p, t in zip(paths, traces)
        ],
    )
    paths.append(index)
    return paths


def write_summary(summary: ExperimentSummary, out_dir: str | Path) -> list[Path]:
    """Write the cumulative-reward curves and the posterior snapshots."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    curve_path = out_dir / "summary.csv"
    rows = []
    for mode in summary.modes:
        for t, (mean, std) in enumerate(zip(mode.mean_cumulative, mode.std_cumulative)):
            rows.append([mode.mode, t, _fmt(mean), _fmt(std)])
    _write_rows(
        curve_path,
        {"horizon": summary.horizon, "seeds": list(summary.seeds)},
        ["mode", "t", "mean_cumulative_reward", "std_cumulative_reward"],
        rows,
    )
    posterior_path = out_dir / "posteriors.json"
    payload = {
        "horizon": summary.horizon,
        "seeds": list(summary.seeds),
        "modes": [
            {
                "mode": mode.mode,
                "failure_rate": mode.failure_rate,
                "runs": [asdict(run) for run in mode.runs],
            }
            for mode in summary.modes
        ],
    }
    try:
        posterior_path.write_text(json.dumps(payload, indent=2) + "\n")
    except OSError as exc:
        raise ValidationError(f"cannot write {posterior_path}: {exc}") from exc
    return [curve_path, posterior_path]
