"""Command-line client for the simulation service.

Every command speaks the service's HTTP API. With ``--server`` it targets
a running instance; without it the requests are served by an in-process
application, so no server is needed for local use. File-based confusion
matrices are read locally and inlined into the request payload, keeping
remote servers independent of the client's filesystem.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx
import numpy as np

from .errors import ValidationError
from .io import write_summary, write_trace, write_traces
from .service.app import create_app
from .service.schemas import SummarySchema, TraceSchema


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    transport = httpx.ASGITransport(app=create_app())
    return httpx.Client(transport=transport, base_url="http://maintwin.local", timeout=None)


def _load_payload(config_path: str) -> dict:
    path = Path(config_path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read configuration {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"configuration {path} is not valid JSON: {exc}") from exc
    observation = payload.get("observation", {})
    if observation.get("source") == "file":
        matrix_path = Path(observation.get("path", ""))
        if not matrix_path.is_absolute():
            matrix_path = path.parent / matrix_path
        try:
            entries = np.loadtxt(matrix_path, dtype=float, ndmin=2)
        except (OSError, ValueError) as exc:
            raise ValidationError(f"cannot read confusion matrix {matrix_path}: {exc}") from exc
        payload["observation"] = {"source": "matrix", "entries": entries.tolist()}
    return payload


def _post(client: httpx.Client, route: str, body: dict) -> dict:
    response = client.post(route, json=body)
    if response.status_code != 200:
        try:
            detail = response.json().get("detail", response.text)
        except ValueError:
            detail = response.text
        raise ValidationError(f"{route} failed ({response.status_code}): {detail}")
    return response.json()


def _cmd_validate(args: argparse.Namespace) -> int:
    payload = _load_payload(args.config)
    with _client(args.server) as client:
        result = _post(client, "/config/validate", {"config": payload})
    print(
        f"configuration ok: {result['n_states']} states, {result['n_actions']} actions, "
        f"horizon {result['horizon']}, modes {','.join(result['modes'])}, "
        f"{len(result['seeds'])} seeds"
    )
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    payload = _load_payload(args.config)
    body = {"config": payload, "seed": args.seed, "mode": args.mode}
    with _client(args.server) as client:
        result = _post(client, "/episodes", body)
    trace = TraceSchema(**result["trace"]).to_trace()
    out = Path(args.out)
    path = write_trace(trace, out)
    print(f"wrote {path}")
    print(
        f"mode={trace.mode} seed={trace.seed} steps={len(trace.steps)} "
        f"cumulative_reward={trace.cumulative_reward:.2f} ever_failed={trace.ever_failed}"
    )
    return 0


def _cmd_experiment(args: argparse.Namespace) -> int:
    payload = _load_payload(args.config)
    body = {
        "config": payload,
        "runs": args.runs,
        "modes": args.modes.split(",") if args.modes else None,
        "include_traces": args.save_traces,
    }
    with _client(args.server) as client:
        result = _post(client, "/experiments", body)
    summary = SummarySchema(**result["summary"]).to_summary()
    out = Path(args.out)
    paths = write_summary(summary, out)
    if args.save_traces and result.get("traces"):
        traces = [TraceSchema(**t).to_trace() for t in result["traces"]]
        paths += write_traces(traces, out)
    for mode in summary.modes:
        print(
            f"mode={mode.mode} runs={len(mode.runs)} "
            f"final_mean={mode.mean_cumulative[-1]:.2f} "
            f"final_std={mode.std_cumulative[-1]:.2f} "
            f"failure_rate={mode.failure_rate:.2f}"
        )
    print(f"wrote {len(paths)} files under {out}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maintwin",
        description="Adaptive digital-twin simulator for maintenance planning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one seeded episode and save its trace")
    run.add_argument("--config", required=True, help="path to a JSON configuration file")
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--mode", choices=["adaptive", "static"], default="adaptive")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--server", default=None, help="base URL of a running service")
    run.set_defaults(func=_cmd_run)

    experiment = sub.add_parser("experiment", help="run a multi-seed experiment")
    experiment.add_argument("--config", required=True)
    experiment.add_argument("--runs", type=int, default=None, help="truncate the configured seed list")
    experiment.add_argument("--modes", default=None, help="comma-separated subset of modes")
    experiment.add_argument("--out", required=True)
    experiment.add_argument("--save-traces", action="store_true", help="also save every episode trace")
    experiment.add_argument("--server", default=None)
    experiment.set_defaults(func=_cmd_experiment)

    validate = sub.add_parser("validate-config", help="check a configuration file")
    validate.add_argument("--config", required=True)
    validate.add_argument("--server", default=None)
    validate.set_defaults(func=_cmd_validate)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
