"""Command-line front door: simulate, render, summarize, gen-env, agent,
serve, and purge.

Every subcommand is a thin adapter over the library modules; values printed
here are the library results verbatim. Exit codes: 0 success, 1 validation
or configuration error, 2 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .agent import (
    MAX_ITERATIONS,
    ChatPlanner,
    Planner,
    ScriptedPlanner,
    run_episode,
)
from .analysis import render_summary_text, summarize_pathloss_map
from .catalog import resolve_location
from .chatclient import ChatBackendError, ChatClient, ChatEndpointConfig
from .geometry import GridSpec, Point3, gen_environment
from .radiomap import (
    RadioConfig,
    SimulationParams,
    render_heatmap,
    simulate_radio_environment,
)
from .runstore import RunStore
from .tools import build_default_registry

DEFAULT_STORE = "data/runs"

TURN_LABELS = {
    "thought": "Thought",
    "action": "Action",
    "action_input": "Action Input",
    "observation": "Observation",
    "final_answer": "Final Answer",
    "clarification_request": "Clarification Request",
}


def _parse_range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise ValueError(f"expected 'lo:hi', got {text!r}")
    return float(lo), float(hi)


def _print_record(record) -> None:
    print(f"run_id: {record.run_id}")
    print(f"environment: {record.environment_name}")
    print(f"dataset: {record.dataset_path}")
    print(f"heatmap: {record.heatmap_path}")
    print(f"metadata: {record.metadata_path}")


def cmd_simulate(args) -> int:
    if args.los_only:
        flags = dict(los=True, ref=False, gref=False, nlos=False, bel=False)
    else:
        flags = dict(los=args.los, ref=args.ref, gref=args.gref,
                     nlos=args.nlos, bel=args.bel)
    params = SimulationParams(
        tx=Point3(args.tx_x, args.tx_y, args.tx_z),
        location=args.location,
        nx=args.nx, ny=args.ny,
        radio=RadioConfig(frequency=args.frequency,
                          tx_power_dbm=args.tx_power,
                          wall_permittivity=args.permittivity),
        rx_height=args.rx_height,
        **flags)
    env = resolve_location(params.location)
    params.validate(env)
    result = simulate_radio_environment(params, env=env)
    record = RunStore(args.out).save(result, env)
    _print_record(record)
    covered = result.covered_mask
    n = int(covered.sum())
    print(f"covered: {n}/{covered.size} cells")
    if n:
        values = result.pathloss_db[covered]
        print(f"pathloss: [{values.min():.1f}, {values.max():.1f}] dB")
    return 0


def cmd_agent(args) -> int:
    store = RunStore(args.out)
    planner: Planner
    vision = None
    if args.backend == "remote":
        client = ChatClient(ChatEndpointConfig.from_env(
            base_url=args.chat_base_url, model=args.chat_model))
        planner = ChatPlanner(client)
        vision = client
    else:
        planner = ScriptedPlanner()
    registry = build_default_registry(store, vision_client=vision)

    def show(turn):
        print(f"{TURN_LABELS[turn.kind]}: {turn.content}")

    transcript = run_episode(registry, planner, args.prompt,
                             max_iterations=args.max_iterations,
                             on_turn=show)
    store.save_transcript(transcript)
    return 0


def cmd_render(args) -> int:
    store = RunStore(args.store)
    result = store.load_result(args.run_id)
    out = Path(args.out) if args.out \
        else store.run_dir(args.run_id) / "heatmap.png"
    color_range = _parse_range(args.range) if args.range else None
    render_heatmap(result, out, color_range=color_range)
    print(f"heatmap: {out}")
    return 0


def cmd_summarize(args) -> int:
    store = RunStore(args.store)
    result = store.load_result(args.run_id)
    print(render_summary_text(summarize_pathloss_map(result)))
    return 0


def cmd_gen_env(args) -> int:
    spec = GridSpec(rows=args.rows, cols=args.cols,
                    block_size=args.block_size,
                    street_width=args.street_width,
                    height_range=_parse_range(args.height_range),
                    seed=args.seed,
                    name=args.name or f"grid-{args.rows}x{args.cols}")
    env = gen_environment(spec, path=args.out)
    print(f"environment: {args.out} ({len(env.buildings)} buildings)")
    return 0


def cmd_serve(args) -> int:
    from .server import ServerConfig, serve

    serve(ServerConfig(data_dir=args.data_dir,
                       chat_base_url=args.chat_base_url,
                       chat_model=args.chat_model,
                       chat_api_key_env=args.chat_api_key_env,
                       ui_dir=args.ui_dir),
          host=args.host, port=args.port)
    return 0


def cmd_purge(args) -> int:
    removed = RunStore(args.data_dir).purge()
    print(f"removed {removed} run(s)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="raymap",
        description="Deterministic urban radio-map simulation with an "
                    "agentic control loop.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one simulation and save a run")
    p.add_argument("--tx-x", type=float, required=True,
                   help="transmitter x in meters")
    p.add_argument("--tx-y", type=float, required=True,
                   help="transmitter y in meters")
    p.add_argument("--tx-z", type=float, required=True,
                   help="transmitter height in meters")
    p.add_argument("--location", required=True,
                   help="catalog environment name or a .json file path")
    p.add_argument("--nx", type=int, default=50, help="grid columns")
    p.add_argument("--ny", type=int, default=50, help="grid rows")
    for flag, text in (("los", "direct line-of-sight paths"),
                       ("ref", "single-bounce wall reflections"),
                       ("gref", "the ground reflection"),
                       ("nlos", "the statistical non-line-of-sight model"),
                       ("bel", "building entry loss for indoor receivers")):
        p.add_argument(f"--{flag}", action=argparse.BooleanOptionalAction,
                       default=True, help=f"include {text}")
    p.add_argument("--los-only", action="store_true",
                   help="shorthand: enable LOS and disable everything else")
    p.add_argument("--rx-height", type=float, default=None,
                   help="receiver height in meters (default from radio config)")
    p.add_argument("--frequency", type=float, default=3.5,
                   help="carrier frequency in GHz")
    p.add_argument("--tx-power", type=float, default=30.0,
                   help="transmit power in dBm")
    p.add_argument("--permittivity", type=float, default=5.31,
                   help="relative permittivity of walls")
    p.add_argument("--out", default=DEFAULT_STORE,
                   help="run-store directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("agent", help="run one agent episode")
    p.add_argument("--prompt", required=True, help="natural-language objective")
    p.add_argument("--backend", choices=("scripted", "remote"),
                   default="scripted")
    p.add_argument("--chat-base-url", default=None,
                   help="chat endpoint base URL (or set CHAT_BASE_URL)")
    p.add_argument("--chat-model", default=None,
                   help="chat model name (or set CHAT_MODEL)")
    p.add_argument("--max-iterations", type=int, default=MAX_ITERATIONS)
    p.add_argument("--out", default=DEFAULT_STORE, help="run-store directory")
    p.set_defaults(func=cmd_agent)

    p = sub.add_parser("render", help="re-render a stored run's heatmap")
    p.add_argument("run_id")
    p.add_argument("--store", default=DEFAULT_STORE)
    p.add_argument("--out", default=None, help="output PNG path")
    p.add_argument("--range", default=None,
                   help="explicit colorbar range as lo:hi, e.g. 110:170")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("summarize", help="print a stored run's map summary")
    p.add_argument("run_id")
    p.add_argument("--store", default=DEFAULT_STORE)
    p.set_defaults(func=cmd_summarize)

    p = sub.add_parser("gen-env", help="generate a synthetic environment file")
    p.add_argument("--rows", type=int, default=5)
    p.add_argument("--cols", type=int, default=5)
    p.add_argument("--block-size", type=float, default=40.0)
    p.add_argument("--street-width", type=float, default=15.0)
    p.add_argument("--height-range", default="10:30",
                   help="building height range as lo:hi meters")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--name", default=None)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(func=cmd_gen_env)

    p = sub.add_parser("serve", help="start the HTTP API")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--data-dir", default=DEFAULT_STORE)
    p.add_argument("--ui-dir", default=None,
                   help="static UI bundle to serve at /")
    p.add_argument("--chat-base-url", default=None)
    p.add_argument("--chat-model", default="gpt-4o-mini")
    p.add_argument("--chat-api-key-env", default="CHAT_API_KEY")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("purge", help="delete all stored runs")
    p.add_argument("--data-dir", default=DEFAULT_STORE)
    p.set_defaults(func=cmd_purge)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (KeyError, ValueError, RuntimeError, ChatBackendError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
