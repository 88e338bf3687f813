"""Command line entry points.

    plantavatar run --config service.json        # live service
    plantavatar replay --scenario s.txt --out r.csv
    plantavatar export --history h.jsonl --out r.csv
    plantavatar validate --profile p.txt
    plantavatar devices --plant-port 9001 --people-port 9002

Exit codes: 0 success, 1 configuration error, 2 scenario error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .fuzzy import ConfigurationError
from .sim import ScenarioError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SCENARIO = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="plantavatar", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the live avatar service")
    run.add_argument("--config", required=True, help="service config JSON")

    replay = sub.add_parser("replay", help="replay a scenario deterministically")
    replay.add_argument("--scenario", required=True, help="scenario file")
    replay.add_argument("--profile", default=None, help="profile file (default: built-in)")
    replay.add_argument("--out", required=True, help="output CSV path")
    replay.add_argument("--history", default=None, help="also write JSONL history here")
    replay.add_argument("--figures", default=None,
                        help="figures directory (default: next to the CSV)")
    replay.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    replay.add_argument("--sample-every", type=float, default=60.0,
                        help="sampling period in simulated seconds (default 60)")

    export = sub.add_parser("export", help="convert JSONL history to CSV + figures")
    export.add_argument("--history", required=True, help="JSONL history file")
    export.add_argument("--out", required=True, help="output CSV path")
    export.add_argument("--figures", default=None,
                        help="figures directory (default: next to the CSV)")
    export.add_argument("--no-figures", action="store_true", help="skip figure rendering")

    validate = sub.add_parser("validate", help="check a profile file")
    validate.add_argument("--profile", required=True, help="profile file")

    devices = sub.add_parser("devices", help="run the simulated device nodes standalone")
    devices.add_argument("--plant-port", type=int, default=9001)
    devices.add_argument("--people-port", type=int, default=9002)
    devices.add_argument("--host", default="127.0.0.1")
    devices.add_argument("--scenario", default=None, help="optional scenario to play on wall time")
    devices.add_argument("--time-scale", type=float, default=None,
                         help="override the scenario's time scale")

    return parser


def _figures_dir(args) -> Path | None:
    if args.no_figures:
        return None
    if args.figures is not None:
        return Path(args.figures)
    return Path(args.out).resolve().parent


def cmd_replay(args) -> int:
    from .plant import load_profile
    from .replay import run_replay, write_csv, write_history
    from .report import render_report
    from .sim import load_scenario

    profile = load_profile(args.profile)
    scenario = load_scenario(args.scenario)
    result = run_replay(scenario, profile, sample_every=args.sample_every)
    csv_path = write_csv(result.records, args.out)
    print(f"wrote {csv_path} ({len(result.records)} rows)")
    if args.history:
        print(f"wrote {write_history(result.records, args.history)}")
    figures = _figures_dir(args)
    if figures is not None:
        for path in render_report(result.records, figures, deadband=profile.deadband):
            print(f"wrote {path}")
    for index, record in sorted(result.event_records.items()):
        state = record.state
        print(
            f"event {index:>2}: t={state.ts:>6.0f}s "
            f"brightness={state.snapshot.brightness:6.1f} moisture={state.snapshot.moisture:7.1f} "
            f"people={state.snapshot.people} -> {state.emotion.label} ({state.emotion.code})"
        )
    counts = ", ".join(f"{label}: {n}" for label, n in sorted(result.state_counts().items()))
    print(f"state totals -- {counts}")
    return EXIT_OK


def cmd_export(args) -> int:
    from .replay import read_history, write_csv
    from .report import render_report

    try:
        records = read_history(args.history)
    except OSError as exc:
        raise ConfigurationError(f"cannot read history {args.history}: {exc}") from exc
    except (ValueError, KeyError) as exc:
        raise ConfigurationError(f"history {args.history} is malformed: {exc}") from exc
    csv_path = write_csv(records, args.out)
    print(f"wrote {csv_path} ({len(records)} rows)")
    figures = _figures_dir(args)
    if figures is not None and records:
        for path in render_report(records, figures):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .plant import load_profile

    profile = load_profile(args.profile)
    polarity = "wet_low" if profile.moisture_inverted else "wet_high"
    print(
        f"profile OK: {len(profile.matrices)} matrices, "
        f"deadband {profile.deadband:g}, moisture polarity {polarity}"
    )
    return EXIT_OK


def cmd_devices(args) -> int:
    from .devices import DeviceCluster
    from .sim import load_scenario

    cluster = DeviceCluster()
    scenario = None
    if args.scenario:
        scenario = load_scenario(args.scenario)
        if args.time_scale:
            from dataclasses import replace

            scenario = replace(scenario, time_scale=args.time_scale)
    cluster.start(plant_port=args.plant_port, people_port=args.people_port, host=args.host)
    print(f"plant node:  {cluster.plant_url}/sensors  (POST {cluster.plant_url}/command)")
    print(f"people node: {cluster.people_url}/people")
    if scenario is not None:
        print(f"playing scenario ({len(scenario.events)} events, x{scenario.time_scale:g} time)")
        cluster.play_scenario(scenario)
    try:
        import time

        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        print("stopping")
    finally:
        cluster.stop()
    return EXIT_OK


def cmd_run(args) -> int:
    import uvicorn

    from .api import create_app
    from .plant import load_profile
    from .service import AvatarLoop, DevicePoller, load_service_config

    config = load_service_config(args.config)
    profile = load_profile(config.profile_path)

    cluster = None
    if config.builtin_devices:
        from .devices import DeviceCluster
        from .sim import load_scenario

        cluster = DeviceCluster(time_scale=config.time_scale)
        cluster.start()
        config.sensors_url = cluster.plant_url
        config.people_url = cluster.people_url
        config.command_url = cluster.plant_url
        print(f"builtin devices: {cluster.plant_url} {cluster.people_url}")
        if config.scenario_path:
            cluster.play_scenario(load_scenario(config.scenario_path))

    poller = DevicePoller(config.sensors_url, config.people_url)
    loop = AvatarLoop(
        poller,
        profile,
        poll_interval=config.poll_interval,
        history_path=config.history_path,
        command_url=config.command_url,
    )
    loop.start()
    app = create_app(loop, static_dir=config.static_dir)
    try:
        uvicorn.run(app, host=config.api_host, port=config.api_port, log_level="warning")
    finally:
        loop.stop()
        if cluster is not None:
            cluster.stop()
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    handlers = {
        "run": cmd_run,
        "replay": cmd_replay,
        "export": cmd_export,
        "validate": cmd_validate,
        "devices": cmd_devices,
    }
    try:
        return handlers[args.command](args)
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
