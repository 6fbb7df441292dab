"""Operator command line: generate, play, simulate, compare, validate,
playbook, serve.

Every path runs offline with ``--mock`` (playlist file) or the built-in
deterministic stubs, so the whole surface is exercisable in CI without a
network.  Exit codes: 0 success, 1 validation failure, 2 provider failure,
64 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional

from .gateway import (
    GatewayError,
    Provider,
    ProviderConfig,
    build_provider,
    load_playlist,
    provider_config_from_env,
)
from .generation import (
    PipelineError,
    PremiseParagraph,
    run_pipeline,
    story_to_script,
)
from .playbook import load_catalog
from .runtime import (
    Architecture,
    ArchitectureConfig,
    Session,
    SessionStatus,
    TurnFailedError,
    predicted_session_calls,
    record_to_json,
    step,
)
from .script import SchemaError, ScriptSyntaxError, parse_script, serialize_script
from .service import ServiceConfig, create_app, load_config
from .simulation import (
    compare_architectures,
    drama_stub,
    get_persona,
    load_personas,
    offline_stub,
    player_stub,
    run_playthrough,
)

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PROVIDER = 2
EXIT_USAGE = 64


class CliParser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _parse_k(value: str) -> Optional[int]:
    if value.lower() in ("inf", "none", "off"):
        return None
    return int(value)


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--mock", metavar="PLAYLIST", help="mock provider playlist JSON file")
    group.add_argument("--endpoint", metavar="URL", help="OpenAI-compatible endpoint")
    parser.add_argument("--model", default="", help="model name for --endpoint")
    parser.add_argument("--api-key", default="", help="API key for --endpoint (or STAGECRAFT_API_KEY)")


def _build_cli_provider(args: argparse.Namespace) -> Provider:
    import os

    if args.mock:
        return load_playlist(args.mock)
    if args.endpoint:
        return build_provider(ProviderConfig(
            kind="http_openai_compatible",
            endpoint=args.endpoint,
            model=args.model,
            api_key=args.api_key or os.environ.get("STAGECRAFT_API_KEY", ""),
        ))
    if os.environ.get("STAGECRAFT_ENDPOINT"):
        return build_provider(provider_config_from_env())
    return offline_stub()


def build_parser() -> CliParser:
    parser = CliParser(prog="stagecraft", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_generate = sub.add_parser("generate", help="generate a story and drama script from a premise")
    p_generate.add_argument("--premise", required=True, help="premise paragraph file")
    p_generate.add_argument("--seed", type=int, default=0)
    p_generate.add_argument("--out", help="write the drama script JSON here")
    p_generate.add_argument("--report", help="write the full run report JSON here")
    _add_provider_flags(p_generate)

    p_play = sub.add_parser("play", help="play a script in the terminal")
    p_play.add_argument("script", help="script JSON file")
    p_play.add_argument("--arch", default="hybrid",
                        choices=[a.value for a in Architecture])
    p_play.add_argument("--k", type=_parse_k, default=5,
                        help="reflection period (integer, or 'inf' to disable)")
    p_play.add_argument("--budget", type=int, default=1, help="reflection edit budget")
    p_play.add_argument("--session-log", help="append turn records to this JSONL file")
    _add_provider_flags(p_play)

    p_sim = sub.add_parser("simulate", help="run an automated persona playthrough")
    p_sim.add_argument("--script", required=True)
    p_sim.add_argument("--persona", required=True)
    p_sim.add_argument("--arch", default="hybrid", choices=[a.value for a in Architecture])
    p_sim.add_argument("--k", type=_parse_k, default=5)
    p_sim.add_argument("--max-turns", type=int, default=60)
    p_sim.add_argument("--report", help="write the sim report JSON here")
    p_sim.add_argument("--transcript", help="write the transcript JSONL here")
    _add_provider_flags(p_sim)

    p_cmp = sub.add_parser("compare", help="compare role-agent architectures")
    p_cmp.add_argument("--script", required=True)
    p_cmp.add_argument("--persona", action="append", default=[],
                       help="persona name (repeatable)")
    p_cmp.add_argument("--all-personas", action="store_true")
    p_cmp.add_argument("--k", type=_parse_k, default=5)
    p_cmp.add_argument("--max-turns", type=int, default=60)
    p_cmp.add_argument("--out", help="write the comparison table JSON here")

    p_val = sub.add_parser("validate", help="validate a script document")
    p_val.add_argument("script")

    p_pb = sub.add_parser("playbook", help="inspect the playwriting catalogs")
    p_pb.add_argument("action", choices=["list"])

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", help="key = value config file")
    p_serve.add_argument("--host", default=None)
    p_serve.add_argument("--port", type=int, default=None)

    return parser


def _load_script_file(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION) from exc
    return parse_script(text)


def cmd_generate(args: argparse.Namespace) -> int:
    try:
        premise_text = Path(args.premise).read_text(encoding="utf-8").strip()
    except OSError as exc:
        print(f"error: cannot read premise: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    provider = _build_cli_provider(args)
    premise = PremiseParagraph(premise_text)
    try:
        story, report = run_pipeline(premise, args.seed, provider)
        script = story_to_script(story, provider, report)
    except PipelineError as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        if args.report and exc.report is not None:
            Path(args.report).write_text(
                json.dumps(exc.report.to_json(), ensure_ascii=False, indent=2),
                encoding="utf-8",
            )
        return EXIT_PROVIDER if isinstance(exc.cause, GatewayError) else EXIT_VALIDATION
    except (SchemaError, ValueError) as exc:
        print(f"generation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GatewayError as exc:
        print(f"provider failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER

    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    document = serialize_script(script)
    if args.out:
        Path(args.out).write_text(document, encoding="utf-8")
        print(f"script written to {args.out} ({len(script.scenes)} scenes)")
    else:
        print(document, end="")
    if args.report:
        Path(args.report).write_text(
            json.dumps(report.to_json(), ensure_ascii=False, indent=2), encoding="utf-8"
        )
        print(f"report written to {args.report} ({report.call_count()} provider calls)")
    return EXIT_OK


def _print_turn(result) -> None:
    if result.reflection is not None and result.reflection.accepted:
        print("  (the story quietly adapts)")
    decision = result.decision
    action = f" [{decision.action}]" if decision.action else ""
    print(f"{decision.speaker}: {decision.utterance}{action}")
    if result.transition is not None:
        print(f"\n== Scene {result.transition.index}: {result.transition.location} ==")
        print(result.transition.background + "\n")
    if result.finished:
        print("\n== The drama has concluded. ==")


def cmd_play(args: argparse.Namespace) -> int:
    try:
        script = _load_script_file(args.script)
    except (SchemaError, ScriptSyntaxError) as exc:
        print(f"invalid script: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    provider = _build_cli_provider(args)
    session = Session(
        script=script,
        config=ArchitectureConfig(
            kind=Architecture(args.arch),
            reflection_period=args.k,
            reflection_budget=args.budget,
        ),
    )
    player = script.player().name
    scene = script.scenes[0]
    print(f"== {script.title} ==")
    print(script.background)
    print(f"\n== Scene {scene.index}: {scene.location} ==")
    print(scene.background)
    print(f"\nYou play {player}. Type your lines; 'quit' ends the session.\n")

    log_handle = open(args.session_log, "a", encoding="utf-8") if args.session_log else None
    try:
        while session.status is not SessionStatus.FINISHED:
            try:
                line = input(f"{player}> ")
            except EOFError:
                break
            if line.strip().lower() in ("quit", "exit"):
                break
            try:
                result = step(session, line, provider)
            except TurnFailedError as exc:
                print(f"(turn failed, try again: {exc})", file=sys.stderr)
                continue
            except GatewayError as exc:
                print(f"provider failure: {exc}", file=sys.stderr)
                return EXIT_PROVIDER
            _print_turn(result)
            if log_handle:
                log_handle.write(json.dumps(record_to_json(result.record), ensure_ascii=False) + "\n")
                log_handle.flush()
    finally:
        if log_handle:
            log_handle.close()
    print(f"\nplayed {session.turn} turns; provider calls {session.ledger_total()} "
          f"(predicted {predicted_session_calls(session)})")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    try:
        script = _load_script_file(args.script)
        persona = get_persona(args.persona)
    except (SchemaError, ScriptSyntaxError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    config = ArchitectureConfig(kind=Architecture(args.arch), reflection_period=args.k)
    drama = _build_cli_provider(args) if (args.mock or args.endpoint) else drama_stub()
    try:
        report, _records = run_playthrough(
            script, persona, config, args.max_turns,
            (drama, player_stub(persona)),
            transcript_path=Path(args.transcript) if args.transcript else None,
        )
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    payload = report.to_json()
    if args.report:
        Path(args.report).write_text(
            json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8"
        )
        print(f"report written to {args.report}")
    else:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    if report.aborted:
        print(f"playthrough aborted: {report.aborted}", file=sys.stderr)
        return EXIT_PROVIDER
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    try:
        script = _load_script_file(args.script)
    except (SchemaError, ScriptSyntaxError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if args.all_personas:
        personas = list(load_personas())
    elif args.persona:
        try:
            personas = [get_persona(name) for name in args.persona]
        except KeyError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
    else:
        print("error: pass --all-personas or at least one --persona", file=sys.stderr)
        return EXIT_USAGE
    table = compare_architectures(
        script, personas, max_turns=args.max_turns, reflection_period=args.k
    )
    payload = table.to_json()
    if args.out:
        Path(args.out).write_text(json.dumps(payload, ensure_ascii=False, indent=2),
                                  encoding="utf-8")
        print(f"comparison written to {args.out}")
    else:
        print(f"{'architecture':<24}{'calls':>8}{'speedup':>10}{'turns':>8}{'completion':>12}")
        for row in payload["rows"]:
            print(
                f"{row['architecture']:<24}{row['total_calls']:>8}"
                f"{row['count_speedup_vs_director_actor']:>10.3f}"
                f"{row['mean_turns']:>8.1f}{row['mean_completion']:>11.0%}"
            )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    try:
        script = _load_script_file(args.script)
    except ScriptSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    plots = sum(len(s.plot_chain) for s in script.scenes)
    print(f"valid: {script.title!r}, {len(script.roster)} characters, "
          f"{len(script.scenes)} scenes, {plots} plots")
    return EXIT_OK


def cmd_playbook(args: argparse.Namespace) -> int:
    catalog = load_catalog()
    print("Dramatic situations:")
    for situation in catalog.situations:
        print(f"\n  {situation.name}  ({situation.exemplar})")
        for act in situation.acts:
            print(f"    - {act}")
    print("\nNarrative techniques:")
    for technique in catalog.techniques:
        print(f"\n  {technique.name}: {technique.description}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    config = load_config(args.config) if args.config else ServiceConfig()
    if args.host:
        config.host = args.host
    if args.port:
        config.port = args.port
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


_COMMANDS = {
    "generate": cmd_generate,
    "play": cmd_play,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "validate": cmd_validate,
    "playbook": cmd_playbook,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except ScriptSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except GatewayError as exc:
        print(f"provider failure: {exc}", file=sys.stderr)
        return EXIT_PROVIDER


if __name__ == "__main__":
    sys.exit(main())
