"""Command-line front end: ``ucondlab run | verify | list-fixtures | demo``.

Exit status is 0 when every check passes, 1 when some check fails and 2
when the scenario or its parameters do not validate.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .bundles import BUILTIN_BUNDLES, load_bundle_file
from .errors import ValidationError
from .instances import INSTANCES
from .scenarios import KINDS, PARAM_SCHEMAS, run

FIXTURE_ENV = "UCONDLAB_FIXTURES"


def _fixture_dir(args) -> str | None:
    return getattr(args, "fixtures", None) or os.environ.get(FIXTURE_ENV)


def _emit(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _execute(scenario: dict, args) -> int:
    try:
        report = run(scenario, fixture_dir=_fixture_dir(args))
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    _emit(report, getattr(args, "out", None))
    return 0 if report["pass"] else 1


def cmd_run(args) -> int:
    try:
        data = json.loads(Path(args.scenario).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        print(f"validation error: cannot read scenario: {exc}", file=sys.stderr)
        return 2
    if not isinstance(data, dict):
        print("validation error: scenario must be a JSON object", file=sys.stderr)
        return 2
    return _execute(data, args)


_VERIFY_FLAGS = ("group", "dim", "bundle", "trials", "seed", "tol", "eps", "window", "world", "example")


def cmd_verify(args) -> int:
    params = {k: getattr(args, k) for k in _VERIFY_FLAGS if getattr(args, k, None) is not None}
    return _execute({"id": f"verify-{args.kind}", "kind": args.kind, "params": params}, args)


def cmd_demo(args) -> int:
    params = {"example": args.example, "eps": args.eps}
    if args.seed is not None:
        params["seed"] = args.seed
    return _execute({"id": f"demo-{args.example}", "kind": "unconditional", "params": params}, args)


def list_fixtures(fixture_dir: str | None = None) -> list[str]:
    lines = ["bundles:"]
    for name, make in BUILTIN_BUNDLES.items():
        b = make()
        lines.append(f"  {name}  (group {b.group}, ambient {b.ambient_dim}, total fiber dim {b.total_dim})")
    if fixture_dir and Path(fixture_dir).is_dir():
        for path in sorted(Path(fixture_dir).glob("*.json")):
            try:
                b = load_bundle_file(path)
                lines.append(f"  {path.stem}  (user fixture, group {b.group}, ambient {b.ambient_dim})")
            except Exception as exc:  # report any malformed file and keep listing
                msg = str(exc).splitlines()[0] if str(exc) else type(exc).__name__
                lines.append(f"  {path.stem}  WARNING: invalid fixture ({type(exc).__name__}: {msg})")
    lines.append("instances:")
    for name in INSTANCES:
        lines.append(f"  {name}")
    lines.append("scenario kinds:")
    for kind in KINDS:
        params = PARAM_SCHEMAS[kind]
        lines.append(f"  {kind}: {', '.join(f'{k} ({_describe(params[k])})' for k in sorted(params))}")
    return lines


def _describe(schema: dict) -> str:
    if "enum" in schema:
        return "|".join(map(str, schema["enum"]))
    kind = schema.get("type", "any")
    if kind == "array":
        return f"array of {schema.get('items', {}).get('type', 'any')}"
    return kind


def cmd_list(args) -> int:
    print("\n".join(list_fixtures(_fixture_dir(args))))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ucondlab", description=__doc__.splitlines()[0])
    parser.add_argument("--fixtures", help=f"directory of user bundle fixtures (default: ${FIXTURE_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario")
    p.add_argument("--out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", help="run one scenario kind from flags")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("--group")
    p.add_argument("--dim", type=int)
    p.add_argument("--bundle")
    p.add_argument("--world", choices=["finite", "zshift"])
    p.add_argument("--example")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--window", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("list-fixtures", help="list bundles, instances and scenario kinds")
    p.set_defaults(func=cmd_list)

    p = sub.add_parser("demo", help="demonstrations")
    p.add_argument("topic", choices=["unconditional"])
    p.add_argument("--example", required=True, choices=sorted(INSTANCES))
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
