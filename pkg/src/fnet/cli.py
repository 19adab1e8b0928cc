"""``fnet`` command line: check, lint, query, export and fmt.

Exit codes: 0 no error-severity findings, 1 findings, 2 usage or I/O
problems and internal faults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, TextIO

from . import __version__
from .analysis import UnknownElement, impact, matrix
from .checker import check_view, lint_net
from .diagnostics import Diagnostic, has_errors, sort_diagnostics
from .export import SCHEMA_VERSION, ExportOptions, to_dot, to_json
from .formatter import serialize_net, serialize_view
from .model import FeatureView, ResolvedNet
from .parser import parse_net_source, parse_view_source
from .resolver import resolve

EXIT_OK, EXIT_FINDINGS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_bytes().decode("utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror or exc}") from exc
    except UnicodeDecodeError as exc:
        raise UsageError(f"cannot read {path}: not valid UTF-8 ({exc.reason} at byte {exc.start})") from exc


@dataclass
class Workspace:
    net: ResolvedNet | None = None
    views: list[FeatureView] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)


def load(net_files: Sequence[str], view_files: Sequence[str] = ()) -> Workspace:
    ws = Workspace()
    fragments = []
    for path in net_files:
        parsed = parse_net_source(_read(path), path)
        ws.diagnostics += parsed.diagnostics
        if parsed.fragment is not None:
            fragments.append(parsed.fragment)
    if len(fragments) == len(net_files):
        result = resolve(fragments)
        ws.net = result.net
        ws.diagnostics += result.diagnostics
    for path in view_files:
        parsed = parse_view_source(_read(path), path)
        ws.diagnostics += parsed.diagnostics
        if parsed.fragment is not None:
            ws.views.append(FeatureView.from_fragment(parsed.fragment))
    return ws


def _view_files(args: argparse.Namespace) -> list[str]:
    files = list(args.view or [])
    if getattr(args, "views", None):
        directory = Path(args.views)
        if not directory.is_dir():
            raise UsageError(f"cannot read {args.views}: not a directory")
        files += [str(p) for p in sorted(directory.glob("*.fview"))]
    return files


def _use_color(stream: TextIO) -> bool:
    return "FNET_NO_COLOR" not in os.environ and hasattr(stream, "isatty") and stream.isatty()


def _render_diagnostics(diagnostics: Sequence[Diagnostic], fmt: str, color: bool) -> str:
    diagnostics = sort_diagnostics(diagnostics)
    if fmt == "json":
        doc = {"schema_version": SCHEMA_VERSION, "diagnostics": [d.to_dict() for d in diagnostics]}
        return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
    lines = []
    for d in diagnostics:
        text = d.format()
        if color:
            code = "31" if d.is_error else "33"
            sev = f"{d.severity.value}[{d.code}]"
            text = text.replace(sev, f"\x1b[{code}m{sev}\x1b[0m", 1)
        lines.append(text)
    return "".join(line + "\n" for line in lines)


def _emit(text: str, out: str | None, stdout: TextIO) -> None:
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8", newline="\n")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc.strerror or exc}") from exc
    else:
        stdout.write(text)


# -- subcommands ---------------------------------------------------------------------

def cmd_check(args: argparse.Namespace, stdout: TextIO) -> int:
    ws = load(args.nets, _view_files(args))
    found = list(ws.diagnostics)
    if ws.net is not None:
        found += lint_net(ws.net, strict=args.strict)
        for view in sorted(ws.views, key=lambda v: (v.file, v.name)):
            found += check_view(ws.net, view, single_connector=args.cc3_single_connector)
    color = not args.output and _use_color(stdout)
    _emit(_render_diagnostics(found, args.format, color), args.output, stdout)
    return EXIT_FINDINGS if has_errors(found) else EXIT_OK


def cmd_lint(args: argparse.Namespace, stdout: TextIO) -> int:
    ws = load(args.nets)
    found = list(ws.diagnostics)
    if ws.net is not None:
        found += lint_net(ws.net, strict=args.strict)
    color = not args.output and _use_color(stdout)
    _emit(_render_diagnostics(found, args.format, color), args.output, stdout)
    return EXIT_FINDINGS if has_errors(found) else EXIT_OK


def _require_model(ws: Workspace, stdout: TextIO) -> bool:
    """Print blocking findings and return False when the inputs do not form a model."""
    if ws.net is None or has_errors(d for d in ws.diagnostics if d.code == "P001"):
        stdout.write(_render_diagnostics(ws.diagnostics, "text", False))
        return False
    return True


def cmd_query(args: argparse.Namespace, stdout: TextIO) -> int:
    ws = load(args.nets, _view_files(args))
    if not _require_model(ws, stdout):
        return EXIT_FINDINGS
    if args.query == "impact":
        try:
            report = impact(ws.net, ws.views, args.element)
        except UnknownElement as exc:
            raise UsageError(str(exc)) from exc
        text = (json.dumps(report.to_dict(), indent=2) + "\n") if args.format == "json" else report.format()
    else:
        m = matrix(ws.net, ws.views)
        if args.format == "json":
            text = json.dumps(m.to_dict(), indent=2) + "\n"
        elif args.format == "csv":
            text = m.to_csv()
        else:
            text = m.to_text()
    _emit(text, args.output, stdout)
    return EXIT_OK


def cmd_export(args: argparse.Namespace, stdout: TextIO) -> int:
    ws = load(args.nets, _view_files(args))
    if not _require_model(ws, stdout):
        return EXIT_FINDINGS
    if args.target == "dot":
        options = ExportOptions(
            include_signals=not args.no_signals,
            cluster_hierarchy=not args.flat,
            highlight_view=args.highlight,
        )
        try:
            text = to_dot(ws.net, ws.views, options)
        except KeyError as exc:
            raise UsageError(exc.args[0]) from exc
    else:
        text = to_json(ws.net, ws.views, ws.diagnostics)
    _emit(text, args.output, stdout)
    return EXIT_OK


def cmd_fmt(args: argparse.Namespace, stdout: TextIO) -> int:
    status = EXIT_OK
    for path in args.files:
        text = _read(path)
        if path.endswith(".fview"):
            parsed = parse_view_source(text, path)
            render = serialize_view
        elif path.endswith(".fnet"):
            parsed = parse_net_source(text, path)
            render = serialize_net
        else:
            raise UsageError(f"{path}: expected a .fnet or .fview file")
        if parsed.fragment is None:
            stdout.write(_render_diagnostics(parsed.diagnostics, "text", False))
            status = EXIT_FINDINGS
            continue
        canonical = render(parsed.fragment)
        if canonical != text:
            try:
                Path(path).write_text(canonical, encoding="utf-8", newline="\n")
            except OSError as exc:
                raise UsageError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return status


# -- argument parsing ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fnet",
        description="Check feature views against a hierarchical function net.",
    )
    parser.add_argument("--version", action="version", version=f"fnet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def nets(p: argparse.ArgumentParser) -> None:
        p.add_argument("nets", nargs="+", metavar="NET", help="architecture files (.fnet)")

    def views(p: argparse.ArgumentParser) -> None:
        p.add_argument("--view", action="append", metavar="FILE", help="feature view file (repeatable)")
        p.add_argument("--views", metavar="DIR", help="check every *.fview file in DIR")

    def output(p: argparse.ArgumentParser) -> None:
        p.add_argument("-o", "--output", metavar="FILE", help="write to FILE instead of standard output")

    p = sub.add_parser("check", help="lint the nets and check views against them")
    nets(p)
    views(p)
    p.add_argument("--strict", action="store_true", help="treat W001/W002 as errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--cc3-single-connector", action="store_true",
                   help="require one connector to carry all signals of a view link")
    output(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("lint", help="lint the nets only")
    nets(p)
    p.add_argument("--strict", action="store_true", help="treat W001/W002 as errors")
    p.add_argument("--format", choices=("text", "json"), default="text")
    output(p)
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser("query", help="traceability queries")
    qsub = p.add_subparsers(dest="query", required=True)
    q = qsub.add_parser("impact", help="views affected by changing a block or connector")
    q.add_argument("element", help="block path, or connector as 'SRC -> DST'")
    nets(q)
    views(q)
    q.add_argument("--format", choices=("text", "json"), default="text")
    output(q)
    q = qsub.add_parser("matrix", help="feature x function matrix")
    nets(q)
    views(q)
    q.add_argument("--format", choices=("text", "csv", "json"), default="text")
    output(q)
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("export", help="write DOT or JSON")
    p.add_argument("target", choices=("dot", "json"))
    nets(p)
    views(p)
    p.add_argument("--no-signals", action="store_true", help="omit signal labels on edges")
    p.add_argument("--flat", action="store_true", help="do not draw containment as clusters")
    p.add_argument("--highlight", metavar="VIEW", help="highlight the blocks and environment of VIEW")
    output(p)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("fmt", help="rewrite files in canonical form")
    p.add_argument("files", nargs="+", metavar="FILE")
    p.set_defaults(func=cmd_fmt)
    return parser


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None,
        stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, stdout)
    except UsageError as exc:
        stderr.write(f"fnet: {exc}\n")
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - the exit-code contract covers internal faults
        stderr.write(f"fnet: internal error: {exc.__class__.__name__}: {exc}\n")
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
