"""``normforge`` command line: transform, reason, bench.

Exit codes: 0 success, 1 parse/transform failure, 2 I/O failure, 64 usage error.
"""

from __future__ import annotations

import argparse
import re
import sys
import warnings
from pathlib import Path
from typing import Sequence

from .bench import CSV_HEADER, run_bench, synthetic_base
from .core import ConclusionTag, Theory, parse_literal
from .errors import LiteralSyntaxError, NormforgeError, NormforgeWarning
from .lrml import parse_document
from .reasoner import compute_extension, ground
from .render import parse_dfl, render_dfl, render_lrml
from .transform import TransformOptions, reduct, transform

EXIT_OK, EXIT_TRANSFORM, EXIT_IO, EXIT_USAGE = 0, 1, 2, 64

_QUERY = re.compile(r"^\s*(?P<sign>[+-])(?P<level>[dD])\s+(?P<lit>\S.*?)\s*$")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_query(text: str) -> ConclusionTag:
    """``"+d -Discount(g1)"`` -> ConclusionTag; ``d`` is ∂ and ``D`` is Δ."""
    m = _QUERY.match(text)
    if not m:
        raise UsageError(f"malformed query {text!r}; expected e.g. '+d p(a)'")
    try:
        lit = parse_literal(m["lit"], fact=True)
    except LiteralSyntaxError as exc:
        raise UsageError(f"malformed query {text!r}: {exc}") from None
    return ConclusionTag(m["sign"], "delta" if m["level"] == "D" else "partial", lit)


def _input_format(path: Path, override: str | None) -> str:
    if override:
        return override
    return "dfl" if path.suffix.lower() == ".dfl" else "lrml"


def load_theory(path: Path, fmt: str | None = None, options: TransformOptions | None = None) -> Theory:
    text = path.read_text(encoding="utf-8")
    if _input_format(path, fmt) == "dfl":
        return parse_dfl(text)
    return transform(parse_document(text), options)


def _cmd_transform(args) -> int:
    options = TransformOptions(jurisdiction=args.jurisdiction, apply_reduct=not args.no_reduct)
    theory = load_theory(Path(args.input), args.input_format, options)
    out = render_dfl(theory) if args.format == "dfl" else render_lrml(theory)
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def _cmd_reason(args) -> int:
    queries = [parse_query(q) for q in args.query]
    theory = load_theory(Path(args.input), args.input_format)
    if args.facts:
        extra = load_theory(Path(args.facts), args.input_format)
        theory = theory.merged(extra)
    if theory.has_chains():
        theory = reduct(theory)
    ext = compute_extension(ground(theory))
    if queries:
        for q in queries:
            print(f"{q}: {str(ext.holds(q)).lower()}")
    else:
        for c in ext.conclusions():
            print(c)
    return EXIT_OK


def _cmd_bench(args) -> int:
    base = Path(args.base).read_text(encoding="utf-8") if args.base else synthetic_base()
    rows = run_bench(base, args.duplications, args.runs)
    out = "".join(line + "\n" for line in [CSV_HEADER, *(r.csv() for r in rows)])
    if args.csv:
        Path(args.csv).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="normforge", description="LegalRuleML to defeasible logic compiler and reasoner.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    t = sub.add_parser("transform", help="compile a document into a theory")
    t.add_argument("input")
    t.add_argument("--jurisdiction")
    t.add_argument("--no-reduct", action="store_true", help="keep reparation chains unexpanded")
    t.add_argument("--format", choices=("dfl", "lrml"), default="dfl")
    t.add_argument("--input-format", choices=("dfl", "lrml"))
    t.add_argument("-o", "--output")
    t.set_defaults(run=_cmd_transform)

    r = sub.add_parser("reason", help="compute conclusions of a theory")
    r.add_argument("input")
    r.add_argument("--query", action="append", default=[], metavar="TAG LITERAL")
    r.add_argument("--facts", help="extra facts (DFL or LegalRuleML) merged before grounding")
    r.add_argument("--input-format", choices=("dfl", "lrml"))
    r.set_defaults(run=_cmd_reason)

    b = sub.add_parser("bench", help="time parse/transform/render over duplicated documents")
    b.add_argument("--base", help="base LegalRuleML document (default: built-in synthetic contract)")
    b.add_argument("--duplications", type=int, default=20)
    b.add_argument("--runs", type=int, default=5)
    b.add_argument("--csv", help="write CSV here instead of stdout")
    b.set_defaults(run=_cmd_bench)
    return p


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "bench":
        if args.runs < 5:
            parser.error("--runs must be at least 5")
        if args.duplications < 1:
            parser.error("--duplications must be positive")
    with warnings.catch_warnings():
        warnings.simplefilter("always", NormforgeWarning)
        warnings.showwarning = _show_warning
        try:
            return args.run(args)
        except UsageError as exc:
            print(f"normforge: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        except OSError as exc:
            print(f"normforge: {exc}", file=sys.stderr)
            return EXIT_IO
        except (NormforgeError, ValueError) as exc:
            print(f"normforge: {exc}", file=sys.stderr)
            return EXIT_TRANSFORM


if __name__ == "__main__":
    sys.exit(main())
