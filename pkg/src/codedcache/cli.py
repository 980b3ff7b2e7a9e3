"""Command-line entry point: build, verify, simulate, table.

Exit status is 0 on success, 1 when a verification or decode check fails,
and 2 for parse and usage errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .core import RadixSpec
from .digraphs import GuardrailError
from .families import FAMILIES, FamilyError, build_family_pda, family_params
from .pda import PdaError, PdaParseError, format_pda, parse_pda, useless_stars, verify_pda
from .simulator import DEFAULT_B, DEFAULT_SEED, run_coded_placement, run_uncoded
from .tables import TABLES, format_table

ALLOW_LARGE_ENV = "CODEDCACHE_ALLOW_LARGE"

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _allow_large(args) -> bool:
    env = os.environ.get(ALLOW_LARGE_ENV, "").strip().lower()
    return args.allow_large or env in ("1", "true", "yes", "on")


def _family_inputs(args) -> dict:
    fam = args.family
    need = {
        "theorem4": ("n",),
        "mn": ("k", "t"),
        "corollary2": ("n0", "w", "p0"),
        "corollary4": ("n0", "w", "p0"),
        "corollary3": ("n0", "w"),
        "theorem5": ("radices", "w"),
        "theorem6": ("radices", "w"),
    }[fam]
    missing = [f"--{name}" for name in need if getattr(args, name) is None]
    if missing:
        raise UsageError(f"{fam} needs {' '.join(missing)}")
    inputs = {name: getattr(args, name) for name in need}
    if "radices" in inputs:
        try:
            inputs["spec"] = RadixSpec.parse(inputs.pop("radices"))
        except ValueError as exc:
            raise UsageError(f"bad --radices: {exc}") from None
    return inputs


def _read_pda(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_pda(text)


def cmd_build(args) -> int:
    inputs = _family_inputs(args)
    allow = _allow_large(args)
    report = family_params(args.family, construct=False, **inputs)
    pda = build_family_pda(args.family, allow_large=allow, **inputs)
    check = verify_pda(pda)
    if not check.passed:
        print(check.summary(), file=sys.stderr)
        return EXIT_FAIL
    shown = dict(inputs)
    if "spec" in shown:
        shown["radices"] = str(shown.pop("spec"))
    report.inputs = shown
    report.notes = [n for n in report.notes if "skipped" not in n]
    if report.z_prime is not None:
        report.notes.append(f"array written is the uncoded ({pda.K},{pda.F},{pda.Z},{pda.S}) PDA")
    elif pda.S != report.params.S:
        report.notes.append(f"constructed S={pda.S} (bound {report.params.S})")
    for line in report.lines():
        print(line)
    text = format_pda(pda)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args) -> int:
    pda = _read_pda(args.path)
    report = verify_pda(pda)
    print(report.summary())
    for f in report.failures[1:]:
        print(f"FAIL {f.condition}: {f.detail}")
    if not report.passed:
        return EXIT_FAIL
    stars = useless_stars(pda)
    print("useless_stars=" + ",".join(str(x) for x in stars.per_column))
    if stars.uniform:
        print(f"Zprime={stars.z_prime}")
    else:
        print("Zprime=non-uniform")
    return EXIT_OK


def _parse_demands(text: str | None) -> list[int] | None:
    if text is None:
        return None
    try:
        return [int(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"--demands must be comma-separated integers, got {text!r}") from None


def cmd_simulate(args) -> int:
    pda = _read_pda(args.path)
    check = verify_pda(pda)
    if not check.passed:
        print(check.summary(), file=sys.stderr)
        return EXIT_FAIL
    demands = _parse_demands(args.demands)
    if demands is not None:
        if len(demands) != pda.K:
            raise UsageError(f"--demands needs {pda.K} entries, got {len(demands)}")
        if max(demands) >= args.files or min(demands) < 0:
            raise UsageError(f"demands must lie in [0, {args.files - 1}] for --files {args.files}")
    run = run_coded_placement if args.coded else run_uncoded
    extra = (None,) if args.coded else ()
    report = run(pda, *extra, args.files, args.B, demands=demands, seed=args.seed, trials=args.trials)
    sys.stdout.write(report.format())
    for f in report.failures[:10]:
        print(f"failure: user={f.user} slot={f.slot} packet={f.packet} trial={f.trial} reason={f.reason}")
    return EXIT_OK if report.all_decoded else EXIT_FAIL


def cmd_table(args) -> int:
    sys.stdout.write(format_table(args.name))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codedcache", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="construct a family's PDA and write it")
    b.add_argument("--family", required=True, choices=FAMILIES)
    b.add_argument("--radices", help="mixed-radix blocks as p:n pairs, e.g. 2:2,3:1")
    for name in ("w", "n0", "p0", "k", "t", "n"):
        b.add_argument(f"--{name}", type=int)
    b.add_argument("--out", help="output path (default: stdout)")
    b.add_argument("--allow-large", action="store_true", help=f"lift the size guardrail (also ${ALLOW_LARGE_ENV}=1)")
    b.set_defaults(func=cmd_build)

    v = sub.add_parser("verify", help="check a PDA file and count useless stars")
    v.add_argument("path")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("simulate", help="run placement, delivery and decoding on a PDA file")
    s.add_argument("path")
    s.add_argument("--files", type=int, default=None, help="number of files N (default: K)")
    s.add_argument("--B", type=int, default=DEFAULT_B, help="symbols per packet")
    s.add_argument("--demands", help="comma-separated file index per user")
    s.add_argument("--seed", type=int, default=DEFAULT_SEED)
    s.add_argument("--trials", type=int, default=1, help="random demand vectors when --demands is absent")
    s.add_argument("--coded", action="store_true", help="drop useless stars and use MDS-coded placement")
    s.set_defaults(func=cmd_simulate)

    t = sub.add_parser("table", help="reproduce a comparison table")
    t.add_argument("name", choices=TABLES)
    t.set_defaults(func=cmd_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "files", 0) is None:
        try:
            args.files = _read_pda(args.path).K
        except (UsageError, PdaParseError):
            pass  # reported below by the command itself
    try:
        return args.func(args)
    except PdaParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, FamilyError, GuardrailError, PdaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
