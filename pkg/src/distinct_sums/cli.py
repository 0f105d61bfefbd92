"""Command-line entry point: construct, verify, bounds, search, repro."""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import tempfile
import time
import warnings
from fractions import Fraction
from pathlib import Path

from . import __version__
from .bounds import bound_table, table_to_csv, table_to_json
from .constructions import (augment_base, conway_guy_base, lift_to_k, load_base, powers_of_two,
                            tilde_sigma)
from .errors import CapacityError, DistinctSumsError, DomainWarning, InputError
from .model import Sequence, as_fraction
from .search import exact_min_M, random_construct
from .verifier import PairConstraint, verify

EXIT_OK, EXIT_INPUT, EXIT_CAPACITY = 0, 1, 2
MANIFEST_SUFFIX = ".manifest.json"


class MismatchError(DistinctSumsError):
    tag = "E-MISMATCH"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _rational(text: str) -> Fraction:
    return as_fraction(text)


def _grid(text: str) -> list[Fraction]:
    try:
        start, stop, step = (as_fraction(p) for p in text.split(":"))
    except ValueError:
        raise InputError(f"grid must look like START:STOP:STEP, got {text!r}") from None
    if step <= 0:
        raise InputError("grid step must be positive")
    out = []
    x = start
    while x <= stop:
        out.append(x)
        x += step
    return out


def _read_sequence(path) -> Sequence:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    return Sequence.loads(text)


class Run:
    """Collects what a command read and wrote, then emits the manifest."""

    def __init__(self, argv, params, seed=None):
        self.argv = list(argv)
        self.params = params
        self.seed = seed
        self.inputs: dict[str, str] = {}
        self.outputs: dict[str, str] = {}
        self.start = time.perf_counter()

    def read(self, path):
        self.inputs[str(path)] = sha256_file(path)

    def emit(self, text: str, out):
        """Write ``text`` to ``out`` (plus a manifest) or to stdout."""
        if out is None:
            sys.stdout.write(text)
            return
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        self.outputs[str(out)] = sha256_file(path)
        manifest = {
            "argv": self.argv,
            "cwd": os.getcwd(),
            "params": self.params,
            "version": __version__,
            "rng_seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "hash": "sha256",
            "wall_time": round(time.perf_counter() - self.start, 6),
        }
        Path(str(out) + MANIFEST_SUFFIX).write_text(json.dumps(manifest, indent=2) + "\n")


# --- subcommands -----------------------------------------------------------

def _base(args, run):
    if args.base is not None:
        run.read(args.base)
        return load_base(args.base)
    return conway_guy_base(_need(args.base_length, "--base-length or --base"))


def cmd_construct(args, argv) -> int:
    run = Run(argv, {"family": args.family, "n": args.n, "k": args.k,
                     "base_length": args.base_length})
    family = args.family
    if family == "powers2":
        seq = powers_of_two(_need(args.n, "--n"))
    elif family == "tilde":
        seq = tilde_sigma(_need(args.n, "--n"))
    elif family == "conway-guy":
        seq = conway_guy_base(_need(args.base_length, "--base-length"))
    elif family in ("direct1", "direct2"):
        mode = "single" if family == "direct1" else "double"
        seq = augment_base(_base(args, run), _need(args.n, "--n"), mode)
    elif family == "lift":
        path = _need(args.base, "--base")
        run.read(path)
        seq = lift_to_k(_read_sequence(path), args.k)
    else:
        raise InputError(f"unknown family {family!r}")
    run.emit(seq.dumps(), args.out)
    return EXIT_OK


def _need(value, flag):
    if value is None:
        raise InputError(f"missing required option {flag}")
    return value


def _constraint(args) -> PairConstraint:
    chosen = [x is not None for x in (args.lam, args.cap)]
    if args.shifted is not None:
        if args.cap is None or args.lam is not None:
            raise InputError("--shifted needs --pair-cap and no --lambda")
        try:
            offset = tuple(int(c) for c in args.shifted.split(","))
        except ValueError:
            raise InputError(f"offset must be comma-separated integers, got {args.shifted!r}") from None
        return PairConstraint.shifted(offset, args.cap)
    if sum(chosen) != 1:
        raise InputError("give exactly one of --lambda or --pair-cap")
    if args.lam is not None:
        return PairConstraint.family(args.lam)
    return PairConstraint.pair_sum_cap(args.cap)


def cmd_verify(args, argv) -> int:
    seq = _read_sequence(args.input)
    constraint = _constraint(args)
    run = Run(argv, {"constraint": constraint.to_dict(), "engine": args.engine})
    run.read(args.input)
    report = verify(seq, constraint, engine=args.engine, memory_budget_bytes=args.memory_budget)
    data = report.to_dict()
    run.emit(json.dumps(data, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_bounds(args, argv) -> int:
    if (args.lam is None) == (args.grid is None):
        raise InputError("give exactly one of --lambda or --grid")
    grid = [args.lam] if args.lam is not None else _grid(args.grid)
    run = Run(argv, {"n": args.n, "k": args.k, "grid": [str(g) for g in grid],
                     "format": args.format})
    rows = bound_table(args.n, args.k, grid)
    text = table_to_csv(rows) if args.format == "csv" else table_to_json(rows)
    run.emit(text, args.out)
    return EXIT_OK


def _golden(path, text: str):
    p = Path(path)
    if p.exists():
        if p.read_text() != text:
            raise MismatchError(f"outcome differs from golden file {path}")
    else:
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)


def cmd_search(args, argv) -> int:
    if args.mode == "exact":
        run = Run(argv, {"mode": "exact", "n": args.n, "k": args.k, "lambda": str(args.lam),
                         "max_m": args.max_m})
        outcome = exact_min_M(args.n, args.k, args.lam, args.max_m)
    else:
        if args.seed is None:
            raise InputError("random search needs an explicit --seed")
        run = Run(argv, {"mode": "random", "n": args.n, "k": args.k, "lambda": str(args.lam),
                         "m": args.m, "retries": args.retries}, seed=args.seed)
        outcome = random_construct(args.n, args.k, args.lam, _need(args.m, "--m"), args.seed,
                                   args.retries)
    text = outcome.dumps()
    if args.golden:
        _golden(args.golden, text)
    run.emit(text, args.out)
    return EXIT_OK


def _redirect(argv, tmp: Path) -> tuple[list[str], str | None, str | None]:
    """Copy of argv with --out and --golden pointed into ``tmp``."""
    out = list(argv)
    new_out = old_out = None
    for flag in ("--out", "--golden"):
        for i, tok in enumerate(out):
            if tok == flag and i + 1 < len(out):
                target = str(tmp / (flag.strip("-") + "-" + Path(out[i + 1]).name))
                if flag == "--golden":
                    src = Path(out[i + 1])
                    if src.exists():
                        Path(target).write_bytes(src.read_bytes())
                else:
                    old_out, new_out = out[i + 1], target
                out[i + 1] = target
            elif tok.startswith(flag + "="):
                raise InputError(f"manifest argv uses {flag}=...; pass it as a separate word")
    return out, old_out, new_out


def cmd_repro(args, argv) -> int:
    try:
        manifest = json.loads(Path(args.manifest).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from None
    old_cwd = os.getcwd()
    os.chdir(manifest.get("cwd", old_cwd))
    try:
        for path, digest in manifest.get("inputs", {}).items():
            if not Path(path).exists() or sha256_file(path) != digest:
                raise MismatchError(f"input {path} changed since the recorded run")
        with tempfile.TemporaryDirectory() as tmp:
            new_argv, old_out, new_out = _redirect(manifest["argv"], Path(tmp))
            if new_out is None:
                raise InputError("manifest records no --out artifact")
            code = dispatch(new_argv)
            if code != EXIT_OK:
                raise MismatchError(f"re-run exited with status {code}")
            got = sha256_file(new_out)
    finally:
        os.chdir(old_cwd)
    want = manifest["outputs"].get(old_out)
    if got != want:
        raise MismatchError(f"digest of {old_out} differs: {got} != {want}")
    sys.stdout.write(f"repro ok {old_out} sha256={got}\n")
    return EXIT_OK


# --- wiring ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="distinct-sums", description="Sum-distinct sequences over size-capped families.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    c = sub.add_parser("construct", help="build an explicit sequence")
    c.add_argument("--family", required=True,
                   choices=["powers2", "tilde", "direct1", "direct2", "lift", "conway-guy"])
    c.add_argument("--n", type=int)
    c.add_argument("--k", type=int, default=1)
    c.add_argument("--base", help="base JSON: certified base for direct1/2, scalar sequence for lift")
    c.add_argument("--base-length", type=int, help="use a Conway-Guy base of this length")
    c.add_argument("--out")
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", help="check sum-distinctness")
    v.add_argument("--input", required=True)
    v.add_argument("--lambda", dest="lam", type=_rational)
    v.add_argument("--pair-cap", dest="cap", type=_rational, help="strict bound on |A1|+|A2|")
    v.add_argument("--shifted", help="comma-separated offset vector (with --pair-cap)")
    v.add_argument("--engine", choices=["auto", "exhaustive", "mitm"], default="auto")
    v.add_argument("--memory-budget", type=int, help="bytes allowed for the mitm tables")
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", help="tabulate lower and upper bounds")
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--k", type=int, default=1)
    b.add_argument("--lambda", dest="lam", type=_rational)
    b.add_argument("--grid", help="START:STOP:STEP, inclusive")
    b.add_argument("--format", choices=["csv", "json"], default="csv")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bounds)

    s = sub.add_parser("search", help="exact or randomized search")
    s.add_argument("mode", choices=["exact", "random"])
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k", type=int, default=1)
    s.add_argument("--lambda", dest="lam", type=_rational, required=True)
    s.add_argument("--max-m", type=int, default=64)
    s.add_argument("--m", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--retries", type=int, default=10)
    s.add_argument("--golden", help="write the outcome here, or compare against it")
    s.add_argument("--out")
    s.set_defaults(func=cmd_search)

    r = sub.add_parser("repro", help="re-run a manifest and compare digests")
    r.add_argument("manifest")
    r.set_defaults(func=cmd_repro)
    return p


def dispatch(argv) -> int:
    argv = list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            raise InputError("a subcommand is required")
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", DomainWarning)
            code = args.func(args, argv)
        for w in caught:
            if issubclass(w.category, DomainWarning):
                sys.stderr.write(f"W-DOMAIN: {w.message}\n")
        return code
    except CapacityError as exc:
        sys.stderr.write(f"{exc.tag}: {_one_line(exc)}\n")
        return EXIT_CAPACITY
    except DistinctSumsError as exc:
        sys.stderr.write(f"{exc.tag}: {_one_line(exc)}\n")
        return EXIT_INPUT


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
