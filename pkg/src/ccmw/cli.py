"""Command-line front end: ``ccmw sweep | verify | ellipse | passive``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .analytic import NoClosedForm, analytic_ccmw, isocoherent_ellipse_residual, qutrit_ellipse
from .hamiltonians import parse_hamiltonian
from .optimizer import default_config, verify_against_analytic
from .passivity import MAX_BRUTEFORCE_DIM, is_isocoherent_passive, passivity_bruteforce
from .states import check_coherence, max_coherence
from .sweep import ConfigError, SweepConfig, run_sweep, write_records

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _common(p: argparse.ArgumentParser, defaults: bool) -> None:
    kw = {} if defaults else {"default": argparse.SUPPRESS}
    p.add_argument("--seed", type=int, help="base seed (default: config seed or 0)",
                   **({"default": None} if defaults else kw))
    p.add_argument("--threads", type=int, help="worker processes (default 1)",
                   **({"default": 1} if defaults else kw))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ccmw", description="Coherence-constrained maximal work for d-level batteries.")
    _common(parser, True)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("sweep", help="run a configured sweep and write CSV records")
    p.add_argument("--config", required=True, help="JSON sweep configuration")
    _common(p, False)

    p = sub.add_parser("verify", help="compare numeric CCMW against the closed form")
    p.add_argument("--ham", required=True, help="Hamiltonian spec, e.g. jz or qubit:1,-1,0,0")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--tol", type=float, default=2e-3)
    p.add_argument("--mode", choices=["pure", "mixed"], default="pure")
    _common(p, False)

    p = sub.add_parser("ellipse", help="emit qutrit isocoherent ellipse points")
    p.add_argument("--coherences", required=True, help="comma-separated C values in [0, 2]")
    p.add_argument("--out", required=True)
    p.add_argument("--points", type=int, default=512)
    _common(p, False)

    p = sub.add_parser("passive", help="isocoherent passivity verdict for a state")
    p.add_argument("--state", required=True, help="JSON with dim, real, imag (row-major)")
    p.add_argument("--ham", required=True)
    _common(p, False)
    return parser


def _floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def cmd_sweep(args) -> int:
    config = SweepConfig.load(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)

    def progress(i, n):
        logging.getLogger("ccmw").info("task %d/%d", i, n)

    records = run_sweep(config, threads=args.threads, progress=progress)
    write_records(config.output_path, records)
    bad = sum(r.infeasible for r in records)
    print(f"wrote {len(records)} rows to {config.output_path}" + (f" ({bad} infeasible)" if bad else ""))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    try:
        H = parse_hamiltonian(args.ham, args.dim)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    grid = np.linspace(0.0, max_coherence(args.dim), args.points)
    try:
        analytic_ccmw(H, 0.0)
    except NoClosedForm as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    rows = verify_against_analytic(H, args.dim, grid, default_config(args.dim, seed=args.seed or 0), args.mode)
    print(f"{'C':>10} {'analytic':>14} {'numeric':>14} {'gap':>11}")
    for c, a, n, g in rows:
        print(f"{c:10.6f} {a:14.9f} {n:14.9f} {g:11.2e}")
    worst = max(abs(r[3]) for r in rows)
    ok = worst <= args.tol
    print(f"max |gap| = {worst:.3e} ({'within' if ok else 'exceeds'} tolerance {args.tol:g})")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_ellipse(args) -> int:
    cs = _floats(args.coherences)
    if not cs:
        raise UsageError("--coherences is empty")
    if args.points < 1:
        raise UsageError("--points must be positive")
    try:
        cs = [check_coherence(c, 3) for c in cs]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        fh.write("# ccmw-ellipse v1\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["coherence", "index", "x1", "x2", "residual"])
        for c in cs:
            for i, (x1, x2) in enumerate(qutrit_ellipse(c, args.points)):
                r = isocoherent_ellipse_residual(3, c, (x1, x2))
                w.writerow([repr(c), i, repr(float(x1)), repr(float(x2)), repr(r)])
    print(f"wrote {len(cs) * args.points} points to {args.out}")
    return EXIT_OK


def load_state(path) -> np.ndarray:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
        d = int(raw["dim"])
        re = np.asarray(raw["real"], dtype=float)
        im = np.asarray(raw.get("imag", np.zeros(d * d)), dtype=float)
    except (OSError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot read state file: {exc}") from None
    if re.size != d * d or im.size != d * d:
        raise UsageError(f"state needs {d * d} real and imag entries")
    return (re + 1j * im).reshape(d, d)


def cmd_passive(args) -> int:
    rho = load_state(args.state)
    d = rho.shape[0]
    try:
        H = parse_hamiltonian(args.ham, d)
        verdict = is_isocoherent_passive(rho, H)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if d <= MAX_BRUTEFORCE_DIM:
        brute, gain = passivity_bruteforce(rho, H)
        print(f"{'passive' if verdict else 'active'}, gain {gain:.6g}")
        print(f"bruteforce: {'passive' if brute else 'active'} "
              f"({'agrees' if brute == verdict else 'DISAGREES'})")
        return EXIT_OK if brute == verdict else EXIT_FAIL
    print("passive" if verdict else "active")
    return EXIT_OK


COMMANDS = {"sweep": cmd_sweep, "verify": cmd_verify, "ellipse": cmd_ellipse, "passive": cmd_passive}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"ccmw: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
