"""Command-line interface: ``cfdim estimate|certify|disc|tables``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import dataclass

from .certify import CertificationError, certify_dimension, stable_lower_endpoint
from .determinant import det_series, estimate_dimension
from .disc import AdmissibilityError, optimize_disc
from .hardy import BoundInvariantError, build_bound_ladder, build_norm_table, euler_bound
from .mobius import DigitSet
from .numerics import BracketError, PrecisionContext, QuadratureError, to_decimal
from .orbits import ResourceCapError, orbit_table

log = logging.getLogger("cfdim")

CACHE_ENV = "CFDIM_CACHE_DIR"

# Desk-scale presets: minutes on one core.
DESK = {"digits": 50, "period": 18, "Q": 24, "M": 150, "N": 200}

TABLE_HEADERS = {
    1: ("n", "s_n"),
    2: ("n", "delta_n"),
    3: ("k", "norm_L_m_k"),
    4: ("n", "alpha_plus"),
    5: ("n", "euler_bound"),
    6: ("n", "beta_plus"),
}


@dataclass
class RunConfig:
    command: str
    digit_set: DigitSet
    target_digits: int
    working_digits: int
    P: int
    Q: int
    M: int
    N: int
    out: str | None
    fmt: str
    cache_dir: str | None
    threads: int

    @property
    def ctx(self) -> PrecisionContext:
        return PrecisionContext(self.target_digits, self.working_digits)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--set", dest="digit_set", default="1,2", help="digit set as a comma list (default 1,2)")
    common.add_argument("--digits", type=int, default=None, help="target decimal digits")
    common.add_argument("--working-digits", type=int, default=0, help="decimal digits carried (default 1.5*digits+50)")
    common.add_argument("--period", "-P", dest="P", type=int, default=DESK["period"], help="maximal orbit period P")
    common.add_argument("--Q", type=int, default=DESK["Q"], help="last index bounded by Taylor bounds")
    common.add_argument("--M", type=int, default=DESK["M"], help="approximation bounds kept in the product")
    common.add_argument("--N", type=int, default=DESK["N"], help="highest monomial index in the norm table")
    common.add_argument("--out", "-o", default=None, help="output file (default stdout)")
    common.add_argument("--format", dest="fmt", choices=("text", "json", "csv"), default=None)
    common.add_argument("--cache-dir", default=os.environ.get(CACHE_ENV), help=f"orbit-table cache directory (env {CACHE_ENV})")
    common.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    parser = argparse.ArgumentParser(
        prog="cfdim",
        description="Hausdorff dimension of continued-fraction Cantor sets E_A.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="print the zero s_P of the truncated determinant")
    sub.add_parser("certify", parents=[common], help="certify the dimension to --digits decimals")
    sub.add_parser("disc", parents=[common], help="print the optimised disc c, rho, rho', h")
    tables = sub.add_parser("tables", parents=[common], help="emit a reference table as CSV")
    tables.add_argument("--which", type=int, required=True, choices=sorted(TABLE_HEADERS))
    tables.add_argument("--s", default=None, help="evaluation point as a decimal string")
    tables.add_argument("--s-digits", type=int, default=100, help="decimals of the lower endpoint used when --s is absent")
    tables.add_argument("--rows", default=None, help="index range a:b (inclusive)")
    return parser


def parse_config(parser: argparse.ArgumentParser, argv) -> tuple[RunConfig, argparse.Namespace]:
    args = parser.parse_args(argv)
    try:
        digit_set = DigitSet.parse(args.digit_set)
    except ValueError as exc:
        parser.error(str(exc))
    if args.digits is None:
        args.digits = args.s_digits if args.command == "tables" else DESK["digits"]
    if args.digits < 1:
        parser.error("--digits must be positive")
    if args.command in ("estimate", "certify", "tables") and len(digit_set) < 2:
        parser.error("dimension computations need at least two digits")
    if args.command == "certify" and not (1 <= args.P <= args.Q <= args.M <= args.N):
        parser.error(f"need 1 <= P <= Q <= M <= N, got P={args.P} Q={args.Q} M={args.M} N={args.N}")
    if args.P < 1 or args.N < 1:
        parser.error("--period and --N must be positive")
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        PrecisionContext(args.digits, args.working_digits)
    except ValueError as exc:
        parser.error(str(exc))
    fmt = args.fmt or {"tables": "csv", "certify": "json"}.get(args.command, "text")
    config = RunConfig(
        command=args.command,
        digit_set=digit_set,
        target_digits=args.digits,
        working_digits=args.working_digits,
        P=args.P,
        Q=args.Q,
        M=args.M,
        N=args.N,
        out=args.out,
        fmt=fmt,
        cache_dir=args.cache_dir,
        threads=args.threads,
    )
    return config, args


def _parse_rows(spec: str | None, default: tuple[int, int]) -> range:
    if spec is None:
        lo, hi = default
    else:
        lo_s, sep, hi_s = spec.partition(":")
        if not sep:
            raise ValueError(f"--rows expects a:b, got {spec!r}")
        lo, hi = int(lo_s), int(hi_s)
    if lo > hi or lo < 0:
        raise ValueError(f"empty or negative row range {lo}:{hi}")
    return range(lo, hi + 1)


def _records_text(records: list[tuple[str, str]], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(dict(records), indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["name", "value"])
        writer.writerows(records)
        return buf.getvalue()
    return "".join(f"{k} = {v}\n" for k, v in records)


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_estimate(cfg: RunConfig, args) -> int:
    ctx = cfg.ctx
    table = orbit_table(cfg.digit_set, cfg.P, ctx, cfg.cache_dir)
    s = estimate_dimension(cfg.digit_set, cfg.P, ctx, table=table)
    records = [
        ("digit_set", cfg.digit_set.label()),
        ("P", str(cfg.P)),
        ("working_digits", str(ctx.working_digits)),
        ("s_P", to_decimal(s, cfg.target_digits + 10)),
    ]
    _emit(_records_text(records, cfg.fmt), cfg.out)
    return 0


def cmd_disc(cfg: RunConfig, args) -> int:
    cd = optimize_disc(cfg.digit_set, cfg.ctx)
    digits = cfg.target_digits + 10
    records = [
        ("c", to_decimal(cd.c, digits)),
        ("rho", to_decimal(cd.rho, digits)),
        ("rho_prime", to_decimal(cd.image_radius, digits)),
        ("h", to_decimal(cd.ratio, digits)),
    ]
    _emit(_records_text(records, cfg.fmt), cfg.out)
    return 0


def cmd_certify(cfg: RunConfig, args) -> int:
    try:
        cert = certify_dimension(
            cfg.digit_set,
            cfg.target_digits,
            cfg.P,
            cfg.Q,
            cfg.M,
            cfg.N,
            cfg.ctx,
            cache_dir=cfg.cache_dir,
            workers=cfg.threads,
        )
        status = 0
    except CertificationError as exc:
        print(f"cfdim: {exc}", file=sys.stderr)
        cert, status = exc.certificate, 1
        if cert is None:
            return 1
    summary = (
        f"verdict: {'true' if cert.verdict else 'false'}\n"
        f"interval: ({cert.s_minus}, {cert.s_plus})\n"
    )
    if cfg.fmt == "json":
        if cfg.out:
            cert.write(cfg.out)
            sys.stdout.write(summary)
        else:
            sys.stdout.write(cert.to_json())
    else:
        if cfg.out:
            cert.write(cfg.out)
        sys.stdout.write(summary)
    return status


def _table_point(cfg: RunConfig, args) -> str:
    if args.s is not None:
        return args.s
    s_minus, P = stable_lower_endpoint(cfg.digit_set, args.s_digits, cfg.ctx, cache_dir=cfg.cache_dir)
    log.info("using s = %s (settled at P=%d)", s_minus, P)
    return s_minus


def table_rows(cfg: RunConfig, args) -> list[tuple[int, str]]:
    which, ctx, A = args.which, cfg.ctx, cfg.digit_set
    out_digits = cfg.target_digits + 10
    if which == 1:
        rows = _parse_rows(args.rows, (max(1, cfg.P - 7), cfg.P))
        if rows.start < 1:
            raise ValueError("s_n needs n >= 1")
        table = orbit_table(A, rows.stop - 1, ctx, cfg.cache_dir)
        return [
            (n, to_decimal(estimate_dimension(A, n, ctx, table=table), out_digits)) for n in rows
        ]
    s = _table_point(cfg, args)
    if which == 2:
        rows = _parse_rows(args.rows, (0, cfg.P))
        table = orbit_table(A, max(rows.stop - 1, 1), ctx, cfg.cache_dir)
        series = det_series(table, ctx.real(s))
        return [(n, to_decimal(series[n], out_digits)) for n in rows]
    cd = optimize_disc(A, ctx)
    if which == 3:
        rows = _parse_rows(args.rows, (0, 10))
        norms = build_norm_table(A, cd, ctx.real(s), rows.stop - 1, ctx)
        return [(k, to_decimal(norms.norms[k], out_digits)) for k in rows]
    norms = build_norm_table(A, cd, ctx.real(s), cfg.N, ctx)
    if which == 4:
        rows = _parse_rows(args.rows, (1, 10))
        if rows.start < 1 or rows.stop - 1 > cfg.M:
            raise ValueError(f"alpha rows must lie in 1..M={cfg.M}")
        ladder = build_bound_ladder(norms, min(cfg.Q, cfg.M), cfg.M)
        return [(n, to_decimal(ladder.alpha_plus[n - 1], out_digits)) for n in rows]
    if which == 5:
        rows = _parse_rows(args.rows, (cfg.P + 1, cfg.P + 7))
        if rows.start < 1:
            raise ValueError("Euler bounds need n >= 1")
        return [(n, to_decimal(euler_bound(n, norms.K, norms.h), out_digits)) for n in rows]
    rows = _parse_rows(args.rows, (0, cfg.Q))
    ladder = build_bound_ladder(norms, rows.stop - 1 or 1, cfg.M)
    return [(n, to_decimal(ladder.beta_plus[n], out_digits)) for n in rows]


def cmd_tables(cfg: RunConfig, args) -> int:
    rows = table_rows(cfg, args)
    if cfg.fmt == "json":
        key, value = TABLE_HEADERS[args.which]
        text = json.dumps([{key: n, value: v} for n, v in rows], indent=2) + "\n"
    elif cfg.fmt == "text":
        text = "".join(f"{n:>4}  {v}\n" for n, v in rows)
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TABLE_HEADERS[args.which])
        writer.writerows(rows)
        text = buf.getvalue()
    _emit(text, cfg.out)
    return 0


COMMANDS = {
    "estimate": cmd_estimate,
    "certify": cmd_certify,
    "disc": cmd_disc,
    "tables": cmd_tables,
}

FAILURES = (
    AdmissibilityError,
    BoundInvariantError,
    BracketError,
    CertificationError,
    QuadratureError,
    ResourceCapError,
    ValueError,
)


def main(argv=None) -> int:
    parser = build_parser()
    cfg, args = parse_config(parser, argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(asctime)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    start = time.perf_counter()
    try:
        status = COMMANDS[cfg.command](cfg, args)
    except FAILURES as exc:
        print(f"cfdim: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    log.info("%s finished in %.1f s", cfg.command, time.perf_counter() - start)
    return status


if __name__ == "__main__":
    sys.exit(main())
