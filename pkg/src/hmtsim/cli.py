"""Command-line frontend: ``hmtsim <command> [options]``.

Commands write a tidy CSV (columns in :data:`hmtsim.montecarlo.CSV_COLUMNS`)
and a JSON run manifest next to it.  The manifest is written before any
result, with ``status='running'``, and rewritten on completion.

Exit codes: 0 ok, 1 validation failure, 2 bad input, 3 runtime error.
"""
from __future__ import annotations

import argparse
import dataclasses
import datetime as _dt
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .montecarlo import (
    SimConfig,
    analytic_curve,
    config_hash,
    ebn0_to_snr_db,
    measure_ber,
    measure_sinr,
    robustness_sweep,
    write_csv,
)
from .validation import run_validation

EXIT_OK, EXIT_VALIDATION, EXIT_BAD_INPUT, EXIT_RUNTIME = 0, 1, 2, 3
MANIFEST_SCHEMA = "hmtsim.manifest/1"
CSV_SCHEMA = "hmtsim.curve-csv/1"
DEFAULT_SPREADS = "0.05:0.05:0.35"


class BadInput(ValueError):
    pass


# -- parsing helpers ---------------------------------------------------------------


def parse_range(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (inclusive) or a comma-separated list."""
    text = text.strip()
    if not text:
        return ()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise BadInput(f"range must be start:step:stop, got {text!r}")
        start, step, stop = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise BadInput(f"invalid range {text!r}")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + k * step, 12) for k in range(n))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _coerce(name: str, raw: str):
    types = {f.name: f.type for f in dataclasses.fields(SimConfig)}
    if name not in types:
        raise BadInput(f"unknown config key {name!r}")
    kind = str(types[name])
    raw = raw.strip()
    try:
        if name == "receivers":
            return tuple(r.strip() for r in raw.split(",") if r.strip())
        if name == "snr_db":
            return parse_range(raw)
        if name == "sigma":
            return None if raw.lower() in ("", "none", "default") else float(raw)
        if kind.startswith("int"):
            return int(raw)
        if kind.startswith("float"):
            return float(raw)
    except ValueError as exc:
        raise BadInput(f"bad value for {name}: {raw!r}") from exc
    return raw


def parse_config_text(text: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BadInput(f"config line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        out[key.strip()] = _coerce(key.strip(), value)
    return out


def build_config(args, **forced) -> SimConfig:
    values = {}
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as exc:
            raise BadInput(f"cannot read config file: {exc}") from exc
    for item in args.set or ():
        if "=" not in item:
            raise BadInput(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), value)
    flags = {
        "channel": args.channel,
        "spread": args.spread,
        "receivers": args.receiver and tuple(r for item in args.receiver for r in item.split(",")),
        "snr_db": args.snr and parse_range(args.snr),
        "n_realizations": args.realizations,
        "seed": args.seed,
        "constellation": getattr(args, "constellation", None),
        "sigma": args.sigma,
    }
    values.update({k: v for k, v in flags.items() if v is not None})
    values.update(forced)
    try:
        return SimConfig.from_dict(values)
    except (TypeError, ValueError) as exc:
        raise BadInput(str(exc)) from exc


# -- manifest ------------------------------------------------------------------------


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


class RunManifest:
    def __init__(self, path: Path, command: str, argv, config: dict, chash: str, seed: int, outputs):
        self.path = path
        self.doc = {
            "schema": MANIFEST_SCHEMA,
            "csv_schema": CSV_SCHEMA,
            "command": command,
            "argv": list(argv),
            "config": config,
            "config_hash": chash,
            "seed": seed,
            "code_version": __version__,
            "started": _now(),
            "finished": None,
            "status": "running",
            "outputs": [str(o) for o in outputs],
        }

    def write(self):
        self.path.write_text(json.dumps(self.doc, indent=2, sort_keys=True) + "\n")

    def finish(self, status: str, **extra):
        self.doc.update(finished=_now(), status=status, **extra)
        self.write()


def _run(args, argv, command: str, cfg: SimConfig, compute, extra_meta=None) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{command}.csv"
    manifest = RunManifest(
        out / f"{command}.manifest.json", command, argv, cfg.to_dict(), config_hash(cfg), cfg.seed, [csv_path]
    )
    if extra_meta:
        manifest.doc.update(extra_meta)
    manifest.write()
    try:
        points = compute()
    except Exception as exc:  # noqa: BLE001 - reported via exit code
        manifest.finish("error", error=f"{type(exc).__name__}: {exc}")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    write_csv(points, csv_path)
    manifest.finish("ok", n_rows=len(points))
    print(f"wrote {csv_path} ({len(points)} rows)")
    return EXIT_OK


# -- commands ------------------------------------------------------------------------


def cmd_sinr_curve(args, argv) -> int:
    cfg = build_config(args)
    if cfg.channel == "none" and args.method == "analytic":
        raise BadInput("analytic SINR needs --channel uni or exp")
    compute = (lambda: analytic_curve(cfg)) if args.method == "analytic" else (lambda: measure_sinr(cfg))
    return _run(args, argv, "sinr-curve", cfg, compute, {"method": args.method})


def cmd_spread_sweep(args, argv) -> int:
    spreads = parse_range(args.spreads)
    if not spreads:
        raise BadInput("spread list is empty")
    if any(s <= 0 for s in spreads):
        raise BadInput("spread factors must be positive")
    forced = {} if args.snr else {"snr_db": (20.0,)}
    cfg = build_config(args, **forced)
    if cfg.channel == "none":
        raise BadInput("spread sweep needs --channel uni or exp")
    if len(cfg.snr_db) != 1:
        raise BadInput("spread sweep takes a single SNR value")

    def compute():
        if args.method == "analytic":
            return analytic_curve(cfg, spreads, vary="spread")
        rows = []
        for s in spreads:
            pts = measure_sinr(dataclasses.replace(cfg, spread=s))
            rows += [dataclasses.replace(p, x=s) for p in pts]
        return sorted(rows, key=lambda p: (cfg.receivers.index(p.receiver), p.x))

    return _run(args, argv, "spread-sweep", cfg, compute, {"method": args.method, "spreads": list(spreads)})


def cmd_ber_curve(args, argv) -> int:
    forced = {} if args.snr else {"snr_db": parse_range("0:2:30")}
    cfg = build_config(args, **forced)
    if args.min_errors is not None:
        cfg = dataclasses.replace(cfg, min_bit_errors=args.min_errors)
    from .lattice import get_constellation

    bps = get_constellation(cfg.constellation).bits_per_symbol
    meta = {
        "x_axis": "Eb/N0 dB",
        "ebn0_convention": "sigma_c2/sigma_w2 = Eb/N0 * rho * bits_per_symbol (Eb = sigma_c2 / (rho * bits))",
        "snr_db_per_point": [ebn0_to_snr_db(e, cfg.lattice, bps) for e in cfg.snr_db],
    }
    return _run(args, argv, "ber-curve", cfg, lambda: measure_ber(cfg), meta)


def cmd_robustness(args, argv) -> int:
    cfg = build_config(args, estimation_error=args.est_error, receivers=("ub", "maxsinr", "tpr"))
    if cfg.channel == "none":
        raise BadInput("robustness needs --channel uni or exp")
    return _run(args, argv, "robustness", cfg, lambda: robustness_sweep(cfg), {"estimation_error": args.est_error})


def cmd_validate(args, argv) -> int:
    if args.sigma is not None and not args.sigma > 0:
        raise BadInput("pulse sigma must be positive")
    try:
        reports = run_validation(sigma=args.sigma)
    except ValueError as exc:
        raise BadInput(str(exc)) from exc
    for rep in reports:
        print(rep.format_table())
    ok = all(r.passed for r in reports)
    print("ALL CHECKS PASSED" if ok else "VALIDATION FAILED")
    if args.report:
        doc = {"passed": ok, "code_version": __version__, "reports": [r.to_dict() for r in reports]}
        Path(args.report).write_text(json.dumps(doc, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_VALIDATION


# -- argument parser -------------------------------------------------------------------


def _experiment_args(p: argparse.ArgumentParser, snr_help: str):
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
    p.add_argument("--channel", choices=["uni", "exp", "none"])
    p.add_argument("--spread", type=float, help="spread factor delay*f_d")
    p.add_argument("--snr", help=snr_help)
    p.add_argument("--receiver", action="append", help="tpr, maxsinr, ub (repeat or comma-separate)")
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--sigma", type=float, help="pulse parameter in s^2 (default T/(sqrt(3) F))")
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmtsim", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sinr-curve", help="SINR versus SNR")
    _experiment_args(p, "SNR points in dB, start:step:stop or a,b,c")
    p.add_argument("--method", choices=["mc", "analytic"], default="mc")
    p.set_defaults(func=cmd_sinr_curve)

    p = sub.add_parser("spread-sweep", help="SINR versus spread factor at fixed SNR")
    _experiment_args(p, "single SNR in dB (default 20)")
    p.add_argument("--spreads", default=DEFAULT_SPREADS, help="spread factors, start:step:stop or list")
    p.add_argument("--method", choices=["mc", "analytic"], default="mc")
    p.set_defaults(func=cmd_spread_sweep)

    p = sub.add_parser("ber-curve", help="uncoded BER versus Eb/N0")
    _experiment_args(p, "Eb/N0 points in dB (default 0:2:30)")
    p.add_argument("--constellation", choices=["QPSK", "16QAM"])
    p.add_argument("--min-errors", type=int, help="stop once every point has this many bit errors")
    p.set_defaults(func=cmd_ber_curve)

    p = sub.add_parser("robustness", help="Max-SINR receiver with delay-spread estimation errors")
    _experiment_args(p, "SNR points in dB")
    p.add_argument("--est-error", choices=["uniform-half-span", "none"], default="uniform-half-span")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("validate", help="run the numerical validation suite")
    p.add_argument("--sigma", type=float, help="pulse parameter in s^2")
    p.add_argument("--report", help="write a JSON report here")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_BAD_INPUT
    try:
        return args.func(args, argv)
    except BadInput as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_BAD_INPUT
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
