"""Command-line front end.

Exit status: 0 on success, 1 when a numeric check fails, 2 on usage or
configuration errors. Relative output paths are resolved against
``$PROPERTIME_OUTPUT_DIR`` when it is set.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import foldy_wouthuysen as fw
from . import si_estimator as si
from . import wavepacket as wp
from .config import parse_config
from .errors import ParseError, ProperTimeError, ValidationError
from .invariance_solver import derivation_report
from .selftest import format_report, run_selftest
from .spinor_algebra import build_gamma_basis

OUTPUT_DIR_ENV = "PROPERTIME_OUTPUT_DIR"
DRIFT_LIMIT = 1e-11


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    return "%.17g" % x


def output_path(name: str) -> Path:
    p = Path(name)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


def write_csv(path, header, rows) -> Path:
    """Write atomically: a temp file in the target directory, then rename."""
    path = output_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = ",".join(header) + "\n" + "".join(",".join(_fmt(v) for v in row) + "\n" for row in rows)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def cmd_derive_d(args) -> int:
    rep = derivation_report()
    dims = list(rep["kernel_dims"].values())
    d = np.round(rep["D"], 12) + 0.0  # drop signed zeros from the printout
    ok = dims == [2, 1, 1] and np.max(np.abs(d - build_gamma_basis().beta)) <= 1e-10
    if args.json:
        print(json.dumps({
            "kernel_dims": rep["kernel_dims"],
            "D_real": np.round(d.real, 12).tolist(),
            "D_imag": np.round(d.imag, 12).tolist(),
            "equals_beta": bool(ok),
        }, indent=2, sort_keys=True))
    else:
        print("kernel dims: " + ", ".join(str(k) for k in dims))
        for row in d:
            print("  " + "  ".join(f"{z.real:+.3f}{z.imag:+.3f}j" for z in row))
    return 0 if ok else 1


def cmd_free_evolve(cfg) -> int:
    basis = build_gamma_basis()
    grid = wp.MomentumGrid(cfg.dims, cfg.pmax, cfg.m, cfg.center)
    spec = wp.WavepacketSpec(cfg.p0, cfg.sigma_p, cfg.spin, cfg.branch, cfg.theta)
    field_ = wp.build_wavepacket(spec, grid, basis)
    series = wp.proper_time(field_, basis, cfg.t0, cfg.t1, cfg.nsamples)
    path = write_csv(cfg.out, ["t", "rate", "tau"], zip(series.times, series.rate, series.tau))
    drift = float(np.max(np.abs(series.rate - series.rate[0])))
    status = 0
    if cfg.branch == "positive" and drift > DRIFT_LIMIT:
        status = 1
    if cfg.spectrum:
        freq, amp, omega, power = wp.zitter_spectrum(series, with_power=True)
        write_csv(cfg.spectrum, ["freq", "power"], zip(omega, power))
        print(f"dominant angular frequency {freq:.6g}, amplitude {amp:.3e}")
    print(f"wrote {path}: rate(0)={series.rate[0]:.12g} tau(t1)={series.tau[-1]:.12g} drift={drift:.3e}"
          + (" FAIL" if status else ""))
    return status


def cmd_fw_check(cfg) -> int:
    ref = fw.reference_config(dims=cfg.dims, m=cfg.m, e=cfg.e, b_coeff=cfg.b_coeff, kappa=cfg.kappa)
    packet = fw.LatticePacket(kappa=cfg.kappa, width=cfg.width, spin=cfg.spin)
    points = fw.scaling_study(ref, cfg.vscales, packet)
    path = write_csv(cfg.out, ["vscale", "res_beta", "res_rate", "ratio_small"],
                     [(p.vscale, p.res_beta, p.res_rate, p.ratio_small) for p in points])
    slopes = fw.fit_slopes(points)
    failed = False
    print(f"wrote {path}")
    for name, (centre, half) in fw.SLOPE_BANDS.items():
        ok = abs(slopes[name] - centre) <= half
        failed |= not ok
        print(f"{'PASS' if ok else 'FAIL'}  slope {name} = {slopes[name]:.3f} (expected {centre:g} +- {half:g})")
    return 1 if failed else 0


def cmd_magnetar(cfg) -> int:
    if cfg.log:
        b = np.logspace(np.log10(cfg.bmin), np.log10(cfg.bmax), cfg.steps)
    else:
        b = np.linspace(cfg.bmin, cfg.bmax, cfg.steps)
    table = si.magnetar_sweep(si.CODATA, b)
    path = write_csv(cfg.out, ["B_tesla", "shift", "flag"], table.rows())
    print(f"wrote {path}: shift per tesla {table.per_tesla:.6e} (CODATA), "
          f"{table.reported_per_tesla:.0e} (order-of-magnitude literature value)")
    return 0


def cmd_selftest(cfg, as_json: bool) -> int:
    report = run_selftest(cfg.seed)
    sys.stdout.write(format_report(report, as_json))
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="propertime", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("derive-d", help="derive the rate matrix from invariance constraints")
    p.add_argument("--json", action="store_true")

    p = sub.add_parser("free-evolve", help="free wavepacket rate and proper time as CSV")
    p.add_argument("--config")
    for flag in ("m", "sigma-p", "theta", "t0", "t1"):
        p.add_argument(f"--{flag}", type=float)
    for flag in ("dims", "pmax", "center", "p0", "spin"):
        p.add_argument(f"--{flag}")
    p.add_argument("--branch", choices=("positive", "negative", "mixed"))
    p.add_argument("--nsamples", type=int)
    p.add_argument("--out")
    p.add_argument("--spectrum", help="also write freq,power CSV to this path")

    p = sub.add_parser("fw-check", help="Foldy-Wouthuysen scaling study")
    p.add_argument("--config")
    for flag in ("m", "e", "b-coeff", "kappa", "width"):
        p.add_argument(f"--{flag}", type=float)
    for flag in ("dims", "vscales", "spin"):
        p.add_argument(f"--{flag}")
    p.add_argument("--out")

    p = sub.add_parser("magnetar", help="SI rate shift over a B sweep")
    p.add_argument("--config")
    p.add_argument("--bmin", type=float)
    p.add_argument("--bmax", type=float)
    p.add_argument("--steps", type=int)
    p.add_argument("--log", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out")

    p = sub.add_parser("selftest", help="run the invariant suite")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--json", action="store_true")
    return parser


_NOT_CONFIG = {"command", "config", "json"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "derive-d":
            return cmd_derive_d(args)
        overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
        cfg = parse_config(args.command, getattr(args, "config", None), overrides)
        if args.command == "free-evolve":
            return cmd_free_evolve(cfg)
        if args.command == "fw-check":
            return cmd_fw_check(cfg)
        if args.command == "magnetar":
            return cmd_magnetar(cfg)
        return cmd_selftest(cfg, args.json)
    except (ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ProperTimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
