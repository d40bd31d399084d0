"""Command-line front end: ``rydprec <command> [flags]``.

Every command writes its data to ``--output`` (or stdout) and a one-line
JSON manifest next to it (``<output>.manifest.json``, or stderr when the data
goes to stdout).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import struct
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core_model import ALPHA, CONSTANTS, MAX_N, EllipticSpec, build_weight_table, format_real
from .dirac_coulomb import dirac_level, expansion_budget, kappa_of
from .packet import (
    EnergyMode,
    autocorrelation,
    autocorrelation_approx,
    build_packet,
    density_at,
    spin_expectation,
)
from .parallel import chunks, ordered_map, worker_count
from .radial_integrals import FIELDS, QuadratureError, integral_table
from .selftest import run_selftest
from .timescales import precession_time

EXIT_VALIDATION = 2
EXIT_QUADRATURE = 3

DENSITY_MAGIC = b"RYDG"
# magic, nx, ny, half_extent, then zero padding to 32 bytes
DENSITY_HEADER = struct.Struct("<4sIId12x")
TIME_CHUNK = 256
ROW_CHUNK = 16
MAX_SAMPLES = 1_000_000

COMMANDS = ("weights", "energies", "integrals", "autocorr", "spin", "density", "timescales", "selftest")


class ValidationError(ValueError):
    def __init__(self, flag: str, message: str):
        super().__init__(f"{flag}: {message}")
        self.flag = flag


@dataclass
class RunConfig:
    command: str
    n: int
    ecc: float
    Z: int
    a: float
    b: float
    energy_mode: EnergyMode
    tmax: float
    samples: int
    t: float
    extent: float
    resolution: int
    au: bool
    approx: bool
    component: str
    output: str | None
    fmt: str

    def spec(self) -> EllipticSpec:
        norm = math.hypot(self.a, self.b)
        return EllipticSpec(self.n, self.ecc, self.Z, self.a / norm, self.b / norm)

    @property
    def unit(self) -> str:
        return "au" if self.au else "tp"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rydprec", description="Relativistic elliptic Rydberg wave packets."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, spinor: bool = False) -> None:
        p.add_argument("--n", type=int, default=50, help="principal quantum number")
        p.add_argument("--ecc", type=float, default=0.4, help="orbit eccentricity in [0, 1)")
        p.add_argument("--z", type=int, default=92, help="nuclear charge")
        if spinor:
            p.add_argument("--a", type=float, default=1 / math.sqrt(2), help="spin-up amplitude")
            p.add_argument("--b", type=float, default=1 / math.sqrt(2), help="spin-down amplitude")
            p.add_argument("--mode", choices=[m.value for m in EnergyMode], default="exact",
                           help="energies used for evolution")
            p.add_argument("--au", action="store_true", help="times in atomic units instead of t/Tp")
        p.add_argument("--output", "-o", help="output file (default: stdout)")

    for name in ("weights", "energies", "integrals"):
        common(sub.add_parser(name, help=f"{name} table as CSV"))
    for name in ("autocorr", "spin"):
        p = sub.add_parser(name, help=f"{name} time series as CSV")
        common(p, spinor=True)
        p.add_argument("--tmax", type=float, default=3.0, help="end time (t/Tp, or a.u. with --au)")
        p.add_argument("--samples", type=int, default=1024, help="number of uniform time samples")
        if name == "autocorr":
            p.add_argument("--approx", action="store_true", help="circular-weight approximation")
    p = sub.add_parser("density", help="z = 0 density grid as CSV or binary")
    common(p, spinor=True)
    p.add_argument("--t", type=float, default=0.0, help="time (t/Tp, or a.u. with --au)")
    p.add_argument("--extent", type=float, default=2.0,
                   help="half width of the square in units of n^2/Z")
    p.add_argument("--resolution", type=int, default=256, help="pixels per side")
    p.add_argument("--format", choices=("csv", "bin"), default="csv", dest="fmt")
    p.add_argument("--component", choices=("total", "large", "small"), default="total",
                   help="plane written in binary format")
    common(sub.add_parser("timescales", help="characteristic times as JSON"))
    sub.add_parser("selftest", help="run the invariant suite").add_argument(
        "--output", "-o", help="report file (default: stdout)"
    )
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    g = lambda key, default=None: getattr(ns, key, default)  # noqa: E731
    fmt = g("fmt") or ("json" if ns.command == "timescales" else "text" if ns.command == "selftest" else "csv")
    return RunConfig(
        command=ns.command,
        n=g("n", 50),
        ecc=g("ecc", 0.4),
        Z=g("z", 92),
        a=g("a", 1 / math.sqrt(2)),
        b=g("b", 1 / math.sqrt(2)),
        energy_mode=EnergyMode(g("mode", "exact")),
        tmax=g("tmax", 3.0),
        samples=g("samples", 1024),
        t=g("t", 0.0),
        extent=g("extent", 2.0),
        resolution=g("resolution", 256),
        au=bool(g("au", False)),
        approx=bool(g("approx", False)),
        component=g("component", "total"),
        output=g("output"),
        fmt=fmt,
    )


def validate(cfg: RunConfig) -> None:
    """Check every flag before any computation starts."""
    if cfg.command == "selftest":
        return
    if not 1 <= cfg.n <= MAX_N:
        raise ValidationError("--n", f"must be an integer in [1, {MAX_N}], got {cfg.n}")
    if not (math.isfinite(cfg.ecc) and 0.0 <= cfg.ecc < 1.0):
        raise ValidationError("--ecc", f"eccentricity must lie in [0, 1), got {cfg.ecc}")
    if cfg.Z < 1:
        raise ValidationError("--z", f"nuclear charge must be >= 1, got {cfg.Z}")
    if cfg.Z * ALPHA >= 1.0:
        raise ValidationError("--z", f"Z*alpha must be < 1 (Z <= 137), got {cfg.Z}")
    if cfg.command in ("autocorr", "spin", "density"):
        for flag, v in (("--a", cfg.a), ("--b", cfg.b)):
            if not math.isfinite(v):
                raise ValidationError(flag, f"spinor amplitude must be finite, got {v}")
        if cfg.a == 0.0 and cfg.b == 0.0:
            raise ValidationError("--a", "spinor (a, b) must not be the zero vector")
    if cfg.command in ("autocorr", "spin"):
        if not (math.isfinite(cfg.tmax) and cfg.tmax > 0.0):
            raise ValidationError("--tmax", f"must be a positive finite time, got {cfg.tmax}")
        if not 2 <= cfg.samples <= MAX_SAMPLES:
            raise ValidationError("--samples", f"must lie in [2, {MAX_SAMPLES}], got {cfg.samples}")
    if cfg.command == "density":
        if not math.isfinite(cfg.t):
            raise ValidationError("--t", f"time must be finite, got {cfg.t}")
        if not (math.isfinite(cfg.extent) and cfg.extent > 0.0):
            raise ValidationError("--extent", f"must be a positive finite factor, got {cfg.extent}")
        if not 1 <= cfg.resolution <= 2048:
            raise ValidationError("--resolution", f"must lie in [1, 2048], got {cfg.resolution}")
    try:
        worker_count()
    except ValueError:
        raise ValidationError("RYDG_THREADS", "must be a positive integer") from None


# --- commands ---------------------------------------------------------------


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_weights(cfg: RunConfig) -> str:
    return build_weight_table(cfg.n, math.asin(cfg.ecc)).to_csv()


def cmd_energies(cfg: RunConfig) -> str:
    rows = []
    for l in range(cfg.n):
        for s in (1, -1):
            if l == 0 and s == -1:
                continue
            lv = dirac_level(cfg.n, kappa_of(l, s), cfg.Z)
            budget = expansion_budget(cfg.n, lv.k, cfg.Z)
            rows.append([
                cfg.n, l, lv.j2, lv.kappa, format_real(lv.energy_exact),
                format_real(lv.energy_fs), format_real(budget.delta4), format_real(budget.delta6),
            ])
    header = ["n", "l", "j2", "kappa", "E_exact_m0c2", "E_fs_hartree", "delta4", "delta6"]
    return _csv(header, rows)


def cmd_integrals(cfg: RunConfig) -> str:
    table = integral_table(cfg.n, cfg.Z)
    return _csv(["l", *FIELDS, "err_estimate"], [s.as_row() for s in table])


def _time_axis(cfg: RunConfig) -> np.ndarray:
    return np.linspace(0.0, cfg.tmax, cfg.samples)


def _time_label(cfg: RunConfig) -> str:
    return "t_au" if cfg.au else "t_over_Tp"


def cmd_autocorr(cfg: RunConfig) -> str:
    packet = build_packet(cfg.spec(), cfg.energy_mode)
    fn = autocorrelation_approx if cfg.approx else autocorrelation
    times = _time_axis(cfg)
    parts = ordered_map(lambda sl: fn(packet, times[sl], cfg.unit).values, chunks(len(times), TIME_CHUNK))
    values = np.concatenate(parts)
    rows = (
        [format_real(t), format_real(v.real), format_real(v.imag), format_real(abs(v))]
        for t, v in zip(times, values)
    )
    return _csv([_time_label(cfg), "reA", "imA", "absA"], rows)


def cmd_spin(cfg: RunConfig) -> str:
    packet = build_packet(cfg.spec(), cfg.energy_mode)
    packet._spin_kernels  # build shared caches once before fanning out
    times = _time_axis(cfg)
    parts = ordered_map(lambda sl: spin_expectation(packet, times[sl], cfg.unit).sigma,
                        chunks(len(times), TIME_CHUNK))
    sigma = np.concatenate(parts)
    rows = ([format_real(t), *(format_real(c) for c in s)] for t, s in zip(times, sigma))
    return _csv([_time_label(cfg), "sigma_x", "sigma_y", "sigma_z"], rows)


def _density_arrays(cfg: RunConfig):
    packet = build_packet(cfg.spec(), cfg.energy_mode)
    packet._overlaps
    half = cfg.extent * cfg.n**2 / cfg.Z
    nx = ny = cfg.resolution
    x = (np.arange(nx) - (nx - 1) / 2) * (2.0 * half / nx)
    y = (np.arange(ny) - (ny - 1) / 2) * (2.0 * half / ny)

    def rows(sl: slice):
        xx, yy = np.meshgrid(x, y[sl])
        return density_at(packet, cfg.t, np.hypot(xx, yy), np.arctan2(yy, xx), cfg.unit)

    parts = ordered_map(rows, chunks(ny, ROW_CHUNK))
    large = np.concatenate([p[0] for p in parts])
    small = np.concatenate([p[1] for p in parts])
    return half, x, y, large, small


def cmd_density(cfg: RunConfig) -> str | bytes:
    half, x, y, large, small = _density_arrays(cfg)
    total = large + small
    if cfg.fmt == "bin":
        plane = {"total": total, "large": large, "small": small}[cfg.component]
        header = DENSITY_HEADER.pack(DENSITY_MAGIC, len(x), len(y), half)
        return header + np.ascontiguousarray(plane, dtype="<f8").tobytes()
    rows = (
        [format_real(x[i]), format_real(y[j]), format_real(large[j, i]),
         format_real(small[j, i]), format_real(total[j, i])]
        for j in range(len(y))
        for i in range(len(x))
    )
    return _csv(["x", "y", "rho_large", "rho_small", "rho_total"], rows)


def cmd_timescales(cfg: RunConfig) -> str:
    return json.dumps(precession_time(cfg.n, cfg.ecc, cfg.Z).to_dict(), indent=2) + "\n"


def read_density_binary(data: bytes) -> tuple[float, np.ndarray]:
    """Inverse of the binary density writer: ``(half_extent, array[ny, nx])``."""
    magic, nx, ny, half = DENSITY_HEADER.unpack_from(data)
    if magic != DENSITY_MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    body = np.frombuffer(data, dtype="<f8", offset=DENSITY_HEADER.size)
    return half, body.reshape(ny, nx)


HANDLERS = {
    "weights": cmd_weights,
    "energies": cmd_energies,
    "integrals": cmd_integrals,
    "autocorr": cmd_autocorr,
    "spin": cmd_spin,
    "density": cmd_density,
    "timescales": cmd_timescales,
}


def manifest(cfg: RunConfig, flags: dict) -> str:
    return json.dumps(
        {
            "command": cfg.command,
            "flags": flags,
            "alpha": CONSTANTS.alpha,
            "au_time_seconds": CONSTANTS.au_time_seconds,
            "energy_mode": cfg.energy_mode.value,
            "version": __version__,
        },
        sort_keys=True,
    )


def _emit(cfg: RunConfig, payload: str | bytes, flags: dict) -> None:
    line = manifest(cfg, flags) + "\n"
    if cfg.output is None:
        if isinstance(payload, bytes):
            sys.stdout.buffer.write(payload)
            sys.stdout.buffer.flush()
        else:
            sys.stdout.write(payload)
        sys.stderr.write(line)
        return
    path = Path(cfg.output)
    if isinstance(payload, bytes):
        path.write_bytes(payload)
    else:
        with open(path, "w", newline="\n", encoding="utf-8") as fh:
            fh.write(payload)
    with open(path.with_name(path.name + ".manifest.json"), "w", newline="\n", encoding="utf-8") as fh:
        fh.write(line)


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    flags = {k: v for k, v in vars(ns).items() if k != "command"}
    try:
        validate(cfg)
    except ValidationError as exc:
        print(f"rydprec {cfg.command}: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

    if cfg.command == "selftest":
        results = run_selftest()
        report = "".join(r.line() + "\n" for r in results)
        _emit(cfg, report, flags)
        return 0 if all(r.passed for r in results) else 1

    try:
        payload = HANDLERS[cfg.command](cfg)
    except QuadratureError as exc:
        print(f"rydprec {cfg.command}: quadrature did not converge: {exc}", file=sys.stderr)
        return EXIT_QUADRATURE
    _emit(cfg, payload, flags)
    return 0


if __name__ == "__main__":
    sys.exit(main())
