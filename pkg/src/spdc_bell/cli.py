"""Command-line front end: sweeps, correlation tables, Monte Carlo and homodyne runs."""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass

import numpy as np

from .chsh import m_estimate, sweep, violation_threshold
from .correlator import ENTRY_NAMES, analytic_correlations, mc_correlations
from .errors import SpdcBellError
from .homodyne import DEFAULT_LO_AMPLITUDE, homodyne_correlations
from .phase_space import ChshSetting, MeasurementSetting, Ordering, SampleConfig

log = logging.getLogger("spdc_bell")

COMMANDS = ("chsh-sweep", "correlations", "montecarlo", "homodyne", "threshold")
DEFAULT_GRID = "0:2:201"
DEFAULT_GTAU = 0.5
DEFAULT_SAMPLES = 1_000_000
DEFAULT_CHUNKS = 8


class CliError(Exception):
    pass


@dataclass
class RunSpec:
    command: str
    orderings: list[Ordering]
    g_taus: list[float]
    chsh: ChshSetting
    engine: str = "analytic"
    sample: SampleConfig | None = None
    fmt: str = "csv"
    out: str | None = None
    tolerance: float = 1e-6
    physical_homodyne: bool = False
    lo_amplitude: float = DEFAULT_LO_AMPLITUDE

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise CliError(f"unknown command {self.command!r}")
        if not self.g_taus:
            raise CliError("empty coupling grid")
        needs_mc = self.command in ("montecarlo", "homodyne") or self.engine == "mc"
        if needs_mc and self.sample is None:
            raise CliError("a sample configuration is required for Monte Carlo runs")
        if not needs_mc and self.sample is not None:
            raise CliError("--samples/--seed/--chunks only apply to Monte Carlo runs")


def parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise CliError(f"grid must be start:stop:count[:log], got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CliError(f"bad grid {text!r}: {exc}") from None
    spacing = parts[3] if len(parts) == 4 else "linear"
    if count < 1:
        raise CliError("grid count must be >= 1")
    if start > stop:
        raise CliError("grid start must not exceed stop")
    if start < 0 or not (math.isfinite(start) and math.isfinite(stop)):
        raise CliError("grid values must be finite and >= 0")
    if spacing == "log":
        if start <= 0:
            raise CliError("log grid needs start > 0")
        return [float(v) for v in np.geomspace(start, stop, count)]
    if spacing not in ("linear", "lin"):
        raise CliError(f"unknown grid spacing {spacing!r}")
    return [float(v) for v in np.linspace(start, stop, count)]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="spdc-bell",
        description="CHSH tests of double-crystal SPDC under normal and symmetric ordering.")
    p.add_argument("--command", required=True, choices=COMMANDS)
    p.add_argument("--ordering", choices=("normal", "symmetric", "both"), default=None)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gtau", type=float, help="single coupling value g*tau")
    g.add_argument("--grid", help="start:stop:count[:log]")
    p.add_argument("--theta", type=float, default=0.0)
    p.add_argument("--theta-prime", type=float, default=math.pi / 4)
    p.add_argument("--phi", type=float, default=math.pi / 8)
    p.add_argument("--phi-prime", type=float, default=3 * math.pi / 8)
    p.add_argument("--engine", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--chunks", type=int)
    p.add_argument("--workers", type=int, default=1, help="threads for MC chunks")
    p.add_argument("--tolerance", type=float, default=1e-6, help="bisection tolerance (threshold)")
    p.add_argument("--lo-amplitude", type=float, default=DEFAULT_LO_AMPLITUDE)
    p.add_argument("--physical-homodyne", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="output path (default: stdout)")
    return p


def spec_from_args(args: argparse.Namespace) -> RunSpec:
    cmd = args.command
    if args.ordering is None:
        ordering = {"threshold": "normal", "homodyne": "symmetric"}.get(cmd, "both")
    else:
        ordering = args.ordering
    orderings = ([Ordering.NORMAL, Ordering.SYMMETRIC] if ordering == "both"
                 else [Ordering.parse(ordering)])
    if cmd == "homodyne" and orderings != [Ordering.SYMMETRIC]:
        raise CliError("homodyne detection measures symmetric ordering only")
    if cmd == "threshold" and len(orderings) != 1:
        raise CliError("threshold takes a single ordering")

    if args.grid is not None:
        g_taus = parse_grid(args.grid)
    elif args.gtau is not None:
        if not math.isfinite(args.gtau) or args.gtau < 0:
            raise CliError("--gtau must be finite and >= 0")
        g_taus = [args.gtau]
    else:
        g_taus = parse_grid(DEFAULT_GRID) if cmd == "chsh-sweep" else [DEFAULT_GTAU]

    engine = args.engine
    mc = cmd in ("montecarlo", "homodyne") or engine == "mc"
    sample = None
    given = any(v is not None for v in (args.samples, args.seed, args.chunks))
    if mc:
        try:
            sample = SampleConfig(
                n_samples=DEFAULT_SAMPLES if args.samples is None else args.samples,
                seed=0 if args.seed is None else args.seed,
                n_chunks=DEFAULT_CHUNKS if args.chunks is None else args.chunks,
                workers=args.workers)
        except ValueError as exc:
            raise CliError(str(exc)) from None
    elif given:
        raise CliError("--samples/--seed/--chunks only apply with --engine mc")
    if cmd == "threshold" and args.tolerance <= 0:
        raise CliError("--tolerance must be positive")
    if args.lo_amplitude <= 0:
        raise CliError("--lo-amplitude must be positive")

    return RunSpec(
        command=cmd, orderings=orderings, g_taus=g_taus,
        chsh=ChshSetting(args.theta, args.theta_prime, args.phi, args.phi_prime),
        engine="mc" if mc else "analytic", sample=sample, fmt=args.format, out=args.out,
        tolerance=args.tolerance, physical_homodyne=args.physical_homodyne,
        lo_amplitude=args.lo_amplitude)


# ---------------------------------------------------------------- commands


def _engine(spec: RunSpec):
    return spec.sample if spec.engine == "mc" else "analytic"


def _chsh_sweep(spec: RunSpec):
    columns = ["g_tau", "s_normal", "s_symmetric", "s_err_normal", "s_err_symmetric"]
    results = {o: sweep(spec.g_taus, o, spec.chsh, _engine(spec)) for o in spec.orderings}
    rows = []
    for k, g in enumerate(spec.g_taus):
        point = {o: results[o][k] for o in spec.orderings}
        bad = [r for r in point.values() if not r.ok]
        if bad:
            log.warning("skipping g_tau=%r: %s", g, bad[0].error)
            continue
        row = dict.fromkeys(columns)
        row["g_tau"] = g
        for o, r in point.items():
            row[f"s_{o.value}"] = r.s_value
            row[f"s_err_{o.value}"] = r.s_error
        rows.append(row)
    if not rows:
        raise CliError("every grid point is degenerate; nothing to write")
    return columns, rows


def _correlations(spec: RunSpec):
    columns = ["g_tau", "theta", "phi", *ENTRY_NAMES, "ordering"]
    mc = spec.engine == "mc"
    if mc:
        columns += [f"{n}_err" for n in ENTRY_NAMES]
    setting = MeasurementSetting(spec.chsh.theta, spec.chsh.phi)
    rows = []
    for g in spec.g_taus:
        for o in spec.orderings:
            row = {"g_tau": g, "theta": setting.theta, "phi": setting.phi, "ordering": o.value}
            if mc:
                t = mc_correlations(g, setting, spec.sample, o)
                for name, e in zip(ENTRY_NAMES, t.entries()):
                    row[name] = e.value
                    row[f"{name}_err"] = e.std_error
            else:
                t = analytic_correlations(g, o, setting)
                row.update(zip(ENTRY_NAMES, map(float, t.values())))
            rows.append(row)
    return columns, rows


MC_COLUMNS = ["g_tau", "ordering", "theta", "phi", *ENTRY_NAMES,
              *(f"{n}_err" for n in ENTRY_NAMES), "m", "m_err", "s", "s_err"]


def _mc_rows(g, ordering, setting: ChshSetting, tables):
    ests = [m_estimate(t) for t in tables]
    signs = [sign for sign, _ in setting.terms()]
    s = sum(sign * e.value for sign, e in zip(signs, ests))
    s_err = math.sqrt(sum(e.std_error ** 2 for e in ests))
    rows = []
    for t, e in zip(tables, ests):
        row = {"g_tau": g, "ordering": ordering.value, "theta": t.setting.theta, "phi": t.setting.phi}
        for name, c in zip(ENTRY_NAMES, t.entries()):
            row[name] = c.value
            row[f"{name}_err"] = c.std_error
        row.update(m=e.value, m_err=e.std_error, s=s, s_err=s_err)
        rows.append(row)
    return rows


def _montecarlo(spec: RunSpec):
    rows = []
    for g in spec.g_taus:
        for o in spec.orderings:
            tables = [mc_correlations(g, ms, spec.sample, o, key=(k,))
                      for k, (_, ms) in enumerate(spec.chsh.terms())]
            rows += _mc_rows(g, o, spec.chsh, tables)
    return MC_COLUMNS, rows


def _homodyne(spec: RunSpec):
    rows = []
    for g in spec.g_taus:
        tables = [homodyne_correlations(g, ms, spec.sample, spec.lo_amplitude,
                                        spec.physical_homodyne, key=(k,))
                  for k, (_, ms) in enumerate(spec.chsh.terms())]
        rows += _mc_rows(g, Ordering.SYMMETRIC, spec.chsh, tables)
    return MC_COLUMNS, rows


def _threshold(spec: RunSpec):
    g_star = violation_threshold(spec.orderings[0], spec.tolerance)
    return ["g_tau_star", "tolerance"], [{"g_tau_star": g_star, "tolerance": spec.tolerance}]


HANDLERS = {
    "chsh-sweep": _chsh_sweep,
    "correlations": _correlations,
    "montecarlo": _montecarlo,
    "homodyne": _homodyne,
    "threshold": _threshold,
}


def execute(spec: RunSpec) -> tuple[list[str], list[dict]]:
    return HANDLERS[spec.command](spec)


# ---------------------------------------------------------------- output


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)  # shortest string that round-trips exactly
    return str(v)


def render(columns, rows, fmt: str, command: str) -> str:
    if fmt == "json":
        return json.dumps({"command": command, "columns": columns, "rows": rows}, indent=1) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_cell(row.get(c)) for c in columns])
    return buf.getvalue()


def run(spec: RunSpec) -> int:
    columns, rows = execute(spec)
    text = render(columns, rows, spec.fmt, spec.command)
    if spec.out is None:
        sys.stdout.write(text)
    else:
        try:
            with open(spec.out, "w", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise CliError(f"cannot write {spec.out}: {exc}") from None
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(name)s: %(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return run(spec_from_args(args))
    except (CliError, SpdcBellError) as exc:
        print(f"spdc-bell: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
