"""Command-line front end: ``kerrjc sweep | spectrum | check``.

Exit codes: 0 success, 1 computational failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ._version import __version__
from .checks import run_checks
from .dynamics import Tolerances
from .errors import KerrJCError, ParameterError, UnsupportedRegimeError
from .model import ModelParams
from .spectra import single_excitation_levels, two_photon_eigenvalues
from .sweep import (
    FLOAT_FORMAT,
    Axis,
    SweepSpec,
    extract_contour,
    find_minima,
    run_sweep,
)

log = logging.getLogger("kerrjc")

OUTPUT_DIR_ENV = "KERRJC_OUTPUT_DIR"
STRONG_DRIVE_OMEGA = 0.5
STRONG_DRIVE_N_CUT = 8

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2

RANGE_FLAGS = ("--range", "--range2")

MODEL_KEYS = ("delta", "g", "chi", "omega", "kappa", "gamma", "j", "n_cut")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Flat run configuration shared by all subcommands; unknown keys are rejected."""

    delta: float = 0.0
    g: float = 1.33
    chi: float = 8.0
    omega: float = 0.1
    kappa: float = 1.0
    gamma: float = 1.0
    j: float = 0.0
    n_cut: int = 5
    param: str | None = None
    range: str | None = None
    param2: str | None = None
    range2: str | None = None
    vary: str | None = None
    method: str = "numeric"
    observables: list[str] = field(default_factory=list)
    format: str | None = None
    out: str | None = None
    jobs: int = 1
    contour: float | None = None
    contour_scale: str = "log"
    tolerances: dict[str, float] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    def model_params(self) -> ModelParams:
        return ModelParams.from_mapping({k: getattr(self, k) for k in MODEL_KEYS})

    def tolerance_set(self) -> Tolerances:
        return Tolerances.from_mapping(self.tolerances)


def load_config_file(path: str | os.PathLike) -> dict[str, Any]:
    p = Path(path)
    try:
        text = p.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config {p}: {exc}") from exc
    try:
        if p.suffix.lower() == ".toml":
            try:
                import tomllib
            except ModuleNotFoundError:  # Python < 3.11
                import tomli as tomllib
            data = tomllib.loads(text.decode())
        else:
            data = json.loads(text)
    except ValueError as exc:
        raise UsageError(f"cannot parse config {p}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config file must hold a flat key/value table")
    return data


def _model_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters (units of kappa)")
    g.add_argument("--delta", type=float, help="drive-cavity detuning")
    g.add_argument("--g", type=float, help="atom-mode coupling")
    g.add_argument("--chi", type=float, help="Kerr nonlinearity")
    g.add_argument("--omega", type=float, help="drive amplitude (CW mode)")
    g.add_argument("--kappa", type=float, help="cavity decay rate")
    g.add_argument("--gamma", type=float, help="atomic spontaneous emission rate")
    g.add_argument("--j", type=float, help="CW-CCW mode coupling J")
    g.add_argument("--n-cut", dest="n_cut", type=int, help="Fock levels per mode")


def _output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", help=f"output file (relative paths resolve under ${OUTPUT_DIR_ENV})")
    p.add_argument("--format", choices=("csv", "json"), help="default: from --out suffix, else csv")
    p.add_argument("--config", help="TOML or JSON config; flags override file values")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kerrjc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="steady-state observables over a parameter grid")
    sw.add_argument("--param", help="first sweep axis (delta, g, chi, omega, kappa, gamma, j)")
    sw.add_argument("--range", help="start:stop:count, inclusive")
    sw.add_argument("--param2", help="optional second axis")
    sw.add_argument("--range2")
    sw.add_argument("--method", choices=("numeric", "analytic", "both"))
    sw.add_argument("--observables", help="comma list: g2_cw,g2_analytic,mean_n_cw,p1,p2,poisson_dev")
    sw.add_argument("--jobs", type=int, help="worker processes")
    sw.add_argument("--contour", type=float, help="2D only: also extract iso-lines at this level")
    sw.add_argument("--contour-scale", dest="contour_scale", choices=("log", "linear"))
    _model_flags(sw)
    _output_flags(sw)

    sp = sub.add_parser("spectrum", help="dressed-state levels versus g, chi or J")
    sp.add_argument("--vary", choices=("g", "chi", "j"))
    sp.add_argument("--range", help="start:stop:count, inclusive")
    _model_flags(sp)
    _output_flags(sp)

    ck = sub.add_parser("check", help="run the oracle and invariant suite")
    ck.add_argument("--method", choices=("numeric", "analytic", "both"))
    ck.add_argument("--residual-tol", dest="residual_tol", type=float)
    ck.add_argument("--positivity-tol", dest="positivity_tol", type=float)
    _model_flags(ck)
    ck.add_argument("--config", help="TOML or JSON config; flags override file values")
    return parser


def resolve_config(args: argparse.Namespace) -> tuple[RunConfig, set[str]]:
    """Merge config file and flags; returns the config and the set of keys set explicitly."""
    data: dict[str, Any] = {}
    if getattr(args, "config", None):
        data.update(load_config_file(args.config))
    names = {f.name for f in dataclasses.fields(RunConfig)}
    for key, value in vars(args).items():
        if key in names and value is not None:
            data[key] = value
    if isinstance(data.get("observables"), str):
        data["observables"] = [s.strip() for s in data["observables"].split(",") if s.strip()]
    tol = dict(data.get("tolerances", {}))
    for flag, key in (("residual_tol", "residual"), ("positivity_tol", "positivity")):
        if getattr(args, flag, None) is not None:
            tol[key] = getattr(args, flag)
    if tol:
        data["tolerances"] = tol
    if args.command == "check" and "method" not in data:
        data["method"] = "both"
    return RunConfig.from_dict(data), set(data)


def _output_path(cfg: RunConfig) -> Path | None:
    if cfg.out is None:
        return None
    p = Path(cfg.out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _format(cfg: RunConfig) -> str:
    if cfg.format:
        return cfg.format
    if cfg.out and cfg.out.lower().endswith(".json"):
        return "json"
    return "csv"


def _maybe_raise_n_cut(cfg: RunConfig, explicit: set[str], spec_axes: Sequence[Axis]) -> None:
    omega_max = cfg.omega
    for ax in spec_axes:
        if ax.name == "omega":
            omega_max = max(omega_max, ax.stop)
    if omega_max > STRONG_DRIVE_OMEGA * cfg.kappa and cfg.n_cut < STRONG_DRIVE_N_CUT:
        if "n_cut" in explicit:
            log.warning(
                "Omega up to %.3g kappa with n_cut=%d may be under-truncated", omega_max, cfg.n_cut
            )
        else:
            log.warning(
                "Omega up to %.3g kappa: raising n_cut from %d to %d",
                omega_max, cfg.n_cut, STRONG_DRIVE_N_CUT,
            )
            cfg.n_cut = STRONG_DRIVE_N_CUT


def cmd_sweep(cfg: RunConfig, explicit: set[str], jobs: int | None = None) -> int:
    if not cfg.param or not cfg.range:
        raise UsageError("sweep needs --param and --range (or the same keys in --config)")
    if (cfg.param2 is None) != (cfg.range2 is None):
        raise UsageError("--param2 and --range2 must be given together")
    axis1 = Axis.parse(cfg.param, cfg.range)
    axis2 = Axis.parse(cfg.param2, cfg.range2) if cfg.param2 else None
    _maybe_raise_n_cut(cfg, explicit, [a for a in (axis1, axis2) if a is not None])
    spec = SweepSpec(
        cfg.model_params(),
        axis1,
        axis2,
        tuple(cfg.observables),
        cfg.method,
        cfg.tolerance_set(),
    )
    log.info("sweeping %d points (%s)", int(np.prod(spec.shape)), spec.method)
    table = run_sweep(spec, jobs=jobs or cfg.jobs)

    contours = None
    if cfg.contour is not None:
        if axis2 is None:
            raise UsageError("--contour needs a 2D sweep (--param2/--range2)")
        obs = "g2_cw" if "g2_cw" in table.columns else "g2_analytic"
        contours = extract_contour(table, obs, cfg.contour, log_scale=cfg.contour_scale == "log")

    config = cfg.to_dict()
    fmt = _format(cfg)
    path = _output_path(cfg)
    summary_stream = sys.stdout if path is not None else sys.stderr
    if fmt == "json":
        extra = None
        if contours is not None:
            extra = {"contours": [[[float(FLOAT_FORMAT.format(v)) for v in pt] for pt in line] for line in contours]}
        _write(path, lambda fh: table.to_json(fh, config, extra))
    else:
        _write(path, lambda fh: table.to_csv(fh, config))
        if contours is not None and path is not None:
            cpath = path.with_name(path.stem + ".contour.csv")
            _write(cpath, lambda fh: _write_contours_csv(fh, table, contours))

    _print_summary(table, contours, summary_stream)
    return EXIT_OK


def _write(path: Path | None, writer) -> None:
    if path is None:
        writer(sys.stdout)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer(fh)


def _write_contours_csv(fh, table, contours) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["contour", table.spec.axis1.name, table.spec.axis2.name])
    for k, line in enumerate(contours):
        for x, y in line:
            w.writerow([k, FLOAT_FORMAT.format(x), FLOAT_FORMAT.format(y)])


def _print_summary(table, contours, stream) -> None:
    failures = table.metadata["failures"]
    print(f"points: {len(table)}  failures: {failures}", file=stream)
    for col in table.columns:
        if not col.startswith("g2"):
            continue
        v = table.column(col)
        if not np.isfinite(v).any():
            continue
        k = int(np.nanargmin(v))
        where = ", ".join(
            f"{a.name}={table.data[k, i]:.6g}" for i, a in enumerate(table.spec.axes)
        )
        print(f"min {col} = {v[k]:.6g} at {where}", file=stream)
        if not table.is_2d:
            dips = find_minima(table, col)
            locs = ", ".join(f"{x:.6g}" for x, _ in dips) or "none"
            print(f"dips in {col} at {table.spec.axis1.name} = {locs}", file=stream)
    if contours is not None:
        print(f"contour lines: {len(contours)}", file=stream)


def spectrum_rows(cfg: RunConfig):
    if not cfg.vary or not cfg.range:
        raise UsageError("spectrum needs --vary and --range")
    axis = Axis.parse(cfg.vary, cfg.range)
    columns = ["g", "chi", "j"] + [f"e2_{k}" for k in range(5)] + [f"e1_{k}" for k in range(3)]
    columns.append("kerr_level")
    rows = []
    for x in axis.values:
        vals = {"g": cfg.g, "chi": cfg.chi, "j": cfg.j}
        vals[axis.name] = float(x)
        if vals["g"] < 0 or vals["chi"] < 0:
            raise ParameterError("g and chi must be >= 0")
        two = two_photon_eigenvalues(vals["g"], vals["chi"]).relative
        one = single_excitation_levels(vals["g"], vals["j"]).relative
        rows.append([vals["g"], vals["chi"], vals["j"], *two, *one, 2.0 * vals["chi"]])
    return columns, rows


def cmd_spectrum(cfg: RunConfig) -> int:
    columns, rows = spectrum_rows(cfg)
    config = cfg.to_dict()
    path = _output_path(cfg)

    def write_csv(fh):
        fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        fh.write("# levels: e2_* relative to 2*omega, e1_* relative to omega\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([FLOAT_FORMAT.format(v) for v in r])

    def write_json(fh):
        doc = {
            "config": config,
            "columns": columns,
            "rows": [[float(FLOAT_FORMAT.format(v)) for v in r] for r in rows],
        }
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")

    _write(path, write_json if _format(cfg) == "json" else write_csv)
    if path is not None:
        print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


def cmd_check(cfg: RunConfig) -> int:
    results = run_checks(cfg.model_params(), cfg.method, cfg.tolerance_set())
    for r in results:
        print(r.line())
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"FAILED: {', '.join(failed)}")
        return EXIT_FAILURE
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def _attach_range_values(argv: Sequence[str]) -> list[str]:
    # argparse would read "-4:4:401" as an option, so bind it to its flag
    out: list[str] = []
    for tok in argv:
        if out and out[-1] in RANGE_FLAGS and tok.startswith("-") and ":" in tok:
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_range_values(argv))
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        cfg, explicit = resolve_config(args)
        if args.command == "sweep":
            return cmd_sweep(cfg, explicit)
        if args.command == "spectrum":
            return cmd_spectrum(cfg)
        return cmd_check(cfg)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"kerrjc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParameterError, UnsupportedRegimeError, TypeError) as exc:
        print(f"kerrjc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KerrJCError as exc:
        print(f"kerrjc: computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
