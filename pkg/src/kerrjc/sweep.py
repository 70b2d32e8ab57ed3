"""Parameter sweeps over one or two model parameters, dip finding and contours."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

from ._version import __version__
from .analytic import require_weak_drive_regime, analytic_g2, steady_amplitudes
from .dynamics import (
    DEFAULT_TOLERANCES,
    Tolerances,
    g2_zero,
    liouvillian,
    mean_photon,
    photon_distribution,
    poisson_deviation,
    steady_state,
    steady_state_residual,
)
from .errors import KerrJCError, ParameterError, SweepError, UnsupportedRegimeError
from .hilbert import Slot
from .model import CONFIG_KEYS, ModelParams, build_hamiltonian, collapse_operators

OBSERVABLES = ("g2_cw", "g2_analytic", "mean_n_cw", "p1", "p2", "poisson_dev")
METHODS = ("numeric", "analytic", "both")
NUMERIC_ONLY = {"g2_cw", "poisson_dev"}
ANALYTIC_ONLY = {"g2_analytic"}
# short names accepted as sweep axes (n_cut is not sweepable)
AXIS_NAMES = tuple(k for k in CONFIG_KEYS if k != "n_cut")
_FIELD_TO_KEY = {v: k for k, v in CONFIG_KEYS.items()}

MAX_FAILURE_FRACTION = 0.5
FLOAT_FORMAT = "{:.12g}"


def _canonical_axis_name(name: str) -> str:
    name = _FIELD_TO_KEY.get(name, name)
    if name not in AXIS_NAMES:
        raise ParameterError(f"unknown sweep parameter {name!r}; choose from {AXIS_NAMES}")
    return name


@dataclass(frozen=True)
class Axis:
    """Inclusive linear grid ``start..stop`` with ``count`` points."""

    name: str
    start: float
    stop: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "name", _canonical_axis_name(self.name))
        object.__setattr__(self, "start", float(self.start))
        object.__setattr__(self, "stop", float(self.stop))
        if int(self.count) != self.count or self.count < 2:
            raise ParameterError(f"axis {self.name}: count must be an integer >= 2")
        object.__setattr__(self, "count", int(self.count))
        if not self.start < self.stop:
            raise ParameterError(f"axis {self.name}: start must be < stop")

    @classmethod
    def parse(cls, name: str, text: str) -> "Axis":
        """Parse ``start:stop:count``."""
        parts = text.split(":")
        if len(parts) != 3:
            raise ParameterError(f"range {text!r} must look like start:stop:count")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ParameterError(f"range {text!r} must look like start:stop:count") from None
        return cls(name, start, stop, count)

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    @property
    def step(self) -> float:
        return (self.stop - self.start) / (self.count - 1)

    def to_text(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


@dataclass(frozen=True)
class SweepSpec:
    base: ModelParams
    axis1: Axis
    axis2: Axis | None = None
    observables: tuple[str, ...] = ()
    method: str = "numeric"
    tolerances: Tolerances = DEFAULT_TOLERANCES

    def __post_init__(self):
        if self.method not in METHODS:
            raise ParameterError(f"method must be one of {METHODS}, got {self.method!r}")
        obs = tuple(self.observables)
        if not obs:
            obs = {
                "numeric": ("g2_cw",),
                "analytic": ("g2_analytic",),
                "both": ("g2_cw", "g2_analytic"),
            }[self.method]
        for o in obs:
            if o not in OBSERVABLES:
                raise ParameterError(f"unknown observable {o!r}; choose from {OBSERVABLES}")
        if len(set(obs)) != len(obs):
            raise ParameterError("observables must not repeat")
        if self.method == "numeric" and ANALYTIC_ONLY & set(obs):
            raise ParameterError("g2_analytic requires method 'analytic' or 'both'")
        if self.method == "analytic" and NUMERIC_ONLY & set(obs):
            raise ParameterError(
                f"{sorted(NUMERIC_ONLY & set(obs))} require method 'numeric' or 'both'"
            )
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ParameterError("the two sweep axes must differ")
        object.__setattr__(self, "observables", obs)
        # every grid point must construct valid parameters
        for _, _, p in self.points():
            if self.uses_analytic:
                require_weak_drive_regime(p)

    @property
    def axes(self) -> tuple[Axis, ...]:
        return (self.axis1,) if self.axis2 is None else (self.axis1, self.axis2)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(a.count for a in self.axes)

    @property
    def uses_numeric(self) -> bool:
        return self.method in ("numeric", "both")

    @property
    def uses_analytic(self) -> bool:
        return self.method in ("analytic", "both")

    def points(self) -> Iterable[tuple[int, int, ModelParams]]:
        """Grid points in lexicographic (axis1, axis2) index order."""
        v2 = [None] if self.axis2 is None else list(self.axis2.values)
        for i, x in enumerate(self.axis1.values):
            for j, y in enumerate(v2):
                changes = {CONFIG_KEYS[self.axis1.name]: float(x)}
                if y is not None:
                    changes[CONFIG_KEYS[self.axis2.name]] = float(y)
                try:
                    yield i, j, self.base.replace(**changes)
                except ParameterError as exc:
                    raise ParameterError(f"grid point ({i}, {j}) invalid: {exc}") from None

    def observable_columns(self) -> list[str]:
        cols: list[str] = []
        for o in self.observables:
            if o == "g2_cw":
                cols.append("g2_cw")
            elif o == "g2_analytic":
                cols += ["g2_analytic", "g2_analytic_full"]
            elif o == "poisson_dev":
                cols += [f"poisson_ratio_{m}" for m in range(self.base.n_cut)]
            else:
                if self.uses_numeric:
                    cols.append(o)
                if self.uses_analytic:
                    cols.append(f"{o}_analytic")
        return cols

    def columns(self) -> list[str]:
        return [a.name for a in self.axes] + self.observable_columns()

    def to_mapping(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "base": self.base.to_mapping(),
            "axis1": {"name": self.axis1.name, "range": self.axis1.to_text()},
            "observables": list(self.observables),
            "method": self.method,
        }
        if self.axis2 is not None:
            out["axis2"] = {"name": self.axis2.name, "range": self.axis2.to_text()}
        return out


@dataclass
class SweepTable:
    spec: SweepSpec
    columns: tuple[str, ...]
    data: np.ndarray
    status: list[str]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def is_2d(self) -> bool:
        return self.spec.axis2 is not None

    def __len__(self) -> int:
        return self.data.shape[0]

    def column(self, name: str) -> np.ndarray:
        try:
            k = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r}; available: {self.columns}") from None
        return self.data[:, k]

    def grid(self, name: str) -> np.ndarray:
        return self.column(name).reshape(self.spec.shape)

    def rows(self) -> list[dict[str, Any]]:
        out = []
        for r, st in zip(self.data, self.status):
            row = {c: float(v) for c, v in zip(self.columns, r)}
            row["status"] = st
            out.append(row)
        return out

    def to_csv(self, fh, config: dict[str, Any] | None = None) -> None:
        """Header row naming every column; provenance as leading ``#`` lines."""
        if config is not None:
            fh.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
        fh.write("# metadata: " + json.dumps(self.metadata, sort_keys=True) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(list(self.columns) + ["status"])
        for r, st in zip(self.data, self.status):
            writer.writerow([FLOAT_FORMAT.format(v) for v in r] + [st])

    def to_json(self, fh, config: dict[str, Any] | None = None, extra: dict | None = None) -> None:
        def num(v):
            return float(FLOAT_FORMAT.format(v)) if math.isfinite(v) else None

        doc: dict[str, Any] = {
            "config": config,
            "spec": self.spec.to_mapping(),
            "metadata": self.metadata,
            "columns": list(self.columns) + ["status"],
            "rows": [[num(v) for v in r] + [st] for r, st in zip(self.data, self.status)],
        }
        if extra:
            doc.update(extra)
        json.dump(doc, fh, sort_keys=True, indent=1)
        fh.write("\n")

    def to_csv_string(self, config: dict[str, Any] | None = None) -> str:
        buf = io.StringIO()
        self.to_csv(buf, config)
        return buf.getvalue()


def evaluate_numeric(params: ModelParams, observables: Sequence[str], tol: Tolerances):
    """Numeric observables at one point; returns (values dict, residual)."""
    lv = liouvillian(build_hamiltonian(params), collapse_operators(params))
    rho = steady_state(lv, tol)
    out: dict[str, float] = {}
    for o in observables:
        if o == "g2_cw":
            out["g2_cw"] = g2_zero(rho, Slot.CW)
        elif o == "mean_n_cw":
            out["mean_n_cw"] = mean_photon(rho, Slot.CW)
        elif o in ("p1", "p2"):
            out[o] = float(photon_distribution(rho, Slot.CW)[int(o[1])])
        elif o == "poisson_dev":
            p = photon_distribution(rho, Slot.CW)
            ratio = poisson_deviation(p, mean_photon(rho, Slot.CW)).ratio
            for m, r in enumerate(ratio):
                out[f"poisson_ratio_{m}"] = float(r)
    return out, steady_state_residual(lv, rho)


def evaluate_analytic(params: ModelParams, observables: Sequence[str]) -> dict[str, float]:
    amps = steady_amplitudes(params)
    out: dict[str, float] = {}
    for o in observables:
        if o == "g2_analytic":
            g2 = analytic_g2(amps)
            out["g2_analytic"] = g2.approximate
            out["g2_analytic_full"] = g2.full
        elif o == "mean_n_cw":
            out["mean_n_cw_analytic"] = amps.mean_photon_cw
        elif o == "p1":
            out["p1_analytic"] = amps.p1
        elif o == "p2":
            out["p2_analytic"] = amps.p2
    return out


def _evaluate_point(task):
    params, spec = task
    values: dict[str, float] = {}
    errors: list[str] = []
    residual = math.nan
    if spec.uses_numeric:
        try:
            vals, residual = evaluate_numeric(params, spec.observables, spec.tolerances)
            values.update(vals)
        except KerrJCError as exc:
            errors.append(f"numeric {type(exc).__name__}: {exc}")
    if spec.uses_analytic:
        try:
            values.update(evaluate_analytic(params, spec.observables))
        except KerrJCError as exc:
            errors.append(f"analytic {type(exc).__name__}: {exc}")
    status = "ok" if not errors else "; ".join(errors)
    return values, status, residual


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepTable:
    """Evaluate every grid point of ``spec``.

    Points are independent; with ``jobs > 1`` they are spread over a process
    pool, and results are reassembled in grid order so the table does not
    depend on the worker count.
    """
    points = list(spec.points())
    tasks = [(p, spec) for _, _, p in points]
    if jobs > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_evaluate_point, tasks, chunksize=chunk))
    else:
        results = [_evaluate_point(t) for t in tasks]

    obs_cols = spec.observable_columns()
    columns = tuple(spec.columns())
    data = np.full((len(points), len(columns)), np.nan)
    status: list[str] = []
    residuals = []
    for row, ((_, _, p), (values, st, res)) in enumerate(zip(points, results)):
        for k, ax in enumerate(spec.axes):
            data[row, k] = getattr(p, CONFIG_KEYS[ax.name])
        for k, c in enumerate(obs_cols, start=len(spec.axes)):
            data[row, k] = values.get(c, np.nan)
        status.append(st)
        if math.isfinite(res):
            residuals.append(res)

    failures = sum(st != "ok" for st in status)
    if failures > MAX_FAILURE_FRACTION * len(points):
        first = next(st for st in status if st != "ok")
        raise SweepError(f"{failures} of {len(points)} grid points failed; first: {first}")
    metadata = {
        "tool": "kerrjc",
        "version": __version__,
        "n_cut": spec.base.n_cut,
        "method": spec.method,
        "points": len(points),
        "failures": failures,
        "residual_max": max(residuals) if residuals else None,
        "residual_mean": float(np.mean(residuals)) if residuals else None,
    }
    return SweepTable(spec, columns, data, status, metadata)


def local_minima(x: Sequence[float], y: Sequence[float]) -> list[tuple[float, float]]:
    """Interior strict local minima of ``y``; flat bottoms report their first point.

    Endpoints are never reported and NaN breaks a candidate.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    out = []
    i = 1
    n = len(y)
    while i < n - 1:
        if not (np.isfinite(y[i]) and np.isfinite(y[i - 1]) and y[i] < y[i - 1]):
            i += 1
            continue
        k = i
        while k + 1 < n and y[k + 1] == y[i]:
            k += 1
        if k + 1 < n and np.isfinite(y[k + 1]) and y[k + 1] > y[i]:
            out.append((float(x[i]), float(y[i])))
        i = k + 1
    return out


def find_minima(table: SweepTable, observable: str) -> list[tuple[float, float]]:
    if table.is_2d:
        raise SweepError("find_minima is only supported on 1D sweep tables")
    return local_minima(table.column(table.spec.axis1.name), table.column(observable))


def extract_contour(
    table: SweepTable, observable: str, level: float, log_scale: bool = True
) -> list[np.ndarray]:
    """Iso-lines of a 2D table, as ``(k, 2)`` arrays of (axis1, axis2) values.

    Marching squares runs on ``log10`` of the data by default. A level that
    lies outside the data range yields an empty list.
    """
    from skimage.measure import find_contours

    if not table.is_2d:
        raise SweepError("extract_contour needs a 2D sweep table")
    z = np.array(table.grid(observable), dtype=float)
    if log_scale:
        if level <= 0:
            return []
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(z > 0, np.log10(z), np.nan)
        level = math.log10(level)
    finite = np.isfinite(z)
    if not finite.any():
        return []
    lo, hi = np.nanmin(z), np.nanmax(z)
    if not lo < level < hi:
        return []
    filled = np.where(finite, z, lo)
    lines = find_contours(filled, level, mask=finite if not finite.all() else None)
    a1, a2 = table.spec.axis1, table.spec.axis2
    out = []
    for ln in lines:
        pts = np.column_stack([a1.start + ln[:, 0] * a1.step, a2.start + ln[:, 1] * a2.step])
        out.append(pts)
    return out


def locate_minimum(
    base: ModelParams,
    bracket: tuple[float, float],
    param: str = "delta",
    method: str = "analytic",
    xatol: float = 1e-6,
) -> tuple[float, float]:
    """Refine a g2 dip inside ``bracket`` by bounded scalar minimization."""
    from scipy.optimize import minimize_scalar

    field_name = CONFIG_KEYS[_canonical_axis_name(param)]
    if method == "analytic":

        def f(x):
            return analytic_g2(steady_amplitudes(base.replace(**{field_name: x}))).approximate

    elif method == "numeric":

        def f(x):
            vals, _ = evaluate_numeric(base.replace(**{field_name: x}), ["g2_cw"], DEFAULT_TOLERANCES)
            return vals["g2_cw"]

    else:
        raise UnsupportedRegimeError(f"method must be 'analytic' or 'numeric', got {method!r}")
    res = minimize_scalar(f, bounds=bracket, method="bounded", options={"xatol": xatol})
    return float(res.x), float(res.fun)
