"""Command-line front end: presets, CSV output and run manifests.

Every run writes its data as CSV with a fixed ``%.17g`` format and a JSON
manifest that records the configuration, all module defaults, the coupling
ratio ``kappa / kappa_0`` and the diagnostics gathered on the way.  Only the
manifest carries a timestamp, so data files are byte-reproducible.
"""

from __future__ import annotations

import argparse
import dataclasses
import datetime
import hashlib
import json
import logging
import math
import os
import random
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dispersive import (
    DECAY_WINDOW,
    RICHARDSON_TOL,
    SATURATION,
    decay_study,
)
from .evolve import (
    EDGE_LEVEL,
    TAIL_BUDGET,
    TRACE_SPREAD,
    TRACE_WINDOW,
    InitialDatum,
    Propagator,
    boundary_traces,
    classical_heat_evolve,
)
from .exceptions import BridgingHeatError, ConfigError, DomainError
from .extensions import bc_residual, bridging_spec
from .grid import GRID_DEFAULTS, PRODUCT_CELLS, SampledFunction, SpatialGrid
from .heat_kernel import CONTOUR_DEFAULTS, CONTOUR_KINDS, Contour, heat_kernel
from .resolvent import (
    CALIBRATION_POINTS,
    CALIBRATION_TOL,
    CALIBRATION_Z_TOL,
    IDENTITY_EXCLUDE_RADIUS,
    KAPPA_PRINTED,
    NEAR_ORIGIN,
    coupling,
)
from .scattering import UNIT_MODULUS_TOL, bridging_coefficients, reflection, transmission
from .special_functions import (
    ASYMPTOTIC_RADIUS,
    ENVELOPE_ABS,
    ENVELOPE_IMAG,
    HANKEL_SERIES_HEIGHT,
    LAGUERRE_NODES,
    SERIES_RADIUS,
    bessel_j,
    bessel_y,
    gamma_real,
)

__all__ = [
    "RunConfig",
    "MODES",
    "FIGURES",
    "OUT_ENV",
    "parse_config_file",
    "parse_datum",
    "build_config",
    "run",
    "main",
    "interior_maxima",
]

log = logging.getLogger("bridging_heat")

MODES = ("kernel", "evolve", "scatter", "bc-check", "decay", "figure", "selftest")
FIGURES = ("fig2", "fig3", "fig4", "fig5")
OUT_ENV = "BRIDGING_HEAT_OUT"
CSV_FORMAT = "%.17g"
PRESET_ALPHA = 0.5
# local maxima below this fraction of the peak away from the origin are noise
MAXIMA_FLOOR = 1.0e-3
# |x| below which the origin behaviour |x|^(-alpha/2) dominates the profile
ORIGIN_RADIUS = 0.25
BC_TOL = 1.0e-3
DECAY_L = 30.0

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SELFTEST = 0, 2, 3, 4

# config key -> (RunConfig field, parser)
_KEYS = {
    "alpha": ("alpha", float),
    "t": ("times", "floats"),
    "datum": ("datum", str),
    "grid-L": ("grid_L", float),
    "grid-h": ("grid_h", float),
    "grid-ratio": ("grid_ratio", float),
    "contour": ("contour", str),
    "nodes": ("nodes", int),
    "kappa": ("kappa", str),
    "out": ("out", str),
    "x": ("x", "floats"),
    "y": ("y", "floats"),
    "a": ("a", complex),
    "gamma": ("gamma", float),
    "energies": ("energies", "floats"),
    "p": ("p", float),
    "r": ("r", float),
    "flow": ("flow", str),
}


@dataclass
class RunConfig:
    """Validated settings of one run.

    ``None`` marks a value the mode fills in from its own default.
    """

    mode: str
    figure: str | None = None
    alpha: float | None = None
    times: tuple | None = None
    datum: str | None = None
    grid_L: float | None = None
    grid_h: float = GRID_DEFAULTS["h"]
    grid_ratio: float = GRID_DEFAULTS["ratio"]
    contour: str = "talbot"
    nodes: int = CONTOUR_DEFAULTS["nodes"]
    kappa: str = "calibrated"
    out: str | None = None
    x: tuple = (-2.0, -1.0, 1.0, 2.0)
    y: tuple = (-2.0, -1.0, 1.0, 2.0)
    a: complex = 1.0
    gamma: float = 0.0
    energies: tuple = (0.1, 1.0, 10.0)
    p: float = math.inf
    r: float = 1.0
    flow: str = "bridging"
    sources: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        def bad(key, msg):
            where = self.sources.get(key, f"--{key}")
            raise ConfigError(f"{where}: {msg}")

        if self.mode not in MODES:
            bad("mode", f"unknown mode {self.mode!r}")
        if self.mode == "figure" and self.figure not in FIGURES:
            bad("figure", f"figure must be one of {', '.join(FIGURES)}")
        if self.alpha is not None and not (0.0 <= self.alpha < 1.0):
            bad("alpha", "alpha must lie in [0, 1)")
        if self.times is not None:
            if not self.times or not all(math.isfinite(t) and t > 0 for t in self.times):
                bad("t", "times must be positive")
        if self.datum is not None:
            try:
                parse_datum(self.datum)
            except (ValueError, DomainError) as exc:
                bad("datum", str(exc))
        if self.grid_L is not None and not (math.isfinite(self.grid_L) and self.grid_L > 1.0):
            bad("grid-L", "grid-L must exceed 1")
        if not (0.0 < self.grid_h <= 1.0):
            bad("grid-h", "grid-h must lie in (0, 1]")
        if not (0.0 < self.grid_ratio < 1.0):
            bad("grid-ratio", "grid-ratio must lie in (0, 1)")
        if self.contour not in CONTOUR_KINDS:
            bad("contour", f"contour must be one of {', '.join(CONTOUR_KINDS)}")
        if not (8 <= self.nodes <= CONTOUR_DEFAULTS["max_nodes"]):
            bad("nodes", f"nodes must lie in [8, {CONTOUR_DEFAULTS['max_nodes']}]")
        if self.kappa not in ("calibrated", "verbatim"):
            bad("kappa", "kappa must be 'calibrated' or 'verbatim'")
        if not (math.isfinite(abs(self.a)) and math.isfinite(self.gamma)):
            bad("a", "a and gamma must be finite")
        if not self.energies or not all(math.isfinite(e) and e > 0 for e in self.energies):
            bad("energies", "energies must be positive")
        if any(v == 0 or not math.isfinite(v) for v in self.x + self.y):
            bad("x", "kernel coordinates must be finite and nonzero")
        if not (self.p >= 1 and self.r >= 1 and self.r <= self.p):
            bad("p", "need 1 <= r <= p")
        if self.flow not in ("bridging", "classical"):
            bad("flow", "flow must be 'bridging' or 'classical'")
        return self

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out.pop("sources")
        return out


def _floats(text: str) -> tuple:
    items = [s for s in str(text).split(",") if s.strip()]
    if not items:
        raise ValueError("empty list")
    return tuple(float(s) for s in items)


def _convert(key: str, raw: str):
    name, kind = _KEYS[key]
    if kind == "floats":
        return name, _floats(raw)
    if kind is complex:
        return name, complex(raw.replace(" ", "").replace("i", "j"))
    return name, kind(raw.strip())


def parse_datum(text: str) -> InitialDatum:
    """``gaussian:center,width[,momentum]`` or ``indicator:lo,hi``."""
    kind, _, args = str(text).partition(":")
    vals = _floats(args) if args else ()
    if kind == "gaussian" and len(vals) in (2, 3):
        return InitialDatum.gaussian(*vals)
    if kind == "indicator" and len(vals) == 2:
        return InitialDatum.indicator(*vals)
    raise ValueError(f"cannot parse datum {text!r}")


def parse_config_file(path: str | os.PathLike) -> tuple[dict, dict]:
    """Read ``key = value`` lines; ``#`` starts a comment.

    Returns
    -------
    values : dict
        RunConfig field name to parsed value.
    sources : dict
        Key to ``"file:line"`` for error messages.
    """
    values, sources = {}, {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for num, line in enumerate(lines, 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        key, sep, raw = body.partition("=")
        key = key.strip()
        where = f"{path}:{num} ({key})"
        if not sep:
            raise ConfigError(f"{path}:{num}: expected 'key = value'")
        if key not in _KEYS:
            raise ConfigError(f"{where}: unknown key")
        try:
            name, val = _convert(key, raw.strip())
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from exc
        values[name] = val
        sources[key] = where
    return values, sources


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    for key in _KEYS:
        common.add_argument(f"--{key}", dest=key.replace("-", "_"), default=None)
    common.add_argument("--config", default=None, help="key = value file; flags override it")
    common.add_argument("-q", "--quiet", action="store_true")
    parser = argparse.ArgumentParser(prog="bridging-heat", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        sp = sub.add_parser(mode, parents=[common])
        if mode == "figure":
            sp.add_argument("figure", choices=FIGURES)
    return parser


def build_config(argv: list[str]) -> tuple[RunConfig, bool]:
    """Parse arguments (and an optional config file) into a RunConfig."""
    ns = _parser().parse_args(argv)
    values, sources = {}, {}
    if ns.config:
        values, sources = parse_config_file(ns.config)
    for key in _KEYS:
        raw = getattr(ns, key.replace("-", "_"))
        if raw is None:
            continue
        try:
            name, val = _convert(key, raw)
        except ValueError as exc:
            raise ConfigError(f"--{key}: {exc}") from exc
        values[name] = val
        sources[key] = f"--{key}"
    cfg = RunConfig(mode=ns.mode, figure=getattr(ns, "figure", None), sources=sources, **values)
    return cfg.validate(), ns.quiet


# --- output helpers ---------------------------------------------------------

def _out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out or os.environ.get(OUT_ENV) or "bridging_heat_out")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_csv(path: Path, header: list[str], columns: list[np.ndarray]) -> str:
    rows = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    lines = [",".join(header)]
    lines += [",".join(CSV_FORMAT % v for v in row) for row in rows]
    data = ("\n".join(lines) + "\n").encode()
    path.write_bytes(data)
    return hashlib.sha256(data).hexdigest()


def _evolution_csv(path: Path, u: SampledFunction) -> str:
    v = u.values
    return _write_csv(path, ["x", "Re u", "Im u", "|u|"], [u.x, v.real, v.imag, np.abs(v)])


def _jsonable(obj):
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.complexfloating):
        return [float(obj.real), float(obj.imag)]
    return obj


def module_defaults() -> dict:
    """Every tunable default, grouped by module."""
    return {
        "special_functions": {
            "series_radius": SERIES_RADIUS,
            "asymptotic_radius": ASYMPTOTIC_RADIUS,
            "hankel_series_height": HANKEL_SERIES_HEIGHT,
            "laguerre_nodes": LAGUERRE_NODES,
            "envelope_abs": ENVELOPE_ABS,
            "envelope_imag": ENVELOPE_IMAG,
        },
        "resolvent": {
            "kappa_printed": KAPPA_PRINTED,
            "near_origin": NEAR_ORIGIN,
            "calibration_tol": CALIBRATION_TOL,
            "calibration_z_tol": CALIBRATION_Z_TOL,
            "calibration_points": list(CALIBRATION_POINTS),
            "identity_exclude_radius": IDENTITY_EXCLUDE_RADIUS,
        },
        "grid": dict(GRID_DEFAULTS, product_cells=PRODUCT_CELLS),
        "heat_kernel": dict(CONTOUR_DEFAULTS),
        "evolve": {
            "tail_budget": TAIL_BUDGET,
            "edge_level": EDGE_LEVEL,
            "trace_window": list(TRACE_WINDOW),
            "trace_spread": TRACE_SPREAD,
        },
        "scattering": {"unit_modulus_tol": UNIT_MODULUS_TOL},
        "dispersive": {
            "decay_window": list(DECAY_WINDOW),
            "richardson_tol": RICHARDSON_TOL,
            "benchmark_saturation": SATURATION,
        },
        "cli": {
            "preset_alpha": PRESET_ALPHA,
            "maxima_floor": MAXIMA_FLOOR,
            "origin_radius": ORIGIN_RADIUS,
            "bc_tol": BC_TOL,
            "decay_L": DECAY_L,
            "csv_format": CSV_FORMAT,
        },
    }


class _Run:
    """State shared by the stages of one invocation."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.out = _out_dir(cfg)
        self.outputs: dict[str, str] = {}
        self.diagnostics: dict = {}
        self.checks: dict = {}
        self.stage = "setup"
        self.resolved: dict = {}

    @property
    def alpha(self) -> float:
        return PRESET_ALPHA if self.cfg.alpha is None else self.cfg.alpha

    def grid(self, alpha: float, L: float | None = None) -> SpatialGrid:
        L = self.cfg.grid_L if self.cfg.grid_L is not None else (L or GRID_DEFAULTS["L"])
        self.resolved["grid_L"] = L
        return SpatialGrid.build(L=L, h=self.cfg.grid_h, ratio=self.cfg.grid_ratio, alpha=alpha)

    def contour(self) -> Contour:
        return Contour(self.cfg.contour, self.cfg.nodes)

    def propagator(self, alpha: float, grid: SpatialGrid) -> Propagator:
        self.stage = "kernel calibration"
        kap = coupling(alpha, self.cfg.kappa)
        self.diagnostics["kappa"] = kap
        self.diagnostics["kappa_over_kappa0"] = kap / KAPPA_PRINTED
        return Propagator(alpha, grid, self.contour(), self.cfg.kappa)

    def csv(self, name: str, writer, *args) -> None:
        self.outputs[name] = writer(self.out / name, *args)
        log.info("wrote %s", self.out / name)

    def manifest(self, stem: str, captured: list) -> Path:
        record = {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "version": __version__,
            "mode": self.cfg.mode,
            "figure": self.cfg.figure,
            "config": self.cfg.as_dict(),
            "resolved": self.resolved,
            "defaults": module_defaults(),
            "diagnostics": self.diagnostics,
            "checks": self.checks,
            "warnings": [f"{w.category.__name__}: {w.message}" for w in captured],
            "outputs": self.outputs,
        }
        path = self.out / f"{stem}_manifest.json"
        path.write_text(json.dumps(_jsonable(record), indent=2, sort_keys=True) + "\n")
        return path


def _tag(t: float) -> str:
    return f"{t:g}"


def _propagator_info(prop: Propagator) -> dict:
    return {_tag(t): info for t, info in sorted(prop.diagnostics.items())}


# --- qualitative profile checks ---------------------------------------------

def interior_maxima(u: SampledFunction, lo: float = 0.0, floor: float = MAXIMA_FLOOR) -> list[float]:
    """Positions of strict interior local maxima of ``|u|`` on ``x > lo``.

    Grid endpoints are never counted, so the rise of ``|u|`` towards the
    origin is not a maximum.  Maxima below ``floor`` times the largest
    ``|u|`` on ``|x| >= 0.25`` are ignored as tail noise.
    """
    x = u.x
    m = np.abs(u.values)
    ref = float(m[np.abs(x) >= ORIGIN_RADIUS].max())
    sel = np.flatnonzero(x > lo)
    xs, ms = x[sel], m[sel]
    peaks = (ms[1:-1] > ms[:-2]) & (ms[1:-1] >= ms[2:]) & (ms[1:-1] > floor * ref)
    return [float(v) for v in xs[1:-1][peaks]]


def _second_difference_max(u: SampledFunction, radius: float) -> float:
    """Largest discrete second derivative of ``u`` on ``|x| >= radius``."""
    best = 0.0
    grid = u.grid
    s = grid.half
    for side in grid.fold(u.values):
        i = np.flatnonzero(s >= radius)[1:-1]
        d2 = (
            2.0 * side[i - 1] / ((s[i] - s[i - 1]) * (s[i + 1] - s[i - 1]))
            - 2.0 * side[i] / ((s[i] - s[i - 1]) * (s[i + 1] - s[i]))
            + 2.0 * side[i + 1] / ((s[i + 1] - s[i]) * (s[i + 1] - s[i - 1]))
        )
        best = max(best, float(np.max(np.abs(d2))))
    return best


# --- modes -------------------------------------------------------------------

def _run_kernel(run: _Run) -> None:
    cfg = run.cfg
    alpha = 0.0 if cfg.alpha is None else cfg.alpha
    times = cfg.times or (0.5,)
    run.resolved.update(alpha=alpha, times=times)
    run.stage = "heat kernel"
    xx, yy = np.meshgrid(np.array(cfg.x), np.array(cfg.y), indexing="ij")
    cols = {"t": [], "x": [], "y": [], "K": []}
    info = {}
    for t in times:
        kv = heat_kernel(alpha, t, xx, yy, run.contour(), cfg.kappa, full_output=True)
        info[_tag(t)] = {"nodes": kv.nodes, "doubling_change": kv.doubling_change,
                         "imag_residue": kv.imag_residue}
        cols["t"].append(np.full(xx.size, t))
        cols["x"].append(xx.ravel())
        cols["y"].append(yy.ravel())
        cols["K"].append(np.asarray(kv.value).ravel())
    run.diagnostics["kernel"] = info
    run.diagnostics["kappa_over_kappa0"] = coupling(alpha, cfg.kappa) / KAPPA_PRINTED
    run.csv("kernel.csv", _write_csv, list(cols), [np.concatenate(v) for v in cols.values()])


def _evolve_set(run: _Run, alpha: float, datum: InitialDatum, times, prefix: str,
                grid: SpatialGrid | None = None, prop: Propagator | None = None) -> dict:
    grid = grid or run.grid(alpha)
    prop = prop or run.propagator(alpha, grid)
    sols = {}
    for t in times:
        run.stage = f"evolution to t={_tag(t)}"
        u = prop.evolve(t, datum)
        sols[t] = u
        run.csv(f"{prefix}_t{_tag(t)}.csv", _evolution_csv, u)
    run.diagnostics.setdefault("kernel_blocks", {}).update(_propagator_info(prop))
    run.diagnostics["grid"] = grid.describe()
    return sols


def _run_evolve(run: _Run) -> None:
    cfg = run.cfg
    alpha, times = run.alpha, cfg.times or (0.5, 2.0)
    datum = parse_datum(cfg.datum or "gaussian:2,1")
    run.resolved.update(alpha=alpha, times=times, datum=datum.describe())
    _evolve_set(run, alpha, datum, times, "evolve")


def _run_scatter(run: _Run) -> None:
    cfg = run.cfg
    alpha = run.alpha
    run.resolved.update(alpha=alpha)
    run.stage = "scattering coefficients"
    p = (cfg.a, cfg.gamma)
    e = np.array(cfg.energies, dtype=float)
    t = np.array([transmission(alpha, p, v) for v in e])
    r = np.array([reflection(alpha, p, v) for v in e])
    run.diagnostics["max_unit_defect"] = float(np.max(np.abs(t + r - 1.0)))
    run.csv("scatter.csv", _write_csv, ["alpha", "E", "T", "R"], [np.full(e.size, alpha), e, t, r])


def _bc_report(run: _Run, alpha: float, sols: dict) -> dict:
    spec = bridging_spec()
    report, ok = {}, True
    for t, u in sols.items():
        run.stage = f"boundary traces at t={_tag(t)}"
        tr = boundary_traces(u, alpha)
        r0, r1 = bc_residual(spec, tr)
        rel0 = r0 / max(abs(tr.u0_plus), 1e-300)
        rel1 = r1 / max(abs(tr.u1_plus), 1.0)
        passed = bool(rel0 <= BC_TOL and rel1 <= BC_TOL)
        ok &= passed
        report[_tag(t)] = {"traces": list(tr.as_tuple()), "spread": list(tr.spread),
                           "residual_u0": r0, "residual_u1": r1,
                           "relative_u0": rel0, "relative_u1": rel1, "pass": passed}
    return report, ok


def _run_bc_check(run: _Run) -> None:
    cfg = run.cfg
    alpha, times = run.alpha, cfg.times or (0.5,)
    datum = parse_datum(cfg.datum or "gaussian:2,1")
    run.resolved.update(alpha=alpha, times=times, datum=datum.describe())
    sols = _evolve_set(run, alpha, datum, times, "bc_check")
    report, ok = _bc_report(run, alpha, sols)
    run.diagnostics["bridging_traces"] = report
    run.checks["bridging_conditions"] = ok
    rows = []
    for t, rec in report.items():
        rows.append([float(t)] + [c for v in rec["traces"] for c in (v.real, v.imag)]
                    + [rec["residual_u0"], rec["residual_u1"]])
    header = ["t", "Re u0-", "Im u0-", "Re u0+", "Im u0+", "Re u1-", "Im u1-", "Re u1+",
              "Im u1+", "res0", "res1"]
    run.csv("bc_check.csv", _write_csv, header, list(np.array(rows).T))
    for t, rec in report.items():
        log.info("t=%s  |u0- - u0+| = %.3e  |u1- + u1+| = %.3e  %s", t, rec["residual_u0"],
                 rec["residual_u1"], "ok" if rec["pass"] else "FAIL")


def _run_decay(run: _Run) -> None:
    cfg = run.cfg
    bridging = cfg.flow == "bridging"
    alpha = run.alpha if bridging else None
    times = cfg.times or tuple(np.geomspace(*DECAY_WINDOW, 8))
    datum = parse_datum(cfg.datum or "gaussian:2,1")
    run.resolved.update(alpha=alpha, times=times, datum=datum.describe(), flow=cfg.flow)
    grid = run.grid(alpha or 0.0, L=DECAY_L)
    prop = run.propagator(alpha, grid) if bridging else None
    run.stage = "decay fit"
    study = decay_study(datum, cfg.p, cfg.r, times, grid, alpha, propagator=prop)
    run.diagnostics["decay"] = study.describe()
    if prop is not None:
        run.diagnostics["kernel_blocks"] = _propagator_info(prop)
    run.csv("decay.csv", _write_csv, ["t", "norm"], [study.times, study.values])
    log.info("fitted exponent %.6f (residual %.2e)", study.fit.exponent, study.fit.fit_residual)


def _run_figure(run: _Run) -> None:
    cfg, name = run.cfg, run.cfg.figure
    alpha = run.alpha
    run.resolved["alpha"] = alpha
    grid = run.grid(alpha)
    prop = run.propagator(alpha, grid)
    if name == "fig2":
        datum = parse_datum(cfg.datum or "gaussian:2,1")
        times = cfg.times or (0.5, 2.0)
        sols = _evolve_set(run, alpha, datum, times, "fig2", grid, prop)
        peaks = {_tag(t): interior_maxima(u) for t, u in sols.items()}
        heights = [float(np.abs(u.values)[np.abs(u.x) >= ORIGIN_RADIUS].max()) for u in sols.values()]
        run.diagnostics["fig2"] = {"interior_maxima": peaks, "peak_height": heights}
        run.checks["single_maximum"] = all(len(p) == 1 for p in peaks.values())
        run.checks["flattening"] = all(b < a for a, b in zip(heights, heights[1:]))
        run.checks["bridging_conditions"] = _bc_report(run, alpha, sols)[1]
    elif name == "fig3":
        times = cfg.times or (1.5,)
        zero = parse_datum("gaussian:2,1")
        kicked = parse_datum(cfg.datum or "gaussian:2,1,-3")
        base = _evolve_set(run, alpha, zero, times, "fig3_zero_momentum", grid, prop)
        sols = _evolve_set(run, alpha, kicked, times, "fig3_momentum", grid, prop)
        peaks = {_tag(t): interior_maxima(u) for t, u in sols.items()}
        run.diagnostics["fig3"] = {
            "interior_maxima_momentum": peaks,
            "interior_maxima_zero_momentum": {_tag(t): interior_maxima(u) for t, u in base.items()},
        }
        run.checks["two_maxima_right"] = all(len(p) >= 2 for p in peaks.values())
    elif name == "fig4":
        datum = parse_datum(cfg.datum or "indicator:0.5,1.5")
        times = cfg.times or (0.5,)
        sols = _evolve_set(run, alpha, datum, times, "fig4", grid, prop)
        info, mass_ok, smooth_ok = {}, True, True
        for t, u in sols.items():
            left = u.x < 0
            mass = float(np.dot(u.grid.weights[left], u.values.real[left]))
            d2 = _second_difference_max(u, ORIGIN_RADIUS)
            # heat smoothing gives ||u''|| <= 0.48 / t ||phi||_inf on the free line
            bound = 1.0 / t
            info[_tag(t)] = {"mass_left": mass, "max_second_difference": d2, "bound": bound}
            mass_ok &= mass > 1e-3
            smooth_ok &= d2 <= bound
        run.diagnostics["fig4"] = info
        run.checks["mass_left"] = mass_ok
        run.checks["bounded_second_difference"] = smooth_ok
    else:
        datum = parse_datum(cfg.datum or "gaussian:2,1")
        times = cfg.times or (1.5,)
        sols = _evolve_set(run, alpha, datum, times, "fig5_bridging", grid, prop)
        shared = True
        for t, u in sols.items():
            run.stage = f"classical flow at t={_tag(t)}"
            c = classical_heat_evolve(t, datum, grid)
            run.csv(f"fig5_classical_t{_tag(t)}.csv", _evolution_csv, c)
            shared &= np.array_equal(c.x, u.x)
            run.diagnostics.setdefault("fig5", {})[_tag(t)] = {
                "max_difference": float(np.max(np.abs(u.values - c.values)[np.abs(u.x) >= ORIGIN_RADIUS]))
            }
        run.checks["shared_grid"] = bool(shared)
    for key, ok in run.checks.items():
        log.info("%s check %s: %s", name, key, "ok" if ok else "FAIL")


def selftest_checks() -> list[tuple[str, bool, str]]:
    """Fast acceptance subset: alpha = 0 kernel, scattering, special functions, traces."""
    results = []
    xs = np.array([-2.0, -0.5, 0.5, 2.0])
    xx, yy = np.meshgrid(xs, xs, indexing="ij")
    t = 0.5
    k = heat_kernel(0.0, t, xx, yy)
    g = np.exp(-((xx - yy) ** 2) / (4 * t)) / math.sqrt(4 * math.pi * t)
    err = float(np.max(np.abs(k - g) / g))
    results.append(("alpha=0 kernel", err <= 1e-4, f"max rel err {err:.2e}"))

    rng = random.Random(0)
    worst = 0.0
    for _ in range(200):
        al = rng.uniform(0, 0.99)
        p = (complex(rng.uniform(-2, 2), rng.uniform(-2, 2)), rng.uniform(-5, 5))
        e = 10 ** rng.uniform(-6, 6)
        worst = max(worst, abs(transmission(al, p, e) + reflection(al, p, e) - 1))
    tb, rb = bridging_coefficients(0.5)
    ok = worst <= 1e-12 and abs(tb - 0.5) <= 1e-12 and abs(rb - 0.5) <= 1e-12
    results.append(("scattering", ok, f"max |T+R-1| {worst:.1e}"))

    werr = 0.0
    for nu in (0.25, 0.75):
        for z in (0.3 + 0.2j, 2.0 + 1.0j, 15.0 + 0.5j):
            w = bessel_j(nu + 1, z) * bessel_y(nu, z) - bessel_j(nu, z) * bessel_y(nu + 1, z)
            werr = max(werr, abs(w - 2 / (math.pi * z)) / abs(2 / (math.pi * z)))
    gerr = abs(gamma_real(0.5) - math.sqrt(math.pi))
    results.append(("special functions", werr <= 1e-10 and gerr <= 1e-14,
                    f"Wronskian {werr:.1e}, Gamma {gerr:.1e}"))

    grid = SpatialGrid.build(alpha=0.5)
    u = Propagator(0.5, grid).evolve(0.5, InitialDatum.gaussian(2.0, 1.0))
    tr = boundary_traces(u, 0.5)
    r0, r1 = tr.bridging_residuals()
    ok = r0 <= BC_TOL * abs(tr.u0_plus) and r1 <= BC_TOL * max(abs(tr.u1_plus), 1.0)
    results.append(("bridging traces", ok, f"residuals {r0:.1e}, {r1:.1e}"))
    return results


def _run_selftest(run: _Run) -> bool:
    run.stage = "self-test"
    results = selftest_checks()
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        run.checks[name] = ok
    return all(ok for _, ok, _ in results)


_HANDLERS = {
    "kernel": _run_kernel,
    "evolve": _run_evolve,
    "scatter": _run_scatter,
    "bc-check": _run_bc_check,
    "decay": _run_decay,
    "figure": _run_figure,
}


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration and return the exit status."""
    run_ = _Run(cfg)
    stem = cfg.figure if cfg.mode == "figure" else cfg.mode.replace("-", "_")
    status = EXIT_OK
    with warnings.catch_warnings(record=True) as captured:
        warnings.simplefilter("always")
        try:
            if cfg.mode == "selftest":
                status = EXIT_OK if _run_selftest(run_) else EXIT_SELFTEST
            else:
                _HANDLERS[cfg.mode](run_)
        except BridgingHeatError as exc:
            log.error("numerical failure during %s: %s", run_.stage, exc)
            run_.diagnostics["failure"] = {"stage": run_.stage, "error": repr(exc)}
            status = EXIT_NUMERICAL
    for w in captured:
        log.warning("%s: %s", w.category.__name__, w.message)
    path = run_.manifest(stem, captured)
    log.info("manifest %s", path)
    return status


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg, quiet = build_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.WARNING if quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
