"""Experiment harness: parameter sweeps, figure presets, CSV output.

A sweep evaluates a set of MI methods over a one-dimensional grid (splitting
ratio, transmit power or antenna count) or a two-dimensional splitting-ratio
grid, against a fixed channel / noise / weight configuration.  Results come
back as a plain table that renders to CSV with nine significant digits.

Grid points are independent: each gets its own deterministic seed derived
from the sweep master seed and the point index, so output is byte-identical
no matter how many workers execute the points or in which order.
"""

from __future__ import annotations

import dataclasses
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import (ChannelVector, ConfigError, NoiseProfile, ReceiverDesign,
                    TransmitConfig, validate)
from .mi_closed import gain_finite, mi_cd, mi_approx
from .mi_mc import McSettings, estimate_mi
from .optimizer import egc_weights, mrc_weights, optimal_rho, optimal_weights

#: Noise powers used by every figure preset: conversion noise dominates the
#: antenna and rectifier noises by two orders of magnitude.
DEFAULT_NOISE = NoiseProfile(sigma_a_sq=0.01, sigma_cov_sq=1.0, sigma_rec_sq=0.01)

VARIABLES = ("rho-shared", "rho-2d", "power", "antennas")
SCHEMES = ("optimal", "egc", "mrc", "explicit")
METHODS = ("closed-form", "monte-carlo", "cd-baseline", "egc", "mrc", "gain")

_COLUMN_NAMES = {
    "closed-form": "closed_form",
    "monte-carlo": "monte_carlo",
    "cd-baseline": "cd_baseline",
    "egc": "egc",
    "mrc": "mrc",
    "gain": "gain",
}


@dataclass
class SweepSpec:
    """One sweep: a swept variable, its grid, and the fixed configuration.

    ``channel`` is ignored for antenna-count sweeps, where channels are built
    with every magnitude equal to ``antenna_gain``.  ``rho`` fixes the shared
    splitting ratio when it is not the swept variable; None means the
    closed-form optimal ratio.  ``scheme`` picks the combining weights
    evaluated by the ``closed-form`` and ``monte-carlo`` methods.
    """

    variable: str
    grid: np.ndarray
    channel: ChannelVector | None
    noise: NoiseProfile
    power: float
    scheme: str = "optimal"
    alpha: np.ndarray | None = None
    beta: np.ndarray | None = None
    rho: float | None = None
    antenna_gain: float = 1.0
    methods: tuple = ("closed-form",)
    mc: McSettings = field(default_factory=McSettings)
    seed: int = 0
    out: str | None = None

    def __post_init__(self):
        self.grid = np.atleast_1d(np.asarray(self.grid, dtype=float))
        if self.alpha is not None:
            self.alpha = np.atleast_1d(np.asarray(self.alpha, dtype=float))
        if self.beta is not None:
            self.beta = np.atleast_1d(np.asarray(self.beta, dtype=float))
        self.methods = tuple(self.methods)


def check_sweep(spec: SweepSpec) -> None:
    """Validate a sweep spec; raises ConfigError with code ``invalid-sweep``."""
    if spec.variable not in VARIABLES:
        raise ConfigError("invalid-sweep", f"unknown swept variable {spec.variable!r}")
    if spec.grid.size == 0:
        raise ConfigError("invalid-sweep", "empty grid")
    if spec.scheme not in SCHEMES:
        raise ConfigError("invalid-sweep", f"unknown scheme {spec.scheme!r}")
    for m in spec.methods:
        if m not in METHODS:
            raise ConfigError("invalid-sweep", f"unknown method {m!r}")
    if not spec.methods:
        raise ConfigError("invalid-sweep", "no methods requested")
    if spec.variable in ("rho-shared", "rho-2d"):
        if np.any((spec.grid <= 0.0) | (spec.grid >= 1.0)):
            raise ConfigError("invalid-sweep", "rho grid values must lie inside (0, 1)")
    elif spec.variable == "power":
        if np.any(spec.grid <= 0.0):
            raise ConfigError("invalid-sweep", "power grid values must be > 0")
    else:
        if np.any(spec.grid < 1) or np.any(spec.grid != np.round(spec.grid)):
            raise ConfigError("invalid-sweep", "antenna grid values must be integers >= 1")
    if spec.variable == "rho-2d":
        if spec.channel is None or spec.channel.n_antennas != 2:
            raise ConfigError("invalid-sweep", "rho-2d sweeps need a 2-antenna channel")
    if spec.variable != "antennas" and spec.channel is None:
        raise ConfigError("invalid-sweep", "sweep needs a channel")
    if spec.scheme == "explicit" and (spec.alpha is None or spec.beta is None):
        raise ConfigError("invalid-sweep", "explicit scheme needs alpha and beta")
    spec.mc.check()


@dataclass
class ResultTable:
    """Grid-ordered sweep results; renders to CSV with 9 significant digits."""

    columns: list
    rows: list

    def column(self, name: str) -> np.ndarray:
        idx = self.columns.index(name)
        return np.array([row[idx] for row in self.rows], dtype=float)

    def to_csv(self, target) -> None:
        """Write CSV to a path or a text file object."""
        if hasattr(target, "write"):
            self._write(target)
        else:
            with open(target, "w", encoding="ascii", newline="\n") as fh:
                self._write(fh)

    def _write(self, fh):
        fh.write(",".join(self.columns) + "\n")
        for row in self.rows:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")

    def csv_text(self) -> str:
        buf = io.StringIO()
        self._write(buf)
        return buf.getvalue()


def _point_seed(master: int, index: int) -> int:
    return int(np.random.SeedSequence((int(master), int(index))).generate_state(1)[0])


def _scheme_weights(scheme: str, channel: ChannelVector, alpha, beta):
    k = channel.n_antennas
    if scheme == "optimal":
        c = 1.0 / float(np.sum(channel.magnitudes ** 2))
        return optimal_weights(channel, c, c)
    if scheme == "egc":
        return egc_weights(k), egc_weights(k)
    if scheme == "mrc":
        w = mrc_weights(channel)
        return w, w.copy()
    if alpha is None or beta is None or alpha.size != k or beta.size != k:
        raise ConfigError("invalid-sweep", f"explicit weights must have length {k}")
    return alpha, beta


def _closed_form_bits(channel, noise, tx, rho_vec, alpha, beta) -> float:
    if np.all(rho_vec == 1.0):
        return mi_cd(channel, noise, tx).value
    design = ReceiverDesign.splitting(rho_vec, alpha, beta)
    return mi_approx(channel, noise, design, tx).value


def _eval_point(args):
    """Evaluate every requested method at one grid point; returns (index, values)."""
    spec, index, coords = args
    noise = spec.noise

    if spec.variable == "antennas":
        k = int(coords[0])
        channel = ChannelVector(np.full(k, spec.antenna_gain))
    else:
        channel = spec.channel
        k = channel.n_antennas
    power = coords[0] if spec.variable == "power" else spec.power
    tx = TransmitConfig(power=power)

    if spec.variable == "rho-shared":
        rho_vec = np.full(k, coords[0])
    elif spec.variable == "rho-2d":
        rho_vec = np.array(coords, dtype=float)
    else:
        shared = spec.rho if spec.rho is not None else optimal_rho(noise)[0]
        rho_vec = np.full(k, shared)

    alpha, beta = _scheme_weights(spec.scheme, channel, spec.alpha, spec.beta)

    values = []
    for method in spec.methods:
        if method == "closed-form":
            values.append(_closed_form_bits(channel, noise, tx, rho_vec, alpha, beta))
        elif method == "egc":
            a, b = egc_weights(k), egc_weights(k)
            values.append(_closed_form_bits(channel, noise, tx, rho_vec, a, b))
        elif method == "mrc":
            w = mrc_weights(channel)
            values.append(_closed_form_bits(channel, noise, tx, rho_vec, w, w.copy()))
        elif method == "cd-baseline":
            values.append(mi_cd(channel, noise, tx).value)
        elif method == "gain":
            values.append(gain_finite(channel, noise, tx).gain_bits)
        elif method == "monte-carlo":
            if np.all(rho_vec == 1.0):
                design = ReceiverDesign.cd_only(alpha)
            else:
                design = ReceiverDesign.splitting(rho_vec, alpha, beta)
            config = validate(channel, noise, design, tx)
            settings = dataclasses.replace(spec.mc, seed=_point_seed(spec.seed, index))
            est = estimate_mi(config, settings)
            values.append(est.value)
            values.append(est.std_error)
    return index, values


def sweep_columns(spec: SweepSpec) -> list:
    if spec.variable == "rho-shared":
        cols = ["rho"]
    elif spec.variable == "rho-2d":
        cols = ["rho1", "rho2"]
    elif spec.variable == "power":
        cols = ["power"]
    else:
        cols = ["antennas"]
    for m in spec.methods:
        cols.append(_COLUMN_NAMES[m])
        if m == "monte-carlo":
            cols.append("monte_carlo_stderr")
    return cols


def _grid_points(spec: SweepSpec) -> list:
    if spec.variable == "rho-2d":
        return [(r1, r2) for r1 in spec.grid for r2 in spec.grid]
    return [(v,) for v in spec.grid]


def run_sweep(spec: SweepSpec, threads: int = 1) -> ResultTable:
    """Evaluate a sweep; rows are emitted in grid order regardless of the
    execution order of the points.

    Any failure aborts the sweep with the offending grid point identified.
    """
    check_sweep(spec)
    points = _grid_points(spec)
    tasks = [(spec, i, pt) for i, pt in enumerate(points)]
    results = [None] * len(points)
    try:
        if threads > 1 and len(points) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                for index, values in pool.map(_eval_point, tasks):
                    results[index] = values
        else:
            for task in tasks:
                index, values = _eval_point(task)
                results[index] = values
    except (ConfigError, ValueError) as exc:
        failed = [i for i, r in enumerate(results) if r is None]
        at = points[failed[0]] if failed else "?"
        raise ConfigError(getattr(exc, "code", "sweep-failed"),
                          f"sweep failed at grid point {at}: {exc}") from exc
    rows = [list(pt) + results[i] for i, pt in enumerate(points)]
    return ResultTable(columns=sweep_columns(spec), rows=rows)


# ---------------------------------------------------------------------------
# Figure presets
# ---------------------------------------------------------------------------

FIGURES = ("fig2", "fig3", "fig4", "fig5", "fig6")

_RHO_GRID = np.round(np.arange(1, 50) * 0.02, 10)  # 0.02 .. 0.98, step 0.02


def _stack(prefix_name: str, prefix_values, specs, threads) -> ResultTable:
    """Run one sweep per prefix value and concatenate with a leading column."""
    tables = [run_sweep(spec, threads=threads) for spec in specs]
    columns = [prefix_name] + tables[0].columns
    rows = []
    for value, table in zip(prefix_values, tables):
        for row in table.rows:
            rows.append([value] + list(row))
    return ResultTable(columns=columns, rows=rows)


def figure(name: str, mc: McSettings | None = None, seed: int = 0,
           threads: int = 1) -> ResultTable:
    """Reproduce one of the built-in experiment figures as a data table.

    fig2 -- MI vs shared splitting ratio, two equal-gain antennas, equal
            weights 0.5, P in {10, 100, 1000}; closed form and Monte Carlo.
    fig3 -- MI over the (rho1, rho2) grid, 2 antennas with gains (1, 3),
            P = 1000, weights (0.1, 0.9) in both branches; closed form.
    fig4 -- MI vs shared ratio for optimal / EGC / MRC combining, gains
            (1, 3), P = 100.
    fig5 -- Optimized splitting MI and the CD-receiver MI vs antenna count
            (unit gains), P in {10, 100, 1000}.
    fig6 -- Finite-power MI gain vs transmit power on a log grid for
            K in {1, 2, 4, 8} unit-gain antennas.
    """
    mc = mc if mc is not None else McSettings()
    noise = DEFAULT_NOISE
    if name == "fig2":
        powers = (10.0, 100.0, 1000.0)
        specs = [SweepSpec(variable="rho-shared", grid=_RHO_GRID,
                           channel=ChannelVector([1.0, 1.0]), noise=noise, power=p,
                           scheme="explicit", alpha=[0.5, 0.5], beta=[0.5, 0.5],
                           methods=("closed-form", "monte-carlo"), mc=mc,
                           seed=_point_seed(seed, i))
                 for i, p in enumerate(powers)]
        return _stack("power", powers, specs, threads)
    if name == "fig3":
        spec = SweepSpec(variable="rho-2d", grid=_RHO_GRID,
                         channel=ChannelVector([1.0, 3.0]), noise=noise, power=1000.0,
                         scheme="explicit", alpha=[0.1, 0.9], beta=[0.1, 0.9],
                         methods=("closed-form",), seed=seed)
        return run_sweep(spec, threads=threads)
    if name == "fig4":
        spec = SweepSpec(variable="rho-shared", grid=_RHO_GRID,
                         channel=ChannelVector([1.0, 3.0]), noise=noise, power=100.0,
                         scheme="optimal", methods=("closed-form", "egc", "mrc"),
                         seed=seed)
        return run_sweep(spec, threads=threads)
    if name == "fig5":
        powers = (10.0, 100.0, 1000.0)
        specs = [SweepSpec(variable="antennas", grid=np.arange(1, 101),
                           channel=None, noise=noise, power=p, scheme="optimal",
                           methods=("closed-form", "cd-baseline"),
                           seed=_point_seed(seed, i))
                 for i, p in enumerate(powers)]
        return _stack("power", powers, specs, threads)
    if name == "fig6":
        antennas = (1, 2, 4, 8)
        specs = [SweepSpec(variable="power", grid=np.logspace(0.0, 4.0, 33),
                           channel=ChannelVector(np.ones(k)), noise=noise, power=1.0,
                           scheme="optimal", methods=("gain",),
                           seed=_point_seed(seed, i))
                 for i, k in enumerate(antennas)]
        return _stack("antennas", antennas, specs, threads)
    raise ConfigError("unknown-figure", f"unknown figure {name!r}; choose from {FIGURES}")


# ---------------------------------------------------------------------------
# Flat key = value config files
# ---------------------------------------------------------------------------

def parse_config_file(path) -> dict:
    """Parse a flat ``key = value`` config file with ``#`` comments."""
    mapping = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError("invalid-config",
                                  f"{path}:{lineno}: expected 'key = value'")
            key, value = line.split("=", 1)
            mapping[key.strip()] = value.strip()
    return mapping


def _parse_grid(text: str) -> np.ndarray:
    """Grid syntax: ``a,b,c`` explicit, ``start:stop:count`` linear, or
    ``log:start:stop:count`` logarithmic."""
    text = text.strip()
    if text.startswith("log:"):
        start, stop, count = text[4:].split(":")
        return np.logspace(np.log10(float(start)), np.log10(float(stop)), int(count))
    if ":" in text:
        start, stop, count = text.split(":")
        return np.linspace(float(start), float(stop), int(count))
    return np.array([float(v) for v in text.split(",")])


def _parse_floats(text: str) -> np.ndarray:
    return np.array([float(v) for v in text.split(",")])


def build_sweep_spec(mapping: dict) -> SweepSpec:
    """Build a SweepSpec from a flat string mapping (config file or CLI)."""
    known = {"variable", "grid", "channel", "phases", "power", "sigma_a_sq",
             "sigma_cov_sq", "sigma_rec_sq", "scheme", "alpha", "beta", "rho",
             "antenna_gain", "methods", "n_joint", "n_outer", "n_inner",
             "bins_per_dim", "seed", "out"}
    unknown = set(mapping) - known
    if unknown:
        raise ConfigError("invalid-config", f"unknown config keys: {sorted(unknown)}")
    if "variable" not in mapping or "grid" not in mapping:
        raise ConfigError("invalid-config", "config needs 'variable' and 'grid'")

    channel = None
    if "channel" in mapping:
        phases = _parse_floats(mapping["phases"]) if "phases" in mapping else None
        channel = ChannelVector(_parse_floats(mapping["channel"]), phases)
    noise = NoiseProfile(
        sigma_a_sq=float(mapping.get("sigma_a_sq", DEFAULT_NOISE.sigma_a_sq)),
        sigma_cov_sq=float(mapping.get("sigma_cov_sq", DEFAULT_NOISE.sigma_cov_sq)),
        sigma_rec_sq=float(mapping.get("sigma_rec_sq", DEFAULT_NOISE.sigma_rec_sq)))
    mc = McSettings(
        n_joint=int(mapping.get("n_joint", McSettings.n_joint)),
        n_outer=int(mapping.get("n_outer", McSettings.n_outer)),
        n_inner=int(mapping.get("n_inner", McSettings.n_inner)),
        bins_per_dim=(int(mapping["bins_per_dim"]) if "bins_per_dim" in mapping else None))
    methods = tuple(m.strip() for m in mapping.get("methods", "closed-form").split(","))
    return SweepSpec(
        variable=mapping["variable"],
        grid=_parse_grid(mapping["grid"]),
        channel=channel,
        noise=noise,
        power=float(mapping.get("power", 100.0)),
        scheme=mapping.get("scheme", "optimal"),
        alpha=_parse_floats(mapping["alpha"]) if "alpha" in mapping else None,
        beta=_parse_floats(mapping["beta"]) if "beta" in mapping else None,
        rho=float(mapping["rho"]) if "rho" in mapping else None,
        antenna_gain=float(mapping.get("antenna_gain", 1.0)),
        methods=methods,
        mc=mc,
        seed=int(mapping.get("seed", 0)),
        out=mapping.get("out"))
