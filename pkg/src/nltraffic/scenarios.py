"""Reference initial data, experiment recipes and output bundles.

Two analytic profiles anchor the study:

* bump: the compactly supported mollifier exp(-1/(1 - x^2)) on |x| < 1.
  Its upslope crosses the critical curve, so every kernel develops a wave
  breakdown from it.
* subinit: a C^2 profile glued from 1/x^2 (x <= -3), a quintic polynomial
  on (-3, 0] and exp(-x)/9 (x > 0).  It stays strictly below the critical
  curve; with the infinite look-ahead kernel it evolves smoothly forever,
  while kernels with bounded horizon still break down.

The 1/x^2 left tail carries infinite support, so the recommended domain
[-200, 40] truncates it.  The truncated analytic tail mass (1/|x_left|)
is attached to the mass diagnostic only: the look-ahead average only sees
density to the right, so the tail never enters ubar.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .grid import (
    GridFunction,
    GridSpec,
    format_float,
    spatial_derivative,
    write_profile_csv,
)
from .kernels import INFINITE, SK_UNIT, UNIFORM, ZERO, Kernel
from .solver import Diagnostics, SolverConfig, evolve, write_blowup_json
from .threshold import (
    Classification,
    classify_initial_data,
    default_curve,
    write_classification_json,
    write_threshold_csv,
)

COMPARE_KERNELS = (ZERO, SK_UNIT, INFINITE, UNIFORM)


def bump_init(x):
    """Supercritical mollifier bump, exp(-1/(1-x^2)) inside |x| < 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    xi = x[inside]
    out[inside] = np.exp(-1.0 / (1.0 - xi * xi))
    return out


_POLY = np.array([3.0, 35.0, 123.0, 81.0, -162.0, 162.0]) / 1458.0


def subcritical_init(x):
    """Subcritical profile: 1/x^2, quintic bridge, exp(-x)/9 (C^2 joins)."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    left = x <= -3.0
    mid = (~left) & (x <= 0.0)
    right = x > 0.0
    out[left] = 1.0 / x[left] ** 2
    out[mid] = np.polyval(_POLY, x[mid])
    out[right] = np.exp(-x[right]) / 9.0
    return out


@dataclass(frozen=True)
class InitialDatum:
    """Analytic initial profile with its recommended truncation."""

    name: str
    profile: object
    domain: tuple[float, float]
    expected_verdict: str
    # analytic mass beyond a boundary, as functions of the cut position
    left_tail: object = None
    right_tail: object = None

    def sample(self, n_cells: int, domain: tuple[float, float] | None = None) -> GridFunction:
        lo, hi = domain if domain is not None else self.domain
        grid = GridSpec(lo, hi, n_cells)
        return GridFunction.from_callable(grid, self.profile)

    def left_tail_mass(self, x_left: float) -> float:
        return float(self.left_tail(x_left)) if self.left_tail else 0.0

    def right_tail_mass(self, x_right: float) -> float:
        return float(self.right_tail(x_right)) if self.right_tail else 0.0


def _catalog() -> dict[str, InitialDatum]:
    bump = InitialDatum(
        name="bump",
        profile=bump_init,
        domain=(-6.0, 10.0),
        expected_verdict="SUPERCRITICAL",
    )

    def sub_left(x_left):
        if x_left > -3.0:
            raise ValueError("subinit domains must start in the 1/x^2 branch")
        return 1.0 / abs(x_left)  # int_{-inf}^{x_left} x^-2 dx

    sub = InitialDatum(
        name="subinit",
        profile=subcritical_init,
        domain=(-200.0, 40.0),
        expected_verdict="SUBCRITICAL",
        left_tail=sub_left,
        right_tail=lambda x_right: np.exp(-x_right) / 9.0,
    )
    return {"bump": bump, "subinit": sub}


CATALOG = _catalog()


def get_datum(name: str) -> InitialDatum:
    try:
        return CATALOG[name]
    except KeyError:
        raise ValueError(
            f"unknown datum {name!r}; available: {sorted(CATALOG)}"
        ) from None


def random_compact_bump(seed: int, radius: float = 3.0):
    """Random smooth compactly supported bump: gaussians under a mollifier cap.

    Returns a vectorized callable supported on (-radius, radius) with peak
    height in [0.3, 0.9].  Smooth nonnegative compact data of this kind
    always have a supercritical upslope somewhere.
    """
    rng = np.random.default_rng(seed)
    k = rng.integers(1, 4)
    centers = rng.uniform(-radius / 2, radius / 2, size=k)
    widths = rng.uniform(0.3, 1.0, size=k)
    amps = rng.uniform(0.2, 1.0, size=k)
    peak = rng.uniform(0.3, 0.9)

    def raw(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for c, w, a in zip(centers, widths, amps):
            out += a * np.exp(-((x - c) ** 2) / (2.0 * w * w))
        inside = np.abs(x) < radius
        cap = np.zeros_like(x)
        xi = x[inside] / radius
        cap[inside] = np.exp(1.0 - 1.0 / (1.0 - xi * xi))
        return out * cap

    ref = np.linspace(-radius, radius, 4001)
    scale = peak / float(np.max(raw(ref)))

    def profile(x):
        return scale * raw(x)

    return profile


@dataclass(frozen=True)
class Experiment:
    """A named, reproducible run bundle."""

    name: str
    datum: InitialDatum
    kernels: tuple[Kernel, ...]
    n_cells: int = 4000
    t_end: float = 4.0
    snapshot_times: tuple = ()
    cfl: float = 0.45
    scheme: str = "godunov"
    stop_on_blowup: bool = False  # bundles keep evolving to t_end for figures


def experiment_recipes() -> dict[str, Experiment]:
    bump = CATALOG["bump"]
    sub = CATALOG["subinit"]
    return {
        "supercritical-compare": Experiment(
            name="supercritical-compare",
            datum=bump,
            kernels=COMPARE_KERNELS,
            t_end=4.0,
            snapshot_times=(0.0, 1.0, 2.0, 3.0, 4.0),
        ),
        "subcritical-compare": Experiment(
            name="subcritical-compare",
            datum=sub,
            kernels=COMPARE_KERNELS,
            t_end=20.0,
            snapshot_times=(0.0, 5.0, 10.0, 15.0, 20.0),
        ),
        "threshold-contour": Experiment(
            name="threshold-contour",
            datum=bump,
            kernels=(),
            t_end=1.0,
        ),
    }


RECIPES = experiment_recipes()


@dataclass
class ExperimentResult:
    name: str
    classification: Classification
    diagnostics: dict[str, Diagnostics]
    snapshots: dict[str, dict[float, GridFunction]]
    files: list[str]


def _write_overlay(u0: GridFunction, path) -> None:
    curve = default_curve()
    d = spatial_derivative(u0).values
    sig = curve.eval(np.clip(u0.values, 0.0, 1.0))
    with open(path, "w") as fh:
        fh.write("x,u,d,sigma\n")
        for row in zip(u0.x, u0.values, d, sig):
            fh.write(",".join(format_float(v) for v in row) + "\n")


def run_experiment(exp: Experiment, out_dir) -> ExperimentResult:
    """Execute one recipe and write its bundle under out_dir/<name>/."""
    root = Path(out_dir) / exp.name
    root.mkdir(parents=True, exist_ok=True)
    files: list[str] = []

    u0 = exp.datum.sample(exp.n_cells)
    tail_left = exp.datum.left_tail_mass(u0.grid.x_left)
    tail_right = exp.datum.right_tail_mass(u0.grid.x_right)
    if tail_right > 1e-8:
        raise ValueError(
            f"right tail mass {tail_right:.3e} beyond the domain is too large "
            "for a faithful look-ahead average"
        )
    result = classify_initial_data(u0)

    write_classification_json(result, root / "classification.json")
    files.append(f"{exp.name}/classification.json")
    _write_overlay(u0, root / "threshold_overlay.csv")
    files.append(f"{exp.name}/threshold_overlay.csv")
    write_threshold_csv(default_curve(), root / "threshold_curve.csv")
    files.append(f"{exp.name}/threshold_curve.csv")

    diagnostics: dict[str, Diagnostics] = {}
    snapshots: dict[str, dict[float, GridFunction]] = {}
    for kernel in exp.kernels:
        config = SolverConfig(
            grid=u0.grid,
            kernel=kernel,
            t_end=exp.t_end,
            cfl=exp.cfl,
            scheme=exp.scheme,
            snapshot_times=exp.snapshot_times,
            stop_on_blowup=exp.stop_on_blowup,
            mass_correction=tail_left,
        )
        snaps, diag = evolve(u0, config)
        kdir = root / f"kernel_{kernel.tag}"
        kdir.mkdir(exist_ok=True)
        for t_req, snap in snaps:
            fname = f"snap_t{t_req:g}.csv"
            write_profile_csv(snap, kdir / fname)
            files.append(f"{exp.name}/kernel_{kernel.tag}/{fname}")
        diag.write_csv(kdir / "diagnostics.csv")
        files.append(f"{exp.name}/kernel_{kernel.tag}/diagnostics.csv")
        write_blowup_json(diag.blowup, kdir / "blowup.json")
        files.append(f"{exp.name}/kernel_{kernel.tag}/blowup.json")
        diagnostics[kernel.tag] = diag
        snapshots[kernel.tag] = {t_req: snap for t_req, snap in snaps}

    meta = {
        "name": exp.name,
        "datum": exp.datum.name,
        "domain": list(exp.datum.domain),
        "n_cells": exp.n_cells,
        "t_end": exp.t_end,
        "snapshot_times": list(exp.snapshot_times),
        "cfl": exp.cfl,
        "scheme": exp.scheme,
        "kernels": [str(k) for k in exp.kernels],
        "left_tail_mass": tail_left,
    }
    with open(root / "metadata.json", "w") as fh:
        json.dump(meta, fh, indent=2, sort_keys=True)
        fh.write("\n")
    files.append(f"{exp.name}/metadata.json")

    return ExperimentResult(
        name=exp.name,
        classification=result,
        diagnostics=diagnostics,
        snapshots=snapshots,
        files=files,
    )


def customized(recipe: Experiment, **overrides) -> Experiment:
    """Recipe with fields replaced (datum may be given by name)."""
    if "datum" in overrides and isinstance(overrides["datum"], str):
        overrides["datum"] = get_datum(overrides["datum"])
    return replace(recipe, **overrides)
