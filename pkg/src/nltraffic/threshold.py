"""Critical-slope threshold for characteristic initial data.

Along a characteristic of the look-ahead model the density u and the slope
d = u_x obey an autonomous system (see characteristics.py).  Whether d
blows up in finite time or decays is decided by the starting point's
position relative to a curve d = sigma(u) in the (u, d) phase plane.
sigma solves the singular ODE

    sigma'(x) = [2 sigma^2 - (3x - 5x^2) sigma - x^3 (1 - x)] / [-x^2 (1 - x)]

with sigma(0) = 0, sigma'(0) = 1.  The equation is singular at both
endpoints; a two-term series sigma = x - x^2 + O(x^4) (coefficients fixed
by matching powers in the ODE) seeds the integration at x0 = 1e-3.

Integrating the ODE is one route to sigma.  The product x (1 - x) turns
out to satisfy the ODE identically; the tabulated integration is kept as
an independent consistency check and the closed form is only adopted for
evaluation after it passes the residual test below.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import CubicSpline

from .grid import GridFunction, format_float, require_density, spatial_derivative

SEED_X = 1e-3
N_TABLE = 10001
# verdict dead band: |margin| <= tau is treated as "on the curve"
STRICTNESS_TAU = 1e-10

SUBCRITICAL = "SUBCRITICAL"
SUPERCRITICAL = "SUPERCRITICAL"


def _ode_rhs(x: float, s: float) -> float:
    return (2.0 * s * s - (3.0 * x - 5.0 * x * x) * s - x**3 * (1.0 - x)) / (
        -(x * x) * (1.0 - x)
    )


def threshold_residual(candidate, u: float, derivative=None, fd_step: float = 1e-6):
    """How far a candidate curve is from solving the threshold ODE at u.

    Returns candidate'(u) - rhs(u, candidate(u)); the derivative defaults
    to a central difference with step fd_step.  u must stay a step away
    from the singular endpoints 0 and 1.
    """
    delta = 1e-6
    if not (delta <= u <= 1.0 - delta):
        raise ValueError(f"residual undefined this close to an endpoint: u={u}")
    s = float(candidate(u))
    if derivative is not None:
        dprime = float(derivative(u))
    else:
        dprime = (float(candidate(u + fd_step)) - float(candidate(u - fd_step))) / (
            2.0 * fd_step
        )
    return dprime - _ode_rhs(u, s)


def build_table(n_nodes: int = N_TABLE, seed_x: float = SEED_X):
    """Tabulate sigma on a uniform grid of [0, 1] by RK4 from the series seed.

    Nodes below the seed use the series directly.  Substeps are capped at
    0.3 / stiffness with stiffness ~ max(3/x, 2/(1-x)), which keeps the
    classical RK4 step stable right up to the singular endpoints.  The
    final node x = 1 gets the limit value 0.
    """
    x = np.linspace(0.0, 1.0, n_nodes)
    sig = np.empty_like(x)
    below = x <= seed_x
    sig[below] = x[below] - x[below] ** 2
    k0 = int(np.searchsorted(x, seed_x, side="right"))
    xc = seed_x
    sc = seed_x - seed_x**2
    for k in range(k0, n_nodes):
        target = x[k]
        if target >= 1.0:
            sig[k] = 0.0
            continue
        stiff = max(3.0 / xc, 2.0 / (1.0 - target))
        m = max(1, int(np.ceil((target - xc) * stiff / 0.3)))
        h = (target - xc) / m
        for _ in range(m):
            k1 = _ode_rhs(xc, sc)
            k2 = _ode_rhs(xc + 0.5 * h, sc + 0.5 * h * k1)
            k3 = _ode_rhs(xc + 0.5 * h, sc + 0.5 * h * k2)
            k4 = _ode_rhs(xc + h, sc + h * k3)
            sc += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            xc += h
        xc = target
        sig[k] = sc
    return x, sig


class ThresholdCurve:
    """Tabulated critical-slope curve with cubic interpolation.

    closed_form_verified records whether the candidate x (1 - x) passed the
    residual oracle (and matches the table); if so eval() uses it directly.
    u_boost is the largest u2 such that sigma(u) >= (3/4) u on [0, u2],
    needed by the slope-floor estimate in characteristics.py.
    """

    def __init__(self, n_nodes: int = N_TABLE, seed_x: float = SEED_X):
        self.u_nodes, self.sigma_nodes = build_table(n_nodes, seed_x)
        self._spline = CubicSpline(self.u_nodes, self.sigma_nodes)
        self.closed_form_verified = self._verify_closed_form()
        self.u_boost = self._boost_bound()

    def _verify_closed_form(self) -> bool:
        candidate = lambda v: v * (1.0 - v)  # noqa: E731
        res = max(
            abs(threshold_residual(candidate, float(v)))
            for v in np.linspace(0.01, 0.99, 197)
        )
        table_gap = float(
            np.max(np.abs(self.sigma_nodes - self.u_nodes * (1.0 - self.u_nodes)))
        )
        return res < 1e-8 and table_gap < 1e-6

    def _boost_bound(self) -> float:
        above = self.sigma_nodes + 1e-12 >= 0.75 * self.u_nodes
        bad = np.nonzero(~above)[0]
        u2 = float(self.u_nodes[bad[0] - 1]) if len(bad) else 1.0
        if u2 < 0.2:
            raise RuntimeError(f"threshold boost region unexpectedly small: {u2}")
        return u2

    def eval(self, u):
        """sigma(u) for scalar or array u in [0, 1]."""
        arr = np.asarray(u, dtype=float)
        if np.any(arr < -1e-12) or np.any(arr > 1.0 + 1e-12):
            raise ValueError("sigma is only defined for densities in [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        if self.closed_form_verified:
            out = arr * (1.0 - arr)
        else:  # pragma: no cover - closed form holds for this model
            out = self._spline(arr)
        return float(out) if np.ndim(u) == 0 else out

    def sample(self, n_samples: int) -> np.ndarray:
        """(n_samples, 2) array of (u, sigma(u)) pairs on a uniform u grid."""
        if n_samples < 2:
            raise ValueError("need at least the two endpoints")
        us = np.linspace(0.0, 1.0, n_samples)
        return np.column_stack([us, self.eval(us)])


@lru_cache(maxsize=None)
def default_curve() -> ThresholdCurve:
    return ThresholdCurve()


def critical_slope(u):
    """Module-level convenience wrapper around the default curve."""
    return default_curve().eval(u)


@dataclass(frozen=True)
class Classification:
    """Verdict plus the extremal witness point of an initial profile.

    For SUPERCRITICAL the witness maximizes margin = u0'(x) - sigma(u0(x))
    and margin > 0; for SUBCRITICAL it minimizes sigma(u0) - u0' and margin
    is that minimal distance below the curve (>= 0 up to the dead band).
    borderline flags profiles whose extremal margin falls inside the dead
    band (0, tau]: reported subcritical, but too close to call.
    """

    verdict: str
    x0: float
    u0_at_x0: float
    d0_at_x0: float
    margin: float
    min_margin: float | None
    borderline: bool

    def to_json_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "x0": self.x0,
            "u0_at_x0": self.u0_at_x0,
            "d0_at_x0": self.d0_at_x0,
            "margin": self.margin,
        }


def classify_initial_data(
    u0: GridFunction, curve: ThresholdCurve | None = None
) -> Classification:
    """Decide whether any point of u0 starts above the threshold curve.

    The slope is the second-order grid derivative of the sampled values, so
    u0 must be resolved: adjacent cell values may not jump by more than 0.5.
    """
    require_density(u0)
    values = u0.values
    if len(values) > 1 and float(np.max(np.abs(np.diff(values)))) > 0.5:
        raise ValueError("initial profile under-resolved: adjacent jump > 0.5")
    curve = curve or default_curve()
    d = spatial_derivative(u0).values
    margins = d - curve.eval(np.clip(values, 0.0, 1.0))
    i = int(np.argmax(margins))
    top = float(margins[i])
    witness = (float(u0.x[i]), float(values[i]), float(d[i]))
    if top > STRICTNESS_TAU:
        return Classification(SUPERCRITICAL, *witness, top, None, False)
    return Classification(
        SUBCRITICAL, *witness, -top, min_margin=-top, borderline=top > 0.0
    )


def write_threshold_csv(curve: ThresholdCurve, path, n_samples: int = 1001) -> None:
    rows = curve.sample(n_samples)
    with open(path, "w") as fh:
        fh.write("u,sigma\n")
        for u, s in rows:
            fh.write(f"{format_float(u)},{format_float(s)}\n")


def write_classification_json(result: Classification, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
