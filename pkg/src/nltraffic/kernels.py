"""Look-ahead kernels and the nonlocal density average.

The model is the scalar conservation law

    u_t + (u (1 - u) exp(-ubar))_x = 0,      0 <= u <= 1,

where ubar(x) = (K * u)(x) averages the density that drivers see ahead of
them.  Supported kernel variants:

    zero       no look-ahead at all, ubar = 0 (classical LWR)
    sk         unit window, ubar(x) = int_x^{x+1} u
    sk:L=<l>   rescaled window of length l
    infinite   everything ahead, ubar(x) = int_x^inf u
    uniform    global average, ubar = total mass everywhere
    linear     unit window with downstream de-weighting 2(1 - (y - x))

Windowed variants integrate the piecewise-constant reconstruction of the
cell values exactly, which gives linear partial-cell weights at a window
edge that falls mid-cell (no O(dx) jumps as the edge crosses a cell
boundary).  Off-grid density to the right is taken to be zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import GridFunction, total_mass

_WINDOWED = ("sk", "sk_scaled", "linear")
_KINDS = ("zero", "sk", "sk_scaled", "infinite", "uniform", "linear")


@dataclass(frozen=True)
class Kernel:
    kind: str
    length: float | None = None

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "sk_scaled":
            if self.length is None or not (self.length > 0):
                raise ValueError("sk_scaled kernel needs a window length > 0")
        elif self.length is not None:
            raise ValueError(f"kernel {self.kind!r} takes no length parameter")

    @property
    def window(self) -> float:
        """Length of the look-ahead window (inf for infinite/uniform)."""
        if self.kind == "zero":
            return 0.0
        if self.kind in ("sk", "linear"):
            return 1.0
        if self.kind == "sk_scaled":
            return float(self.length)
        return math.inf

    @property
    def weight_sup(self) -> float:
        """Largest pointwise kernel weight; bounds ubar by weight_sup * mass."""
        return 2.0 if self.kind == "linear" else (0.0 if self.kind == "zero" else 1.0)

    def __str__(self) -> str:
        if self.kind == "sk_scaled":
            return f"sk:L={self.length:g}"
        return self.kind

    @property
    def tag(self) -> str:
        """Filesystem-safe label, used in experiment bundle directories."""
        if self.kind == "sk_scaled":
            return f"sk_L{self.length:g}"
        return self.kind


ZERO = Kernel("zero")
SK_UNIT = Kernel("sk")
INFINITE = Kernel("infinite")
UNIFORM = Kernel("uniform")
LINEAR = Kernel("linear")


def sk_scaled(length: float) -> Kernel:
    return Kernel("sk_scaled", float(length))


def parse_kernel(text: str) -> Kernel:
    """Parse the CLI spelling: zero | sk | infinite | uniform | linear | sk:L=<l>."""
    s = text.strip().lower()
    if s in ("zero", "sk", "infinite", "uniform", "linear"):
        return Kernel(s)
    if s.startswith("sk:l="):
        try:
            length = float(s[5:])
        except ValueError:
            raise ValueError(f"bad kernel window length in {text!r}") from None
        if not (length > 0) or not math.isfinite(length):
            raise ValueError(f"kernel window length must be positive, got {text!r}")
        return sk_scaled(length)
    raise ValueError(f"unknown kernel {text!r}")


@dataclass(frozen=True)
class NonlocalField:
    """ubar = K * u and the slow-down factor exp(-ubar) on the same grid."""

    ubar: GridFunction
    factor: GridFunction


def _window_weights(dx: float, length: float, primitive) -> np.ndarray:
    """Per-cell weights for a window [x_i, x_i + length] ahead of cell i.

    primitive is the antiderivative of the kernel weight in the offset
    variable xi = y - x_i; weight r covers the overlap of the window with
    cell i + r.  The grid is uniform, so the weights do not depend on i.
    """
    n_w = int(np.ceil(length / dx + 0.5)) + 1
    w = np.zeros(n_w)
    for r in range(n_w):
        lo = max(0.0, (r - 0.5) * dx)
        hi = min(length, (r + 0.5) * dx)
        if hi > lo:
            w[r] = primitive(hi) - primitive(lo)
    # drop trailing zero weights
    nz = np.nonzero(w)[0]
    return w[: nz[-1] + 1] if len(nz) else w[:1]


def nonlocal_field(u: GridFunction, kernel: Kernel) -> NonlocalField:
    """Evaluate ubar = K * u and exp(-ubar) for one of the kernel variants.

    Requires u >= -1e-6 componentwise; a more negative value signals a
    corrupted density rather than roundoff.
    """
    values = u.values
    if float(values.min()) < -1e-6:
        raise ValueError(f"negative density (min {values.min():.3e}) in ubar")
    n = u.grid.n_cells
    dx = u.grid.dx

    if kernel.kind == "zero":
        ubar = np.zeros(n)
    elif kernel.kind == "uniform":
        ubar = np.full(n, total_mass(u))
    elif kernel.kind == "infinite":
        # suffix sums: int_{x_i}^{inf} u = dx * (sum_{j>i} u_j + u_i / 2)
        suffix = np.cumsum(values[::-1])[::-1]
        ubar = dx * (suffix - 0.5 * values)
    elif kernel.kind in ("sk", "sk_scaled"):
        w = _window_weights(dx, kernel.window, lambda xi: xi)
        padded = np.concatenate([values, np.zeros(len(w) - 1)])
        ubar = np.correlate(padded, w, mode="valid")
    elif kernel.kind == "linear":
        w = _window_weights(dx, 1.0, lambda xi: 2.0 * xi - xi * xi)
        padded = np.concatenate([values, np.zeros(len(w) - 1)])
        ubar = np.correlate(padded, w, mode="valid")
    else:  # pragma: no cover
        raise ValueError(f"unhandled kernel {kernel}")

    ubar_gf = GridFunction(u.grid, ubar)
    factor = GridFunction(u.grid, np.exp(-ubar))
    return NonlocalField(ubar=ubar_gf, factor=factor)
