"""Uniform 1-d grids and profiles sampled on them.

Everything downstream works with cell averages on a uniform grid: cell i
spans [x_left + i*dx, x_left + (i+1)*dx] and carries the value u_i
attached to the cell center x_i = x_left + (i + 1/2)*dx.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# admissible overshoot outside [0, 1] before a profile stops being a density
DENSITY_TOL = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over [x_left, x_right] with n_cells cells."""

    x_left: float
    x_right: float
    n_cells: int

    def __post_init__(self):
        if not self.x_left < self.x_right:
            raise ValueError(f"empty domain [{self.x_left}, {self.x_right}]")
        if self.n_cells < 4:
            raise ValueError(f"need at least 4 cells, got {self.n_cells}")

    @property
    def dx(self) -> float:
        return (self.x_right - self.x_left) / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return self.x_left + (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class GridFunction:
    """A real profile sampled at the cell centers of a GridSpec."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.n_cells,):
            raise ValueError(
                f"expected {self.grid.n_cells} values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite values in grid function")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_callable(cls, grid: GridSpec, f) -> "GridFunction":
        return cls(grid, np.asarray(f(grid.centers), dtype=float))

    @property
    def x(self) -> np.ndarray:
        return self.grid.centers


def require_density(u: GridFunction, tol: float = DENSITY_TOL) -> None:
    """Reject profiles that leave [0, 1] by more than tol."""
    lo = float(u.values.min())
    hi = float(u.values.max())
    if lo < -tol or hi > 1.0 + tol:
        raise ValueError(f"density out of range: min={lo:.3e}, max={hi:.3e}")


def total_mass(u: GridFunction) -> float:
    """Midpoint-rule mass dx * sum(u_i)."""
    return float(u.grid.dx * u.values.sum())


def spatial_derivative(u: GridFunction) -> GridFunction:
    """Central differences inside, one-sided second-order at the two edges."""
    return GridFunction(u.grid, np.gradient(u.values, u.grid.dx, edge_order=2))


# ---------------------------------------------------------------------------
# serialization: two-column CSV, header "x,u", full double precision


def format_float(v: float) -> str:
    return f"{v:.17g}"


def write_profile_csv(u: GridFunction, path) -> None:
    with open(path, "w") as fh:
        fh.write("x,u\n")
        for x, v in zip(u.x, u.values):
            fh.write(f"{format_float(x)},{format_float(v)}\n")


def read_profile_csv(path) -> GridFunction:
    """Rebuild a GridFunction from a profile CSV (uniform spacing required)."""
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x, v = data[:, 0], data[:, 1]
    if len(x) < 4:
        raise ValueError("profile too short")
    dx = x[1] - x[0]
    if not np.allclose(np.diff(x), dx, rtol=1e-12, atol=1e-12 * abs(dx)):
        raise ValueError("non-uniform grid in profile CSV")
    grid = GridSpec(float(x[0] - dx / 2), float(x[-1] + dx / 2), len(x))
    return GridFunction(grid, v)
