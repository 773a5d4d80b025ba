"""
Phase-map sweeps and quadrature-based state classification.

Maps sweep the squeezing phase phi and the relative harmonic phase
dtheta = theta1 - theta2 (theta2 pinned to zero) and record the mean
sideband occupation together with both quadrature variances.  The
full-conversion squeezing series additionally reports the principal-axis
variances, which stay at (e^{-2r}, e^{+2r}) while the squeezing ellipse
rotates with phi.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .model import ModelParams, observable_fields

CLASSIFY_TOL = 1e-6


class StateLabel(str, enum.Enum):
    MINIMUM_UNCERTAINTY = "minimum-uncertainty"
    SQUEEZED = "squeezed"
    SQUASHED = "squashed"
    EXCESS_BOTH = "excess-both"


def classify_state(var_x: float, var_p: float, tol: float = CLASSIFY_TOL) -> StateLabel:
    """Quadrature-variance label of a state (vacuum variance = 1).

    squeezed: a quadrature dips below vacuum; minimum-uncertainty: both at
    vacuum; squashed: one pinned at vacuum while the other carries excess
    noise; excess-both otherwise.
    """
    if var_x <= 0 or var_p <= 0:
        raise ValueError("variances must be positive")
    lo, hi = min(var_x, var_p), max(var_x, var_p)
    if lo < 1.0 - tol:
        return StateLabel.SQUEEZED
    if hi <= 1.0 + tol:
        return StateLabel.MINIMUM_UNCERTAINTY
    if lo <= 1.0 + tol:
        return StateLabel.SQUASHED
    return StateLabel.EXCESS_BOTH


def _check_axis(axis: np.ndarray, name: str) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D axis")
    if axis.size > 1 and not np.all(np.diff(axis) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return axis


@dataclass(frozen=True)
class MapGrid:
    """Planes indexed [dtheta, phi]."""

    phi_axis: np.ndarray
    dtheta_axis: np.ndarray
    plane_n: np.ndarray
    plane_var_x: np.ndarray
    plane_var_p: np.ndarray

    def labels(self, tol: float = CLASSIFY_TOL) -> np.ndarray:
        """Label of every grid point (array of str)."""
        out = np.empty(self.plane_n.shape, dtype=object)
        for i in range(out.shape[0]):
            for j in range(out.shape[1]):
                out[i, j] = classify_state(
                    float(self.plane_var_x[i, j]), float(self.plane_var_p[i, j]), tol
                ).value
        return out

    def heisenberg_ok(self, tol: float = 1e-9) -> bool:
        return bool(np.all(self.plane_var_x * self.plane_var_p >= 1.0 - tol))


def default_axis(points: int = 201) -> np.ndarray:
    return np.linspace(-math.pi, math.pi, points)


def phase_map(base: ModelParams, phi_axis, dtheta_axis) -> MapGrid:
    """Evaluate the analytic observables over a (dtheta, phi) grid.

    theta2 = 0 and theta1 = dtheta at every point; the base parameters
    supply r, the harmonic amplitudes and gamma_t.  Values equal pointwise
    analytic calls exactly (same vectorised code path, no interpolation).
    """
    phi_axis = _check_axis(phi_axis, "phi_axis")
    dtheta_axis = _check_axis(dtheta_axis, "dtheta_axis")
    phi = phi_axis[None, :]
    dtheta = dtheta_axis[:, None]
    mean_n, var_x, var_p, _ = observable_fields(
        r=base.squeeze.r,
        phi=phi,
        amp1=base.eps1.amp,
        theta1=dtheta,
        amp2=base.eps2.amp,
        theta2=0.0,
        gamma_t=base.gamma_t,
    )
    shape = (dtheta_axis.size, phi_axis.size)
    return MapGrid(
        phi_axis=phi_axis,
        dtheta_axis=dtheta_axis,
        plane_n=np.broadcast_to(mean_n, shape).copy(),
        plane_var_x=np.broadcast_to(var_x, shape).copy(),
        plane_var_p=np.broadcast_to(var_p, shape).copy(),
    )


@dataclass(frozen=True)
class LineCut:
    """One map row at fixed dtheta."""

    dtheta: float
    phi: np.ndarray
    mean_n: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray

    def labels(self, tol: float = CLASSIFY_TOL) -> list[str]:
        return [
            classify_state(float(x), float(p), tol).value
            for x, p in zip(self.var_x, self.var_p)
        ]


def line_cut(grid: MapGrid, dtheta: float) -> LineCut:
    """Extract the map row nearest to the requested dtheta."""
    lo, hi = grid.dtheta_axis[0], grid.dtheta_axis[-1]
    if not lo <= dtheta <= hi:
        raise ValueError(f"dtheta {dtheta} outside the axis range [{lo}, {hi}]")
    row = int(np.argmin(np.abs(grid.dtheta_axis - dtheta)))
    return LineCut(
        dtheta=float(grid.dtheta_axis[row]),
        phi=grid.phi_axis,
        mean_n=grid.plane_n[row],
        var_x=grid.plane_var_x[row],
        var_p=grid.plane_var_p[row],
    )


@dataclass(frozen=True)
class SqueezingSeries:
    """Full-conversion sum-frequency series over phi."""

    phi: np.ndarray
    mean_n: np.ndarray
    var_x: np.ndarray
    var_p: np.ndarray
    var_min: np.ndarray
    var_max: np.ndarray


def squeezing_case(phi_axis, sinh_r: float = math.sqrt(20.0)) -> SqueezingSeries:
    """Sum-frequency-only full conversion: eps2 = 0, gamma_t = pi/2, |eps1| = 1.

    Every perturbation photon is handed to the sideband, which then carries
    the input squeezed vacuum with a phi-rotated ellipse: the principal
    variances stay at e^{-+2r} and multiply to one.
    """
    phi_axis = _check_axis(phi_axis, "phi_axis")
    r = math.asinh(sinh_r)
    mean_n, var_x, var_p, a_sq = observable_fields(
        r=r, phi=phi_axis, amp1=1.0, theta1=0.0, amp2=0.0, theta2=0.0,
        gamma_t=math.pi / 2.0,
    )
    mod = np.abs(a_sq)
    return SqueezingSeries(
        phi=phi_axis,
        mean_n=mean_n,
        var_x=var_x,
        var_p=var_p,
        var_min=1.0 + 2.0 * mean_n - 2.0 * mod,
        var_max=1.0 + 2.0 * mean_n + 2.0 * mod,
    )


def write_map_csv(grid: MapGrid, outdir) -> list[Path]:
    """Write the three planes plus the axes as CSV files; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written = []
    for name, plane in (
        ("plane_n", grid.plane_n),
        ("plane_var_x", grid.plane_var_x),
        ("plane_var_p", grid.plane_var_p),
    ):
        path = outdir / f"{name}.csv"
        np.savetxt(path, plane, delimiter=",", fmt="%.17g")
        written.append(path)
    axes_path = outdir / "axes.csv"
    with open(axes_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["axis", "index", "value_radians"])
        for i, v in enumerate(grid.phi_axis):
            writer.writerow(["phi", i, f"{v:.17g}"])
        for i, v in enumerate(grid.dtheta_axis):
            writer.writerow(["dtheta", i, f"{v:.17g}"])
    written.append(axes_path)
    return written


def write_cut_csv(cut: LineCut, path) -> None:
    labels = cut.labels()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["phi", "n", "var_x", "var_p", "label"])
        for phi, n, vx, vp, lab in zip(cut.phi, cut.mean_n, cut.var_x, cut.var_p, labels):
            writer.writerow([f"{phi:.17g}", f"{n:.17g}", f"{vx:.17g}", f"{vp:.17g}", lab])
