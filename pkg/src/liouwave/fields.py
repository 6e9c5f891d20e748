"""Multi-component wave states and field utilities.

A state is a time slice (u, du/dt) with one or more components, all sharing a
grid.  Construction enforces the zero-mean hypothesis on the velocity: small
deviations (file round-trips) are repaired by subtracting the mean, large ones
are rejected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .surface import SpectralGrid

STATUS_COMPLETED = "completed"
STATUS_BLOWUP = "blow-up-alarm"
STATUS_NONFINITE = "non-finite"
STATUS_MAXSTEPS = "max-steps"


@dataclass
class WaveState:
    """One time slice: u and v = du/dt, each of shape (ncomp, n1, n2).

    Value semantics: arrays are owned; use clone() before mutating a shared
    instance.
    """

    grid: SpectralGrid
    t: float
    u: np.ndarray
    v: np.ndarray
    v_mean_shift: tuple = ()

    @property
    def ncomp(self) -> int:
        return self.u.shape[0]

    def clone(self) -> "WaveState":
        return WaveState(self.grid, self.t, self.u.copy(), self.v.copy(), self.v_mean_shift)


@dataclass
class Trajectory:
    """Sampled run: times, per-sample functional reports, termination status."""

    times: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)  # (step_index, WaveState)
    status: str = STATUS_COMPLETED
    concentration: list = field(default_factory=list)
    final_state: Optional[WaveState] = None


def _stack_components(grid, arrs, what):
    a = np.asarray(arrs, dtype=np.float64)
    if a.ndim == 2:
        a = a[None, :, :]
    if a.ndim != 3 or a.shape[1:] != (grid.n1, grid.n2):
        raise ValueError(f"{what} shape {a.shape} does not match grid {grid.n1}x{grid.n2}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{what} contains non-finite values")
    return np.ascontiguousarray(a)


def wave_state_new(grid: SpectralGrid, u0, u1, t0: float = 0.0) -> WaveState:
    """Validated state constructor.

    The velocity components must have (numerically) zero mean: if
    |mean(u1_i)| exceeds 1e-8 * ||u1_i||_L2 + 1e-12 the data is rejected,
    otherwise the mean is subtracted and the shift recorded on the state.
    """
    u = _stack_components(grid, u0, "u0")
    v = _stack_components(grid, u1, "u1")
    if u.shape != v.shape:
        raise ValueError("u0 and u1 must have the same number of components")
    shifts = []
    for i in range(v.shape[0]):
        m = grid.mean(v[i])
        tol = 1e-8 * grid.norm_l2(v[i]) + 1e-12
        if abs(m) > tol:
            raise ValueError(
                f"velocity component {i} has nonzero mean {m:.3e} "
                f"(tolerance {tol:.3e}); the evolution requires mean-zero velocity"
            )
        if m != 0.0:
            v[i] -= m
        shifts.append(m)
    return WaveState(grid, float(t0), u, v, tuple(shifts))


def dealias(grid: SpectralGrid, modes: np.ndarray) -> np.ndarray:
    """Zero all modes outside the grid's two-thirds mask; idempotent."""
    return grid.dealias(modes)


def random_smooth_field(
    grid: SpectralGrid,
    rng: np.random.Generator,
    kmax: int = 4,
    amplitude: float = 1.0,
    zero_mean: bool = False,
    norm: str = "h1",
) -> np.ndarray:
    """Band-limited random field, deterministic given the generator state.

    Modes with |k1|,|k2| <= kmax (clipped to the dealias band) get iid complex
    Gaussian coefficients; the field is rescaled so its H1 (or L2) norm equals
    `amplitude`.
    """
    kmax = int(min(kmax, grid.n1 // 3, grid.n2 // 3))
    coef = rng.standard_normal((grid.n1, grid.n2)) + 1j * rng.standard_normal(
        (grid.n1, grid.n2)
    )
    band = (np.abs(grid.k1[:, None]) <= kmax) & (np.abs(grid.k2[None, :]) <= kmax)
    coef *= band
    f = grid.to_physical(coef)
    if zero_mean:
        f = f - f.mean()
    size = grid.norm_h1(f) if norm == "h1" else grid.norm_l2(f)
    if size > 0:
        f *= amplitude / size
    return f
