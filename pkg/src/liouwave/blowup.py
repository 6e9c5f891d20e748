"""Concentration detection and blow-up alarms.

The normalized measures e^{+-u}/int(e^{+-u}) are probability densities on the
torus; finite-time singularity formation announces itself through gradient
and log-integral growth together with those densities piling their mass into
finitely many metric balls.  This module computes the densities, their
ball-mass maps, a deterministic greedy point detector, and the monitor that
evolve() consults, including the coupling-window arithmetic that fixes how
many concentration points to look for.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rhs import CouplingConfig
from .surface import SpectralGrid


@dataclass
class ConcentrationQuery:
    """Detector parameters: up to m points, metric balls of radius r, target
    residual eps, minimum pairwise separation delta."""

    m: int
    r: float
    eps: float
    delta: float = 0.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not self.r > 0:
            raise ValueError("ball radius must be positive")
        if not (0 < self.eps < 1):
            raise ValueError("eps must lie in (0, 1)")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


@dataclass
class ConcentrationReport:
    """Detector output for one measure."""

    sign: int
    points: list
    ball_fractions: list
    covered_fraction: float
    alarmed: bool
    component: int = 0


@dataclass
class MonitorThresholds:
    """Alarm thresholds and detector query defaults for blowup_monitor."""

    grad_l2: float = 1e3
    log_int: float = 50.0
    r: float = 0.5
    eps: float = 0.1
    delta: float = 0.0

    def __post_init__(self):
        if not (self.grad_l2 > 0 and self.log_int > 0):
            raise ValueError("monitor thresholds must be positive")


def density(grid: SpectralGrid, u: np.ndarray, sign: float = 1.0) -> np.ndarray:
    """e^{sign*u} / int(e^{sign*u}); integrates to 1 up to round-off and is
    overflow-safe for any finite u."""
    dens, _ = grid.normalized_exp(u, sign)
    return dens


def _ball_kernel(grid: SpectralGrid, r: float) -> np.ndarray:
    return (grid.torus_distance((0.0, 0.0)) <= r).astype(float)


def ball_mass_map(grid: SpectralGrid, dens: np.ndarray, r: float) -> np.ndarray:
    """integral of `dens` over the metric ball B(x, r), for every center x,
    via circular convolution with the discretized ball indicator."""
    if not r < min(grid.L1, grid.L2) / 2:
        raise ValueError("ball radius must be below half the shortest period")
    kern = _ball_kernel(grid, r)
    conv = grid.to_physical(grid.to_spectral(dens) * grid.to_spectral(kern))
    out = conv * grid.cell_area
    np.maximum(out, 0.0, out=out)
    return out


def detect_concentration(
    grid: SpectralGrid, dens: np.ndarray, query: ConcentrationQuery, sign: int = 1,
    component: int = 0,
) -> ConcentrationReport:
    """Greedy peak selection.

    Up to m times: take the center maximizing the current ball-mass map
    (first grid index on ties), then zero the density and exclude further
    centers within distance max(delta, 2r), which keeps the accepted points
    pairwise separated and their balls disjoint.  The covered fraction is
    the mass of the *original* density over the union of accepted balls.
    """
    work = np.array(dens, dtype=float)
    allowed = np.ones_like(work, dtype=bool)
    exclusion = max(query.delta, 2.0 * query.r)
    points = []
    fractions = []
    union = np.zeros_like(work, dtype=bool)
    for _ in range(query.m):
        masses = np.where(allowed, ball_mass_map(grid, work, query.r), -np.inf)
        flat = int(np.argmax(masses))
        i1, i2 = divmod(flat, grid.n2)
        center = (grid.x1[i1], grid.x2[i2])
        dist = grid.torus_distance(center)
        points.append(center)
        fractions.append(float(masses[i1, i2]))
        union |= dist <= query.r
        near = dist < exclusion
        work[near] = 0.0
        allowed &= ~near
        if not allowed.any():
            break
    covered = float((dens * union).sum() * grid.cell_area)
    return ConcentrationReport(
        sign=sign,
        points=points,
        ball_fractions=fractions,
        covered_fraction=covered,
        alarmed=covered >= 1.0 - query.eps,
        component=component,
    )


def concentration_window(rho: float, step: float) -> int:
    """Index m of the half-open window [m*step, (m+1)*step) containing rho."""
    return int(math.floor(rho / step))


def blowup_monitor(state, cfg: CouplingConfig, thresholds: MonitorThresholds):
    """Check the blow-up signatures and, when tripped, locate concentration.

    Triggers when any component's gradient norm or any log integral of the
    equation's measures exceeds the thresholds.  The number of points per
    measure comes from the coupling windows: floor(rho_i / 8 pi) for the
    scalar families, floor(rho_i / 4 pi) per component for coupled systems
    (critical endpoints land in the higher window).  Returns
    (status, reports) with status "quiet" or "alarm".

    The underlying dichotomy concerns a sequence of times approaching the
    singularity; sampled snapshots cannot distinguish subsequential from
    uniform behavior, so a quiet detector on an alarmed state is reported
    as-is rather than interpreted.
    """
    g = state.grid
    n = state.ncomp
    grads = [g.seminorm_h1(state.u[i]) for i in range(n)]
    jobs = []  # (sign, exponent field, window count, component)
    if cfg.family == "toda":
        for j in range(n):
            mj = concentration_window(cfg.rho[j], 4.0 * np.pi)
            jobs.append((+1, state.u[j], mj, j))
    else:
        rho1, rho2 = cfg.rho_pair()
        m1 = concentration_window(rho1, 8.0 * np.pi)
        m2 = concentration_window(rho2, 8.0 * np.pi)
        jobs.append((+1, state.u[0], m1, 0))
        jobs.append((-1, cfg.a * state.u[0], m2, 0))

    logints = [g.log_integral_exp(expo, 1.0) for (_, expo, _, _) in jobs]
    if max(grads) < thresholds.grad_l2 and max(logints) < thresholds.log_int:
        return "quiet", []

    reports = []
    for sign, expo, m, comp in jobs:
        if m < 1:
            continue
        dens, _ = g.normalized_exp(expo, 1.0)
        query = ConcentrationQuery(m=m, r=thresholds.r, eps=thresholds.eps,
                                   delta=thresholds.delta)
        reports.append(detect_concentration(g, dens, query, sign=sign, component=comp))
    return "alarm", reports


def bubble_field(grid: SpectralGrid, center, lam: float, clamp: float = 30.0) -> np.ndarray:
    """Mean-zero concentration profile

        u(x) = log( lam^2 / (1 + lam^2 d(x, center)^2)^2 ),

    clamped below at -clamp and shifted to zero mean.  As lam grows the
    measure e^u/int(e^u) concentrates at the center."""
    if lam < 1:
        raise ValueError("lam must be >= 1")
    d = grid.torus_distance(center)
    u = np.log(lam**2 / (1.0 + lam**2 * d**2) ** 2)
    np.maximum(u, -float(clamp), out=u)
    return u - u.mean()
