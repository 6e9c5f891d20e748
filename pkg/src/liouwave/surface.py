"""Discrete flat 2-torus: spectral transforms, Laplacian symbol, quadrature, norms.

The torus is the rectangle [0, L1) x [0, L2) with opposite edges identified.
Fields are plain (n1, n2) float arrays sampled at x = (i1*L1/n1, i2*L2/n2),
row-major.  All calculus here is either spectral or equal-weight trapezoidal,
both exact for band-limited data on this geometry, and every integral of an
exponential goes through a log-sum-exp path so that fields with values up to
~700 in magnitude never overflow.
"""

from __future__ import annotations

import os

import numpy as np
import scipy.fft

from . import kernels

TWO_PI = 2.0 * np.pi


def _workers() -> int:
    raw = os.environ.get("LIOUWAVE_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _require_finite(values, what="field"):
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{what} contains non-finite values")


class SpectralGrid:
    """Uniform n1 x n2 sampling of the flat torus with periods (L1, L2).

    Carries the per-mode Laplacian symbol lam(k1,k2) = (2*pi*k1/L1)^2 +
    (2*pi*k2/L2)^2 in FFT ordering, the two-thirds dealias mask, and the
    quadrature weight area/(n1*n2).  All methods are pure; a grid is safe to
    share between threads.
    """

    def __init__(self, n1: int, n2: int, L1: float = TWO_PI, L2: float = TWO_PI):
        n1, n2 = int(n1), int(n2)
        if n1 % 2 or n2 % 2 or n1 < 8 or n2 < 8:
            raise ValueError(f"grid sizes must be even and >= 8, got {n1} x {n2}")
        if not (L1 > 0 and L2 > 0):
            raise ValueError(f"periods must be positive, got L1={L1}, L2={L2}")
        self.n1, self.n2 = n1, n2
        self.L1, self.L2 = float(L1), float(L2)
        self.area = self.L1 * self.L2
        self.cell_area = self.area / (n1 * n2)

        # integer wavenumbers in FFT order: 0, 1, ..., n/2-1, -n/2, ..., -1
        self.k1 = np.fft.fftfreq(n1, d=1.0 / n1)
        self.k2 = np.fft.fftfreq(n2, d=1.0 / n2)
        kx = TWO_PI * self.k1 / self.L1
        ky = TWO_PI * self.k2 / self.L2
        self.lap_symbol = np.ascontiguousarray(kx[:, None] ** 2 + ky[None, :] ** 2)
        self.dealias_mask = (np.abs(self.k1[:, None]) <= n1 // 3) & (
            np.abs(self.k2[None, :]) <= n2 // 3
        )

        self.x1 = np.arange(n1) * (self.L1 / n1)
        self.x2 = np.arange(n2) * (self.L2 / n2)

    # -- transforms ---------------------------------------------------------

    def to_spectral(self, values: np.ndarray) -> np.ndarray:
        """Forward FFT of a real field (unnormalized convention)."""
        _require_finite(values)
        return scipy.fft.fft2(values, workers=_workers())

    def to_physical(self, modes: np.ndarray) -> np.ndarray:
        """Inverse FFT; returns the real part (fields are real-valued)."""
        return scipy.fft.ifft2(modes, workers=_workers()).real

    # Half-spectrum pair used by the stepping hot path (real fields carry a
    # Hermitian-redundant spectrum; rfft keeps the n2//2+1 unique columns).

    def to_spectral_half(self, values: np.ndarray) -> np.ndarray:
        return scipy.fft.rfft2(values, workers=_workers())

    def to_physical_half(self, modes: np.ndarray) -> np.ndarray:
        return scipy.fft.irfft2(modes, s=(self.n1, self.n2), workers=_workers())

    def dealias(self, modes: np.ndarray) -> np.ndarray:
        """Zero every mode outside the two-thirds band; idempotent."""
        return modes * self.dealias_mask

    # -- quadrature and norms ------------------------------------------------

    def integrate(self, values: np.ndarray) -> float:
        """Integral over the torus: equal-weight rule, spectrally exact."""
        _require_finite(values)
        return self.cell_area * float(values.sum())

    def mean(self, values: np.ndarray) -> float:
        return self.integrate(values) / self.area

    def norm_l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(self.cell_area * float((values * values).sum())))

    def seminorm_h1(self, values: np.ndarray) -> float:
        """L2 norm of the gradient, computed from the Laplacian symbol."""
        modes = self.to_spectral(values)
        s = float((self.lap_symbol * (modes.real**2 + modes.imag**2)).sum())
        return float(np.sqrt(self.area * s)) / (self.n1 * self.n2)

    def norm_h1(self, values: np.ndarray) -> float:
        return float(np.hypot(self.seminorm_h1(values), self.norm_l2(values)))

    def minus_laplacian(self, values: np.ndarray) -> np.ndarray:
        """-Delta applied spectrally (the symbol is that of -Delta)."""
        return self.to_physical(self.lap_symbol * self.to_spectral(values))

    # -- stable exponentials --------------------------------------------------

    def log_integral_exp(self, values, sign: float = 1.0, weight=None) -> float:
        """log of integral of w * e^(sign*f), evaluated as a log-sum-exp.

        `sign` is +1 or -1; a strictly positive weight field may be supplied.
        Safe for |f| up to ~700.
        """
        if sign not in (1.0, -1.0, 1, -1):
            raise ValueError("sign must be +1 or -1")
        _require_finite(values)
        g = sign * values
        if weight is not None:
            weight = np.asarray(weight, dtype=float)
            if weight.shape != g.shape:
                raise ValueError("weight shape does not match field")
            if not np.all(weight > 0):
                raise ValueError("weight must be strictly positive")
            g = g + np.log(weight)
        g = np.ascontiguousarray(g, dtype=np.float64)
        m = float(g.max())
        out = np.empty_like(g)
        s = kernels.exp_shifted_sum(g, m, out)
        return m + float(np.log(self.cell_area * s))

    def normalized_exp(self, values, sign: float = 1.0, weight=None):
        """The probability density w*e^(sign*f) / integral(w*e^(sign*f)).

        Returns (density, log_normalizer); density integrates to 1 up to
        round-off by construction.
        """
        if sign not in (1.0, -1.0, 1, -1):
            raise ValueError("sign must be +1 or -1")
        _require_finite(values)
        if weight is not None:
            weight = np.asarray(weight, dtype=float)
            if not np.all(weight > 0):
                raise ValueError("weight must be strictly positive")
            g = sign * values + np.log(weight)
        elif sign == 1.0 or sign == 1:
            g = values  # read-only use below; no copy needed
        else:
            g = -values
        g = np.ascontiguousarray(g, dtype=np.float64)
        m = float(g.max())
        out = np.empty_like(g)
        s = kernels.exp_shifted_sum(g, m, out)
        z = self.cell_area * s
        out /= z
        return out, m + float(np.log(z))

    # -- geometry --------------------------------------------------------------

    def mesh(self):
        """Broadcastable coordinate arrays (X1, X2) of the sample points."""
        return self.x1[:, None], self.x2[None, :]

    def torus_distance(self, center) -> np.ndarray:
        """Flat-metric distance from every grid point to `center`, with
        period wrapping."""
        c1 = float(center[0]) % self.L1
        c2 = float(center[1]) % self.L2
        d1 = np.abs(self.x1 - c1)
        d1 = np.minimum(d1, self.L1 - d1)
        d2 = np.abs(self.x2 - c2)
        d2 = np.minimum(d2, self.L2 - d2)
        return np.hypot(d1[:, None], d2[None, :])

    def __repr__(self):
        return (
            f"SpectralGrid({self.n1}x{self.n2}, "
            f"L=({self.L1:.6g}, {self.L2:.6g}))"
        )


def make_torus_grid(n1: int, n2: int, L1: float = TWO_PI, L2: float = TWO_PI) -> SpectralGrid:
    """Construct the discrete torus; sizes must be even and >= 8."""
    return SpectralGrid(n1, n2, L1, L2)
