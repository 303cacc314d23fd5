"""Spherical measure utilities: circle grids, random directions, and c_{p,n}.

The constant ``c_pn(p, n)`` is the p-th absolute moment of one coordinate of a
uniformly distributed point on the unit sphere of R^n,

    c_{p,n} = \\int_{S^{n-1}} |v_1|^p d\\sigma_{n-1}(v),

with sigma_{n-1} the normalized (probability) surface measure.  It is the
factor relating the Euclidean norm to its rotation-invariant Levy
p-representation: ||u||_2^p = c_{p,n}^{-1} \\int |<u, v>|^p d\\sigma(v).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import integrate

QUAD_TOL = 1e-10


@dataclass(frozen=True)
class CircleGrid:
    """Uniform grid on [0, 2*pi) with equal weights 2*pi/m."""

    m: int

    def __post_init__(self):
        if self.m < 4 or self.m % 2:
            raise ValueError(f"circle grid needs an even size >= 4, got m={self.m}")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.m) / self.m

    @property
    def weight(self) -> float:
        return 2.0 * np.pi / self.m

    @property
    def spacing(self) -> float:
        return self.weight

    def integrate(self, values) -> float:
        """Trapezoid rule on the periodic grid (exact for trig polynomials of degree < m)."""
        values = np.asarray(values, dtype=float)
        if values.shape[-1] != self.m:
            raise ValueError(f"expected {self.m} samples, got {values.shape[-1]}")
        return float(self.weight * np.sum(values, axis=-1))

    def directions(self) -> np.ndarray:
        """Unit vectors (cos theta_k, sin theta_k), shape (m, 2)."""
        t = self.nodes
        return np.column_stack([np.cos(t), np.sin(t)])


def circle_grid(m: int) -> CircleGrid:
    return CircleGrid(int(m))


@dataclass(frozen=True)
class UnitVectorBatch:
    dim: int
    vectors: np.ndarray
    seed: int | None

    def __len__(self):
        return len(self.vectors)


def random_unit_vectors(n: int, count: int, seed=None) -> UnitVectorBatch:
    """Draw ``count`` points uniformly from S^{n-1} by normalizing Gaussians.

    Reproducible for a fixed integer seed.  Rows that are numerically zero
    (probability zero) are redrawn.
    """
    if n < 1 or count < 1:
        raise ValueError("need n >= 1 and count >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((count, n))
    r = np.linalg.norm(g, axis=1)
    bad = r < 1e-300
    while np.any(bad):
        g[bad] = rng.standard_normal((int(bad.sum()), n))
        r[bad] = np.linalg.norm(g[bad], axis=1)
        bad = r < 1e-300
    return UnitVectorBatch(dim=n, vectors=g / r[:, None], seed=seed)


def c_pn(p: float, n: int, tol: float = QUAD_TOL) -> float:
    """Return c_{p,n} = E|v_1|^p for v uniform on S^{n-1}.

    The first coordinate of a uniform point on S^{n-1} is cos(theta) with
    theta in [0, pi] distributed proportionally to sin(theta)^(n-2).  Both the
    numerator and the normalizer are reduced to [0, pi/2] by symmetry and
    integrated adaptively.

    Parameters
    ----------
    p : float
        Exponent, must be positive.
    n : int
        Ambient dimension, at least 1.
    tol : float
        Absolute and relative tolerance handed to the quadrature.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    n = int(n)
    if n == 1:
        # S^0 = {-1, +1}
        return 1.0
    k = n - 2
    opts = dict(epsabs=tol * 1e-3, epsrel=tol, limit=200)
    num, _ = integrate.quad(lambda t: np.cos(t) ** p * np.sin(t) ** k, 0.0, np.pi / 2, **opts)
    if k == 0:
        den = np.pi / 2
    else:
        den, _ = integrate.quad(lambda t: np.sin(t) ** k, 0.0, np.pi / 2, **opts)
    return float(num / den)


def cos_power_coefficients(p: float, kmax: int) -> np.ndarray:
    """Fourier coefficients of |cos(theta)|^p at frequencies 0..kmax.

    Returns ``lam`` with ``lam[k] = (1/2pi) \\int_0^{2pi} |cos t|^p e^{-ikt} dt``.
    Odd frequencies vanish (|cos|^p is pi-periodic).  ``lam[0]`` equals
    ``c_pn(p, 2)`` and is obtained by quadrature; even frequencies follow from
    two integrations by parts,

        lam[k + 2] = lam[k] * (p - k) / (p + k + 2),

    which stays accurate where direct quadrature of a tiny oscillatory
    integral would not.  For even integer p the factor (p - k) is exactly zero
    at k = p, so all higher coefficients are exact zeros.
    """
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    lam = np.zeros(kmax + 1)
    lam[0] = c_pn(p, 2)
    for k in range(0, kmax - 1, 2):
        lam[k + 2] = lam[k] * (p - k) / (p + k + 2)
    return lam


def trig_interpolate(values, phi) -> np.ndarray:
    """Evaluate the trigonometric interpolant of uniform periodic samples at ``phi``.

    The Nyquist coefficient of real samples is real, so the interpolant is a
    real cosine there and reproduces the samples at the nodes.
    """
    values = np.asarray(values, dtype=float)
    m = values.size
    c = np.fft.rfft(values) / m
    phi = np.asarray(phi, dtype=float)
    k = np.arange(c.size)
    scale = np.full(c.size, 2.0)
    scale[0] = 1.0
    if m % 2 == 0:
        scale[-1] = 1.0
    e = np.exp(1j * np.multiply.outer(phi, k))
    return (e * (scale * c)).real.sum(axis=-1)
