"""Symmetric q-stable measures and the Levy p-representation of l_q^n.

The standard q-stable law on R has characteristic function exp(-|s|^q); its
density is obtained with the (1/2pi) Fourier convention so it integrates to
one.  The n-dimensional law mu_q has characteristic function
exp(-||s||_q^q) = prod_i exp(-|s_i|^q), i.e. independent coordinates.  For
x in R^n, <x, X> is q-stable with scale ||x||_q, hence

    ||x||_q^p = E|<x, X>|^p / E|X_1|^p        (0 < p < q),

which pushed to the sphere gives a Levy p-representation of l_q^n.
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.interpolate import PchipInterpolator

from .representation import CircleDensity
from .sphere import CircleGrid, random_unit_vectors

TAIL_TOL = 1e-10


@dataclass(frozen=True)
class StableSpec:
    q: float
    n: int = 1
    seed: int | None = None

    def __post_init__(self):
        if not 0 < self.q <= 2:
            raise ValueError(f"stability index must lie in (0, 2], got q={self.q}")
        if self.n < 1:
            raise ValueError("dimension must be >= 1")

    def sample(self, count: int, seed=None) -> np.ndarray:
        """``count`` draws from mu_q, shape (count, n)."""
        rng_seed = self.seed if seed is None else seed
        return sample_stable(self.q, count * self.n, rng_seed).reshape(count, self.n)


def _check_q(q):
    if not 0 < q <= 2:
        raise ValueError(f"stability index must lie in (0, 2], got q={q}")


def _density_point(q: float, t: float) -> float:
    """(1/pi) int_0^inf exp(-s^q) cos(s t) ds at a single t >= 0."""
    if t < 1.0:
        f = lambda s: np.exp(-(s**q)) * np.cos(s * t)
        v, _ = integrate.quad(f, 0.0, np.inf, epsabs=1e-15, epsrel=1e-13, limit=200)
        return v / np.pi
    # Rotate the contour to s = r e^{i a}; with q a < pi/2 the integrand
    # decays like exp(-t r sin a) and no longer oscillates.  Subtracting the
    # exactly integrable "1" part removes the O(1/t) cancellation.
    a = np.pi / (4 * max(q, 1.0))
    ea, eqa = np.exp(1j * a), np.exp(1j * q * a)

    def g(u):
        r = u / t
        return (ea * np.expm1(-(r**q) * eqa) * np.exp(1j * u * ea)).real

    with warnings.catch_warnings():
        # relative tolerance near machine precision; round-off notices are expected
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, _ = integrate.quad(g, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=400)
    return v / (np.pi * t)


def stable_density_1d(q: float, tgrid, tail_tol: float | None = TAIL_TOL) -> np.ndarray:
    """Density of the standard symmetric q-stable law at the points ``tgrid``.

    ``tail_tol`` guards that the grid reaches far enough into the tails: the
    density at the outermost point must be below it (pass None to skip).
    """
    _check_q(q)
    t = np.abs(np.asarray(tgrid, dtype=float))
    flat = np.array([_density_point(q, float(x)) for x in t.ravel()])
    out = flat.reshape(t.shape)
    if tail_tol is not None and t.size:
        edge = _density_point(q, float(t.max()))
        if edge > tail_tol:
            raise ValueError(
                f"grid too narrow: density {edge:.3g} at |t|={t.max():.3g} exceeds tail tolerance {tail_tol:g}"
            )
    return out


def _panels(T: float):
    """Panel edges on [0, T]: geometric near 0 and near the tail."""
    small = [0.0] + [2.0**k for k in range(-8, 0)]
    large = [2.0**k for k in range(0, int(np.log2(T)) + 1)]
    return np.array(small + large)


@functools.lru_cache(maxsize=64)
def stable_abs_moment(q: float, p: float, T: float = 4096.0, nodes: int = 24) -> float:
    """E|X|^p for X standard symmetric q-stable, 0 < p < q.

    Gauss-Legendre panels integrate |t|^p f(t) on [0, T]; beyond T the density
    is extrapolated by f(t) ~ c1 t^{-1-q} + c2 t^{-1-2q}, with c1, c2 fitted by
    least squares on the last panel [T/2, T], and integrated in closed form.
    """
    _check_q(q)
    if not p > 0:
        raise ValueError("moment exponent must be positive")
    if p >= q and q < 2:
        raise ValueError(f"moment diverges: E|X|^p is infinite for p={p} >= q={q}")
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = _panels(T)
    total = 0.0
    last_t = last_f = None
    for a, b in zip(edges[:-1], edges[1:]):
        t = 0.5 * (b - a) * x + 0.5 * (b + a)
        f = np.array([_density_point(q, float(ti)) for ti in t])
        total += float(np.sum(0.5 * (b - a) * w * t**p * f))
        last_t, last_f = t, f
    A = np.column_stack([last_t ** (-1 - q), last_t ** (-1 - 2 * q)])
    (c1, c2), *_ = np.linalg.lstsq(A, last_f, rcond=None)
    tail = c1 * T ** (p - q) / (q - p) + c2 * T ** (p - 2 * q) / (2 * q - p)
    return float(2.0 * (total + tail))


def sample_stable(q: float, count: int, seed=None) -> np.ndarray:
    """Chambers-Mallows-Stuck draws with characteristic function exp(-|s|^q)."""
    _check_q(q)
    rng = np.random.default_rng(seed)
    U = rng.uniform(-np.pi / 2, np.pi / 2, count)
    W = rng.standard_exponential(count)
    if q == 1.0:
        return np.tan(U)
    return np.sin(q * U) / np.cos(U) ** (1.0 / q) * (np.cos((1.0 - q) * U) / W) ** ((1.0 - q) / q)


def stable_abs_moment_mc(q: float, p: float, count: int, seed=None) -> tuple[float, float]:
    """Plain Monte-Carlo estimate of E|X|^p and its naive standard error.

    The standard error is only meaningful for p < q/2 (finite variance);
    beyond that it understates the heavy-tailed fluctuation.
    """
    y = np.abs(sample_stable(q, count, seed)) ** p
    return float(y.mean()), float(y.std(ddof=1) / np.sqrt(count))


def _subpanels(a: float, b: float):
    """Split [a, b] into pieces at most 0.5 wide below 1 and at most doubling beyond."""
    cuts = [a]
    while cuts[-1] < b:
        c = cuts[-1]
        cuts.append(min(b, c + 0.5 if c < 1.0 else 2.0 * c))
    return list(zip(cuts[:-1], cuts[1:]))


def stable_cdf_1d(q: float, t, nodes: int = 16) -> np.ndarray:
    """Distribution function at the points ``t`` by integrating the density."""
    t = np.asarray(t, dtype=float)
    flat = np.abs(t.ravel())
    order = np.argsort(flat)
    x, w = np.polynomial.legendre.leggauss(nodes)
    acc, prev = 0.0, 0.0
    out = np.empty_like(flat)
    for i in order:
        b = flat[i]
        if b > prev:
            for lo, hi in _subpanels(prev, b):
                tt = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
                acc += 0.5 * (hi - lo) * float(np.sum(w * [_density_point(q, float(s)) for s in tt]))
            prev = b
        out[i] = acc
    half = out.reshape(t.shape)
    return 0.5 + np.sign(t) * half


def ks_distance(samples, q: float, grid_size: int = 400) -> float:
    """Kolmogorov-Smirnov distance between samples and the q-stable law.

    The exact CDF is computed on a grid spanning the 0.05%..99.95% sample
    quantiles and interpolated monotonically in between; outside the grid
    the error is bounded by the tail mass beyond it.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    lo, hi = np.quantile(x, [0.0005, 0.9995])
    T = max(abs(lo), abs(hi))
    pos = np.concatenate([np.linspace(0, min(T, 5.0), grid_size // 2), np.geomspace(5.0, max(T, 5.0), grid_size // 2)[1:]])
    pos = np.unique(pos)
    grid = np.concatenate([-pos[::-1], pos[1:]])
    cdf = PchipInterpolator(grid, stable_cdf_1d(q, grid, nodes=8))
    inside = (x >= grid[0]) & (x <= grid[-1])
    n = x.size
    i = np.arange(1, n + 1)
    F = np.where(inside, cdf(np.clip(x, grid[0], grid[-1])), np.where(x < grid[0], 0.0, 1.0))
    d = np.maximum(i / n - F, F - (i - 1) / n)
    tail = float(stable_cdf_1d(q, np.array([grid[0]]))[0])
    return float(max(d[inside].max(), tail))


# -- representation of l_q^n -------------------------------------------------


@dataclass(frozen=True)
class LqVerification:
    max_rel_error: float
    mc_std_error: float
    samples: int
    worst_probe: np.ndarray
    moment: float

    def to_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "mc_std_error": self.mc_std_error,
            "samples": self.samples,
            "worst_probe": [float(c) for c in self.worst_probe],
            "moment": self.moment,
        }


def _check_rep_range(q, p):
    if not ((1 <= p < q < 2) or q == 2):
        raise ValueError(f"need 1 <= p < q < 2 or q = 2, got q={q}, p={p}")


def verify_lq_levy_rep(q: float, p: float, n: int, probes: int = 20, mc: int = 10**6, seed=0) -> LqVerification:
    """Monte-Carlo check of ||x||_q^p = E|<x, X>|^p / E|X_1|^p on unit probes.

    The estimator uses the control variate sum_i |x_i X_i|^p, whose mean is
    ||x||_p^p E|X_1|^p exactly; the difference |<x, X>|^p - sum_i |x_i X_i|^p
    has finite variance for p < q, so errors shrink like mc^{-1/2} while the
    raw average of |<x, X>|^p would converge only like mc^{1/q - 1}.  The
    denominator is the quadrature moment.
    """
    _check_q(q)
    _check_rep_range(q, p)
    moment = stable_abs_moment(q, p)
    x = random_unit_vectors(n, probes, seed).vectors
    X = StableSpec(q, n, seed).sample(mc, seed=np.random.SeedSequence(seed).spawn(1)[0])
    xp = np.abs(x) ** p
    diff = np.empty((mc, probes))
    chunk = 1 << 16
    for s in range(0, mc, chunk):
        Xc = X[s : s + chunk]
        diff[s : s + chunk] = np.abs(Xc @ x.T) ** p - (np.abs(Xc) ** p) @ xp.T
    est = diff.mean(axis=0) / moment + xp.sum(axis=1)
    se = diff.std(axis=0, ddof=1) / np.sqrt(mc) / moment
    target = np.sum(np.abs(x) ** q, axis=1) ** (p / q)
    rel = np.abs(est - target) / target
    i = int(np.argmax(rel))
    return LqVerification(float(rel[i]), float(np.max(se / target)), int(mc), x[i], moment)


# -- p-projection --------------------------------------------------------------


@dataclass(frozen=True)
class SphereHistogram:
    """Masses of the p-projection on a partition of the canonical half-sphere.

    For n = 2 bin i is the arc [edges[i], edges[i+1]) of angles in [0, pi);
    each mass is nu(B) = 1/2 E[||X||_2^p ; X/||X|| in B or -B].
    """

    n: int
    edges: np.ndarray
    masses: np.ndarray
    samples_used: int
    shape: tuple = ()

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def max_fraction(self) -> float:
        return float(self.masses.max() / self.masses.sum())

    def as_density(self, m: int = 4096):
        """Piecewise-constant even density on an m-point circle grid (n = 2 only)."""
        if self.n != 2:
            raise ValueError("circle densities exist only for n = 2")
        grid = CircleGrid(m)
        theta = grid.nodes % np.pi
        width = np.diff(self.edges)
        idx = np.clip(np.searchsorted(self.edges, theta, side="right") - 1, 0, len(width) - 1)
        return CircleDensity(grid, self.masses[idx] / width[idx])

    def to_csv(self, path):
        if self.n != 2:
            raise ValueError("CSV output is defined for n = 2 arcs")
        with open(path, "w") as fh:
            fh.write("bin_start,bin_end,mass\n")
            for a, b, mass in zip(self.edges[:-1], self.edges[1:], self.masses):
                fh.write(f"{a:.17g},{b:.17g},{mass:.17g}\n")


def p_projection_histogram(q: float, p: float, n: int = 2, bins: int = 64, mc: int = 10**6, seed=0) -> SphereHistogram:
    """Monte-Carlo p-projection of mu_q onto the half-sphere.

    Each sample X contributes ||X||_2^p / 2 to the cell containing its
    canonical direction.  n = 2 uses equal arcs of [0, pi).  n = 3 uses the
    upper hemisphere split into equal-area cells: ``b`` bands equal in z
    (Archimedes) times ``bins // b`` longitude sectors, b = round(sqrt(bins/2)).
    """
    _check_q(q)
    if not (1 <= p < q < 2):
        raise ValueError(f"need 1 <= p < q < 2, got q={q}, p={p}")
    if n not in (2, 3):
        raise ValueError("p-projection histograms are implemented for n = 2 and n = 3")
    X = StableSpec(q, n, seed).sample(mc)
    r = np.linalg.norm(X, axis=1)
    wts = 0.5 * r**p / mc
    if n == 2:
        theta = np.mod(np.arctan2(X[:, 1], X[:, 0]), np.pi)
        edges = np.linspace(0.0, np.pi, bins + 1)
        masses, _ = np.histogram(theta, bins=edges, weights=wts)
        return SphereHistogram(2, edges, masses, mc, (bins,))
    nb = max(1, int(round(np.sqrt(bins / 2))))
    ns = bins // nb
    if nb * ns != bins:
        raise ValueError(f"n = 3 needs bins divisible into {nb} bands")
    u = X / r[:, None]
    u = np.where(u[:, 2:3] < 0, -u, u)
    band = np.minimum((u[:, 2] * nb).astype(int), nb - 1)
    sector = np.minimum((np.mod(np.arctan2(u[:, 1], u[:, 0]), 2 * np.pi) / (2 * np.pi) * ns).astype(int), ns - 1)
    masses = np.bincount(band * ns + sector, weights=wts, minlength=bins)
    return SphereHistogram(3, np.arange(bins + 1, dtype=float), masses, mc, (nb, ns))
