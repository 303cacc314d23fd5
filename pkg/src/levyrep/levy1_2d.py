"""Levy 1-representations of planar norms.

For a norm on R^2 write G(theta) = ||(cos theta, sin theta)||.  Integrating by
parts twice gives, for every phi,

    G(phi) = 1/4 \\int_0^{2pi} |cos(phi - theta)| (G + G'')(theta - pi/2) d theta,

so the even measure with density h(theta) = (G + G'')(theta - pi/2) / 4 is
the (unique) Levy 1-representation.  When G' jumps by J at theta_0 the term
G'' carries a point mass J there, which becomes an atom of mass J/4 at the
direction theta_0 + pi/2; together with the antipodal corner this is a pair
atom of total mass J/2.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .embedding import EmbeddingMatrix, rep_to_embedding
from .representation import (
    CircleDensity,
    DiscreteLevyRep,
    _density_transform,
    _grid_for,
    _read_two_column_csv,
)
from .sphere import CircleGrid

NEGATIVE_DENSITY_TOL = 1e-6
DISCRETE_TOL = 1e-6


class DensitySignWarning(UserWarning):
    """The computed Levy density has significantly negative values."""


@dataclass(frozen=True)
class BoundaryFunction2D:
    """Samples G(theta_k) of a planar norm on the unit circle."""

    grid: CircleGrid
    values: np.ndarray

    def __post_init__(self):
        g = np.array(self.values, dtype=float).reshape(-1)
        if g.size != self.grid.m:
            raise ValueError(f"{g.size} samples for a grid of size {self.grid.m}")
        if not np.all(np.isfinite(g)) or np.any(g <= 0):
            raise ValueError("boundary values must be finite and strictly positive")
        half = self.grid.m // 2
        if np.max(np.abs(g - np.roll(g, half))) > 1e-10 * g.max():
            raise ValueError("boundary function is not even: G(theta + pi) != G(theta)")
        g.setflags(write=False)
        object.__setattr__(self, "values", g)

    @property
    def m(self) -> int:
        return self.grid.m

    @classmethod
    def from_norm(cls, norm, m: int = 2048) -> "BoundaryFunction2D":
        """Sample any callable norm on R^2 (batched over rows) at m directions."""
        grid = CircleGrid(m)
        return cls(grid, np.asarray(norm(grid.directions()), dtype=float))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "G"])
            for t, g in zip(self.grid.nodes, self.values):
                w.writerow([f"{t:.17g}", f"{g:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "BoundaryFunction2D":
        theta, g = _read_two_column_csv(path, ("theta", "G"))
        return cls(_grid_for(theta), g)


def _check_power_of_two(m: int):
    if m < 64 or m & (m - 1):
        raise ValueError(f"spectral differentiation needs a power-of-two grid >= 64, got m={m}")


def spectral_second_derivative(G: BoundaryFunction2D) -> np.ndarray:
    """G'' on the grid by multiplying Fourier coefficients by -k^2."""
    m = G.grid.m
    _check_power_of_two(m)
    k = np.arange(m // 2 + 1)
    return np.fft.irfft(-(k**2) * np.fft.rfft(G.values), n=m)


def spectral_derivative(G: BoundaryFunction2D) -> np.ndarray:
    m = G.grid.m
    _check_power_of_two(m)
    k = np.arange(m // 2 + 1).astype(complex)
    k[-1] = 0.0  # the Nyquist mode has no well-defined first derivative
    return np.fft.irfft(1j * k * np.fft.rfft(G.values), n=m)


def levy1_density(G: BoundaryFunction2D) -> CircleDensity:
    """h(theta) = (G + G'')(theta - pi/2) / 4 on the grid, no atoms.

    Only meaningful as a density when G is C^2 at grid resolution.  A
    :class:`DensitySignWarning` is issued when min h < -1e-6, which signals a
    non-convex input or corners (atoms) smeared by the spectral derivative.
    """
    m = G.grid.m
    raw = 0.25 * (G.values + spectral_second_derivative(G))
    h = np.roll(raw, m // 4)
    if h.min() < -NEGATIVE_DENSITY_TOL:
        warnings.warn(
            f"Levy density has min {h.min():.3g} < 0: input not convex or has corners; "
            "use detect_corner_atoms",
            DensitySignWarning,
            stacklevel=2,
        )
    return CircleDensity(G.grid, h)


def reconstruct_boundary(h: CircleDensity) -> BoundaryFunction2D:
    """G(phi) = \\int |cos(phi - theta)| h(theta) d theta + atomic terms, on h's grid."""
    if not h.atoms and not np.any(h.values):
        raise ValueError("zero measure does not define a norm")
    return BoundaryFunction2D(h.grid, _density_transform(h, 1.0, h.grid.nodes))


# -- corner detection --------------------------------------------------------

_FIT_POINTS = 8


def _local_fit(theta, g, center, width):
    t = (theta - center) / width
    basis = np.column_stack([np.cos(theta), np.sin(theta), t**2, t**3])
    coef, *_ = np.linalg.lstsq(basis, g, rcond=None)

    def f(x):
        tt = (x - center) / width
        return coef[0] * np.cos(x) + coef[1] * np.sin(x) + coef[2] * tt**2 + coef[3] * tt**3

    def df(x):
        tt = (x - center) / width
        return -coef[0] * np.sin(x) + coef[1] * np.cos(x) + (2 * coef[2] * tt + 3 * coef[3] * tt**2) / width

    return f, df


def _find_jumps(values: np.ndarray, min_jump: float) -> list[tuple[float, float]]:
    """Positive jumps (theta_0, J) of G' from uniform samples on [0, 2 pi).

    Slope changes s_k concentrate at a corner in one or two adjacent nodes;
    the background-subtracted pair sum P_k removes the smooth curvature to
    third order.  Each run of P above ``min_jump`` is refined by fitting the
    two sides separately and intersecting the fits.
    """
    m = values.size
    h = 2 * np.pi / m
    theta = h * np.arange(m)
    s = (np.roll(values, -1) - 2 * values + np.roll(values, 1)) / h
    P = s + np.roll(s, -1) - np.roll(s, 2) - np.roll(s, -3)
    flag = P > min_jump
    if not flag.any():
        return []
    if flag.all():
        raise ValueError("corner detection failed: slope changes everywhere")

    # contiguous runs on the circle, starting after an unflagged node
    start = int(np.argmin(flag))
    order = (start + np.arange(m)) % m
    runs, cur = [], []
    for i in order:
        if flag[i]:
            cur.append(i)
        elif cur:
            runs.append(cur)
            cur = []
    if cur:
        runs.append(cur)

    jumps = []
    L = _FIT_POINTS
    for run in runs:
        k = run[int(np.argmax(P[run]))]
        lo, hi = k - 1, k + 2
        left = np.arange(lo - L, lo + 1)
        right = np.arange(hi, hi + L + 1)
        center = 0.5 * (lo + hi) * h
        fL, dL = _local_fit(left * h, values[left % m], center, L * h)
        fR, dR = _local_fit(right * h, values[right % m], center, L * h)
        a, b = lo * h, hi * h
        d = lambda x: fL(x) - fR(x)
        if d(a) > 0 > d(b):
            t0 = brentq(d, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        else:
            xs = np.linspace(a, b, 301)
            t0 = xs[int(np.argmin(np.abs(d(xs))))]
        J = float(dR(t0) - dL(t0))
        if J > min_jump:
            jumps.append((float(t0 % (2 * np.pi)), J))
    return jumps


def _circ_dist(a, b, period):
    d = (a - b) % period
    return min(d, period - d)


def detect_corner_atoms(G: BoundaryFunction2D, threshold: float = 1e-3) -> list[tuple[float, float]]:
    """Atoms of the Levy 1-measure produced by corners of G.

    Jumps of G' are located at grid size m and at m/2 (every other sample)
    and kept only when both resolutions agree.  ``threshold`` is relative to
    max|G'| (or max G when G is constant).  Returns ``(angle, pair_mass)``
    with angle in [0, pi), sorted by angle.
    """
    if not threshold > 0:
        raise ValueError("threshold must be positive")
    g = G.values
    m = g.size
    h = 2 * np.pi / m
    slope = np.abs(np.diff(np.append(g, g[0]))) / h
    scale = slope.max() if slope.max() > 1e-12 * g.max() else g.max()
    min_jump = threshold * scale

    fine = _find_jumps(g, min_jump)
    coarse = _find_jumps(g[::2], min_jump) if m >= 32 else fine
    stable = []
    for t0, J in fine:
        if any(_circ_dist(t0, tc, 2 * np.pi) <= 4 * h and abs(J - Jc) <= 1e-2 * J for tc, Jc in coarse):
            stable.append((t0, J))

    # each corner contributes J/4 at direction theta_0 + pi/2; merge antipodes
    atoms: list[list[float]] = []
    for t0, J in stable:
        direction = (t0 + np.pi / 2) % np.pi
        mass = J / 4
        for atom in atoms:
            if _circ_dist(atom[0], direction, np.pi) <= 2 * h:
                # mass-weighted mean angle, unwrapped near the 0 / pi seam
                delta = (direction - atom[0] + np.pi / 2) % np.pi - np.pi / 2
                atom[0] = (atom[0] + delta * mass / (atom[1] + mass)) % np.pi
                atom[1] += mass
                break
        else:
            atoms.append([direction, mass])
    return sorted((float(t), float(w)) for t, w in atoms)


def atomic_boundary(atoms, grid: CircleGrid) -> np.ndarray:
    """sum_j mass_j |cos(theta - t_j)| on the grid."""
    theta = grid.nodes
    out = np.zeros(grid.m)
    for t, mass in atoms:
        out += mass * np.abs(np.cos(theta - t))
    return out


# -- verdicts ----------------------------------------------------------------


@dataclass
class L1Report:
    verdict: str
    atoms: list
    density_min: float
    residual: float
    noise_floor: float = 0.0
    embedding: EmbeddingMatrix | None = field(default=None, repr=False)

    @property
    def refutes(self) -> bool:
        """True for verdicts that certify non-embeddability into l_1."""
        return self.verdict in ("continuous-positive", "mixed")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "atoms": [{"theta": t, "mass": w} for t, w in self.atoms],
            "density_min": self.density_min,
            "residual": self.residual,
        }


def _density_noise_floor(values: np.ndarray) -> float:
    """Size of the spectral density's content in the top quarter of frequencies.

    For a norm that is smooth at grid resolution this is round-off; corners or
    under-resolved features put visible mass there.
    """
    m = values.size
    c = np.fft.rfft(values) / m
    k = np.arange(c.size)
    dens = 0.25 * np.abs((1 - k**2) * c)
    tail = 2 * dens[3 * c.size // 4 :].sum()
    return float(tail + 1e-13 * max(1.0, dens[0]))


def l1_embeddability_report(G: BoundaryFunction2D, threshold: float = 1e-3) -> L1Report:
    """Classify the Levy 1-measure of G as discrete, continuous, mixed or unknown.

    ``discrete``: corner atoms alone reproduce G within 1e-6 (relative), and
    the induced l_1 embedding is attached.  ``continuous-positive``: no
    corners, a density that is nonnegative up to ten times the noise floor
    and carries mass well above it, and exact reconstruction; by uniqueness of the Levy 1-representation the
    norm does not embed in l_1.  ``mixed``: corners plus a significant
    positive continuous remainder.  Anything else is ``inconclusive``.
    """
    m = G.grid.m
    gmax = G.values.max()
    atoms = detect_corner_atoms(G, threshold)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DensitySignWarning)
        density = levy1_density(G)
    density_min = density.min_value

    if atoms:
        g_atoms = atomic_boundary(atoms, G.grid)
        residual = float(np.max(np.abs(g_atoms - G.values)) / gmax)
        if residual <= DISCRETE_TOL:
            rep = DiscreteLevyRep.from_atoms(2, 1.0, [(w, (np.cos(t), np.sin(t))) for t, w in atoms])
            return L1Report("discrete", atoms, density_min, residual, 0.0, rep_to_embedding(rep))
        rest = G.values - g_atoms
        noise = _density_noise_floor(rest)
        h_rest = np.roll(0.25 * (rest + np.fft.irfft(-(np.arange(m // 2 + 1) ** 2) * np.fft.rfft(rest), n=m)), m // 4)
        full = CircleDensity(G.grid, h_rest, tuple(atoms))
        residual = float(np.max(np.abs(_density_transform(full, 1.0, G.grid.nodes) - G.values)) / gmax)
        rest_min = float(h_rest.min())
        if rest_min > -10 * noise and h_rest.max() > 10 * noise and residual <= DISCRETE_TOL:
            return L1Report("mixed", atoms, rest_min, residual, noise)
        return L1Report("inconclusive", atoms, rest_min, residual, noise)

    noise = _density_noise_floor(G.values)
    recon = _density_transform(density, 1.0, G.grid.nodes)
    residual = float(np.max(np.abs(recon - G.values)) / gmax)
    # zeros of h are allowed (l_4^2 has four); only significant negativity is not
    if density_min > -10 * noise and density.values.max() > 10 * noise and residual <= DISCRETE_TOL:
        return L1Report("continuous-positive", [], density_min, residual, noise)
    return L1Report("inconclusive", [], density_min, residual, noise)
