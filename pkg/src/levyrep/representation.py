"""Levy p-representations of norms and norm evaluation from them.

A norm on R^n has a Levy p-representation when

    ||x||^p = \\int_{S^{n-1}} |<x, v>|^p d xi(v)

for an even measure xi on the sphere.  A discrete representation is stored as
a finite list of atoms ``(w_j, v_j)``, one per antipodal pair, where ``w_j``
is the *total* mass of the pair {v_j, -v_j}.  With that convention

    ||x||^p = sum_j w_j |<x, v_j>|^p.

If the measure is written xi = sum_j a_j (delta_{v_j} + delta_{-v_j}) then
``w_j = 2 a_j``; if instead a one-sided sum sum_j a_j |<x, v_j>|^p is given,
``w_j = a_j``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .sphere import CircleGrid, cos_power_coefficients, random_unit_vectors, trig_interpolate

MERGE_TOL = 1e-12
SIGN_TOL = 1e-12


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteLevyRep:
    """Finite discrete Levy p-representation.

    ``weights[j]`` is the pair weight of ``directions[j]``.  The constructor
    only checks shapes and finiteness; use :func:`canonicalize` (or
    :meth:`from_atoms`) to normalize directions, fix signs and merge
    duplicates.
    """

    dim: int
    p: float
    weights: np.ndarray
    directions: np.ndarray

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"exponent must be positive and finite, got {self.p}")
        w = _readonly(self.weights).reshape(-1)
        v = _readonly(self.directions).reshape(-1, int(self.dim)) if np.size(self.directions) else np.zeros((0, int(self.dim)))
        if len(w) != len(v):
            raise ValueError(f"{len(w)} weights for {len(v)} directions")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise ValueError("atoms must be finite")
        v = _readonly(v)
        object.__setattr__(self, "dim", int(self.dim))
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "directions", v)

    @classmethod
    def from_atoms(cls, dim, p, atoms) -> "DiscreteLevyRep":
        """Build a canonical representation from ``(weight, direction)`` pairs."""
        atoms = list(atoms)
        w = [a[0] for a in atoms]
        v = [a[1] for a in atoms] if atoms else np.zeros((0, dim))
        return canonicalize(cls(dim, p, w, v))

    @property
    def atoms(self) -> list[tuple[float, np.ndarray]]:
        return [(float(w), v.copy()) for w, v in zip(self.weights, self.directions)]

    def __len__(self):
        return len(self.weights)

    def __call__(self, x):
        return eval_norm_discrete(self, x)

    def is_canonical(self) -> bool:
        if np.any(self.weights <= 0):
            return False
        if not np.allclose(np.linalg.norm(self.directions, axis=1), 1.0, atol=1e-12, rtol=0):
            return False
        c = canonicalize(self)
        return len(c) == len(self) and np.array_equal(c.directions, self.directions)

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "p": self.p,
            "atoms": [{"w": float(w), "v": [float(c) for c in v]} for w, v in zip(self.weights, self.directions)],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiscreteLevyRep":
        try:
            dim, p, atoms = int(data["dim"]), float(data["p"]), data["atoms"]
            pairs = [(float(a["w"]), [float(c) for c in a["v"]]) for a in atoms]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed representation: {exc!r}") from exc
        if any(len(v) != dim for _, v in pairs):
            raise ValueError("atom direction length does not match dim")
        return cls.from_atoms(dim, p, pairs)

    def save(self, path):
        Path(path).write_text(json.dumps(canonicalize(self).to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DiscreteLevyRep":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _canonical_sign(v: np.ndarray) -> np.ndarray:
    big = np.abs(v) > SIGN_TOL
    first = np.argmax(big, axis=1)
    s = np.sign(v[np.arange(len(v)), first])
    s[s == 0] = 1.0
    return v * s[:, None]


def canonicalize(rep: DiscreteLevyRep, tol: float = MERGE_TOL) -> DiscreteLevyRep:
    """Normalize directions, fix antipodal signs and merge duplicate atoms.

    Non-unit directions are rescaled with the weight adjusted by |v|^p so the
    evaluated norm is unchanged.  The first coordinate exceeding 1e-12 in
    absolute value is made positive.  Atoms whose canonical directions lie
    within ``tol`` of an earlier atom are merged into it by adding weights;
    atom order is otherwise preserved.
    """
    w = np.array(rep.weights, dtype=float)
    v = np.array(rep.directions, dtype=float)
    if np.any(w <= 0):
        raise ValueError("atom weights must be positive")
    r = np.linalg.norm(v, axis=1)
    if np.any(r == 0):
        raise ValueError("atom directions must be nonzero")
    # rows already of unit length (to rounding) are left alone so canonicalize is idempotent
    r = np.where(np.abs(r - 1.0) <= 4 * np.finfo(float).eps, 1.0, r)
    w = w * r**rep.p
    v = _canonical_sign(v / r[:, None])

    keep_w: list[float] = []
    keep_v: list[np.ndarray] = []
    for wj, vj in zip(w, v):
        if keep_v:
            d = np.linalg.norm(np.asarray(keep_v) - vj, axis=1)
            i = int(np.argmin(d))
            if d[i] <= tol:
                keep_w[i] += wj
                continue
        keep_w.append(float(wj))
        keep_v.append(vj)
    dirs = np.asarray(keep_v) if keep_v else np.zeros((0, rep.dim))
    return DiscreteLevyRep(rep.dim, rep.p, keep_w, dirs)


def eval_norm_discrete(rep: DiscreteLevyRep, x):
    """(sum_j w_j |<x, v_j>|^p)^(1/p) for a point or a batch of points (..., n)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != rep.dim:
        raise ValueError(f"point has dimension {x.shape[-1]}, representation has {rep.dim}")
    s = np.abs(x @ rep.directions.T) ** rep.p @ rep.weights
    out = s ** (1.0 / rep.p)
    return float(out) if out.ndim == 0 else out


def euclidean_rep(n: int) -> DiscreteLevyRep:
    """Discrete 2-representation of l_2^n: unit pair weight on each basis direction."""
    return DiscreteLevyRep(n, 2.0, np.ones(n), np.eye(n))


def lq_basis_rep(q: float, n: int) -> DiscreteLevyRep:
    """Representation of l_q^n with exponent q on the basis directions."""
    return DiscreteLevyRep(n, q, np.ones(n), np.eye(n))


def transform_rep(rep: DiscreteLevyRep, A) -> DiscreteLevyRep:
    """Representation of x -> rep(A x): atoms move to A^T v_j (then renormalized)."""
    A = np.asarray(A, dtype=float)
    if A.shape != (rep.dim, rep.dim):
        raise ValueError(f"need a {rep.dim}x{rep.dim} matrix")
    return canonicalize(DiscreteLevyRep(rep.dim, rep.p, rep.weights, rep.directions @ A))


# -- densities on the circle -------------------------------------------------


@dataclass(frozen=True)
class CircleDensity:
    """Even measure on S^1: density samples on a grid plus explicit pair atoms.

    ``values[k]`` is the density h(theta_k) with respect to d theta on the full
    circle; ``atoms`` holds ``(angle, mass)`` with angle reduced to [0, pi) and
    mass the total of the antipodal pair.  Values may be signed (inverse
    transforms produce signed densities); :meth:`is_nonnegative` checks the
    measure condition.
    """

    grid: CircleGrid
    values: np.ndarray
    atoms: tuple = ()

    def __post_init__(self):
        vals = _readonly(self.values).reshape(-1)
        if vals.size != self.grid.m:
            raise ValueError(f"{vals.size} samples for a grid of size {self.grid.m}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("density samples must be finite")
        atoms = []
        for theta, mass in self.atoms:
            theta, mass = float(theta), float(mass)
            if not (np.isfinite(theta) and np.isfinite(mass)) or mass <= 0:
                raise ValueError(f"invalid atom ({theta}, {mass})")
            t = theta % np.pi
            atoms.append((0.0 if np.isclose(t, np.pi, rtol=0, atol=1e-15) else t, mass))
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "atoms", tuple(atoms))

    @property
    def min_value(self) -> float:
        return float(self.values.min())

    def is_nonnegative(self, tol: float = 1e-9) -> bool:
        return self.min_value >= -tol

    def total_mass(self) -> float:
        return self.grid.integrate(self.values) + sum(m for _, m in self.atoms)

    def atomic_rep(self, p: float) -> DiscreteLevyRep:
        """The atomic part as a discrete representation with exponent p."""
        if not self.atoms:
            raise ValueError("density has no atoms")
        return DiscreteLevyRep.from_atoms(2, p, [(m, (np.cos(t), np.sin(t))) for t, m in self.atoms])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["theta", "h"])
            for t, h in zip(self.grid.nodes, self.values):
                w.writerow([f"{t:.17g}", f"{h:.17g}"])

    def atoms_to_json(self, path):
        Path(path).write_text(json.dumps([{"theta": t, "mass": m} for t, m in self.atoms], indent=2) + "\n")

    @classmethod
    def from_csv(cls, path, atoms_path=None) -> "CircleDensity":
        theta, h = _read_two_column_csv(path, ("theta", "h"))
        grid = _grid_for(theta)
        atoms = ()
        if atoms_path is not None:
            atoms = tuple((a["theta"], a["mass"]) for a in json.loads(Path(atoms_path).read_text()))
        return cls(grid, h, atoms)


def _read_two_column_csv(path, header):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != list(header):
        raise ValueError(f"{path}: expected header {','.join(header)}")
    try:
        data = np.array([[float(c) for c in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric entry ({exc})") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns")
    return data[:, 0], data[:, 1]


def _grid_for(theta) -> CircleGrid:
    grid = CircleGrid(len(theta))
    if not np.allclose(theta, grid.nodes, rtol=0, atol=1e-9):
        raise ValueError("theta column is not the uniform grid 2*pi*k/m")
    return grid


def eval_norm_density(density: CircleDensity, p: float, x):
    """Norm induced by an even measure on S^1 with exponent p.

    The density part is the convolution of h with |cos|^p, evaluated exactly
    for the trigonometric interpolant of the samples through the Fourier
    coefficients of |cos|^p; atoms are summed directly.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != 2:
        raise ValueError("densities on the circle act on points of R^2")
    r = np.hypot(x[..., 0], x[..., 1])
    phi = np.arctan2(x[..., 1], x[..., 0])
    fp = _density_transform(density, p, phi)
    out = r * np.maximum(fp, 0.0) ** (1.0 / p)
    return float(out) if out.ndim == 0 else out


def _density_transform(density: CircleDensity, p: float, phi) -> np.ndarray:
    """phi -> \\int |cos(phi - theta)|^p h(theta) d theta + sum mass |cos(phi - t)|^p."""
    phi = np.asarray(phi, dtype=float)
    m = density.grid.m
    lam = cos_power_coefficients(p, m // 2)
    conv = 2.0 * np.pi * lam
    # convolution theorem: coefficients multiply, applied to the interpolant
    c = np.fft.rfft(density.values) * conv
    out = trig_interpolate(np.fft.irfft(c, n=m), phi)
    for t, mass in density.atoms:
        out = out + mass * np.abs(np.cos(phi - t)) ** p
    return out


# -- norm oracles ------------------------------------------------------------


@dataclass(frozen=True)
class NormOracle:
    """A norm on R^n given by an evaluator ``x -> ||x||`` (batched over rows).

    ``kind`` is one of ``lq``, ``boundary2d``, ``discrete``, ``matrix-preimage``
    or ``custom``; ``params`` keeps what the oracle was built from.  Nothing
    is cached: every call evaluates afresh.
    """

    dim: int
    kind: str
    params: dict = field(default_factory=dict, compare=False)
    evaluator: Callable = field(default=None, compare=False, repr=False)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"point has dimension {x.shape[-1]}, norm has {self.dim}")
        out = np.asarray(self.evaluator(x), dtype=float)
        return float(out) if out.ndim == 0 else out

    def describe(self) -> dict:
        d = {"kind": self.kind, "dim": self.dim}
        d.update({k: v for k, v in self.params.items() if isinstance(v, (int, float, str))})
        return d

    @classmethod
    def lq(cls, q: float, n: int) -> "NormOracle":
        if not q > 0:
            raise ValueError("q must be positive")
        if np.isinf(q):
            fn = lambda x: np.max(np.abs(x), axis=-1)
        else:
            fn = lambda x: np.sum(np.abs(x) ** q, axis=-1) ** (1.0 / q)
        return cls(n, "lq", {"q": float(q)}, fn)

    @classmethod
    def discrete(cls, rep: DiscreteLevyRep) -> "NormOracle":
        return cls(rep.dim, "discrete", {"rep": rep, "p": rep.p}, lambda x: eval_norm_discrete(rep, x))

    @classmethod
    def boundary2d(cls, boundary) -> "NormOracle":
        """Norm from samples G(theta_k) = ||(cos theta_k, sin theta_k)||.

        Off-grid directions use the trigonometric interpolant, which is exact
        only for band-limited G; non-smooth boundaries should use a custom
        oracle.
        """
        values = np.asarray(boundary.values, dtype=float)

        def fn(x):
            r = np.hypot(x[..., 0], x[..., 1])
            return r * trig_interpolate(values, np.arctan2(x[..., 1], x[..., 0]))

        return cls(2, "boundary2d", {"boundary": boundary, "m": int(values.size)}, fn)

    @classmethod
    def matrix_preimage(cls, A, inner: "NormOracle") -> "NormOracle":
        """x -> inner(A x): the norm whose unit ball is A^{-1}(unit ball of inner)."""
        A = np.asarray(A, dtype=float)
        if A.shape != (inner.dim, inner.dim):
            raise ValueError(f"need a {inner.dim}x{inner.dim} matrix")
        if abs(np.linalg.det(A)) < 1e-14 * max(1.0, np.abs(A).max()) ** inner.dim:
            raise ValueError("matrix must be invertible")
        return cls(inner.dim, "matrix-preimage", {"matrix": A, "inner": inner}, lambda x: inner.evaluator(x @ A.T))

    @classmethod
    def custom(cls, fn: Callable, n: int, name: str = "custom") -> "NormOracle":
        return cls(n, "custom", {"name": name}, fn)


def check_norm_axioms(norm: NormOracle, probes: int = 100, seed=0) -> dict:
    """Worst homogeneity and triangle-inequality defects on random probes."""
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((probes, norm.dim))
    y = rng.standard_normal((probes, norm.dim))
    t = rng.standard_normal(probes) * 3
    nx, ny = norm(x), norm(y)
    hom = np.abs(norm(t[:, None] * x) - np.abs(t) * nx) / np.maximum(np.abs(t) * nx, 1e-300)
    tri = (norm(x + y) - nx - ny) / (nx + ny)
    return {"homogeneity": float(hom.max()), "triangle": float(max(tri.max(), 0.0))}


def probe_points(n: int, probes: int, seed) -> np.ndarray:
    return random_unit_vectors(n, probes, seed).vectors
