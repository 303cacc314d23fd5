"""Discrete Levy p-representations for even integer p by moment matching.

For even p, ||x||^p = sum_j w_j <x, v_j>^p is a polynomial identity, so it
holds everywhere as soon as the degree-p moments of the atomic measure match
those of the target.  Weights are found by nonnegative least squares over a
candidate set of directions, which is enlarged until the moments match.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.optimize import nnls

from .representation import DiscreteLevyRep, NormOracle, canonicalize, probe_points
from .sphere import CircleGrid, c_pn, cos_power_coefficients, random_unit_vectors

FIT_TOL = 1e-10
POLY_TOL = 1e-8
MAX_CANDIDATES = 4096


class NoRepresentationError(ValueError):
    """No nonnegative weights on the given candidates match the moments.

    This is not a refutation; a larger candidate set may succeed.
    """

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _check_even(p):
    if not (float(p).is_integer() and int(p) % 2 == 0 and p > 0):
        raise ValueError(f"moment matching needs an even integer exponent, got p={p}")
    return int(p)


def equiangular_rep(p: int, m: int) -> DiscreteLevyRep:
    """Representation of l_2^2 at exponent p with m equally spaced directions.

    Averaging |cos(phi - k pi / m)|^p over k kills every frequency below 2m,
    so for 2m > p the average equals c_{p,2} and equal pair weights
    1 / (m c_{p,2}) reproduce the Euclidean norm.
    """
    p = _check_even(p)
    if 2 * m <= p:
        raise ValueError(f"equiangular construction needs 2m > p (got m={m}, p={p})")
    t = np.pi * np.arange(m) / m
    w = np.full(m, 1.0 / (m * c_pn(p, 2)))
    return DiscreteLevyRep(2, p, w, np.column_stack([np.cos(t), np.sin(t)]))


@dataclass(frozen=True)
class MomentSystem:
    """Degree-p moment equations for a target norm.

    For n = 2 the functionals are the Fourier coefficients of ||.||^p on the
    circle at even frequencies 0..p (``basis`` lists the frequencies); for
    n >= 3 they are the monomial moments indexed by multi-indices of total
    degree p.
    """

    p: int
    dim: int
    basis: tuple
    targets: np.ndarray

    def design(self, directions: np.ndarray) -> np.ndarray:
        """Real matrix A with A @ w = stacked moments of the atoms (w, directions)."""
        directions = np.asarray(directions, dtype=float)
        if self.dim == 2:
            lam = cos_power_coefficients(self.p, self.p)
            theta = np.arctan2(directions[:, 1], directions[:, 0])
            rows = []
            for k in self.basis:
                e = lam[k] * np.exp(-1j * k * theta)
                rows.append(e.real)
                if k:
                    rows.append(e.imag)
            return np.array(rows)
        return np.array([np.prod(directions ** np.array(a), axis=1) for a in self.basis])

    def rhs(self) -> np.ndarray:
        if self.dim == 2:
            out = []
            for k, c in zip(self.basis, self.targets):
                out.append(c.real)
                if k:
                    out.append(c.imag)
            return np.array(out)
        return np.asarray(self.targets, dtype=float)


def moment_system_2d(Fp, p) -> MomentSystem:
    """Moment system from samples of ||.||^p on a uniform circle grid.

    Raises :class:`NoRepresentationError` when the samples carry content
    above frequency p: then ||.||^p is not a degree-p polynomial and no
    measure, discrete or not, represents it.
    """
    p = _check_even(p)
    Fp = np.asarray(Fp, dtype=float)
    if Fp.size < 2 * p + 2:
        raise ValueError("grid too coarse for the degree-p moments")
    c = np.fft.rfft(Fp) / Fp.size
    excess = float(np.max(np.abs(c[p + 1 :]))) / abs(c[0]) if c.size > p + 1 else 0.0
    if excess > POLY_TOL:
        raise NoRepresentationError(
            f"no representation: norm^{p} is not a polynomial of degree {p} (relative content {excess:.3g} above it)",
            excess,
        )
    ks = tuple(range(0, p + 1, 2))
    return MomentSystem(p, 2, ks, np.array([c[k] for k in ks]))


def _multi_indices(n, p):
    out = []
    for combo in itertools.combinations_with_replacement(range(n), p):
        a = [0] * n
        for i in combo:
            a[i] += 1
        out.append(tuple(a))
    return sorted(out, reverse=True)


def moment_system(norm: NormOracle, p, m: int = 256, seed=0) -> MomentSystem:
    """Moment system of a norm oracle.

    In the plane ||.||^p is sampled on an m-point circle grid.  In higher
    dimension the coefficients of the polynomial ||x||^p are recovered by
    least squares from random unit probes, and divided by the multinomial
    coefficients to give the moments.  A target that is not a degree-p
    polynomial raises :class:`NoRepresentationError`.
    """
    p = _check_even(p)
    if norm.dim == 2:
        grid = CircleGrid(max(m, 2 * p + 2 + (2 * p + 2) % 2))
        return moment_system_2d(norm(grid.directions()) ** p, p)
    n = norm.dim
    basis = _multi_indices(n, p)
    x = random_unit_vectors(n, 4 * len(basis) + 16, seed).vectors
    X = np.array([np.prod(x ** np.array(a), axis=1) for a in basis]).T
    y = norm(x) ** p
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    misfit = float(np.max(np.abs(X @ coef - y)) / np.max(y))
    if misfit > POLY_TOL:
        raise NoRepresentationError(
            f"no representation: norm^{p} is not a polynomial of degree {p} (fit error {misfit:.3g})", misfit
        )
    multinom = np.array([factorial(p) / np.prod([factorial(k) for k in a]) for a in basis])
    return MomentSystem(p, n, tuple(basis), coef / multinom)


def _prune_support(A, w, tol=1e-13):
    """Caratheodory reduction: keep A @ w fixed while shrinking the support to rank(A_S)."""
    w = w.copy()
    while True:
        S = np.flatnonzero(w > 0)
        if S.size == 0:
            return w
        As = A[:, S]
        _, sv, vt = np.linalg.svd(As)
        rank = int(np.sum(sv > tol * sv[0])) if sv.size else 0
        if S.size <= rank:
            return w
        z = vt[-1]
        if not np.any(z > 0):
            z = -z
        pos = z > 0
        ratios = np.full(S.size, np.inf)
        ratios[pos] = w[S][pos] / z[pos]
        i = int(np.argmin(ratios))
        w[S] = w[S] - ratios[i] * z
        w[S[i]] = 0.0
        w[w < 0] = 0.0


def _default_candidates(system: MomentSystem, count: int, seed=0) -> np.ndarray:
    if system.dim == 2:
        t = np.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    rand = random_unit_vectors(system.dim, max(count - system.dim, 1), seed).vectors
    return np.vstack([np.eye(system.dim), rand])


def _fit_on(system: MomentSystem, candidates, tol):
    cands = canonicalize(DiscreteLevyRep(system.dim, system.p, np.ones(len(candidates)), candidates)).directions
    if system.dim == 2:
        order = np.argsort(np.arctan2(cands[:, 1], cands[:, 0]) % np.pi, kind="stable")
    else:
        order = np.lexsort(cands.T[::-1])
    cands = cands[order]
    A, b = system.design(cands), system.rhs()
    bnorm = max(np.linalg.norm(b), 1e-300)
    w, _ = nnls(A, b, maxiter=50 * A.shape[1])
    w = _prune_support(A, w)
    S = np.flatnonzero(w > 0)
    if S.size:
        ws, _ = nnls(A[:, S], b)
        w = np.zeros_like(w)
        w[S] = ws
    residual = float(np.linalg.norm(A @ w - b) / bnorm)
    S = np.flatnonzero(w > 0)
    rep = DiscreteLevyRep(system.dim, system.p, w[S], cands[S]) if S.size else None
    return rep, residual


def fit_weights_even_p(system: MomentSystem, candidates=None, tol: float = FIT_TOL, seed=0):
    """Nonnegative weights on candidate directions matching the moments.

    Returns ``(rep, residual)`` where ``residual`` is the relative Euclidean
    residual of the moment equations and ``rep`` keeps only atoms with
    positive weight.  With ``candidates=None`` equispaced (n = 2) or basis plus
    random (n >= 3) candidate sets are doubled from 8 up to 4096 directions.
    Raises :class:`NoRepresentationError` if the residual stays above ``tol``.
    """
    if candidates is not None:
        rep, residual = _fit_on(system, np.asarray(candidates, dtype=float), tol)
        if residual > tol or rep is None:
            raise NoRepresentationError(f"no representation on this candidate set (residual {residual:.3g})", residual)
        return rep, residual
    count = max(8, len(system.basis) + 1)
    best = np.inf
    while count <= MAX_CANDIDATES:
        rep, residual = _fit_on(system, _default_candidates(system, count, seed), tol)
        best = min(best, residual)
        if rep is not None and residual <= tol:
            return rep, residual
        count *= 2
    raise NoRepresentationError(
        f"no representation found with up to {MAX_CANDIDATES} candidates (best residual {best:.3g})", best
    )


def residual_check(rep: DiscreteLevyRep, norm: NormOracle, probes: int = 100, seed=0) -> float:
    """Largest relative error of sum_j w_j <x, v_j>^p against ||x||^p on unit probes."""
    _check_even(rep.p)
    x = probe_points(rep.dim, probes, seed)
    lhs = ((x @ rep.directions.T) ** int(rep.p)) @ rep.weights
    rhs = np.atleast_1d(norm(x)) ** rep.p
    return float(np.max(np.abs(lhs - rhs) / rhs))
