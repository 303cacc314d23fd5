"""Isometric embeddings into l_p^N and their discrete representations.

A discrete representation with atoms (w_j, v_j) gives the linear map
x -> (w_j^{1/p} <x, v_j>)_j, whose l_p norm is the represented norm.
Conversely every linear map x -> M x into l_p^N induces such a
representation: drop zero rows, and let each row r_j contribute the direction
r_j / |r_j|_2 with pair weight |r_j|_2^p.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .representation import DiscreteLevyRep, NormOracle, canonicalize, probe_points


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Linear map R^n -> l_p^N; row j gives coordinate j of the image."""

    rows: np.ndarray
    p: float

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.size == 0:
            raise ValueError("embedding matrix must be a nonempty 2-D array")
        if not np.all(np.isfinite(rows)):
            raise ValueError("embedding matrix entries must be finite")
        if not (np.isfinite(self.p) and self.p > 0):
            raise ValueError(f"exponent must be positive and finite, got {self.p}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "p", float(self.p))

    @property
    def dim(self) -> int:
        return self.rows.shape[1]

    @property
    def shape(self):
        return self.rows.shape

    def apply(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.rows.T

    def lp_norm(self, x):
        """||M x||_p for a point or a batch of points."""
        y = np.abs(self.apply(x))
        out = np.sum(y**self.p, axis=-1) ** (1.0 / self.p)
        return float(out) if out.ndim == 0 else out

    def to_dict(self) -> dict:
        return {"p": self.p, "rows": [[float(c) for c in r] for r in self.rows]}

    @classmethod
    def from_dict(cls, data) -> "EmbeddingMatrix":
        try:
            return cls(np.array(data["rows"], dtype=float), float(data["p"]))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed embedding matrix: {exc!r}") from exc

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "EmbeddingMatrix":
        return cls.from_dict(json.loads(Path(path).read_text()))


def rep_to_embedding(rep: DiscreteLevyRep) -> EmbeddingMatrix:
    """Rows w_j^{1/p} v_j, in atom order."""
    if len(rep) == 0:
        raise ValueError("representation has no atoms")
    rows = rep.weights[:, None] ** (1.0 / rep.p) * rep.directions
    return EmbeddingMatrix(rows, rep.p)


def embedding_to_rep(M: EmbeddingMatrix) -> DiscreteLevyRep:
    norms = np.linalg.norm(M.rows, axis=1)
    nz = norms > 0
    if not np.any(nz):
        raise ValueError("all-zero embedding matrix induces the zero seminorm")
    rows, r = M.rows[nz], norms[nz]
    return canonicalize(DiscreteLevyRep(M.dim, M.p, r**M.p, rows / r[:, None]))


@dataclass(frozen=True)
class IsometryReport:
    max_rel_error: float
    worst_probe: np.ndarray
    probes: int
    seed: object

    def to_dict(self) -> dict:
        return {
            "max_rel_error": self.max_rel_error,
            "worst_probe": [float(c) for c in self.worst_probe],
            "probes": self.probes,
            "seed": self.seed,
        }


def verify_isometry(M: EmbeddingMatrix, norm: NormOracle, probes: int = 100, seed=0) -> IsometryReport:
    """Largest relative gap between ||M x||_p and ||x|| over random unit probes."""
    if M.dim != norm.dim:
        raise ValueError(f"matrix acts on R^{M.dim}, norm on R^{norm.dim}")
    x = probe_points(M.dim, probes, seed)
    target = np.atleast_1d(norm(x))
    err = np.abs(np.atleast_1d(M.lp_norm(x)) - target) / target
    i = int(np.argmax(err))
    return IsometryReport(float(err[i]), x[i].copy(), probes, seed)
