import warnings

import numpy as np
import pytest
from conftest import polygon_atoms, polygon_norm
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from levyrep import (
    BoundaryFunction2D,
    CircleDensity,
    CircleGrid,
    DensitySignWarning,
    NormOracle,
    detect_corner_atoms,
    l1_embeddability_report,
    levy1_density,
    reconstruct_boundary,
    spectral_second_derivative,
    verify_isometry,
)
from levyrep.levy1_2d import atomic_boundary, spectral_derivative

M = 2048


def boundary(fn, m=M):
    g = CircleGrid(m)
    return BoundaryFunction2D(g, fn(g.nodes))


def l4_boundary_analytic(t):
    return (np.cos(t) ** 4 + np.sin(t) ** 4) ** 0.25


def rel_sup(a, b):
    return float(np.max(np.abs(a - b)) / np.max(np.abs(b)))


class TestBoundaryFunction:
    def test_rejects_non_even(self):
        with pytest.raises(ValueError, match="even"):
            boundary(lambda t: 2 + np.cos(t), 64)

    @pytest.mark.parametrize("fill", [0.0, -1.0, np.nan])
    def test_rejects_non_positive(self, fill):
        g = CircleGrid(8)
        with pytest.raises(ValueError):
            BoundaryFunction2D(g, np.full(8, fill))

    def test_csv_round_trip(self, tmp_path):
        G = BoundaryFunction2D.from_norm(NormOracle.lq(4, 2), 128)
        G.to_csv(tmp_path / "g.csv")
        back = BoundaryFunction2D.from_csv(tmp_path / "g.csv")
        np.testing.assert_array_equal(back.values, G.values)
        assert (tmp_path / "g.csv").read_text().startswith("theta,G\n")

    def test_csv_non_uniform_theta(self, tmp_path):
        (tmp_path / "g.csv").write_text("theta,G\n0,1\n0.1,1\n0.2,1\n0.3,1\n")
        with pytest.raises(ValueError):
            BoundaryFunction2D.from_csv(tmp_path / "g.csv")


class TestSpectralDerivative:
    def test_constant(self):
        np.testing.assert_allclose(spectral_second_derivative(boundary(np.ones_like, 64)), 0, atol=1e-14)

    def test_cos2(self):
        G = boundary(lambda t: 2 + np.cos(2 * t), 256)
        np.testing.assert_allclose(spectral_second_derivative(G), -4 * np.cos(2 * G.grid.nodes), atol=1e-10)

    def test_first_derivative(self):
        G = boundary(lambda t: 2 + np.sin(4 * t), 256)
        np.testing.assert_allclose(spectral_derivative(G), 4 * np.cos(4 * G.grid.nodes), atol=1e-10)

    def test_l4_against_finite_differences(self):
        G = BoundaryFunction2D.from_norm(NormOracle.lq(4, 2), M)
        t, h = G.grid.nodes, 1e-3
        f = l4_boundary_analytic
        fd = (-f(t + 2 * h) + 16 * f(t + h) - 30 * f(t) + 16 * f(t - h) - f(t - 2 * h)) / (12 * h**2)
        np.testing.assert_allclose(spectral_second_derivative(G), fd, atol=1e-6)

    @pytest.mark.parametrize("m", [32, 96, 1000])
    def test_requires_power_of_two(self, m):
        with pytest.raises(ValueError):
            spectral_second_derivative(boundary(np.ones_like, m))


class TestLevy1Density:
    def test_euclidean(self):
        h = levy1_density(boundary(np.ones_like))
        np.testing.assert_allclose(h.values, 0.25, atol=1e-14)

    def test_corners_warn(self):
        with pytest.warns(DensitySignWarning):
            levy1_density(BoundaryFunction2D.from_norm(NormOracle.lq(1, 2), M))

    def test_l4_nonnegative(self):
        # G + G'' vanishes to second order on the axes, so the minimum is 0, not positive
        h = levy1_density(BoundaryFunction2D.from_norm(NormOracle.lq(4, 2), M))
        assert h.min_value >= -1e-10
        t = h.grid.nodes
        assert np.all(h.values[np.abs(np.sin(2 * t)) > 0.1] > 1e-3)

    @pytest.mark.parametrize("q", [2, 3, 4, 6])
    def test_evenness(self, q):
        h = levy1_density(BoundaryFunction2D.from_norm(NormOracle.lq(q, 2), M))
        np.testing.assert_allclose(h.values, np.roll(h.values, M // 2), atol=1e-10)

    def test_no_warning_for_smooth_convex(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            levy1_density(boundary(lambda t: 1 + 0.2 * np.cos(2 * t)))


class TestReconstruction:
    def test_quarter_density(self):
        G = reconstruct_boundary(CircleDensity(CircleGrid(64), np.full(64, 0.25)))
        np.testing.assert_allclose(G.values, 1.0, atol=1e-14)

    def test_atoms_give_l1(self):
        g = CircleGrid(256)
        G = reconstruct_boundary(CircleDensity(g, np.zeros(256), ((-np.pi / 2, 1.0), (0.0, 1.0))))
        t = g.nodes
        np.testing.assert_allclose(G.values, np.abs(np.cos(t)) + np.abs(np.sin(t)), atol=1e-10)

    def test_zero_measure(self):
        with pytest.raises(ValueError):
            reconstruct_boundary(CircleDensity(CircleGrid(16), np.zeros(16)))

    @pytest.mark.parametrize(
        "fn",
        [np.ones_like, l4_boundary_analytic, lambda t: 1 + 0.2 * np.cos(2 * t)],
        ids=["euclidean", "l4", "cos2"],
    )
    def test_identity(self, fn):
        G = boundary(fn)
        assert rel_sup(reconstruct_boundary(levy1_density(G)).values, G.values) <= 1e-6

    @settings(max_examples=15, deadline=None)
    @given(frac=st.floats(0.0, 0.9), k=st.sampled_from([2, 4, 6]), phase=st.floats(0, np.pi))
    def test_identity_random_perturbations(self, frac, k, phase):
        # 1 + eps cos(k t) is convex exactly when (k^2 - 1) eps < 1
        eps = frac / (k * k - 1)
        G = boundary(lambda t: 1 + eps * np.cos(k * (t - phase)))
        assert rel_sup(reconstruct_boundary(levy1_density(G)).values, G.values) <= 1e-6

    @pytest.mark.parametrize("fn", [np.ones_like, l4_boundary_analytic, lambda t: 1 + 0.25 * np.cos(2 * t)])
    def test_total_mass(self, fn):
        G = boundary(fn)
        assert levy1_density(G).total_mass() == pytest.approx(0.25 * G.grid.integrate(G.values), abs=1e-8)


class TestCornerAtoms:
    def test_l1(self):
        atoms = detect_corner_atoms(BoundaryFunction2D.from_norm(NormOracle.lq(1, 2), M))
        assert len(atoms) == 2
        np.testing.assert_allclose([a for a, _ in atoms], [0, np.pi / 2], atol=1e-12)
        np.testing.assert_allclose([w for _, w in atoms], [1, 1], atol=1e-10)

    def test_smooth_has_none(self):
        assert detect_corner_atoms(boundary(np.ones_like)) == []
        assert detect_corner_atoms(BoundaryFunction2D.from_norm(NormOracle.lq(4, 2), M)) == []

    def test_polygon_oracle_is_consistent(self):
        angles, masses = polygon_atoms(3)
        x = np.random.default_rng(0).standard_normal((50, 2))
        v = np.column_stack([np.cos(angles), np.sin(angles)])
        np.testing.assert_allclose(np.abs(x @ v.T) @ masses, polygon_norm(3)(x), rtol=1e-13)

    @pytest.mark.parametrize("pairs", [2, 3, 4, 5, 6])
    @pytest.mark.parametrize("rotation", [0.0, 0.1234, 1.0])
    def test_polygons(self, pairs, rotation):
        G = BoundaryFunction2D.from_norm(polygon_norm(pairs, rotation), M)
        atoms = detect_corner_atoms(G)
        angles, masses = polygon_atoms(pairs, rotation)
        assert len(atoms) == pairs
        np.testing.assert_allclose(np.array(atoms)[:, 1], masses, rtol=1e-9)
        got = np.array(atoms)[:, 0]
        d = np.abs((got - angles + np.pi / 2) % np.pi - np.pi / 2)
        assert d.max() < 1e-9
        assert rel_sup(atomic_boundary(atoms, G.grid), G.values) <= 1e-8

    def test_hexagon_equal_masses(self):
        atoms = detect_corner_atoms(BoundaryFunction2D.from_norm(polygon_norm(3), M))
        np.testing.assert_allclose([w for _, w in atoms], 1 / np.sqrt(3), rtol=1e-10)

    def test_total_mass_polygon(self):
        norm = polygon_norm(4)
        total = sum(w for _, w in detect_corner_atoms(BoundaryFunction2D.from_norm(norm, M)))
        # the trapezoid rule is only O(h^2) across corners; integrate piecewise instead
        corners = np.pi * np.arange(9) / 4
        integral, _ = quad(lambda t: norm(np.array([np.cos(t), np.sin(t)])), 0, 2 * np.pi, points=corners, limit=200)
        assert total == pytest.approx(0.25 * integral, abs=1e-8)

    def test_threshold_must_be_positive(self):
        with pytest.raises(ValueError):
            detect_corner_atoms(boundary(np.ones_like), threshold=0)


class TestL1Report:
    def test_l1_discrete(self):
        r = l1_embeddability_report(BoundaryFunction2D.from_norm(NormOracle.lq(1, 2), M))
        assert r.verdict == "discrete" and not r.refutes
        np.testing.assert_allclose(np.abs(r.embedding.rows), np.eye(2), atol=1e-10)
        assert r.embedding.p == 1.0

    @pytest.mark.parametrize("q", [2, 4])
    def test_smooth_continuous(self, q):
        r = l1_embeddability_report(BoundaryFunction2D.from_norm(NormOracle.lq(q, 2), M))
        assert r.verdict == "continuous-positive" and r.refutes
        assert r.embedding is None

    def test_mixed(self):
        r = l1_embeddability_report(boundary(lambda t: np.abs(np.cos(t)) + np.abs(np.sin(t)) + 1))
        assert r.verdict == "mixed" and r.refutes
        assert len(r.atoms) == 2

    @pytest.mark.parametrize("pairs", [3, 4])
    def test_polygon_embedding(self, pairs):
        norm = polygon_norm(pairs)
        r = l1_embeddability_report(BoundaryFunction2D.from_norm(norm, M))
        assert r.verdict == "discrete"
        assert r.embedding.shape == (pairs, 2)
        assert verify_isometry(r.embedding, norm, probes=200, seed=0).max_rel_error <= 1e-8

    def test_not_convex_is_inconclusive(self):
        r = l1_embeddability_report(boundary(lambda t: 1 + 0.5 * np.cos(2 * t)))
        assert r.verdict == "inconclusive" and not r.refutes

    def test_to_dict_keys(self):
        d = l1_embeddability_report(BoundaryFunction2D.from_norm(NormOracle.lq(1, 2), 256)).to_dict()
        assert list(d) == ["verdict", "atoms", "density_min", "residual"]
        assert set(d["atoms"][0]) == {"theta", "mass"}
