import numpy as np
import pytest

from levyrep import NormOracle

_ACCEPTANCE = []


def polygon_norm(pairs: int, rotation: float = 0.0) -> NormOracle:
    """Norm whose unit ball is the regular 2*pairs-gon with unit circumradius.

    Facet normals sit halfway between vertices; the apothem is cos(pi / (2 pairs)).
    """
    t = rotation + np.pi / (2 * pairs) + np.pi * np.arange(pairs) / pairs
    normals = np.column_stack([np.cos(t), np.sin(t)])
    apothem = np.cos(np.pi / (2 * pairs))
    return NormOracle.custom(lambda x: np.max(np.abs(x @ normals.T), axis=-1) / apothem, 2, name=f"{2 * pairs}-gon")


def polygon_atoms(pairs: int, rotation: float = 0.0):
    """Independent oracle: the dual polygon is a zonotope with `pairs` generators.

    Each generator is half an edge of the dual polygon, of length
    tan(pi / (2 pairs)), pointing along the facet normal rotated by pi / 2.
    """
    mass = np.tan(np.pi / (2 * pairs))
    t = rotation + np.pi / (2 * pairs) + np.pi * np.arange(pairs) / pairs
    # the dual polygon's edge between normals t_j and t_{j+1} points along their bisector + pi/2
    angles = np.sort(np.mod(t + np.pi / (2 * pairs) + np.pi / 2, np.pi))
    return angles, np.full(pairs, mass)


@pytest.fixture
def record_criterion():
    def record(number: int, passed: bool, detail: str):
        line = f"acceptance {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
