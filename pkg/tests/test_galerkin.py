import numpy as np
import pytest

from quadbounds.assembly import Potential, assemble_forms
from quadbounds.galerkin import galerkin_eigenvalues
from quadbounds.hermite_fem import MeshSpec, build_mesh

TABLE_HARMONIC = [1.000000000000174, 3.000000000001666, 5.000000000013855, 7.000000000181337,
                  9.000000002611037]


def forms(n, pot="harmonic", L=6.0):
    return assemble_forms(build_mesh(MeshSpec(L, n)), Potential.parse(pot))


def test_ascending_and_count():
    vals = galerkin_eigenvalues(forms(60), 7)
    assert len(vals) == 7 and vals == sorted(vals)
    with pytest.raises(ValueError):
        galerkin_eigenvalues(forms(10), 21)
    with pytest.raises(ValueError):
        galerkin_eigenvalues(forms(10), 0)


@pytest.mark.parametrize("n", [50, 100, 200, 400])
def test_upper_bound_property(n):
    vals = np.array(galerkin_eigenvalues(forms(n), 5))
    assert np.all(vals - np.arange(1, 10, 2) >= -1e-12)


def test_nesting_monotone():
    prev = None
    for n in (50, 100, 200, 400):
        vals = np.array(galerkin_eigenvalues(forms(n), 5))
        if prev is not None:
            assert np.all(vals <= prev + 1e-12)
        prev = vals


def test_reference_values():
    vals = galerkin_eigenvalues(forms(400), 5)
    np.testing.assert_allclose(vals, TABLE_HARMONIC, rtol=0, atol=1e-9)
    anh = galerkin_eigenvalues(forms(400, "anharmonic"), 1)
    assert anh[0] == pytest.approx(1.060362090484841, abs=1e-9)


def test_independent_of_requested_count():
    f = forms(200)
    a = galerkin_eigenvalues(f, 3)
    b = galerkin_eigenvalues(f, 9)[:3]
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)
