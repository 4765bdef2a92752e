import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import mp_pencil_root, roots_of_toy
from quadbounds.assembly import Potential, assemble_forms
from quadbounds.enclosure import PairKind, pair_conjugates
from quadbounds.errors import SingularMass
from quadbounds.hermite_fem import MeshSpec, build_mesh
from quadbounds.pencil import (QuadraticPencil, companion, distance_bound, logdet_derivative,
                               normalized_residual, orthonormal_min_singular, pencil_eval,
                               refine_point, second_order_spectrum)

# 40-digit root of det Q near 1 for the harmonic pencil at L = 6, n = 100
HARMONIC_100_J1 = 1.0000000006468754 + 0.0013735342249551492j


def toy():
    return QuadraticPencil.from_matrices([[1.0]], [[1.0]], [[2.0]])


def test_pencil_eval_toy():
    P = toy()
    assert pencil_eval(P, 0)[0, 0] == 2.0
    assert abs(pencil_eval(P, 1 + 1j)[0, 0]) < 1e-15
    assert abs(pencil_eval(P, 1 - 1j)[0, 0]) < 1e-15


def test_pencil_hermitian(pencil_100):
    rng = np.random.default_rng(3)
    for _ in range(5):
        z = complex(*rng.uniform(-5, 5, 2))
        np.testing.assert_array_equal(pencil_eval(pencil_100, z.conjugate()),
                                      pencil_eval(pencil_100, z).conj().T)


def test_companion_toy():
    pair = companion(toy())
    np.testing.assert_array_equal(pair.C, [[0, 1], [-2, 2]])
    np.testing.assert_array_equal(pair.D, np.eye(2))
    ev = np.sort_complex(np.linalg.eigvals(pair.C))
    np.testing.assert_allclose(ev, [1 - 1j, 1 + 1j], atol=1e-14)


def test_companion_shapes(pencil_100):
    pair = companion(pencil_100)
    assert pair.C.shape == pair.D.shape == (400, 400)


def test_companion_rejects_indefinite_mass():
    P = QuadraticPencil.from_matrices([[1.0, 2.0], [2.0, 1.0]], np.eye(2), np.eye(2))
    with pytest.raises(SingularMass):
        companion(P)
    with pytest.raises(SingularMass):
        second_order_spectrum(P)


def test_spectrum_matches_generalized_companion(pencil_100):
    # independent route: QZ on the unreduced companion pair
    import scipy.linalg
    pair = companion(pencil_100)
    ref = scipy.linalg.eigvals(pair.C, pair.D)
    got = np.array([p.z for p in second_order_spectrum(pencil_100, residuals=False)])
    ref = ref[np.argsort(ref.real)]
    assert len(got) == 400
    # both are backward stable; compare the well-conditioned low part
    for z in got[np.abs(got) < 20]:
        assert np.min(np.abs(ref - z)) <= 1e-6 * (1 + abs(z))


def test_diag_toy_from_operator():
    P = QuadraticPencil.from_operator(np.diag([0.0, 2.0]), np.array([1.0, 1.0]) / np.sqrt(2))
    assert (P.A0[0, 0], P.A1[0, 0], P.A2[0, 0]) == pytest.approx((1.0, 1.0, 2.0))
    zs = sorted((p.z for p in second_order_spectrum(P)), key=lambda z: z.imag)
    assert zs[0] == pytest.approx(1 - 1j, abs=1e-14)
    assert zs[1] == pytest.approx(1 + 1j, abs=1e-14)
    assert distance_bound(P, 1.0) == pytest.approx(1.0, abs=1e-14)


def test_exact_eigenvector_gives_double_real_point():
    A = np.diag([1.0, 4.0, 9.0])
    P = QuadraticPencil.from_operator(A, np.array([0.0, 1.0, 0.0]))
    zs = [p.z for p in second_order_spectrum(P)]
    assert all(abs(z - 4.0) < 1e-7 for z in zs)
    assert distance_bound(P, 4.0) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(a=st.floats(-5, 5), b=st.floats(-5, 5), c=st.floats(0.05, 0.95))
def test_toy_brute_force(a, b, c):
    if abs(a - b) < 0.05:
        return
    v = np.array([np.sqrt(c), np.sqrt(1 - c)])
    P = QuadraticPencil.from_operator(np.diag([a, b]), v)
    got = sorted((p.z for p in second_order_spectrum(P)), key=lambda z: z.imag)
    lo, hi = sorted(roots_of_toy(a, b, c), key=lambda z: z.imag)
    assert abs(got[0] - lo) <= 1e-12 * (1 + abs(lo))
    assert abs(got[1] - hi) <= 1e-12 * (1 + abs(hi))


def test_spectrum_sorted_and_conjugate_symmetric(pencil_100):
    pts = second_order_spectrum(pencil_100)
    keys = [(p.real, p.imag) for p in pts]
    assert keys == sorted(keys)
    assert all(p.residual >= 0 for p in pts)
    pairs = pair_conjugates(pts, 1e-8)
    assert not [p for p in pairs if p.kind is PairKind.UNMATCHED]


def test_clusters_near_odd_integers(pencil_100):
    pts = second_order_spectrum(pencil_100)
    for target in (1, 3, 5):
        near = [p for p in pts if abs(p.z - target) < 0.05]
        assert len(near) == 2
        assert near[0].z == pytest.approx(near[1].z.conjugate(), abs=1e-8)


def test_residuals_small(pencil_100):
    pts = second_order_spectrum(pencil_100)
    idx = np.random.default_rng(7).choice(len(pts), 10, replace=False)
    assert max(pts[i].residual for i in idx) <= 1e-8


def test_residual_detects_non_eigenvalue(pencil_100):
    assert normalized_residual(pencil_100, 2.0 + 0.5j) > 1e-6


def test_refine_matches_frozen_oracle(pencil_100):
    z = refine_point(pencil_100, 1 + 2e-3j).z
    assert abs(z - HARMONIC_100_J1) <= 1e-10


def test_refine_matches_live_oracle():
    forms = assemble_forms(build_mesh(MeshSpec(6.0, 40)), Potential.anharmonic())
    P = QuadraticPencil.from_forms(forms)
    got = refine_point(P, 3.8 + 0.05j)
    ref = mp_pencil_root(P.A0, P.A1, P.A2, got.z)
    assert abs(got.z - ref) <= 1e-11 * abs(ref)
    assert got.refined and got.residual <= 1e-12


def test_logdet_derivative_matches_finite_difference(pencil_100):
    z = 2.0 + 0.3j
    e = 1e-6
    ld = lambda w: np.linalg.slogdet(pencil_eval(pencil_100, w))
    s1, l1 = ld(z + e)
    s0, l0 = ld(z - e)
    fd = (l1 - l0 + np.log(s1 / s0)) / (2 * e)
    assert logdet_derivative(pencil_100, z) == pytest.approx(fd, rel=1e-6)


def test_distance_bound_dominates_distance(pencil_100):
    odd = np.arange(1, 60, 2)
    for x in np.linspace(0, 10, 50):
        assert distance_bound(pencil_100, x) >= np.min(np.abs(x - odd)) - 1e-8


def test_orthonormal_reduction_matches_square(pencil_100):
    for x in np.random.default_rng(11).uniform(0, 10, 10):
        F = distance_bound(pencil_100, x)
        G = orthonormal_min_singular(pencil_100, x)
        assert G == pytest.approx(F * F, rel=1e-8)


def test_from_matrices_validation():
    with pytest.raises(ValueError):
        QuadraticPencil.from_matrices(np.eye(2), np.eye(3), np.eye(2))
    with pytest.raises(ValueError):
        QuadraticPencil.from_matrices(np.eye(2), [[0, 1], [0, 0]], np.eye(2))
