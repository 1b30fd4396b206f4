import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate

from bcsgap.errors import NodalSingularityError
from bcsgap.lattice import Lattice
from bcsgap.nonlinearity import (
    GapField,
    NodalNodeWarning,
    NonlinearMap,
    apply_G_map,
    assemble_G,
    g_matrix,
    g_scalar,
    index_reversal,
    project_antisymmetric,
)
from bcsgap.oracle import phi_quadrature
from bcsgap.splines import SplineBasis, eval_basis, mass_matrix


def test_g_scalar_examples():
    assert g_scalar(0.0, 1.0) == 0
    assert g_scalar(2.5, 0.0) == pytest.approx(1.0)
    assert g_scalar(-2.5, 0.0) == pytest.approx(-1.0)
    assert g_scalar(3j, 4.0) == pytest.approx(0.6j)
    with pytest.raises(NodalSingularityError):
        g_scalar(0.0, 0.0)


def _dense_g(F, xi):
    H = xi**2 * np.eye(2) + F.conj().T @ F
    w, V = np.linalg.eigh(H)
    return F @ (V @ np.diag(w**-0.5) @ V.conj().T)


def test_g_matrix_examples():
    assert np.array_equal(g_matrix(np.zeros((2, 2)), 0.7), np.zeros((2, 2)))
    s, xi = 0.3, 0.4
    assert np.allclose(g_matrix(np.diag([s, 0.0]), xi), np.diag([s / np.hypot(s, xi), 0.0]))
    f = 1.7
    F = np.array([[0, f], [-f, 0]])
    v = f / np.hypot(xi, f)
    assert np.allclose(g_matrix(F, xi), [[0, v], [-v, 0]], atol=1e-15)
    assert np.allclose(g_matrix(F, xi), _dense_g(F, xi), atol=1e-15)
    with pytest.raises(NodalSingularityError):
        g_matrix(np.diag([1.0, 0.0]), 0.0)
    # rank-deficient F away from the Fermi surface is fine
    assert np.all(np.isfinite(g_matrix(np.diag([1.0, 0.0]), 0.2)))


def test_g_matrix_stacks_and_scipy():
    rng = np.random.default_rng(0)
    F = rng.standard_normal((50, 2, 2)) + 1j * rng.standard_normal((50, 2, 2))
    xi = rng.uniform(-2, 2, 50)
    got = g_matrix(F, xi)
    for i in range(50):
        H = xi[i] ** 2 * np.eye(2) + F[i].conj().T @ F[i]
        ref = F[i] @ np.linalg.inv(sla.sqrtm(H))
        assert np.allclose(got[i], ref, atol=1e-13)


def test_g_matrix_small_scales_no_cancellation():
    F = np.array([[1e-9, 2e-9], [3e-9, 5e-9j]])
    xi = 1e-10
    assert np.allclose(g_matrix(F, xi), _dense_g(F, xi), rtol=1e-10, atol=0)


cplx = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)


@settings(max_examples=80, deadline=None)
@given(st.lists(cplx, min_size=4, max_size=4), st.floats(-3, 3, allow_nan=False),
       st.floats(0, 2 * np.pi))
def test_g_matrix_properties(entries, xi, theta):
    F = np.array(entries).reshape(2, 2)
    sv = np.linalg.svd(F, compute_uv=False)
    # xi^2 + sigma_min^2 lost against sigma_max^2 is ill-conditioned, not a defect
    assume(xi**2 + sv.min() ** 2 > 1e-8 * max(sv.max() ** 2, xi**2, 1e-300))
    G = g_matrix(F, xi)
    gs = np.linalg.svd(G, compute_uv=False)
    assert gs.max() <= 1.0 + 1e-12
    assert np.allclose(np.sort(gs), np.sort(sv / np.sqrt(xi**2 + sv**2)), atol=1e-10)
    ph = np.exp(1j * theta)
    assert np.allclose(g_matrix(ph * F, xi), ph * G, atol=1e-12)


def test_index_reversal():
    assert list(index_reversal(5, 1)) == [0, 4, 3, 2, 1]


def _random_field(basis, k, seed):
    rng = np.random.default_rng(seed)
    shape = (k, k) + basis.grid_shape
    return GapField(basis, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.mark.parametrize("d", [1, 2])
def test_project_antisymmetric(d):
    b = SplineBasis(d, 3, 8)
    s = 0.4
    const = np.zeros((2, 2) + b.grid_shape, dtype=complex)
    const[0, 1], const[1, 0] = s, -s
    P = project_antisymmetric(GapField(b, const))
    assert np.allclose(P.coeffs, const, atol=0)
    eye = np.zeros_like(const)
    eye[0, 0] = eye[1, 1] = 1.0
    assert np.abs(project_antisymmetric(GapField(b, eye)).coeffs).max() == 0.0
    F = _random_field(b, 2, d)
    P1 = project_antisymmetric(F)
    P2 = project_antisymmetric(P1)
    assert np.abs(P2.coeffs - P1.coeffs).max() <= 1e-15
    # pointwise identity F^T(-x) = -F(x)
    x = np.random.default_rng(2).random((7, d))
    Fx = P1.evaluate(x)
    Fm = P1.evaluate(np.mod(-x, 1.0))
    assert np.allclose(np.swapaxes(Fm, -1, -2), -Fx, atol=1e-13)
    # coefficient identity F_ab(l) = -F_ba(rho(l)), exactly
    r = index_reversal(8, d)
    if d == 1:
        assert np.array_equal(P1.coeffs[0, 1], -P1.coeffs[1, 0][r])
    else:
        assert np.array_equal(P1.coeffs[0, 1], -P1.coeffs[1, 0][np.ix_(r, r)])
    with pytest.raises(ValueError):
        project_antisymmetric(GapField(b, np.ones(b.grid_shape)))


def test_gapfield_validation_and_projection():
    b = SplineBasis(1, 2, 8)
    with pytest.raises(ValueError):
        GapField(b, np.ones(7))
    with pytest.raises(ValueError):
        GapField(b, np.full(8, np.nan))
    F = GapField.from_function(b, lambda p: 0.3 + 0 * p[..., 0])
    assert np.allclose(F.coeffs, 0.3, atol=1e-14)
    assert F.l2_norm() == pytest.approx(0.3, rel=1e-14)
    assert F.k == 1 and F.component().shape == (8,)


def _adaptive_G_entry(mu, n, f_fn, k, l):
    """``int phi_l phi_k / sqrt(cos^2(2 pi x) + |f|^2)`` with adaptive quadrature."""
    basis = SplineBasis(1, mu, n)
    g = lambda x: (eval_basis(basis, l, x) * eval_basis(basis, k, x)
                   / np.sqrt(np.cos(2 * np.pi * x) ** 2 + abs(f_fn(x)) ** 2))
    brk = np.arange(2 * n + 1) / (2 * n)
    return sum(integrate.quad(g, a, b, epsabs=1e-15, epsrel=1e-13, limit=200)[0]
               for a, b in zip(brk[:-1], brk[1:]))


def test_assemble_G_vs_adaptive_quadrature():
    mu, n = 1, 16
    b = SplineBasis(1, mu, n)
    G = assemble_G(b, Lattice.square(1), np.ones(n), q=12).toarray()
    for k, l in [(1, 1), (1, 2), (5, 5), (5, 4), (9, 10), (16, 1)]:
        ref = _adaptive_G_entry(mu, n, lambda x: 1.0, k, l)
        assert G[k - 1, l - 1] == pytest.approx(ref, abs=1e-8)


def test_assemble_G_large_constant_and_structure():
    lat = Lattice.square(2)
    b = SplineBasis(2, 2, 8)
    s = 1e6
    G = assemble_G(b, lat, np.full(b.grid_shape, s))
    M = mass_matrix(b).dense()
    Gd = G.toarray()
    assert np.allclose(Gd, Gd.T, atol=0)
    mask = M != 0
    assert np.array_equal(Gd != 0, mask)
    assert np.abs(Gd[mask] * s / M[mask] - 1).max() < 1e-10
    np.linalg.cholesky(Gd)


def test_assemble_G_symmetric_positive_definite_random():
    lat = Lattice.square(1)
    b = SplineBasis(1, 3, 16)
    F = GapField(b, 0.5 + 0.2 * np.random.default_rng(0).standard_normal(16))
    G = NonlinearMap(lat, b).assemble_G(F).toarray()
    assert np.allclose(G, G.T, atol=1e-16)
    np.linalg.cholesky(G)
    # M g = G(f) f for k = 1
    nl = NonlinearMap(lat, b)
    assert np.allclose(G @ F.coeffs[0, 0], nl.load(F)[0, 0], atol=1e-15)


def test_assemble_G_rejects_nodal_fields():
    lat = Lattice.square(1)
    b = SplineBasis(1, 1, 16)
    with pytest.raises(NodalSingularityError):
        assemble_G(b, lat, np.zeros(16))
    # f vanishing on a 1-D Fermi point (x = 1/4) still diverges
    F = GapField.from_function(b, lambda p: np.sin(2 * np.pi * (p[..., 0] - 0.25)))
    with pytest.raises(NodalSingularityError):
        NonlinearMap(lat, b).assemble_G(F)


def test_nodal_node_perturbation_warns():
    # mu = 0, n = 4, q = 1: one node per cell at j/4.  The rounded dispersion is
    # exactly zero at 1/4 and 3/4, where the field vanishes too.
    lat = Lattice(np.eye(1), dispersion_fn=lambda A, y: np.round(-np.cos(2 * np.pi * y[..., 0]), 12))
    b = SplineBasis(1, 0, 4)
    c = np.array([1.0, 0.0, 1.0, 0.0])
    nl = NonlinearMap(lat, b, q=1)
    with pytest.warns(NodalNodeWarning):
        out = nl.load(GapField(b, c))
    assert np.all(np.isfinite(out))
    assert nl.warnings


def test_apply_G_map_examples():
    lat = Lattice.square(1)
    b = SplineBasis(1, 3, 32)
    assert np.array_equal(apply_G_map(lat, b, GapField.zeros(b, 2)).coeffs, np.zeros((2, 2, 32)))
    s = 0.3
    c = np.zeros((2, 2, 32))
    c[0, 1], c[1, 0] = s, -s
    g = apply_G_map(lat, b, GapField(b, c), q=12)
    # the mean of the projection equals the mean of s / sqrt(xi^2 + s^2)
    mean01 = g.coeffs[0, 1].real.mean()
    assert mean01 == pytest.approx(phi_quadrature(s), rel=1e-8)
    assert g.coeffs[1, 0].real.mean() == pytest.approx(-mean01, rel=1e-14)
    assert np.abs(g.coeffs[0, 0]).max() < 1e-15


@pytest.mark.parametrize("d", [1, 2])
def test_k2_antisymmetric_matches_scalar_path(d):
    lat = Lattice.square(d)
    b = SplineBasis(d, 2, 8)
    rng = np.random.default_rng(4)
    f = 0.5 + 0.3 * rng.standard_normal(b.grid_shape)
    from bcsgap.solver import _antisym_pattern

    F2 = GapField(b, _antisym_pattern(b, f))
    F1 = GapField(b, f)
    g2 = apply_G_map(lat, b, F2)
    g1 = apply_G_map(lat, b, F1)
    assert np.abs(g2.coeffs[0, 1] - g1.coeffs[0, 0]).max() < 1e-12


def test_apply_preserves_antisymmetry():
    lat = Lattice.square(2)
    b = SplineBasis(2, 1, 8)
    P = project_antisymmetric(_random_field(b, 2, 9))
    g = NonlinearMap(lat, b, q=6).apply(P)
    assert np.isfinite(g.coeffs).all()
    assert np.abs(project_antisymmetric(g).coeffs - g.coeffs).max() < 1e-12
