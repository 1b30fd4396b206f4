import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcsgap.kernel import (
    KernelSpec,
    assemble_A,
    assemble_B,
    epstein_direct,
    fold_symbol,
    power_law_symbol,
    sobolev_norm,
    symbol,
)
from bcsgap.lattice import Lattice
from bcsgap.splines import SplineBasis, fourier_coeff_1d, mass_matrix
from oracles import hurwitz_folded_symbol


def test_kernel_spec_validation():
    KernelSpec(0.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        KernelSpec(-1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        KernelSpec(1.0, -0.1, 2.0)
    with pytest.raises(ValueError):
        KernelSpec(1.0, 1.0, np.nan)


def test_symbol_examples():
    spec = KernelSpec(0.0, 1.0, 2.0)
    assert symbol(spec, (0, 0)) == 0.0
    assert symbol(spec, 0) == 0.0
    assert symbol(spec, (3, 4)) == pytest.approx(0.04, rel=1e-15)
    assert symbol(KernelSpec(0, 1, 2.01), (1, 0)) == 1.0
    assert symbol(spec, -2) == pytest.approx(0.25)


@settings(max_examples=50, deadline=None)
@given(st.integers(-50, 50), st.integers(-50, 50), st.floats(-3, 5, allow_nan=False))
def test_symbol_homogeneous_and_even(m1, m2, nu):
    m = np.array([m1, m2])
    if not m.any():
        return
    s = power_law_symbol(m, nu)
    assert power_law_symbol(2 * m, nu) == pytest.approx(2.0 ** (-nu) * s, rel=1e-12)
    assert power_law_symbol(-m, nu) == s


def test_epstein_direct_1d_values():
    lat = Lattice.square(1)
    v, tail = epstein_direct(lat, 2.0, 0.0, 2e5)
    assert abs(v - np.pi**2 / 3) <= 1.01 * tail
    # Richardson: the tail of sum 1/z^2 beyond R is 1/R to leading order
    assert abs(v.real + tail - np.pi**2 / 3) < 1e-9
    w, _ = epstein_direct(lat, 2.0, 0.5, 2e5)
    assert w.real == pytest.approx(-np.pi**2 / 6, abs=1e-9)


def test_epstein_direct_symmetry_and_domain():
    lat = Lattice(np.array([[1.0, 0.3], [0.0, 1.2]]))
    y = np.array([[0.17, 0.61], [0.4, 0.05]])
    a, _ = epstein_direct(lat, 3.5, y, 40.0)
    b, _ = epstein_direct(lat, 3.5, -y, 40.0)
    assert np.allclose(a, np.conj(b), atol=1e-14)
    with pytest.raises(ValueError):
        epstein_direct(Lattice.square(2), 2.0, [0.0, 0.0], 10.0)
    with pytest.raises(ValueError):
        epstein_direct(Lattice.square(1), 2.0, 0.0, -1.0)


def test_epstein_direct_2d_brute_force():
    lat = Lattice(np.array([[1.0, 0.5], [0.0, 1.0]]))
    y = np.array([0.3, 0.7])
    R = 12.0
    k = np.arange(-30, 31)
    K = np.stack(np.meshgrid(k, k, indexing="ij"), -1).reshape(-1, 2)
    z = K @ lat.A.T
    r = np.linalg.norm(z, axis=1)
    sel = (r > 0) & (r <= R)
    ref = np.sum(np.exp(-2j * np.pi * z[sel] @ y) * r[sel] ** -3.0)
    got, tail = epstein_direct(lat, 3.0, y, R)
    assert got == pytest.approx(ref, abs=1e-12)
    assert tail == pytest.approx(2 * np.pi / R / 1.0)


@pytest.mark.parametrize("mu, n, nu", [(1, 16, 3.0), (3, 16, 2.01), (0, 12, 1.5), (2, 32, 0.5)])
def test_fold_1d_vs_hurwitz(mu, n, nu):
    b = SplineBasis(1, mu, n)
    fs = fold_symbol(b, nu)
    ref = hurwitz_folded_symbol(mu, n, nu)
    assert np.abs(fs.S - ref).max() <= max(1e-12 * np.abs(ref).max(), fs.tail)


def test_default_window_sizes():
    assert fold_symbol(SplineBasis(2, 3, 64), 2.01).Q == 5
    assert fold_symbol(SplineBasis(1, 1, 16), 3.0).Q == 14


def test_doubling_window_within_tail_bound():
    b = SplineBasis(1, 2, 16)
    f1 = fold_symbol(b, 2.5, Q=3)
    f2 = fold_symbol(b, 2.5, Q=6)
    g1 = np.fft.ifft(f1.S * 16).real
    g2 = np.fft.ifft(f2.S * 16).real
    assert np.abs(g1 - g2).max() <= f1.tail
    b2 = SplineBasis(2, 3, 16)
    h1, h2 = fold_symbol(b2, 2.01, Q=2), fold_symbol(b2, 2.01, Q=4)
    assert np.abs(np.fft.ifftn(h1.S * 256).real - np.fft.ifftn(h2.S * 256).real).max() <= h1.tail


@pytest.mark.parametrize("d, mu, n", [(1, 0, 8), (1, 3, 16), (2, 1, 8), (2, 2, 6)])
def test_parseval_symbol_one_gives_mass(d, mu, n):
    b = SplineBasis(d, mu, n)
    # sigma = 1 everywhere (including m = 0); the bound needs its supremum
    fs = fold_symbol(b, 0.0, sigma=lambda m: np.ones(m.shape[:-1]), sigma_sup=1.0,
                     Q=None if d == 1 else 40, eps_tail=1e-15 if mu else 1e-6)
    gen = np.fft.ifftn(fs.S * b.size).real
    M = mass_matrix(b).gen
    assert np.abs(gen - M).max() <= max(fs.tail, 1e-15)


@pytest.mark.parametrize("d, mu, n, nu", [(1, 1, 16, 3.0), (2, 3, 16, 2.01), (1, 2, 12, -1.0)])
def test_B_real_symmetric_semidefinite(d, mu, n, nu):
    B = assemble_B(SplineBasis(d, mu, n), KernelSpec(0.0, 1.0, nu))
    g = B.gen
    assert np.isrealobj(g)
    assert B.is_hermitian(atol=1e-12)
    e = B.eig
    assert np.abs(e.imag).max() <= 1e-12 * np.abs(e).max()
    assert e.real.min() >= -1e-14 * e.real.max()
    assert abs(e[(0,) * d]) <= 1e-14 * np.abs(e).max()  # sigma(0) = 0


def test_assemble_A_cases():
    n = 16
    b = SplineBasis(1, 2, n)
    A = assemble_A(b, KernelSpec(0.9, 0.0, 2.0))
    assert np.allclose(A @ np.ones(n), 0.9 / n * np.ones(n), atol=1e-15)
    assert np.allclose(A.gen, 0.9 / n**2, atol=1e-16)
    spec = KernelSpec(0.0, 0.7, 2.5)
    assert np.allclose(assemble_A(b, spec).gen, 0.7 * assemble_B(b, spec).gen, atol=1e-17)
    Z = assemble_A(b, KernelSpec(0.0, 0.0, 2.0))
    assert not np.any(Z.eig)


def test_assemble_A_2d_spectrum():
    b = SplineBasis(2, 3, 64)
    A = assemble_A(b, KernelSpec(0.75, 0.7, 2.01))
    e = A.eig
    assert np.abs(e.imag).max() <= 1e-12 * np.abs(e).max()
    assert e.real.min() > 0.0
    # the constant-part coefficient is h^(2d): A 1 = C1 h^d 1 + C2 B 1, and B 1 = 0
    assert np.allclose(A @ np.ones((64, 64)), 0.75 / 64**2, rtol=1e-10)


def test_sobolev_norm_examples():
    assert sobolev_norm(np.array([1.0]), 0.0) == 1.0
    c = np.zeros((4, 4))
    c[1, 0] = 1.0
    assert sobolev_norm(c, 1.0) == pytest.approx(np.sqrt(2))
    freqs = np.array([[1, 0]])
    assert sobolev_norm(np.array([1.0]), 1.0, freqs=freqs) == pytest.approx(np.sqrt(2))


@pytest.mark.parametrize("mu", [0, 1, 2])
def test_sobolev_spline_regularity(mu):
    n = 8

    def norm(s, M):
        m = np.arange(-M, M + 1)
        return sobolev_norm(fourier_coeff_1d(mu, n, m), s, freqs=m)

    crit = mu + 0.5
    # below the critical order the squared tail shrinks like M^-0.6 per decade
    below = [norm(crit - 0.3, M) ** 2 for M in (10**3, 10**4, 10**5)]
    assert below[2] - below[1] < 0.3 * (below[1] - below[0])
    # at the critical order it grows logarithmically: equal increments per decade
    at = [norm(crit, M) for M in (10**2, 10**3, 10**4, 10**5)]
    assert all(b > a for a, b in zip(at[:-1], at[1:]))
    assert at[-1] ** 2 - at[-2] ** 2 > 0.5 * (at[-2] ** 2 - at[-3] ** 2)
