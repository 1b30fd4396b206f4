"""Interaction kernel: on-site constant plus power-law long-range part.

The long-range convolution operator acts diagonally on Fourier modes with
symbol ``|m|^-nu`` (zero at ``m = 0``).  Its Galerkin matrix in the spline
basis is circulant; the generating array is obtained by folding the symbol
weighted with ``|c_1(m)|^2`` onto the ``n^d`` residues modulo ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import ceil, pi

import numpy as np

from .circulant import CirculantOperator
from .lattice import Lattice, as_points
from .splines import SplineBasis, fourier_coeff_1d, mass_row_1d

__all__ = [
    "KernelSpec",
    "FoldedSymbol",
    "symbol",
    "power_law_symbol",
    "epstein_direct",
    "fold_symbol",
    "assemble_B",
    "assemble_A",
    "sobolev_norm",
]

DEFAULT_EPS_TAIL = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """``K = C1 + C2 * Z_nu`` with nonnegative couplings.

    ``C1 = C2 = 0`` is accepted; it describes the zero kernel whose only
    fixed point is the trivial gap.
    """

    C1: float
    C2: float
    nu: float

    def __post_init__(self):
        for name in ("C1", "C2", "nu"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")
        if self.C1 < 0 or self.C2 < 0:
            raise ValueError("couplings C1, C2 must be nonnegative")


def power_law_symbol(m, nu: float) -> np.ndarray:
    """``|m|^-nu`` for integer vectors with trailing axis d; 0 at the origin."""
    m = np.asarray(m, dtype=float)
    r2 = np.sum(m * m, axis=-1)
    out = np.zeros_like(r2)
    nz = r2 > 0
    out[nz] = r2[nz] ** (-0.5 * nu)
    return out


def symbol(spec: KernelSpec, m):
    """Symbol of the long-range operator at an integer multi-index.

    A scalar is a 1-D index; a 1-D sequence is a single multi-index; arrays
    of higher rank carry multi-indices along the last axis.
    """
    m = np.asarray(m)
    if m.ndim == 0:
        m = m[None]
    out = power_law_symbol(m, spec.nu)
    return float(out) if out.ndim == 0 else out


def _lattice_half_points(lat: Lattice, R: float):
    """Lattice vectors ``z`` with ``0 < |z| <= R``, one of each pair ``±z``."""
    d = lat.d
    kmax = int(ceil(R * np.linalg.norm(np.linalg.inv(lat.A), 2))) + 1
    rng = np.arange(-kmax, kmax + 1)
    k = np.stack(np.meshgrid(*([rng] * d), indexing="ij"), axis=-1).reshape(-1, d)
    # keep the half whose first nonzero coordinate is positive
    first = np.where(k[:, 0] != 0, k[:, 0], k[:, -1])
    k = k[first > 0]
    z = k @ lat.A.T
    r = np.linalg.norm(z, axis=-1)
    keep = r <= R
    return z[keep], r[keep]


def epstein_direct(lat: Lattice, nu: float, y, R: float, chunk: int = 4096):
    """Truncated lattice sum ``sum_{0<|z|<=R} exp(-2 pi i y.z) |z|^-nu``.

    Only for the absolutely convergent range ``nu > d``.  Returns
    ``(value, tail)`` where ``tail`` estimates the omitted absolute sum by the
    continuum approximation ``omega_d R^(d-nu) / (V (nu-d))``.
    """
    d = lat.d
    if nu <= d:
        raise ValueError(f"direct summation needs nu > d = {d}, got nu = {nu}")
    if R <= 0:
        raise ValueError("truncation radius must be positive")
    pts = as_points(y, d)
    flat = pts.reshape(-1, d)
    z, r = _lattice_half_points(lat, R)
    amp = 2.0 * r ** (-nu)
    out = np.empty(flat.shape[0])
    # bound the phase block to about chunk * 4096 entries
    chunk = max(1, min(chunk, (chunk * 4096) // max(z.shape[0], 1)))
    for s in range(0, flat.shape[0], chunk):
        phase = 2.0 * pi * (flat[s : s + chunk] @ z.T)
        out[s : s + chunk] = np.cos(phase) @ amp
    omega = {1: 2.0, 2: 2.0 * pi}[d]
    tail = omega * R ** (d - nu) / (lat.volume * (nu - d))
    value = out.reshape(pts.shape[:-1]).astype(complex)
    if value.ndim == 0:
        value = complex(value)
    return value, tail


@dataclass(frozen=True)
class FoldedSymbol:
    """Residue-folded symbol with its truncation data.

    ``S[r] = sum_q |c_1(r + n q)|^2 sigma(r + n q)`` over ``|q_j| <= Q``, in
    FFT ordering of ``r``; ``tail`` bounds the omitted sum, hence the error
    of every Galerkin matrix entry.
    """

    S: np.ndarray
    Q: int
    tail: float


def _tail_bound(basis: SplineBasis, nu: float, Q: int, sigma_sup=None) -> float:
    d, mu, n, h = basis.d, basis.mu, basis.n, basis.h
    p0 = 2 * mu + 2
    L = ceil(n * (Q + 0.5))
    w_tot = mass_row_1d(mu, n)[0]
    pref = 2.0 * d * w_tot ** (d - 1) * h**2 * (pi * h) ** (-p0)
    if sigma_sup is not None:
        p = p0
        c = sigma_sup
    else:
        p = p0 + nu
        c = 1.0 if nu >= 0 else d ** (-0.5 * nu)
    if p <= 1:
        raise ValueError(f"folded symbol sum diverges for nu = {nu}, mu = {mu}")
    return pref * c * (L - 1) ** (1.0 - p) / (p - 1.0)


def fold_symbol(
    basis: SplineBasis,
    nu: float,
    Q: int | None = None,
    eps_tail: float = DEFAULT_EPS_TAIL,
    sigma=None,
    sigma_sup: float = 1.0,
) -> FoldedSymbol:
    """Fold ``|c_1|^2 sigma`` onto residues modulo ``n``.

    ``Q`` defaults to the smallest window with ``tail <= eps_tail * a(0)``
    (``a(0)`` being the diagonal entry, the largest in modulus).  A custom
    ``sigma(m)`` (``m`` of shape (..., d)) may replace the power law; it must
    satisfy ``|sigma| <= sigma_sup`` outside the window for the bound to hold.
    """
    d, mu, n = basis.d, basis.mu, basis.n
    sig = sigma if sigma is not None else (lambda m: power_law_symbol(m, nu))
    sup = sigma_sup if sigma is not None else None
    r = np.rint(np.fft.fftfreq(n) * n).astype(int)

    def block(qs):
        ms = [r + n * q for q in qs]
        w = np.abs(fourier_coeff_1d(mu, n, ms[0])) ** 2
        for mj in ms[1:]:
            w = np.multiply.outer(w, np.abs(fourier_coeff_1d(mu, n, mj)) ** 2)
        grid = np.stack(np.meshgrid(*ms, indexing="ij"), axis=-1)
        return w * sig(grid)

    central = block((0,) * d)
    if Q is None:
        a0 = max(float(np.sum(central)), np.finfo(float).tiny)
        Q = 1
        while _tail_bound(basis, nu, Q, sup) > eps_tail * a0 and Q < 4096:
            Q += 1
    S = np.zeros((n,) * d)
    for qs in np.ndindex(*([2 * Q + 1] * d)):
        qv = tuple(q - Q for q in qs)
        S += central if not any(qv) else block(qv)
    return FoldedSymbol(S=S, Q=Q, tail=_tail_bound(basis, nu, Q, sup))


def _from_folded(S: np.ndarray) -> CirculantOperator:
    eig = S * S.size
    gen = np.fft.ifftn(eig).real
    return CirculantOperator(gen)


def assemble_B(basis: SplineBasis, spec: KernelSpec, Q=None, eps_tail=DEFAULT_EPS_TAIL,
               sigma=None, sigma_sup=1.0) -> CirculantOperator:
    """Galerkin matrix of the pure long-range operator (without ``C2``)."""
    folded = fold_symbol(basis, spec.nu, Q=Q, eps_tail=eps_tail, sigma=sigma, sigma_sup=sigma_sup)
    return _from_folded(folded.S)


def assemble_A(basis: SplineBasis, spec: KernelSpec, Q=None,
               eps_tail=DEFAULT_EPS_TAIL) -> CirculantOperator:
    """``C1 h^(2d) E + C2 B`` with ``E`` the all-ones circulant."""
    S = np.zeros(basis.grid_shape)
    if spec.C2 != 0.0:
        S = spec.C2 * fold_symbol(basis, spec.nu, Q=Q, eps_tail=eps_tail).S
    # E has the single eigenvalue N at frequency 0, i.e. S[0] += 1
    S[(0,) * basis.d] += spec.C1 * basis.h ** (2 * basis.d)
    return _from_folded(S)


def sobolev_norm(coeffs, s: float, freqs=None) -> float:
    """``(sum_m <m>^(2s) |f_m|^2)^(1/2)`` with ``<m> = (1 + |m|^2)^(1/2)``.

    ``coeffs`` is laid out in FFT order along each axis unless explicit
    integer ``freqs`` of shape ``coeffs.shape + (d,)`` (or ``coeffs.shape``
    for 1-D) are given.
    """
    c = np.asarray(coeffs)
    if freqs is None:
        axes = [np.rint(np.fft.fftfreq(k) * k) for k in c.shape]
        m2 = sum(np.meshgrid(*[a * a for a in axes], indexing="ij"))
    else:
        f = np.asarray(freqs, dtype=float)
        m2 = f * f if f.shape == c.shape else np.sum(f * f, axis=-1)
    return float(np.sqrt(np.sum((1.0 + m2) ** s * np.abs(c) ** 2)))
