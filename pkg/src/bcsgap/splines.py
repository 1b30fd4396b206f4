"""Periodic B-splines of degree ``mu`` on a uniform grid of the unit torus.

The first basis function is centred at the origin; ``phi_l(x) = phi_1(x - x_l)``
with nodes ``x_l = (l - 1) h`` and ``h = 1/n``.  Multi-indices in the public
functions are 1-based like the nodes; arrays are indexed 0-based, so entry
``l - 1`` of a coefficient array belongs to ``phi_l``.

The centred cardinal spline is kept as exact rational piecewise polynomials
obtained from repeated convolution with the unit box, so point values and
mass-matrix entries carry no quadrature error.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np
import scipy.sparse as sp

from .circulant import CirculantOperator
from .lattice import as_points

__all__ = [
    "SplineBasis",
    "cardinal_bspline",
    "eval_basis",
    "basis_values_1d",
    "collocation_matrix",
    "sample_tensor_grid",
    "fourier_coeff",
    "fourier_coeff_1d",
    "mass_row_1d",
    "mass_matrix",
    "functional_mass_row",
]


@dataclass(frozen=True)
class SplineBasis:
    """Tensor-product periodic B-spline basis.

    Attributes
    ----------
    d : int
        Dimension of the torus.
    mu : int
        Spline degree.
    n : int
        Number of grid cells per dimension; must exceed ``mu + 1``.
    """

    d: int
    mu: int
    n: int

    def __post_init__(self):
        if self.d not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if self.mu < 0:
            raise ValueError("spline degree must be nonnegative")
        if self.n <= self.mu + 1:
            raise ValueError(f"need n > mu + 1, got n={self.n}, mu={self.mu}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def size(self) -> int:
        return self.n**self.d

    @property
    def grid_shape(self):
        return (self.n,) * self.d

    @property
    def knot_offset(self) -> float:
        """Position of the first knot in units of h: 0 for odd, 1/2 for even degree."""
        return 0.5 if self.mu % 2 == 0 else 0.0

    def nodes(self):
        """1-D node coordinates ``x_l = (l - 1) h``."""
        return np.arange(self.n) * self.h

    def cell_centers(self):
        return (np.arange(self.n) + 0.5) * self.h


@lru_cache(maxsize=None)
def _pieces(mu: int):
    """Exact pieces of the centred cardinal B-spline of degree ``mu``.

    Piece ``p`` covers ``t`` in ``[p - (mu+1)/2, p + 1 - (mu+1)/2)`` and is
    stored as coefficients (ascending powers) in the local variable
    ``s = t - left end`` in ``[0, 1)``.
    """
    pieces = [[Fraction(1)]]
    for _ in range(mu):
        # antiderivatives vanishing at s = 0
        anti = [[Fraction(0)] + [c / (i + 1) for i, c in enumerate(p)] for p in pieces]
        full = [sum(P) for P in anti]  # integral over the whole unit piece
        k = len(pieces)
        new = []
        # q_j(s) = P_{j-1}(1) - P_{j-1}(s) + P_j(s)
        for j in range(k + 1):
            deg = len(anti[0])
            coeffs = [Fraction(0)] * deg
            if j - 1 >= 0:
                coeffs[0] += full[j - 1]
                for i, c in enumerate(anti[j - 1]):
                    coeffs[i] -= c
            if j < k:
                for i, c in enumerate(anti[j]):
                    coeffs[i] += c
            new.append(coeffs)
        pieces = new
    return tuple(tuple(p) for p in pieces)


@lru_cache(maxsize=None)
def _piece_table(mu: int) -> np.ndarray:
    tab = np.array([[float(c) for c in p] for p in _pieces(mu)])
    tab.setflags(write=False)
    return tab


def cardinal_value_exact(mu: int, t: Fraction) -> Fraction:
    """Exact value of the centred cardinal spline at a rational argument."""
    half = Fraction(mu + 1, 2)
    if not (-half <= t < half):
        return Fraction(0)
    p = int((t + half) // 1)
    s = t + half - p
    return sum(c * s**i for i, c in enumerate(_pieces(mu)[p]))


def cardinal_bspline(t, mu: int) -> np.ndarray:
    """Centred cardinal B-spline of degree ``mu`` (unit knot spacing) at ``t``.

    Supported on ``[-(mu+1)/2, (mu+1)/2)``; integrates to one.
    """
    t = np.asarray(t, dtype=float)
    tab = _piece_table(mu)
    half = 0.5 * (mu + 1)
    u = t + half
    p = np.floor(u)
    inside = (p >= 0) & (p <= mu)
    pi = np.where(inside, p, 0).astype(np.intp)
    s = u - p
    coeffs = tab[pi]
    val = coeffs[..., -1]
    for i in range(mu - 1, -1, -1):
        val = val * s + coeffs[..., i]
    return np.where(inside, val, 0.0)


def basis_values_1d(mu: int, n: int, x):
    """Active 1-D basis functions at points ``x``.

    Returns ``(idx, val)`` of shape ``x.shape + (mu + 1,)``: 0-based indices
    (``idx = l - 1``) and values of the ``mu + 1`` basis functions whose
    support contains each point.  Values may be zero at support boundaries.
    """
    t = np.asarray(x, dtype=float) * n
    jmax = np.floor(t + 0.5 * (mu + 1))
    j = jmax[..., None] - mu + np.arange(mu + 1)
    val = cardinal_bspline(t[..., None] - j, mu)
    idx = np.mod(j, n).astype(np.intp)
    return idx, val


def collocation_matrix(basis: SplineBasis, x) -> sp.csr_matrix:
    """Sparse 1-D matrix with entries ``phi_l(x_i)`` for the 1-D points ``x``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    idx, val = basis_values_1d(basis.mu, basis.n, x)
    rows = np.repeat(np.arange(x.size), basis.mu + 1)
    return sp.csr_matrix((val.reshape(-1), (rows, idx.reshape(-1))), shape=(x.size, basis.n))


def sample_tensor_grid(basis: SplineBasis, coef, x) -> np.ndarray:
    """Values of ``sum_l coef_l phi_l`` on the tensor grid ``x^d`` (``x`` 1-D)."""
    P = collocation_matrix(basis, x)
    coef = np.asarray(coef)
    if basis.d == 1:
        return P @ coef
    return (P @ (P @ coef).T).T


def _wrapped_offset(x, ell, n):
    t = np.asarray(x, dtype=float) * n - (ell - 1)
    return np.mod(t + 0.5 * n, n) - 0.5 * n


def eval_basis(basis: SplineBasis, ell, x):
    """Value of the periodic tensor-product B-spline ``phi_ell`` at ``x``.

    ``ell`` is a 1-based multi-index (an int is accepted for ``d == 1``);
    ``x`` is a point or an array of points with trailing axis ``d``.
    """
    ell = np.atleast_1d(np.asarray(ell, dtype=int))
    if ell.shape != (basis.d,):
        raise ValueError(f"multi-index must have {basis.d} entries")
    if np.any(ell < 1) or np.any(ell > basis.n):
        raise ValueError(f"multi-index {tuple(ell)} outside 1..{basis.n}")
    pts = as_points(x, basis.d)
    out = np.ones(pts.shape[:-1])
    for j in range(basis.d):
        out = out * cardinal_bspline(_wrapped_offset(pts[..., j], ell[j], basis.n), basis.mu)
    return float(out) if out.ndim == 0 else out


def fourier_coeff_1d(mu: int, n: int, m, ell=1):
    """``c_ell(m) = h sinc^{mu+1}(pi h m) exp(-2 pi i h m (ell - 1))``."""
    m = np.asarray(m, dtype=float)
    h = 1.0 / n
    c1 = h * np.sinc(h * m) ** (mu + 1)
    if np.all(np.asarray(ell) == 1):
        return c1.astype(complex)
    return c1 * np.exp(-2j * np.pi * h * m * (np.asarray(ell) - 1))


def fourier_coeff(basis: SplineBasis, ell, m):
    """Fourier coefficient of ``phi_ell`` at integer frequency (multi-)index ``m``."""
    ell = np.atleast_1d(np.asarray(ell, dtype=int))
    m = np.asarray(m)
    if basis.d == 1 and (m.ndim == 0 or m.shape[-1] != 1):
        m = m[..., None]
    out = np.ones(m.shape[:-1], dtype=complex)
    for j in range(basis.d):
        out = out * fourier_coeff_1d(basis.mu, basis.n, m[..., j], ell[j])
    return complex(out) if out.ndim == 0 else out


# generators from the closed forms, in units of h, listed for offsets 0, ±1, ±2
_MASS_CLOSED = {
    0: (Fraction(1),),
    1: (Fraction(4, 6), Fraction(1, 6)),
    2: (Fraction(66, 120), Fraction(26, 120), Fraction(1, 120)),
}


@lru_cache(maxsize=None)
def _mass_offsets(mu: int):
    """Exact ``<phi_1, phi_{1+j}> / h`` for j = 0..mu."""
    if mu in _MASS_CLOSED:
        return _MASS_CLOSED[mu]
    # autocorrelation of the degree-mu spline is the degree 2mu+1 spline
    return tuple(cardinal_value_exact(2 * mu + 1, Fraction(j)) for j in range(mu + 1))


def mass_row_1d(mu: int, n: int) -> np.ndarray:
    """Generating row of the 1-D periodic mass matrix (offsets wrapped mod n)."""
    row = np.zeros(n)
    h = 1.0 / n
    for j, v in enumerate(_mass_offsets(mu)):
        row[j % n] += float(v) * h
        if j:
            row[(-j) % n] += float(v) * h
    return row


def mass_matrix(basis: SplineBasis) -> CirculantOperator:
    """Circulant mass matrix ``M_kl = <phi_l, phi_k>`` (tensor product for d > 1)."""
    row = mass_row_1d(basis.mu, basis.n)
    gen = row
    for _ in range(basis.d - 1):
        gen = np.multiply.outer(gen, row)
    return CirculantOperator(gen)


def functional_mass_row(basis: SplineBasis, x):
    """Nonzero entries of ``M(x)_kl = phi_l(x) phi_k(x)`` at a single point.

    Returns a list of ``((k, l), value)`` with 1-based multi-indices ``k`` and
    ``l`` given as tuples.
    """
    pt = as_points(x, basis.d).reshape(-1)
    per_dim = []
    for j in range(basis.d):
        idx, val = basis_values_1d(basis.mu, basis.n, pt[j])
        per_dim.append([(int(i) + 1, float(v)) for i, v in zip(idx, val) if v != 0.0])
    active = []
    for combo in product(*per_dim):
        ell = tuple(c[0] for c in combo)
        active.append((ell, float(np.prod([c[1] for c in combo]))))
    return [((k, l), vk * vl) for k, vk in active for l, vl in active]
