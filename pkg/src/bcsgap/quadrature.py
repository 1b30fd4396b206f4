"""Per-cell Gauss-Legendre quadrature on the spline grid.

Cells are aligned with the spline knots (integer multiples of ``h`` for odd
degree, shifted by ``h/2`` for even degree), so every cell sees the same
``mu + 1`` active basis functions and the integrand is polynomial within a
cell whenever the weight is.
"""
from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .splines import SplineBasis, basis_values_1d, collocation_matrix

__all__ = ["CellQuadrature", "gauss_legendre_01"]


def gauss_legendre_01(q: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    t, w = np.polynomial.legendre.leggauss(q)
    return 0.5 * (t + 1.0), 0.5 * w


class CellQuadrature:
    """Tensor Gauss rule with ``q`` points per cell and dimension.

    Node arrays are laid out as ``(n*q,)*d`` with cell-major ordering in each
    dimension, i.e. node ``c*q + i`` is Gauss point ``i`` of cell ``c``.
    """

    def __init__(self, basis: SplineBasis, q: int | None = None):
        if q is None:
            q = basis.mu + 2
        if q < 1:
            raise ValueError("quadrature order must be >= 1")
        self.basis = basis
        self.q = q
        n, h = basis.n, basis.h
        t, w = gauss_legendre_01(q)
        left = (np.arange(n) + basis.knot_offset) * h
        self.x1 = (left[:, None] + t[None, :] * h).reshape(-1)
        self.w1 = np.tile(w * h, n)
        idx, val = basis_values_1d(basis.mu, n, self.x1)
        self.idx1 = idx
        self.val1 = val

    @property
    def d(self):
        return self.basis.d

    @property
    def shape(self):
        return (self.x1.size,) * self.d

    @cached_property
    def Phi(self) -> sp.csr_matrix:
        """Sparse 1-D collocation matrix, ``Phi[node, l] = phi_l(node)``."""
        return collocation_matrix(self.basis, self.x1)

    @cached_property
    def PhiT(self) -> sp.csr_matrix:
        return self.Phi.T.tocsr()

    @cached_property
    def points(self) -> np.ndarray:
        grids = np.meshgrid(*([self.x1] * self.d), indexing="ij")
        return np.stack(grids, axis=-1)

    @cached_property
    def weights(self) -> np.ndarray:
        w = self.w1
        for _ in range(self.d - 1):
            w = np.multiply.outer(w, self.w1)
        return w

    def xi(self, lat) -> np.ndarray:
        return lat.xi(self.points)

    def evaluate(self, coef) -> np.ndarray:
        """Values of ``sum_l coef_l phi_l`` at all nodes."""
        coef = np.asarray(coef)
        P = self.Phi
        if self.d == 1:
            return P @ coef
        return (P @ (P @ coef).T).T

    def load(self, values) -> np.ndarray:
        """Load vector ``b_k = sum_nodes w phi_k(node) values(node)``."""
        wv = self.weights * values
        PT = self.PhiT
        if self.d == 1:
            return PT @ wv
        return (PT @ (PT @ wv).T).T

    def integrate(self, values) -> complex:
        return np.sum(self.weights * values)
