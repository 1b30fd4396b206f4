"""The nonlinear gap map ``G[F] = F (xi^2 I + F* F)^(-1/2)`` on the spline space.

Gap fields are stored as spline coefficients of shape ``(k, k) + (n,)*d``.
Projection of ``G[F]`` back onto the spline space uses per-cell Gauss
quadrature: ``M g = b`` with ``b_k = <G[F], phi_k>``; for ``k = 1`` this load
vector is exactly ``G(f) f`` with the weighted mass matrix ``G(f)``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.optimize import brentq

from .errors import NodalSingularityError
from .lattice import Lattice, as_points
from .quadrature import CellQuadrature
from .splines import SplineBasis, basis_values_1d, mass_matrix

__all__ = [
    "GapField",
    "NodalNodeWarning",
    "NonlinearMap",
    "g_scalar",
    "g_matrix",
    "index_reversal",
    "project_antisymmetric",
    "assemble_G",
    "apply_G_map",
]

NODE_SHIFT = 1e-9  # in units of h


class NodalNodeWarning(RuntimeWarning):
    """A quadrature node sat exactly on a point where both F and xi vanish."""


@dataclass
class GapField:
    """Spline representation of a scalar (``k = 1``) or 2x2 gap field."""

    basis: SplineBasis
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape == self.basis.grid_shape:
            c = c[None, None]
        if c.ndim != 2 + self.basis.d or c.shape[0] != c.shape[1] or c.shape[0] not in (1, 2):
            raise ValueError(f"coefficients of shape {c.shape} do not fit basis {self.basis}")
        if c.shape[2:] != self.basis.grid_shape:
            raise ValueError("coefficient grid does not match the basis")
        if not np.all(np.isfinite(c)):
            raise ValueError("gap coefficients must be finite")
        self.coeffs = c

    @property
    def k(self) -> int:
        return self.coeffs.shape[0]

    @classmethod
    def zeros(cls, basis: SplineBasis, k: int = 1) -> "GapField":
        return cls(basis, np.zeros((k, k) + basis.grid_shape, dtype=complex))

    @classmethod
    def from_function(cls, basis: SplineBasis, fn, k: int = 1, q: int | None = None) -> "GapField":
        """L2 projection of ``fn(points) -> (..., k, k)`` (or (...,) for k=1)."""
        quad = CellQuadrature(basis, q)
        vals = np.asarray(fn(quad.points), dtype=complex)
        if k == 1 and vals.shape == quad.shape:
            vals = vals[..., None, None]
        M = mass_matrix(basis)
        coeffs = np.empty((k, k) + basis.grid_shape, dtype=complex)
        for a in range(k):
            for b in range(k):
                coeffs[a, b] = M.solve(quad.load(vals[..., a, b]))
        return cls(basis, coeffs)

    def component(self, a: int = 0, b: int | None = None) -> np.ndarray:
        if b is None:
            b = 1 if self.k == 2 else 0
        return self.coeffs[a, b]

    def evaluate(self, x) -> np.ndarray:
        """Field values at points ``x`` (trailing axis d); shape ``(..., k, k)``."""
        basis = self.basis
        pts = as_points(x, basis.d)
        idx, val = [], []
        for j in range(basis.d):
            i, v = basis_values_1d(basis.mu, basis.n, pts[..., j])
            idx.append(i)
            val.append(v)
        if basis.d == 1:
            gathered = self.coeffs[:, :, idx[0]]  # (k, k, ..., a)
            out = np.sum(gathered * val[0], axis=-1)
        else:
            i1 = idx[0][..., :, None]
            i2 = idx[1][..., None, :]
            w = val[0][..., :, None] * val[1][..., None, :]
            gathered = self.coeffs[:, :, i1, i2]
            out = np.sum(gathered * w, axis=(-1, -2))
        return np.moveaxis(out, (0, 1), (-2, -1))

    def copy(self) -> "GapField":
        return GapField(self.basis, self.coeffs.copy())

    def __mul__(self, scalar):
        return GapField(self.basis, self.coeffs * scalar)

    __rmul__ = __mul__

    def l2_norm(self) -> float:
        """``(sum_ab ||F_ab||_L2^2)^(1/2)`` computed exactly through the mass matrix."""
        return l2_norm(self.basis, self.coeffs)


def l2_norm(basis: SplineBasis, coeffs) -> float:
    eig = mass_matrix(basis).eig.real
    axes = tuple(range(-basis.d, 0))
    chat = np.fft.fftn(coeffs, axes=axes)
    return float(np.sqrt(np.sum(eig * np.abs(chat) ** 2) / basis.size))


def g_scalar(f, xi):
    """``f / sqrt(xi^2 + |f|^2)``; raises on points where both vanish."""
    f = np.asarray(f, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    den = np.sqrt(xi * xi + np.abs(f) ** 2)
    if np.any(den == 0.0):
        raise NodalSingularityError("g is undefined where both f and xi vanish")
    out = f / den
    return complex(out) if out.ndim == 0 else out


def _inv_sqrt_hermitian(F, xi):
    """``(xi^2 I + F* F)^(-1/2)`` for stacks of 2x2 matrices, closed form.

    With ``H = xi^2 I + F* F``, ``s = sqrt(det H)`` and ``t = sqrt(tr H + 2 s)``
    one has ``sqrt(H) = (H + s I) / t`` and hence
    ``H^(-1/2) = adj(H + s I) / (s t)``.  ``det H`` is formed as
    ``(xi^2 + s1^2)(xi^2 + s2^2)`` expanded, free of cancellation.
    """
    xi2 = xi * xi
    F11, F12, F21, F22 = F[..., 0, 0], F[..., 0, 1], F[..., 1, 0], F[..., 1, 1]
    a11 = xi2 + np.abs(F11) ** 2 + np.abs(F21) ** 2
    a22 = xi2 + np.abs(F12) ** 2 + np.abs(F22) ** 2
    a12 = np.conj(F11) * F12 + np.conj(F21) * F22
    fro2 = np.abs(F11) ** 2 + np.abs(F12) ** 2 + np.abs(F21) ** 2 + np.abs(F22) ** 2
    detF2 = np.abs(F11 * F22 - F12 * F21) ** 2
    det = xi2 * xi2 + xi2 * fro2 + detF2
    if np.any(det == 0.0):
        raise NodalSingularityError("xi^2 I + F*F is singular: F loses rank on the Fermi surface")
    s = np.sqrt(det)
    t = np.sqrt(a11 + a22 + 2.0 * s)
    st = s * t
    out = np.empty(F.shape, dtype=complex)
    out[..., 0, 0] = (a22 + s) / st
    out[..., 1, 1] = (a11 + s) / st
    out[..., 0, 1] = -a12 / st
    out[..., 1, 0] = -np.conj(a12) / st
    return out


def g_matrix(F, xi):
    """``F (xi^2 I + F* F)^(-1/2)`` for one 2x2 matrix or a stack ``(..., 2, 2)``."""
    F = np.asarray(F, dtype=complex)
    xi = np.asarray(xi, dtype=float)
    if F.shape[-2:] == (1, 1):
        return g_scalar(F[..., 0, 0], xi)[..., None, None]
    if F.shape[-2:] != (2, 2):
        raise ValueError("g_matrix expects 2x2 matrices")
    return F @ _inv_sqrt_hermitian(F, xi)


def index_reversal(n: int, d: int):
    """0-based coefficient permutation induced by ``x -> -x`` (``i -> -i mod n``)."""
    return np.mod(-np.arange(n), n)


def _reverse(coeffs, d):
    axes = tuple(range(coeffs.ndim - d, coeffs.ndim))
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def project_antisymmetric(F: GapField) -> GapField:
    """Projector onto fields with ``F^T(-x) = -F(x)``."""
    if F.k != 2:
        raise ValueError("the fermionic antisymmetry constraint applies to k = 2 fields")
    rev = _reverse(F.coeffs, F.basis.d)
    return GapField(F.basis, 0.5 * (F.coeffs - np.swapaxes(rev, 0, 1)))


@dataclass
class NonlinearMap:
    """Quadrature workspace reused across iterations for one lattice and basis."""

    lat: Lattice
    basis: SplineBasis
    q: int | None = None
    warnings: list = field(default_factory=list)

    def __post_init__(self):
        if self.lat.d != self.basis.d:
            raise ValueError("lattice and basis dimensions differ")
        self.quad = CellQuadrature(self.basis, self.q)
        self.q = self.quad.q
        self.xi = self.quad.xi(self.lat)
        self.M = mass_matrix(self.basis)

    def field_at_nodes(self, F: GapField) -> np.ndarray:
        k = F.k
        vals = np.empty(self.quad.shape + (k, k), dtype=complex)
        for a in range(k):
            for b in range(k):
                vals[..., a, b] = self.quad.evaluate(F.coeffs[a, b])
        return vals

    def _gvalues(self, Fv, xi):
        if Fv.shape[-1] == 1:
            den = np.sqrt(xi * xi + np.abs(Fv[..., 0, 0]) ** 2)
            bad = den == 0.0
            g = np.where(bad, 0.0, Fv[..., 0, 0] / np.where(bad, 1.0, den))
            return g[..., None, None], bad
        xi2 = xi * xi
        fro2 = np.sum(np.abs(Fv) ** 2, axis=(-1, -2))
        detF2 = np.abs(Fv[..., 0, 0] * Fv[..., 1, 1] - Fv[..., 0, 1] * Fv[..., 1, 0]) ** 2
        bad = (xi2 * xi2 + xi2 * fro2 + detF2) == 0.0
        g = np.zeros_like(Fv)
        ok = ~bad
        g[ok] = g_matrix(Fv[ok], xi[ok])
        return g, bad

    def _perturbed_loads(self, F: GapField, bad) -> np.ndarray:
        """Load contributions of nodal nodes, each moved by ``NODE_SHIFT * h``."""
        basis = self.basis
        pts = self.quad.points[bad] + NODE_SHIFT * basis.h
        w = self.quad.weights[bad]
        msg = f"{pts.shape[0]} quadrature node(s) on a nodal point; shifted by {NODE_SHIFT}*h"
        self.warnings.append(msg)
        warnings.warn(msg, NodalNodeWarning, stacklevel=3)
        Fv = F.evaluate(pts)
        xi = self.lat.xi(pts)
        g, still = self._gvalues(Fv, xi)
        if np.any(still):
            raise NodalSingularityError("shifted quadrature node is still nodal")
        out = np.zeros((F.k, F.k) + basis.grid_shape, dtype=complex)
        idx, val = zip(*(basis_values_1d(basis.mu, basis.n, pts[:, j]) for j in range(basis.d)))
        for p in range(pts.shape[0]):
            for combo in np.ndindex(*([basis.mu + 1] * basis.d)):
                ii = tuple(idx[j][p, combo[j]] for j in range(basis.d))
                vv = np.prod([val[j][p, combo[j]] for j in range(basis.d)])
                out[(slice(None), slice(None)) + ii] += w[p] * vv * g[p]
        return out

    def load(self, F: GapField) -> np.ndarray:
        """``b_k = <G[F], phi_k>`` per component, shape ``(k, k) + grid``."""
        k = F.k
        if not np.any(F.coeffs):
            return np.zeros_like(F.coeffs)
        Fv = self.field_at_nodes(F)
        g, bad = self._gvalues(Fv, self.xi)
        b = np.empty_like(F.coeffs)
        for a in range(k):
            for c in range(k):
                b[a, c] = self.quad.load(g[..., a, c])
        if np.any(bad):
            b += self._perturbed_loads(F, bad)
        return b

    def apply(self, F: GapField) -> GapField:
        b = self.load(F)
        out = np.empty_like(b)
        for a in range(F.k):
            for c in range(F.k):
                out[a, c] = self.M.solve(b[a, c])
        return GapField(self.basis, out)

    # --- weighted mass matrix G(f) ------------------------------------------

    def _check_integrable(self, F: GapField, a: int, c: int):
        """Reject fields vanishing on the Fermi surface where 1/|xi| is not integrable."""
        coef = F.coeffs[a, c]
        scale = np.abs(coef).max()
        pts = fermi_points(self.lat, self.basis.n)
        if pts.size == 0:
            return
        if scale == 0.0:
            raise NodalSingularityError(
                "G(f) diverges: f vanishes identically and xi has zeros on the torus"
            )
        vals = np.abs(F.evaluate(pts)[..., a, c])
        small = vals <= 1e-12 * scale
        if (self.basis.d == 1 and np.any(small)) or (self.basis.d > 1 and np.all(small)):
            raise NodalSingularityError("G(f) diverges: f vanishes on the Fermi surface")

    def assemble_G(self, F: GapField, a: int = 0, c: int | None = None) -> sp.csr_matrix:
        """Sparse periodic-banded matrix ``int phi_l phi_k / sqrt(xi^2 + |f|^2)``.

        Row/column index of multi-index ``l`` (0-based) is its row-major flat
        position in the coefficient grid.
        """
        if c is None:
            c = 1 if F.k == 2 else 0
        self._check_integrable(F, a, c)
        basis, quad = self.basis, self.quad
        n, q, p = basis.n, quad.q, basis.mu + 1
        f = quad.evaluate(F.coeffs[a, c])
        den = np.sqrt(self.xi**2 + np.abs(f) ** 2)
        bad = den == 0.0
        if np.any(bad):
            pts = quad.points[bad] + NODE_SHIFT * basis.h
            msg = f"{pts.shape[0]} quadrature node(s) on a nodal point; shifted by {NODE_SHIFT}*h"
            self.warnings.append(msg)
            warnings.warn(msg, NodalNodeWarning, stacklevel=2)
            den = den.copy()
            den[bad] = np.sqrt(self.lat.xi(pts) ** 2 + np.abs(F.evaluate(pts)[..., a, c]) ** 2)
        wr = (quad.weights / den)
        V = quad.val1.reshape(n, q, p)
        I = quad.idx1.reshape(n, q, p)[:, 0, :]
        if basis.d == 1:
            local = np.einsum("cq,cqa,cqb->cab", wr.reshape(n, q), V, V)
            rows = np.broadcast_to(I[:, :, None], local.shape)
            cols = np.broadcast_to(I[:, None, :], local.shape)
        else:
            W = wr.reshape(n, q, n, q)
            local = np.einsum("cqer,cqa,erb,cqx,ery->ceabxy", W, V, V, V, V, optimize=True)
            flat = I[:, None, :, None] * n + I[None, :, None, :]  # (c, e, a, b)
            rows = np.broadcast_to(flat[:, :, :, :, None, None], local.shape)
            cols = np.broadcast_to(flat[:, :, None, None, :, :], local.shape)
        N = basis.size
        G = sp.coo_matrix((local.reshape(-1), (rows.reshape(-1), cols.reshape(-1))), shape=(N, N))
        return G.tocsr()


def fermi_points(lat: Lattice, n: int, refine: int = 16) -> np.ndarray:
    """Points of the Fermi surface on the torus.

    d = 1: all roots of xi.  d = 2: crossings along the lines ``x_1 = (i + 1/2)/n``,
    a sample of the Fermi curves that hits every branch at grid resolution.
    """
    m = refine * n
    y = (np.arange(m) + 0.5) / m
    if lat.d == 1:
        lines = [None]
    else:
        lines = (np.arange(n) + 0.5) / n
    out = []
    for x1 in lines:
        if lat.d == 1:
            fn = lambda t: float(lat.xi(t))
        else:
            fn = lambda t, x1=x1: float(lat.xi(np.array([x1, t])))
        pts = np.append(y, y[0] + 1.0)
        vals = lat.xi(pts if lat.d == 1 else np.stack([np.full_like(pts, x1), pts], -1))
        for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) <= 0)[0]:
            if vals[i] == 0.0:
                root = pts[i]
            else:
                root = brentq(fn, pts[i], pts[i + 1], xtol=1e-15)
            out.append([root % 1.0] if lat.d == 1 else [x1, root % 1.0])
    return np.array(out).reshape(-1, lat.d)


def assemble_G(basis: SplineBasis, lat: Lattice, f, q: int | None = None) -> sp.csr_matrix:
    """Weighted mass matrix ``G(f)`` for a scalar field (GapField or coefficients)."""
    F = f if isinstance(f, GapField) else GapField(basis, f)
    return NonlinearMap(lat, basis, q).assemble_G(F)


def apply_G_map(lat: Lattice, basis: SplineBasis, F: GapField, q: int | None = None) -> GapField:
    """Galerkin projection ``g`` of ``G[F]``: ``M g = <G[F], phi>``."""
    return NonlinearMap(lat, basis, q).apply(F)
