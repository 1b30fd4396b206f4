"""Closed-form theory of the constant-kernel problem, used as ground truth.

For ``C2 = 0`` every solution is constant.  A scalar constant ``s e^{i theta}``
solves the gap equation iff ``s = C1 phi(s)`` with

    phi(s) = int_{T^d} s / sqrt(xi(y)^2 + s^2) dy,

which in one dimension reduces to complete elliptic integrals of the first
kind.  Constant 2x2 solutions decouple in their singular values.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import exp, log, pi, sqrt

import numpy as np
from scipy import integrate
from scipy.optimize import brentq

from .lattice import Lattice

__all__ = [
    "agm",
    "elliptic_K",
    "phi",
    "phi_quadrature",
    "phi_small_s",
    "ScalarFixedPoint",
    "solve_scalar_constant",
    "classify_constant_matrix",
    "match_constant_pattern",
]


def agm(a, b, tol: float = 1e-16, maxiter: int = 64):
    """Arithmetic-geometric mean of positive ``a`` and ``b`` (array friendly)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    for _ in range(maxiter):
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        if np.all(np.abs(a - b) <= tol * np.abs(a)):
            break
    return 0.5 * (a + b)


def _K_from_complement(kp):
    """``K`` as a function of ``k' = sqrt(1 - m)``: ``pi / (2 agm(1, k'))``."""
    return 0.5 * pi / agm(1.0, kp)


def elliptic_K(m):
    """Complete elliptic integral of the first kind, parameter ``m < 1``."""
    m = np.asarray(m, dtype=float)
    if np.any(m >= 1.0):
        raise ValueError("elliptic_K needs m < 1")
    out = _K_from_complement(np.sqrt(1.0 - m))
    return float(out) if out.ndim == 0 else out


def _phi_1d(s):
    s = np.asarray(s, dtype=float)
    pos = s > 0
    sp_ = np.where(pos, s, 1.0)
    r = np.sqrt(1.0 + sp_ * sp_)
    # K(-1/s^2) has k' = r/s and K(1/(1+s^2)) has k' = s/r; formed directly so
    # the parameters never overflow for tiny s
    val = (_K_from_complement(r / sp_) + (sp_ / r) * _K_from_complement(sp_ / r)) / pi
    return np.where(pos, val, 0.0)


def phi_quadrature(s: float, lat: Lattice | None = None, epsabs: float = 1e-13) -> float:
    """``int_{T^d} s / sqrt(xi^2 + s^2)`` by nested adaptive Gauss-Kronrod.

    The integration range is split at the zeros of ``xi`` so every
    subinterval sees at most a peak at its end points.
    """
    if lat is None:
        lat = Lattice.square(1)
    if s == 0:
        return 0.0
    d = lat.d

    def line(fn_xi):
        grid = np.linspace(0.0, 1.0, 257)
        v = fn_xi(grid)
        brk = [0.0]
        for i in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0)[0]:
            brk.append(brentq(lambda t: float(fn_xi(np.array([t]))[0]), grid[i], grid[i + 1],
                              xtol=1e-15))
        brk.append(1.0)
        total = 0.0
        for lo, hi in zip(brk[:-1], brk[1:]):
            val, _ = integrate.quad(
                lambda t: s / sqrt(float(fn_xi(np.array([t]))[0]) ** 2 + s * s),
                lo, hi, epsabs=epsabs, epsrel=1e-13, limit=200,
            )
            total += val
        return total

    if d == 1:
        return line(lambda t: lat.xi(t))
    inner = lambda y1: line(lambda t: lat.xi(np.stack([np.full_like(t, y1), t], -1)))
    val, _ = integrate.quad(inner, 0.0, 1.0, epsabs=epsabs, epsrel=1e-12, limit=400)
    return val


def phi(s, d: int = 1, lat: Lattice | None = None):
    """The scalar gap function ``phi``; closed form for d = 1, quadrature otherwise.

    ``phi(0) = 0`` by continuity.  Arrays are accepted for ``d = 1``.
    """
    if lat is None and d == 1:
        out = _phi_1d(s)
        return float(out) if out.ndim == 0 else out
    lat = lat or Lattice.square(d)
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0):
        raise ValueError("phi is defined for s >= 0")
    out = np.vectorize(lambda v: phi_quadrature(v, lat))(s_arr)
    return float(out) if out.ndim == 0 else out


def phi_small_s(s):
    """Two-term expansion ``-(2/pi) s ln s + (4 ln 2 / pi) s`` for d = 1."""
    s = np.asarray(s, dtype=float)
    return -(2.0 / pi) * s * np.log(s) + (4.0 * log(2.0) / pi) * s


@dataclass(frozen=True)
class ScalarFixedPoint:
    C1: float
    s_star: float
    bracket: tuple
    residual: float
    d: int = 1


def solve_scalar_constant(C1: float, d: int = 1, lat: Lattice | None = None) -> ScalarFixedPoint:
    """Nontrivial root of ``s = C1 phi(s)`` in ``(0, C1)``.

    The lower bracket end starts at a tenth of the weak-coupling asymptote
    ``4 exp(-pi / (2 C1))`` so exponentially small roots are not lost.
    """
    if not C1 > 0:
        raise ValueError("C1 must be positive")
    f = lambda s: s - C1 * phi(s, d, lat)
    lo = 0.1 * 4.0 * exp(-pi / (2.0 * C1))
    lo = max(lo, 1e-290)
    while f(lo) >= 0:
        lo *= 0.1
        if lo < 1e-300:
            raise RuntimeError("could not bracket the nontrivial root")
    hi = C1
    s_star = brentq(f, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
    return ScalarFixedPoint(C1=C1, s_star=s_star, bracket=(lo, hi), residual=abs(f(s_star)), d=d)


def classify_constant_matrix(C1: float, enforce_antisymmetry: bool = False, d: int = 1):
    """Constant 2x2 solutions for the constant kernel ``C1``.

    Without the antisymmetry constraint these are the four singular-value
    patterns ``diag(0,0), diag(s*,0), diag(0,s*), diag(s*,s*)``.  With it,
    only ``0`` and ``[[0, s*], [-s*, 0]]`` remain (up to a global phase).
    """
    s = solve_scalar_constant(C1, d).s_star
    if enforce_antisymmetry:
        return [np.zeros((2, 2)), np.array([[0.0, s], [-s, 0.0]])]
    return [np.diag([0.0, 0.0]), np.diag([s, 0.0]), np.diag([0.0, s]), np.diag([s, s])]


def match_constant_pattern(F, s_star: float, tol: float = 1e-6):
    """Number of singular values of ``F`` equal to ``s_star`` (0, 1 or 2).

    Returns ``None`` when some singular value is neither 0 nor ``s_star``
    within ``tol``.
    """
    sv = np.linalg.svd(np.asarray(F, dtype=complex), compute_uv=False)
    count = 0
    for v in sv:
        if abs(v - s_star) <= tol:
            count += 1
        elif abs(v) > tol:
            return None
    return count
