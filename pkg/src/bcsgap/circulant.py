"""Block-circulant matrices diagonalised by the d-dimensional DFT.

A circulant operator on the grid ``{0..n-1}^d`` is fixed by its generating
array ``a``: ``(C v)_k = sum_l a((k - l) mod n) v_l``.  Vectors are stored as
arrays of shape ``(n,)*d`` (flat vectors of length ``n**d`` are accepted and
returned flat).  Eigenvalues are ``fftn(a)`` in numpy's FFT ordering.
"""
from __future__ import annotations

import threading

import numpy as np
import scipy.fft as sfft

from .errors import SingularOperatorError

__all__ = ["CirculantOperator", "matvec", "solve", "spectrum"]

SINGULAR_RTOL = 1e-13


class CirculantOperator:
    """Immutable d-dimensional (block-)circulant operator.

    Construct either from the generating array (``gen``) or, via
    :meth:`from_eigenvalues`, from its DFT.  The missing representation is
    computed on first use and cached.
    """

    def __init__(self, gen=None, *, eig=None):
        if (gen is None) == (eig is None):
            raise ValueError("give exactly one of gen or eig")
        arr = np.asarray(gen if gen is not None else eig)
        if arr.ndim not in (1, 2) or len(set(arr.shape)) != 1:
            raise ValueError(f"generator must be a 1-D or square 2-D array, got {arr.shape}")
        arr = arr.astype(np.result_type(arr.dtype, np.float64), copy=True)
        arr.setflags(write=False)
        self._gen = arr if gen is not None else None
        self._eig = arr.astype(complex) if eig is not None else None
        if self._eig is not None:
            self._eig.setflags(write=False)
        self._lock = threading.Lock()
        self.d = arr.ndim
        self.n = arr.shape[0]

    @classmethod
    def from_eigenvalues(cls, eig) -> "CirculantOperator":
        return cls(eig=eig)

    @classmethod
    def identity(cls, n: int, d: int = 1) -> "CirculantOperator":
        gen = np.zeros((n,) * d)
        gen[(0,) * d] = 1.0
        return cls(gen)

    @property
    def shape(self):
        N = self.n**self.d
        return (N, N)

    @property
    def grid_shape(self):
        return (self.n,) * self.d

    @property
    def gen(self) -> np.ndarray:
        if self._gen is None:
            with self._lock:
                if self._gen is None:
                    g = sfft.ifftn(self._eig)
                    if np.allclose(g.imag, 0.0, atol=1e-15 * max(1.0, np.abs(g).max())):
                        g = g.real.copy()
                    g.setflags(write=False)
                    self._gen = g
        return self._gen

    @property
    def eig(self) -> np.ndarray:
        if self._eig is None:
            with self._lock:
                if self._eig is None:
                    e = sfft.fftn(self._gen)
                    e.setflags(write=False)
                    self._eig = e
        return self._eig

    def _grid(self, v):
        v = np.asarray(v)
        if v.shape == self.grid_shape:
            return v, False
        if v.shape == (self.n**self.d,):
            return v.reshape(self.grid_shape), True
        raise ValueError(f"vector shape {v.shape} does not match operator grid {self.grid_shape}")

    def matvec(self, v) -> np.ndarray:
        g, flat = self._grid(v)
        out = sfft.ifftn(self.eig * sfft.fftn(g))
        if np.isrealobj(g) and np.isrealobj(self.gen):
            out = out.real
        return out.reshape(-1) if flat else out

    __matmul__ = matvec

    def check_nonsingular(self, rtol: float = SINGULAR_RTOL):
        eig = self.eig
        mag = np.abs(eig)
        scale = mag.max() if mag.size else 0.0
        k = np.unravel_index(np.argmin(mag), mag.shape)
        if scale == 0.0 or mag[k] <= rtol * scale:
            freq = tuple(int(i) for i in k)
            raise SingularOperatorError(
                f"circulant operator is singular at frequency {freq}: "
                f"|eig| = {mag[k]:.3e} <= {rtol:.1e} * max|eig|",
                frequency=freq,
                eigenvalue=complex(eig[k]),
            )

    def solve(self, b, rtol: float = SINGULAR_RTOL) -> np.ndarray:
        self.check_nonsingular(rtol)
        g, flat = self._grid(b)
        out = sfft.ifftn(sfft.fftn(g) / self.eig)
        if np.isrealobj(g) and np.isrealobj(self.gen):
            out = out.real
        return out.reshape(-1) if flat else out

    def spectrum(self) -> np.ndarray:
        return np.array(self.eig)

    def dense(self) -> np.ndarray:
        """Explicit ``n^d x n^d`` matrix; row-major flattening of multi-indices."""
        idx = np.indices(self.grid_shape).reshape(self.d, -1)
        diff = (idx[:, :, None] - idx[:, None, :]) % self.n
        return self.gen[tuple(diff)]

    def is_hermitian(self, atol: float = 1e-12) -> bool:
        g = self.gen
        flipped = np.roll(np.flip(g), 1, axis=tuple(range(self.d)))
        return bool(np.allclose(flipped, np.conj(g), rtol=0, atol=atol * max(1.0, np.abs(g).max())))

    def is_positive_definite(self) -> bool:
        e = self.eig
        return bool(np.all(np.abs(e.imag) <= 1e-12 * np.abs(e).max()) and np.all(e.real > 0))

    # algebra: combinations stay circulant and are formed on eigenvalues
    def __add__(self, other):
        if not isinstance(other, CirculantOperator):
            return NotImplemented
        self._check_compatible(other)
        return CirculantOperator(self.gen + other.gen)

    def __rmul__(self, scalar):
        if isinstance(scalar, CirculantOperator):
            return NotImplemented
        return CirculantOperator(scalar * self.gen)

    __mul__ = __rmul__

    def compose(self, other) -> "CirculantOperator":
        self._check_compatible(other)
        return CirculantOperator.from_eigenvalues(self.eig * other.eig)

    def inverse(self) -> "CirculantOperator":
        self.check_nonsingular()
        return CirculantOperator.from_eigenvalues(1.0 / self.eig)

    def _check_compatible(self, other):
        if (self.n, self.d) != (other.n, other.d):
            raise ValueError("operators live on different grids")

    def __repr__(self):
        return f"CirculantOperator(d={self.d}, n={self.n})"


def matvec(C: CirculantOperator, v):
    return C.matvec(v)


def solve(C: CirculantOperator, b, rtol: float = SINGULAR_RTOL):
    return C.solve(b, rtol)


def spectrum(C: CirculantOperator):
    return C.spectrum()
