"""Lattice geometry and the tight-binding dispersion relation.

Points of the reciprocal torus are passed as arrays whose last axis has
length ``d``.  For ``d == 1`` a plain scalar or 1-D array of coordinates is
accepted as well (a 1-D array is then a list of points).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Lattice",
    "cell_volume",
    "dispersion",
    "fermi_surface_indicator",
    "nearest_neighbor_dispersion",
]


def as_points(y, d: int) -> np.ndarray:
    """Coerce ``y`` to a float array of shape ``(..., d)``."""
    y = np.asarray(y, dtype=float)
    if d == 1 and (y.ndim <= 1 or y.shape[-1] != 1):
        return y[..., None]
    if y.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}, got shape {y.shape}")
    return y


def nearest_neighbor_dispersion(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """xi(y) = -sum_j cos(2 pi (A y)_j) for points ``y`` of shape (..., d)."""
    Ay = y @ A.T
    return -np.cos(2.0 * np.pi * Ay).sum(axis=-1)


@dataclass(frozen=True)
class Lattice:
    """The lattice ``A Z^d`` together with the dispersion used on its torus.

    Parameters
    ----------
    A : array_like, shape (d, d)
        Regular generating matrix.  Only ``d`` in {1, 2} is supported.
    dispersion_fn : callable, optional
        ``f(A, y) -> xi`` replacing nearest-neighbour hopping.  Must accept
        points of shape (..., d) and return an array of shape (...).
    """

    A: np.ndarray
    dispersion_fn: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, compare=False
    )

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got shape {A.shape}")
        if A.shape[0] not in (1, 2):
            raise ValueError("only d = 1 and d = 2 are supported")
        if not np.all(np.isfinite(A)) or abs(np.linalg.det(A)) == 0.0:
            raise ValueError("A must be a finite regular matrix")
        A.setflags(write=False)
        object.__setattr__(self, "A", A)

    @classmethod
    def square(cls, d: int = 2) -> "Lattice":
        return cls(np.eye(d))

    @property
    def d(self) -> int:
        return self.A.shape[0]

    @property
    def volume(self) -> float:
        return float(abs(np.linalg.det(self.A)))

    @property
    def reciprocal(self) -> np.ndarray:
        """Generating matrix ``A^{-T}`` of the reciprocal lattice."""
        return np.linalg.inv(self.A).T

    @property
    def is_integer(self) -> bool:
        return bool(np.all(self.A == np.round(self.A)))

    def xi(self, y) -> np.ndarray:
        y = as_points(y, self.d)
        fn = self.dispersion_fn or nearest_neighbor_dispersion
        return np.asarray(fn(self.A, y), dtype=float)


def cell_volume(lat: Lattice) -> float:
    return lat.volume


def dispersion(lat: Lattice, y):
    """Evaluate the dispersion relation at one point or an array of points."""
    out = lat.xi(y)
    return float(out) if out.ndim == 0 else out


def fermi_surface_indicator(lat: Lattice, y, tol: float):
    """True where ``|xi(y)| < tol``."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    out = np.abs(lat.xi(y)) < tol
    return bool(out) if out.ndim == 0 else out
