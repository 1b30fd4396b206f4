"""Damped fixed-point iteration for the discrete gap equation.

The Galerkin system ``M f = A g``, ``M g = b(f)`` with ``b_k = <G[F], phi_k>``
is iterated as

    f <- (1 - alpha) f + alpha T b(f),    T = M^-1 A M^-1,

componentwise for matrix fields.  ``T`` is a single circulant operator, so
each step costs one quadrature sweep and a pair of FFTs per component.
"""
from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .circulant import CirculantOperator
from .kernel import DEFAULT_EPS_TAIL, KernelSpec, assemble_A
from .lattice import Lattice
from .nonlinearity import GapField, NonlinearMap, _reverse, l2_norm, project_antisymmetric
from .splines import SplineBasis

__all__ = [
    "SolverConfig",
    "SolveReport",
    "ResidualInfo",
    "GapProblem",
    "initial_field",
    "iterate",
    "residual",
    "residual_info",
    "classify_symmetry",
    "nodal_points",
    "project_swap",
]

INIT_KINDS = ("constant", "dwave", "random", "file")
POINT_SYMMETRIES = ("none", "s-wave", "d-wave")


@dataclass
class SolverConfig:
    """Iteration controls.

    ``init_value`` scales the seeds: the constant seed is ``init_value``
    (times ``[[0, 1], [-1, 0]]`` for ``k = 2``), the d-wave seed is
    ``init_value (cos 2 pi x1 - cos 2 pi x2)`` and the random seed draws
    coefficients of that size.

    ``point_symmetry`` (d = 2 only) optionally projects every iterate onto
    fields even (``s-wave``) or odd (``d-wave``) under ``x1 <-> x2``.  A
    symmetric seed keeps its symmetry in exact arithmetic, but round-off
    in the complementary sector is amplified when the symmetric branch is
    unstable, so long runs may need the projector.
    """

    tol: float = 1e-10
    max_iter: int = 500
    alpha: float = 0.5
    init: str = "constant"
    init_value: float = 0.1
    seed: int = 0
    init_path: Optional[str] = None
    q: Optional[int] = None
    k: int = 1
    enforce_antisymmetry: bool = False
    point_symmetry: str = "none"
    floor: float = 1e-14
    node_tol: float = 1e-8
    sym_tol: float = 1e-6
    zero_tol: float = 1e-12
    eps_tail: float = DEFAULT_EPS_TAIL

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError("max_iter must be a positive integer")
        if self.init not in INIT_KINDS:
            raise ValueError(f"init must be one of {INIT_KINDS}, got {self.init!r}")
        if self.init == "file" and not self.init_path:
            raise ValueError("init = file needs init_path")
        if self.k not in (1, 2):
            raise ValueError("k must be 1 or 2")
        if self.enforce_antisymmetry and self.k != 2:
            raise ValueError("enforce_antisymmetry requires k = 2")
        if self.point_symmetry not in POINT_SYMMETRIES:
            raise ValueError(f"point_symmetry must be one of {POINT_SYMMETRIES}")
        if self.q is not None and self.q < 1:
            raise ValueError("quadrature order q must be >= 1")
        for name in ("floor", "node_tol", "sym_tol", "zero_tol", "eps_tail"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class SolveReport:
    converged: bool
    iterations: int
    residual_history: list
    final_residual: float
    solution_norm: float
    classification: str
    nodal_points: list
    update_history: list = field(default_factory=list)
    trivial: bool = False
    warnings: list = field(default_factory=list)
    elapsed: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ResidualInfo:
    value: float
    per_component: tuple
    trivial: bool


class GapProblem:
    """Operators of one discretised problem, shared by iteration and residuals."""

    def __init__(self, lat: Lattice, basis: SplineBasis, spec: KernelSpec, q=None,
                 eps_tail: float = DEFAULT_EPS_TAIL, A: CirculantOperator | None = None):
        if lat.d != basis.d:
            raise ValueError("lattice and basis dimensions differ")
        self.lat, self.basis, self.spec = lat, basis, spec
        self.nl = NonlinearMap(lat, basis, q)
        self.M = self.nl.M
        self.A = A if A is not None else assemble_A(basis, spec, eps_tail=eps_tail)
        self.M.check_nonsingular()
        eigM = self.M.eig.real
        self.T = CirculantOperator.from_eigenvalues(self.A.eig / (eigM * eigM))

    @property
    def is_zero_operator(self) -> bool:
        return not np.any(self.A.eig)

    def _each(self, op, c):
        out = np.empty_like(c)
        for idx in np.ndindex(*c.shape[:2]):
            out[idx] = op(c[idx])
        return out

    def image(self, F: GapField):
        """``(T b(F), b(F))``: the undamped fixed-point image and the load."""
        b = self.nl.load(F)
        return self._each(self.T.matvec, b), b

    def residual_from(self, F: GapField, image) -> ResidualInfo:
        """``||M (f - T b)|| / ||M f||`` per component, i.e. ``||M f - A M^-1 b|| / ||M f||``."""
        c = F.coeffs
        if not np.any(c):
            return ResidualInfo(0.0, (0.0,) * c.shape[0] ** 2, True)
        diff = self._each(self.M.matvec, c - image)
        Mf = self._each(self.M.matvec, c)
        vals = []
        for idx in np.ndindex(*c.shape[:2]):
            den = np.linalg.norm(Mf[idx])
            num = np.linalg.norm(diff[idx])
            if den == 0.0:
                vals.append(0.0 if num == 0.0 else float("inf"))
            else:
                vals.append(float(num / den))
        return ResidualInfo(max(vals), tuple(vals), False)

    def residual(self, F: GapField) -> ResidualInfo:
        return self.residual_from(F, self.image(F)[0])


def _dwave(points):
    return np.cos(2 * np.pi * points[..., 0]) - np.cos(2 * np.pi * points[..., 1])


def _antisym_pattern(basis: SplineBasis, scalar_coeffs) -> np.ndarray:
    """Coefficients of ``[[0, f(x)], [-f(-x), 0]]`` from those of ``f``."""
    c = np.zeros((2, 2) + basis.grid_shape, dtype=complex)
    c[0, 1] = scalar_coeffs
    c[1, 0] = -_reverse(np.asarray(scalar_coeffs), basis.d)
    return c


def initial_field(basis: SplineBasis, cfg: SolverConfig, q=None) -> GapField:
    """Seed field described by ``cfg.init``."""
    k, v = cfg.k, cfg.init_value
    shape = basis.grid_shape
    if cfg.init == "constant":
        # the constant function has all-ones coefficients (partition of unity)
        ones = np.full(shape, v, dtype=complex)
        c = ones[None, None] if k == 1 else _antisym_pattern(basis, ones)
        return GapField(basis, c)
    if cfg.init == "dwave":
        if basis.d != 2:
            raise ValueError("the d-wave seed needs d = 2")
        f = GapField.from_function(basis, lambda p: v * _dwave(p), q=q).coeffs[0, 0]
        return GapField(basis, f[None, None] if k == 1 else _antisym_pattern(basis, f))
    if cfg.init == "random":
        rng = np.random.default_rng(cfg.seed)
        size = (k, k) + shape
        c = v * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
        return GapField(basis, c)
    from .io import load_field

    return load_field(cfg.init_path, basis, k=k)


def project_swap(F: GapField, parity: int) -> GapField:
    """``(F(x1, x2) + parity F(x2, x1)) / 2`` applied to every component."""
    if F.basis.d != 2:
        raise ValueError("the swap projector needs d = 2")
    c = F.coeffs
    return GapField(F.basis, 0.5 * (c + parity * np.swapaxes(c, -1, -2)))


def _cycle(F: GapField, cfg: SolverConfig) -> GapField:
    if cfg.point_symmetry != "none":
        F = project_swap(F, 1 if cfg.point_symmetry == "s-wave" else -1)
    return project_antisymmetric(F) if cfg.enforce_antisymmetry else F


def iterate(lat: Lattice, basis: SplineBasis, spec: KernelSpec, cfg: SolverConfig | None = None,
            init: GapField | None = None, problem: GapProblem | None = None):
    """Run the damped fixed-point iteration; returns ``(field, report)``.

    The residual of iterate ``t`` is a by-product of step ``t`` and is
    recorded in ``residual_history``; the final entry is evaluated at the
    returned field.  Non-convergence is reported, not raised.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    prob = problem or GapProblem(lat, basis, spec, cfg.q, cfg.eps_tail)
    F = init if init is not None else initial_field(basis, cfg, prob.nl.q)
    if F.basis != basis:
        raise ValueError("initial field lives on a different basis")
    if F.k != cfg.k:
        raise ValueError(f"initial field has k = {F.k}, configuration says k = {cfg.k}")
    if cfg.point_symmetry != "none" and basis.d != 2:
        raise ValueError("point_symmetry needs d = 2")
    F = _cycle(F, cfg)

    res_hist, upd_hist = [], []
    converged = False
    its = 0
    alpha = cfg.alpha
    if prob.is_zero_operator:
        # T = 0: the fixed point is reached in a single step whatever alpha is
        res_hist.append(prob.residual(F).value)
        F = GapField.zeros(basis, cfg.k)
        upd_hist.append(0.0)
        its, converged = 1, True
    else:
        for its in range(1, cfg.max_iter + 1):
            img, _ = prob.image(F)
            res_hist.append(prob.residual_from(F, img).value)
            new = GapField(basis, (1.0 - alpha) * F.coeffs + alpha * img)
            new = _cycle(new, cfg)
            step = l2_norm(basis, new.coeffs - F.coeffs)
            size = new.l2_norm()
            upd_hist.append(step / max(size, cfg.floor))
            F = new
            if step <= cfg.tol * max(size, cfg.floor):
                converged = True
                break

    final = prob.residual(F)
    res_hist.append(final.value)
    norm = F.l2_norm()
    report = SolveReport(
        converged=converged,
        iterations=its,
        residual_history=[float(r) for r in res_hist],
        final_residual=float(final.value),
        solution_norm=float(norm),
        classification=classify_symmetry(F, basis, tol=cfg.zero_tol, sym_tol=cfg.sym_tol),
        nodal_points=nodal_points(F, lat, cfg.node_tol),
        update_history=[float(u) for u in upd_hist],
        trivial=final.trivial or norm < cfg.zero_tol,
        warnings=list(prob.nl.warnings),
        elapsed=time.perf_counter() - t0,
    )
    return F, report


def residual_info(lat, basis, spec, F: GapField, q=None) -> ResidualInfo:
    return GapProblem(lat, basis, spec, q).residual(F)


def residual(lat, basis, spec, F: GapField, q=None) -> float:
    """Relative discrete residual ``||M f - A M^-1 G(f) f|| / ||M f||``.

    Maximum over components; ``0`` for the trivial field.
    """
    return residual_info(lat, basis, spec, F, q).value


def _node_grid(basis: SplineBasis):
    x = basis.nodes()
    if basis.d == 1:
        return x[:, None]
    return np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1)


def _scalar_of(F: GapField) -> np.ndarray:
    a, b = (0, 1) if F.k == 2 else (0, 0)
    return F.evaluate(_node_grid(F.basis))[..., a, b]


def classify_symmetry(F: GapField, basis: SplineBasis | None = None, tol: float = 1e-12,
                      sym_tol: float = 1e-6) -> str:
    """``zero``, ``s-wave``, ``d-wave`` or ``other`` (``constant`` in 1-D).

    The scalar gap (the ``(0, 1)`` entry for ``k = 2``) is sampled at the
    spline nodes, a grid mapped onto itself by ``x1 <-> x2``.
    """
    basis = basis or F.basis
    if F.l2_norm() < tol:
        return "zero"
    f = _scalar_of(F)
    fmax = np.abs(f).max()
    if fmax == 0.0:
        return "zero"
    if basis.d == 1:
        return "constant" if np.abs(f - f.mean()).max() < sym_tol * fmax else "other"
    ft = f.T
    if np.abs(f - ft).max() < sym_tol * fmax:
        return "s-wave"
    if np.abs(f + ft).max() < sym_tol * fmax:
        return "d-wave"
    return "other"


def nodal_points(F: GapField, lat: Lattice, node_tol: float = 1e-8) -> list:
    """Spline nodes where ``|f| < node_tol ||f||_inf`` and ``|xi| < node_tol``."""
    pts = _node_grid(F.basis)
    f = np.abs(_scalar_of(F))
    fmax = f.max()
    if fmax == 0.0:
        return []
    mask = (f < node_tol * fmax) & (np.abs(lat.xi(pts)) < node_tol)
    return [[float(v) for v in p] for p in pts[mask]]
