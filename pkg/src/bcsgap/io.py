"""File formats: sampled solution grids, restart coefficients, reports, spectra.

Grids hold the field sampled at the cell centres ``x_l + h/2`` (row-major,
first coordinate slowest), one file per matrix component.  Each grid comes
in two twins:

text
    ``#``-prefixed header lines ``key value`` (``format``, ``d``, ``n``,
    ``k``, ``component``, ``grid``), then one row per point with columns
    ``x1 [x2] re im`` printed with 17 significant digits.

binary (little-endian)
    bytes 0-3 magic ``b"BCSG"``; then six ``uint32``: version (1), ``d``,
    ``n``, ``k``, row ``a`` and column ``b`` of the component; then
    ``n**d`` pairs ``(re, im)`` of ``float64`` in the same point order.

For degree ``mu >= 1`` cell-centre sampling annihilates the alternating
(Nyquist) mode of each axis, so grids are lossy; ``write_coefficients`` stores the exact
spline coefficients for restarts.
"""
from __future__ import annotations

import json
import os
import re
import struct
from pathlib import Path

import numpy as np

from .circulant import CirculantOperator
from .nonlinearity import GapField
from .splines import SplineBasis, cardinal_bspline

__all__ = [
    "sample_cell_centers",
    "fit_cell_centers",
    "write_grid_text",
    "read_grid_text",
    "write_grid_binary",
    "read_grid_binary",
    "write_coefficients",
    "read_coefficients",
    "write_field",
    "load_field",
    "write_report",
    "write_spectrum",
]

MAGIC = b"BCSG"
VERSION = 1
_HEADER = struct.Struct("<4s6I")


def _center_grid(basis: SplineBasis) -> np.ndarray:
    x = basis.cell_centers()
    if basis.d == 1:
        return x[:, None]
    return np.stack(np.meshgrid(x, x, indexing="ij"), axis=-1)


def sample_cell_centers(F: GapField, a: int = 0, b: int | None = None) -> np.ndarray:
    """Values of component ``(a, b)`` on the ``(n,)*d`` cell-centre grid."""
    if b is None:
        b = 1 if F.k == 2 else 0
    return F.evaluate(_center_grid(F.basis))[..., a, b]


def _center_collocation(basis: SplineBasis) -> CirculantOperator:
    n, mu = basis.n, basis.mu
    j = np.arange(n)
    j = np.where(j > n // 2, j - n, j)
    row = cardinal_bspline(j + 0.5, mu)
    gen = row
    for _ in range(basis.d - 1):
        gen = np.multiply.outer(gen, row)
    return CirculantOperator(gen)


def fit_cell_centers(basis: SplineBasis, values, rtol: float = 1e-10) -> np.ndarray:
    """Spline coefficients interpolating cell-centre samples.

    Collocation at cell centres is circulant; modes with a vanishing
    eigenvalue (below ``rtol`` times the largest) carry no information and
    are set to zero, i.e. this is the minimum-norm least-squares fit.
    """
    values = np.asarray(values, dtype=complex)
    if values.shape != basis.grid_shape:
        raise ValueError(f"grid of shape {values.shape} does not match basis {basis.grid_shape}")
    eig = _center_collocation(basis).eig
    keep = np.abs(eig) > rtol * np.abs(eig).max()
    vh = np.fft.fftn(values)
    ch = np.where(keep, vh / np.where(keep, eig, 1.0), 0.0)
    return np.fft.ifftn(ch)


# --- grid files ----------------------------------------------------------------


def write_grid_text(path, basis: SplineBasis, values, k: int = 1, component=(0, 0)):
    values = np.asarray(values, dtype=complex)
    pts = _center_grid(basis).reshape(-1, basis.d)
    v = values.reshape(-1)
    cols = [pts[:, j] for j in range(basis.d)] + [v.real, v.imag]
    names = " ".join([f"x{j + 1}" for j in range(basis.d)] + ["re", "im"])
    header = "\n".join([
        f"format bcsgap-grid {VERSION}",
        f"d {basis.d}",
        f"n {basis.n}",
        f"k {k}",
        f"component {component[0]} {component[1]}",
        "grid cell-centers x_l+h/2",
        f"columns {names}",
    ])
    np.savetxt(path, np.column_stack(cols), fmt="%.17g", header=header, comments="# ")


def _text_header(path):
    meta = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            parts = line[1:].split()
            if parts:
                meta[parts[0]] = parts[1:]
    return meta


def read_grid_text(path):
    """Returns ``(values, meta)`` with values of shape ``(n,)*d``."""
    meta = _text_header(path)
    try:
        d, n = int(meta["d"][0]), int(meta["n"][0])
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"{path}: missing or malformed grid header") from exc
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape != (n**d, d + 2):
        raise ValueError(f"{path}: expected {n**d} rows of {d + 2} columns, got {data.shape}")
    vals = (data[:, d] + 1j * data[:, d + 1]).reshape((n,) * d)
    info = {"d": d, "n": n, "k": int(meta.get("k", ["1"])[0]),
            "component": tuple(int(c) for c in meta.get("component", ["0", "0"]))}
    return vals, info


def write_grid_binary(path, basis: SplineBasis, values, k: int = 1, component=(0, 0)):
    values = np.asarray(values, dtype=complex).reshape(-1)
    pairs = np.empty((values.size, 2), dtype="<f8")
    pairs[:, 0], pairs[:, 1] = values.real, values.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, basis.d, basis.n, k, *component))
        fh.write(pairs.tobytes())


def read_grid_binary(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, d, n, k, a, b = _HEADER.unpack_from(raw)
    if magic != MAGIC or version != VERSION:
        raise ValueError(f"{path}: not a bcsgap binary grid (version {VERSION})")
    body = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    if body.size != 2 * n**d:
        raise ValueError(f"{path}: expected {n**d} complex values, got {body.size / 2}")
    pairs = body.reshape(-1, 2)
    vals = (pairs[:, 0] + 1j * pairs[:, 1]).reshape((n,) * d)
    return vals, {"d": d, "n": n, "k": k, "component": (a, b)}


def read_grid(path):
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_grid_binary(path) if head == MAGIC else read_grid_text(path)


# --- coefficients ----------------------------------------------------------------


def write_coefficients(path, F: GapField):
    b = F.basis
    np.savez(path, coeffs=F.coeffs, d=b.d, mu=b.mu, n=b.n)


def read_coefficients(path, basis: SplineBasis | None = None) -> GapField:
    with np.load(path) as z:
        stored = SplineBasis(int(z["d"]), int(z["mu"]), int(z["n"]))
        coeffs = z["coeffs"]
    if basis is not None and basis != stored:
        raise ValueError(f"{path}: coefficients belong to {stored}, not {basis}")
    return GapField(stored, coeffs)


def component_paths(stem, k: int, ext: str) -> dict:
    """``{(a, b): path}``: ``stem.ext`` for k = 1, ``stem_ab.ext`` for k = 2."""
    stem = str(stem)
    if k == 1:
        return {(0, 0): f"{stem}{ext}"}
    return {(a, b): f"{stem}_{a}{b}{ext}" for a in range(k) for b in range(k)}


def write_field(stem, F: GapField, fmt: str = "text") -> list:
    """Write every component of ``F`` on the cell-centre grid; returns the paths."""
    if fmt not in ("text", "binary", "both"):
        raise ValueError("format must be text, binary or both")
    out = []
    vals = F.evaluate(_center_grid(F.basis))
    for ext, writer in ((".txt", write_grid_text), (".bin", write_grid_binary)):
        if fmt != "both" and ext != {"text": ".txt", "binary": ".bin"}[fmt]:
            continue
        for (a, b), path in component_paths(stem, F.k, ext).items():
            writer(path, F.basis, vals[..., a, b], k=F.k, component=(a, b))
            out.append(path)
    return out


_COMPONENT = re.compile(r"^(?P<stem>.*)_(?P<a>[01])(?P<b>[01])(?P<ext>\.[A-Za-z0-9]+)$")


def load_field(path, basis: SplineBasis, k: int = 1) -> GapField:
    """Initial field from a restart ``.npz`` or from grid file(s).

    For ``k = 2`` grid input, ``path`` names any one component file
    ``stem_ab.ext`` (or contains the placeholder ``{ab}``); the others are
    found next to it.
    """
    path = os.fspath(path)
    if path.endswith(".npz"):
        F = read_coefficients(path, basis)
        if F.k != k:
            raise ValueError(f"{path}: field has k = {F.k}, expected {k}")
        return F
    coeffs = np.zeros((k, k) + basis.grid_shape, dtype=complex)
    if k == 1:
        files = {(0, 0): path}
    elif "{ab}" in path:
        files = {(a, b): path.replace("{ab}", f"{a}{b}") for a in range(2) for b in range(2)}
    else:
        m = _COMPONENT.match(path)
        if not m:
            raise ValueError(f"{path}: k = 2 grid input needs component files stem_ab.ext")
        files = component_paths(m["stem"], 2, m["ext"])
    for (a, b), p in files.items():
        vals, info = read_grid(p)
        if info["d"] != basis.d or info["n"] != basis.n:
            raise ValueError(f"{p}: grid d={info['d']}, n={info['n']} does not match the basis")
        coeffs[a, b] = fit_cell_centers(basis, vals)
    return GapField(basis, coeffs)


# --- reports ----------------------------------------------------------------------


def write_report(path, data: dict):
    """JSON report; floats are written with repr precision, keys sorted."""
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def write_spectrum(path, op: CirculantOperator):
    """Eigenvalues of a circulant, one row ``m1 [m2] re im`` per frequency."""
    eig = op.eig
    d = eig.ndim
    n = eig.shape[0]
    freqs = np.rint(np.fft.fftfreq(n) * n).astype(int)
    grids = np.meshgrid(*([freqs] * d), indexing="ij")
    cols = [g.reshape(-1) for g in grids] + [eig.real.reshape(-1), eig.imag.reshape(-1)]
    names = " ".join([f"m{j + 1}" for j in range(d)] + ["re", "im"])
    fmt = ["%d"] * d + ["%.17g", "%.17g"]
    np.savetxt(path, np.column_stack(cols), fmt=fmt, header=f"columns {names}", comments="# ")


def ensure_dir(path) -> Path:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    return p
