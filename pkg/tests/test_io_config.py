import struct

import numpy as np
import pytest

from bcsgap import io as bio
from bcsgap.config import load_config, parse_config
from bcsgap.errors import ConfigError
from bcsgap.kernel import KernelSpec
from bcsgap.lattice import Lattice
from bcsgap.nonlinearity import GapField
from bcsgap.solver import SolverConfig, iterate
from bcsgap.splines import SplineBasis

BASE = """\
[lattice]
d = 1

[kernel]
C1 = 1.0
C2 = 0.5
nu = 2.5

[basis]
mu = 2
n = 16
"""


def _field(d=2, mu=2, n=8, k=2, seed=0):
    b = SplineBasis(d, mu, n)
    rng = np.random.default_rng(seed)
    shape = (k, k) + b.grid_shape
    return GapField(b, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


@pytest.mark.parametrize("d", [1, 2])
def test_text_and_binary_round_trip(tmp_path, d):
    F = _field(d, k=1)
    vals = bio.sample_cell_centers(F)
    bio.write_grid_text(tmp_path / "g.txt", F.basis, vals)
    bio.write_grid_binary(tmp_path / "g.bin", F.basis, vals)
    t, ti = bio.read_grid(tmp_path / "g.txt")
    b, bi = bio.read_grid(tmp_path / "g.bin")
    assert np.array_equal(t, vals) and np.array_equal(b, vals)
    assert ti == bi == {"d": d, "n": 8, "k": 1, "component": (0, 0)}


def test_binary_layout(tmp_path):
    b = SplineBasis(2, 1, 4)
    vals = np.arange(16).reshape(4, 4) + 0.5j
    bio.write_grid_binary(tmp_path / "g.bin", b, vals, k=2, component=(1, 0))
    raw = (tmp_path / "g.bin").read_bytes()
    assert raw[:4] == b"BCSG"
    assert struct.unpack_from("<6I", raw, 4) == (1, 2, 4, 2, 1, 0)
    assert len(raw) == 28 + 16 * 16
    body = np.frombuffer(raw[28:], dtype="<f8").reshape(-1, 2)
    assert np.array_equal(body[:, 0], np.arange(16.0))
    assert np.all(body[:, 1] == 0.5)
    (tmp_path / "bad.bin").write_bytes(raw[:40])
    with pytest.raises(ValueError):
        bio.read_grid(tmp_path / "bad.bin")


def test_text_header_and_point_order(tmp_path):
    b = SplineBasis(2, 1, 4)
    bio.write_grid_text(tmp_path / "g.txt", b, np.zeros((4, 4)), k=2, component=(0, 1))
    lines = (tmp_path / "g.txt").read_text().splitlines()
    head = [ln for ln in lines if ln.startswith("#")]
    assert "# d 2" in head and "# n 4" in head and "# component 0 1" in head
    rows = np.loadtxt(tmp_path / "g.txt")
    # first coordinate slowest, at cell centres
    assert np.allclose(rows[:5, :2], [[0.125, 0.125], [0.125, 0.375], [0.125, 0.625],
                                      [0.125, 0.875], [0.375, 0.125]])


def test_fit_cell_centers_degree_zero_is_exact():
    F = _field(2, mu=0, k=1)
    c = bio.fit_cell_centers(F.basis, bio.sample_cell_centers(F))
    assert np.allclose(c, F.coeffs[0, 0], atol=1e-14)


@pytest.mark.parametrize("mu", [1, 2, 3, 4])
def test_fit_cell_centers_drops_only_nyquist(mu):
    b = SplineBasis(1, mu, 8)
    alt = GapField(b, (-1.0) ** np.arange(8))
    assert np.abs(bio.sample_cell_centers(alt)).max() < 1e-15
    F = _field(1, mu=mu, k=1)
    c = bio.fit_cell_centers(b, bio.sample_cell_centers(F))
    ref = F.coeffs[0, 0]
    ref = ref - np.mean(ref * (-1.0) ** np.arange(8)) * (-1.0) ** np.arange(8)
    assert np.allclose(c, ref, atol=1e-12)


def test_write_field_and_load_field_k2(tmp_path):
    F = _field(2, mu=0, k=2)
    paths = bio.write_field(tmp_path / "sol", F, "both")
    names = sorted(p.rsplit("/", 1)[-1] for p in map(str, paths))
    assert names == sorted(f"sol_{a}{b}{e}" for a in "01" for b in "01" for e in (".txt", ".bin"))
    for p in (tmp_path / "sol_10.txt", str(tmp_path / "sol_{ab}.bin")):
        G = bio.load_field(p, F.basis, k=2)
        assert np.allclose(G.coeffs, F.coeffs, atol=1e-12)
    with pytest.raises(ValueError):
        bio.load_field(tmp_path / "sol_00.txt", SplineBasis(2, 0, 16), k=2)


def test_coefficients_round_trip_exact(tmp_path):
    F = _field(1, mu=3, n=16, k=2)
    bio.write_coefficients(tmp_path / "c.npz", F)
    G = bio.load_field(tmp_path / "c.npz", F.basis, k=2)
    assert np.array_equal(G.coeffs, F.coeffs)
    with pytest.raises(ValueError):
        bio.read_coefficients(tmp_path / "c.npz", SplineBasis(1, 2, 16))
    with pytest.raises(ValueError):
        bio.load_field(tmp_path / "c.npz", F.basis, k=1)


def test_write_spectrum(tmp_path):
    from bcsgap.circulant import CirculantOperator

    op = CirculantOperator(np.array([2.0, 1.0, 0.0, 1.0]))
    bio.write_spectrum(tmp_path / "s.txt", op)
    rows = np.loadtxt(tmp_path / "s.txt")
    assert np.array_equal(rows[:, 0], [0, 1, -2, -1])
    assert np.allclose(rows[:, 1], [4, 2, 0, 2])


def test_report_json_deterministic(tmp_path):
    data = {"b": 1.0000000000000002, "a": [0.1, float("inf")]}
    bio.write_report(tmp_path / "r1.json", data)
    bio.write_report(tmp_path / "r2.json", dict(reversed(list(data.items()))))
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    assert "1.0000000000000002" in (tmp_path / "r1.json").read_text()


def test_resolve_from_grid_file_within_factor_two(tmp_path):
    lat, b = Lattice.square(1), SplineBasis(1, 3, 32)
    spec = KernelSpec(0.9, 0.4, 2.5)
    F, rep = iterate(lat, b, spec, SolverConfig(init="dwave" if b.d == 2 else "constant"))
    assert rep.converged
    bio.write_field(tmp_path / "s", F, "text")
    cfg = SolverConfig(init="file", init_path=str(tmp_path / "s.txt"))
    G, rep2 = iterate(lat, b, spec, cfg)
    assert rep2.converged
    assert rep2.final_residual <= 2 * rep.final_residual
    assert rep2.iterations < rep.iterations


# --- configuration ----------------------------------------------------------


def test_parse_minimal_config():
    cfg = parse_config(BASE)
    assert cfg.lattice.d == 1 and cfg.basis.n == 16 and cfg.kernel.nu == 2.5
    assert cfg.solver == SolverConfig()
    assert cfg.output.format == "text"


def test_parse_full_config(tmp_path):
    text = BASE.replace("d = 1", "d = 2\nA = 1 0.5; 0 1") + """
[solver]
k = 2
tol = 1e-9
init = file
init_path = prev/sol_00.txt
enforce_antisymmetry = yes
point_symmetry = d-wave
q = default

[output]
directory = out
format = both
coefficients = off
"""
    cfg = parse_config(text, base_dir=tmp_path)
    assert np.array_equal(cfg.lattice.A, [[1, 0.5], [0, 1]])
    assert cfg.solver.k == 2 and cfg.solver.enforce_antisymmetry and cfg.solver.q is None
    assert cfg.solver.init_path == str(tmp_path / "prev/sol_00.txt")
    assert cfg.output.directory == tmp_path / "out"
    assert cfg.output.coefficients is False
    assert cfg.to_dict()["basis"] == {"mu": 2, "n": 16}


@pytest.mark.parametrize(
    "edit, key, line",
    [
        (lambda t: t.replace("nu = 2.5\n", ""), "nu", 4),
        (lambda t: t.replace("n = 16", "n = sixteen"), "n", 11),
        (lambda t: t.replace("C2 = 0.5", "C2 = 0.5\ncolour = red"), "colour", 7),
        (lambda t: t + "\n[extras]\nx = 1\n", "extras", 13),
        (lambda t: t.replace("C1 = 1.0", "C1 = -1.0"), "C1", 5),
        (lambda t: t.replace("mu = 2", "mu = 20"), "n", 11),
        (lambda t: t + "\n[solver]\nalpha = 2\n", "alpha", 14),
        (lambda t: t + "\n[solver]\ninit = dwave\n", "init", 14),
        (lambda t: t.replace("n = 16", "n = 16\nn = 8"), "n", 12),
        (lambda t: t + "\n[output]\nformat = hdf5\n", "format", 14),
        (lambda t: t.replace("d = 1", "d = 1\nA = 1 0; 0 1"), "A", 3),
    ],
)
def test_config_errors_carry_key_and_line(edit, key, line):
    with pytest.raises(ConfigError) as exc:
        parse_config(edit(BASE))
    assert exc.value.key == key
    assert exc.value.line == line
    assert repr(key) in str(exc.value)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.ini")


def test_shipped_configs_parse():
    from pathlib import Path

    for p in sorted((Path(__file__).parents[1] / "configs").glob("*.ini")):
        load_config(p)
