"""Run configuration: an INI file with sections lattice, kernel, basis, solver, output.

Every key is documented in ``docs/config.md``.  Unknown sections or keys,
missing required keys and malformed values raise :class:`ConfigError`
carrying the offending key and its line number.
"""
from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError
from .kernel import DEFAULT_EPS_TAIL, KernelSpec
from .lattice import Lattice
from .solver import SolverConfig
from .splines import SplineBasis

__all__ = ["OutputConfig", "RunConfig", "load_config", "parse_config"]


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional_int(text: str):
    return None if text.strip().lower() in ("", "none", "default") else int(text)


def _matrix(text: str) -> np.ndarray:
    rows = [r.split() for r in text.replace(",", " ").split(";") if r.strip()]
    return np.array([[float(v) for v in r] for r in rows], dtype=float)


# section -> key -> (parser, required)
SCHEMA = {
    "lattice": {
        "d": (int, True),
        "A": (_matrix, False),
    },
    "kernel": {
        "C1": (float, True),
        "C2": (float, True),
        "nu": (float, True),
        "eps_tail": (float, False),
    },
    "basis": {
        "mu": (int, True),
        "n": (int, True),
    },
    "solver": {
        "k": (int, False),
        "tol": (float, False),
        "max_iter": (int, False),
        "alpha": (float, False),
        "init": (str, False),
        "init_value": (float, False),
        "seed": (int, False),
        "init_path": (str, False),
        "q": (_optional_int, False),
        "enforce_antisymmetry": (_bool, False),
        "point_symmetry": (str, False),
        "floor": (float, False),
        "node_tol": (float, False),
        "sym_tol": (float, False),
        "zero_tol": (float, False),
    },
    "output": {
        "directory": (str, False),
        "stem": (str, False),
        "format": (str, False),
        "report": (str, False),
        "coefficients": (_bool, False),
        "spectrum": (_bool, False),
    },
}


@dataclass
class OutputConfig:
    directory: Path = Path(".")
    stem: str = "solution"
    format: str = "text"
    report: str = "report.json"
    coefficients: bool = True
    spectrum: bool = False

    def __post_init__(self):
        if self.format not in ("text", "binary", "both"):
            raise ValueError("format must be text, binary or both")
        if not self.stem or "/" in self.stem:
            raise ValueError("stem must be a plain file name")


@dataclass
class RunConfig:
    lattice: Lattice
    kernel: KernelSpec
    basis: SplineBasis
    solver: SolverConfig
    output: OutputConfig = field(default_factory=OutputConfig)
    eps_tail: float = DEFAULT_EPS_TAIL
    source: Optional[Path] = None

    def to_dict(self) -> dict:
        s = {f.name: getattr(self.solver, f.name) for f in fields(self.solver)}
        return {
            "lattice": {"d": self.lattice.d, "A": self.lattice.A.tolist()},
            "kernel": {"C1": self.kernel.C1, "C2": self.kernel.C2, "nu": self.kernel.nu,
                       "eps_tail": self.eps_tail},
            "basis": {"mu": self.basis.mu, "n": self.basis.n},
            "solver": s,
            "output": {
                "directory": str(self.output.directory),
                "stem": self.output.stem,
                "format": self.output.format,
                "report": self.output.report,
                "coefficients": self.output.coefficients,
                "spectrum": self.output.spectrum,
            },
        }


_SECTION = re.compile(r"^\s*\[(?P<name>[^\]]+)\]")
_KEY = re.compile(r"^(?P<key>[^\s=:#;][^=:]*?)\s*[=:]")


def _line_index(text: str) -> dict:
    """``{(section, key): line}`` (1-based) and ``{(section, None): line}``."""
    out = {}
    section = None
    for no, line in enumerate(text.splitlines(), start=1):
        m = _SECTION.match(line)
        if m:
            section = m["name"].strip()
            out.setdefault((section, None), no)
            continue
        m = _KEY.match(line)
        if m and section is not None:
            out.setdefault((section, m["key"].strip()), no)
    return out


def parse_config(text: str, base_dir: Path | str = ".", source=None) -> RunConfig:
    """Parse configuration text; relative paths resolve against ``base_dir``."""
    lines = _line_index(text)
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"),
                                   strict=True, default_section="__no_default__")
    cp.optionxform = str
    try:
        cp.read_string(text, source=str(source or "<config>"))
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"duplicate key in [{exc.section}]", key=exc.option, line=exc.lineno)
    except configparser.DuplicateSectionError as exc:
        raise ConfigError("duplicate section", key=exc.section, line=exc.lineno)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("key outside of any section", line=exc.lineno)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("unparsable line", line=line)

    values: dict = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", key=section,
                              line=lines.get((section, None)))
        for key, raw in cp.items(section):
            where = lines.get((section, key))
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key in [{section}]", key=key, line=where)
            parser = SCHEMA[section][key][0]
            try:
                values[(section, key)] = parser(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}", key=key, line=where) from None
    for section, keys in SCHEMA.items():
        for key, (_, required) in keys.items():
            if required and (section, key) not in values:
                raise ConfigError(f"missing required key in [{section}]", key=key,
                                  line=lines.get((section, None)))

    def get(section, key, default=None):
        return values.get((section, key), default)

    def build(section, key, fn):
        try:
            return fn()
        except ValueError as exc:
            raise ConfigError(str(exc), key=key, line=lines.get((section, key))) from None

    base = Path(base_dir)
    d = get("lattice", "d")
    lattice = build("lattice", "A", lambda: Lattice(get("lattice", "A", np.eye(d))))
    if lattice.d != d:
        raise ConfigError(f"A is {lattice.d}x{lattice.d} but d = {d}", key="A",
                          line=lines.get(("lattice", "A")))
    kernel = build("kernel", "C1", lambda: KernelSpec(get("kernel", "C1"), get("kernel", "C2"),
                                                       get("kernel", "nu")))
    basis = build("basis", "n", lambda: SplineBasis(d, get("basis", "mu"), get("basis", "n")))

    skw = {key: v for (sec, key), v in values.items() if sec == "solver"}
    if "init_path" in skw:
        p = Path(skw["init_path"])
        skw["init_path"] = str(p if p.is_absolute() else base / p)
    solver = None
    try:
        solver = SolverConfig(**skw)
    except ValueError as exc:
        msg = str(exc)
        key = next((k for k in sorted(skw, key=len, reverse=True) if k in msg), None)
        raise ConfigError(msg, key=key, line=lines.get(("solver", key))) from None
    if solver.init == "dwave" and d != 2:
        raise ConfigError("init = dwave needs d = 2", key="init", line=lines.get(("solver", "init")))
    if solver.point_symmetry != "none" and d != 2:
        raise ConfigError("point_symmetry needs d = 2", key="point_symmetry",
                          line=lines.get(("solver", "point_symmetry")))

    okw = {key: v for (sec, key), v in values.items() if sec == "output"}
    directory = Path(okw.pop("directory", "."))
    okw["directory"] = directory if directory.is_absolute() else base / directory
    output = None
    try:
        output = OutputConfig(**okw)
    except ValueError as exc:
        key = "format" if "format" in str(exc) else "stem"
        raise ConfigError(str(exc), key=key, line=lines.get(("output", key))) from None

    eps_tail = get("kernel", "eps_tail", DEFAULT_EPS_TAIL)
    if not eps_tail > 0:
        raise ConfigError("eps_tail must be positive", key="eps_tail",
                          line=lines.get(("kernel", "eps_tail")))
    solver.eps_tail = eps_tail
    return RunConfig(lattice=lattice, kernel=kernel, basis=basis, solver=solver, output=output,
                     eps_tail=eps_tail, source=Path(source) if source else None)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=path.parent, source=path)
