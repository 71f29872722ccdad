"""Flat, typed configuration files for batch runs.

Sections [rotor], [baths], [drive], [sweep], [sim]; all physical keys in
reduced units (k_B = 1). Unknown sections or keys are hard errors so a typo
cannot silently change the physics. Parsing then re-serializing is
idempotent.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, replace

from .engine import SimConfig
from .model import BathPair, DriveSpec, NoiseModel, RotorParams

__all__ = ["ConfigError", "SweepSpec", "RunConfig", "parse_config", "serialize_config"]

_AXES = ("theta", "alpha", "omega0", "T2")

_KNOWN = {
    "rotor": ("m", "eta", "hbar", "u1", "u2", "alpha"),
    "baths": ("T1", "T2", "model"),
    "drive": ("D", "omega0"),
    "sweep": ("axis", "grid", "tau1", "tau2"),
    "sim": ("dt", "n_steps", "n_traj", "burn_in_fraction", "master_seed", "rigid_body"),
}


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis over a strictly increasing grid.

    For the theta axis the bath temperatures are T_n = tau_n * theta; the
    other axes replace the corresponding base field directly.
    """

    axis: str
    grid: tuple[float, ...]
    tau1: float = 1.0
    tau2: float = 1.0

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ConfigError(f"unknown sweep axis {self.axis!r}; expected one of {_AXES}")
        if not self.grid:
            raise ConfigError("sweep grid must be nonempty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep grid must be strictly increasing")

    def points(self, params: RotorParams, baths: BathPair, drive: DriveSpec):
        """Yield (axis_value, params, baths, drive) for each grid point."""
        for v in self.grid:
            if self.axis == "theta":
                yield v, params, replace(baths, T1=self.tau1 * v, T2=self.tau2 * v), drive
            elif self.axis == "alpha":
                yield v, replace(params, alpha=v), baths, drive
            elif self.axis == "omega0":
                yield v, params, baths, replace(drive, omega0=v)
            else:
                yield v, params, replace(baths, T2=v), drive


@dataclass(frozen=True)
class RunConfig:
    params: RotorParams
    baths: BathPair
    drive: DriveSpec
    sweep: SweepSpec | None = None
    sim: SimConfig | None = None
    rigid_body: bool = False


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """Best-effort line number of a section or key, for diagnostics."""
    in_section = False
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith("["):
            if key is None and stripped == f"[{section}]":
                return i
            in_section = stripped == f"[{section}]"
        elif key is not None and in_section and stripped.split("=")[0].strip() == key:
            return i
    return 0


def _get_float(sec, key, default=None):
    raw = sec.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r} in [{sec.name}]")
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{sec.name}]: not a number: {raw!r}") from exc


def _get_int(sec, key, default=None):
    raw = sec.get(key)
    if raw is None:
        if default is None:
            raise ConfigError(f"missing required key {key!r} in [{sec.name}]")
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r} in [{sec.name}]: not an integer: {raw!r}") from exc


def parse_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    return parse_config_text(text, source=str(path))


def parse_config_text(text: str, source: str = "<string>") -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str  # keys are case sensitive (T1 vs t1)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from exc

    for section in cp.sections():
        if section not in _KNOWN:
            raise ConfigError(
                f"{source}:{_line_of(text, section)}: unknown section [{section}]"
            )
        for key in cp[section]:
            if key not in _KNOWN[section]:
                raise ConfigError(
                    f"{source}:{_line_of(text, section, key)}: "
                    f"unknown key {key!r} in [{section}]"
                )

    rotor = cp["rotor"] if cp.has_section("rotor") else cp["DEFAULT"]
    try:
        params = RotorParams(
            u1=_get_float(rotor, "u1", 1.0),
            u2=_get_float(rotor, "u2", 1.0),
            alpha=_get_float(rotor, "alpha", 0.0),
            m=_get_float(rotor, "m", 1.0),
            eta=_get_float(rotor, "eta", 1.0),
            hbar=_get_float(rotor, "hbar", 1.0),
        )
    except ValueError as exc:
        raise ConfigError(f"{source}: [rotor]: {exc}") from exc

    model = NoiseModel.QUANTUM_COLORED
    t1 = t2 = 1.0
    if cp.has_section("baths"):
        sec = cp["baths"]
        t1 = _get_float(sec, "T1", 1.0)
        t2 = _get_float(sec, "T2", 1.0)
        raw = sec.get("model", NoiseModel.QUANTUM_COLORED.value)
        try:
            model = NoiseModel(raw)
        except ValueError as exc:
            raise ConfigError(
                f"{source}: [baths] model must be one of "
                f"{[m.value for m in NoiseModel]}, got {raw!r}"
            ) from exc
    try:
        baths = BathPair(T1=t1, T2=t2, model=model)
    except ValueError as exc:
        raise ConfigError(f"{source}: [baths]: {exc}") from exc

    drive = DriveSpec()
    if cp.has_section("drive"):
        sec = cp["drive"]
        try:
            drive = DriveSpec(D=_get_float(sec, "D", 0.0),
                              omega0=_get_float(sec, "omega0", 0.0))
        except ValueError as exc:
            raise ConfigError(f"{source}: [drive]: {exc}") from exc

    sweep = None
    if cp.has_section("sweep"):
        sec = cp["sweep"]
        axis = sec.get("axis")
        if axis is None:
            raise ConfigError(f"{source}: [sweep] requires an axis")
        raw_grid = sec.get("grid", "").replace(",", " ").split()
        try:
            grid = tuple(float(v) for v in raw_grid)
        except ValueError as exc:
            raise ConfigError(f"{source}: [sweep] grid: {exc}") from exc
        sweep = SweepSpec(
            axis=axis, grid=grid,
            tau1=_get_float(sec, "tau1", baths.T1),
            tau2=_get_float(sec, "tau2", baths.T2),
        )

    sim = None
    rigid = False
    if cp.has_section("sim"):
        sec = cp["sim"]
        try:
            sim = SimConfig(
                dt=_get_float(sec, "dt", 1e-3),
                n_steps=_get_int(sec, "n_steps", 2**18),
                n_traj=_get_int(sec, "n_traj", 1000),
                burn_in_fraction=_get_float(sec, "burn_in_fraction", 0.1),
                master_seed=_get_int(sec, "master_seed", 0),
            )
        except ValueError as exc:
            raise ConfigError(f"{source}: [sim]: {exc}") from exc
        rigid = sec.get("rigid_body", "false").lower() in ("1", "true", "yes")

    return RunConfig(params=params, baths=baths, drive=drive, sweep=sweep,
                     sim=sim, rigid_body=rigid)


def _fmt(value: float) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if value == math.floor(value) and abs(value) < 1e16:
        return "%.1f" % value
    return "%.17g" % value


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(parse(x))) == parse(x)."""
    lines = []
    p = cfg.params
    lines += ["[rotor]"]
    for key, val in (("m", p.m), ("eta", p.eta), ("hbar", p.hbar),
                     ("u1", p.u1), ("u2", p.u2), ("alpha", p.alpha)):
        lines.append(f"{key} = {_fmt(val)}")
    lines += ["", "[baths]",
              f"T1 = {_fmt(cfg.baths.T1)}", f"T2 = {_fmt(cfg.baths.T2)}",
              f"model = {cfg.baths.model.value}"]
    lines += ["", "[drive]", f"D = {_fmt(cfg.drive.D)}",
              f"omega0 = {_fmt(cfg.drive.omega0)}"]
    if cfg.sweep is not None:
        s = cfg.sweep
        lines += ["", "[sweep]", f"axis = {s.axis}",
                  "grid = " + " ".join(_fmt(v) for v in s.grid),
                  f"tau1 = {_fmt(s.tau1)}", f"tau2 = {_fmt(s.tau2)}"]
    if cfg.sim is not None:
        s = cfg.sim
        lines += ["", "[sim]", f"dt = {_fmt(s.dt)}",
                  f"n_steps = {s.n_steps}", f"n_traj = {s.n_traj}",
                  f"burn_in_fraction = {_fmt(s.burn_in_fraction)}",
                  f"master_seed = {s.master_seed}",
                  f"rigid_body = {_fmt(cfg.rigid_body)}"]
    return "\n".join(lines) + "\n"
