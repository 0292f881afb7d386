"""Run configuration: a YAML document whose dimensional entries carry units.

Dimensional values are strings such as ``"528 MHz"``, ``"-155 uT"`` or
``"2.095 MHz/T"``; bare numbers are only accepted for dimensionless
entries (g values, angles in degrees, exponents, counts).
"""

from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .eseem import HostNucleus
from .spin import AXES, GAMMA_Y89, InteractionTensor, SpinSystem


class ConfigError(ValueError):
    """Missing, malformed or inconsistent configuration."""


_FREQ = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9}
_FIELD = {"T": 1.0, "mT": 1e-3, "uT": 1e-6, "µT": 1e-6, "μT": 1e-6, "nT": 1e-9}
UNITS = {
    "frequency": _FREQ,
    "field": _FIELD,
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "µs": 1e-6, "μs": 1e-6, "ns": 1e-9},
    "length": {"m": 1.0, "nm": 1e-9, "pm": 1e-12, "angstrom": 1e-10, "Å": 1e-10},
    "gyromagnetic": {f"{f}/{b}": fv / bv for f, fv in _FREQ.items() for b, bv in _FIELD.items()},
}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([^\s\d.+-]\S*)\s*$")


def parse_quantity(value, kind, where="value"):
    """Convert a unit-suffixed string to SI; raises ConfigError naming ``where``."""
    table = UNITS[kind]
    if isinstance(value, bool) or not isinstance(value, str):
        raise ConfigError(f"{where}: expected a {kind} with an explicit unit "
                          f"(one of {', '.join(sorted(table))}), got {value!r}")
    m = _QUANTITY.match(value)
    if not m:
        raise ConfigError(f"{where}: cannot parse {value!r} as '<number> <unit>'")
    number, unit = m.groups()
    if unit not in table:
        raise ConfigError(f"{where}: unit {unit!r} is not a {kind} unit "
                          f"(accepted: {', '.join(sorted(table))})")
    out = float(number) * table[unit]
    if not math.isfinite(out):
        raise ConfigError(f"{where}: value is not finite")
    return out


def parse_number(value, where="value"):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a plain number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{where}: value is not finite")
    return float(value)


def parse_vector(values, kind, where, length=3):
    if not isinstance(values, (list, tuple)) or len(values) != length:
        raise ConfigError(f"{where}: expected a list of {length} entries")
    if kind is None:
        return np.array([parse_number(v, f"{where}[{i}]") for i, v in enumerate(values)])
    return np.array([parse_quantity(v, kind, f"{where}[{i}]") for i, v in enumerate(values)])


def _section(mapping, key, where):
    if not isinstance(mapping, dict) or key not in mapping:
        raise ConfigError(f"missing section '{where}{key}'")
    return mapping[key]


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    steps: int

    def values(self):
        return np.linspace(self.start, self.stop, self.steps)

    def spec(self):
        return {"start": self.start, "stop": self.stop, "steps": self.steps}


def parse_grid(block, kind, where, min_steps=1):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping with start, stop and steps")
    start = parse_quantity(_section(block, "start", where + "."), kind, where + ".start")
    stop = parse_quantity(_section(block, "stop", where + "."), kind, where + ".stop")
    steps = _section(block, "steps", where + ".")
    if isinstance(steps, bool) or not isinstance(steps, int):
        raise ConfigError(f"{where}.steps: expected an integer")
    if steps < min_steps:
        raise ConfigError(f"{where}: empty sweep (steps = {steps}, need at least {min_steps})")
    if steps > 1 and start == stop:
        raise ConfigError(f"{where}: empty sweep range (start equals stop)")
    return Grid(start, stop, steps)


def _tensor(block, kind, where):
    if not isinstance(block, dict):
        raise ConfigError(f"{where}: expected a mapping")
    pv = parse_vector(_section(block, "principal_values", where + "."), kind,
                      where + ".principal_values")
    try:
        if "orientation" in block:
            rot = np.asarray(block["orientation"], float)
            return InteractionTensor(pv, rot)
        angles = block.get("euler_deg", [0.0, 0.0, 0.0])
        seq = block.get("euler_seq", "ZYZ")
        if not isinstance(angles, list) or len(angles) != len(seq):
            raise ConfigError(f"{where}: euler_deg needs one angle per axis of euler_seq {seq!r}")
        angles = [parse_number(a, f"{where}.euler_deg") for a in angles]
        return InteractionTensor.from_euler(pv, angles, seq)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{where}: {exc}") from None


class RunConfig:
    """Parsed configuration. Blocks are validated when a command asks for them."""

    def __init__(self, data, source="<memory>"):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a mapping at the top level")
        self.data = data
        self.source = str(source)

    @classmethod
    def load(cls, path):
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        return cls.from_text(text, path)

    @classmethod
    def from_text(cls, text, source="<memory>"):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"{source}: invalid YAML: {exc}") from None
        return cls(data, source)

    @classmethod
    def default(cls):
        ref = resources.files("clockspin").joinpath("default_config.yaml")
        return cls.from_text(ref.read_text(encoding="utf-8"), "default_config.yaml")

    @property
    def digest(self):
        canon = json.dumps(self.data, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()

    def spin_system(self):
        block = _section(self.data, "spin_system", "")
        ground = _section(block, "ground", "spin_system.")
        kw = {
            "A_ground": _tensor(_section(ground, "A", "spin_system.ground."), "frequency", "spin_system.ground.A"),
            "g_ground": _tensor(_section(ground, "g", "spin_system.ground."), None, "spin_system.ground.g"),
        }
        if "excited" in block:
            exc = block["excited"]
            kw["A_excited"] = _tensor(_section(exc, "A", "spin_system.excited."), "frequency",
                                      "spin_system.excited.A")
            kw["g_excited"] = _tensor(_section(exc, "g", "spin_system.excited."), None,
                                      "spin_system.excited.g")
        if "gamma_nuclear_host" in block:
            kw["gamma_nuclear_host"] = parse_quantity(block["gamma_nuclear_host"], "gyromagnetic",
                                                      "spin_system.gamma_nuclear_host")
        try:
            return SpinSystem(**kw)
        except ValueError as exc:
            raise ConfigError(f"spin_system: {exc}") from None

    def transition(self):
        block = self.data.get("transition", {})
        level = block.get("level", "ground")
        pair = block.get("pair", [2, 4])
        if level not in ("ground", "excited"):
            raise ConfigError(f"transition.level: expected ground or excited, got {level!r}")
        if (not isinstance(pair, list) or len(pair) != 2 or not all(isinstance(p, int) for p in pair)
                or not 1 <= pair[0] < pair[1] <= 4):
            raise ConfigError("transition.pair: expected two level labels k < l in 1..4")
        return level, tuple(pair)

    def bias(self):
        if "bias" not in self.data:
            return np.zeros(3)
        return parse_vector(self.data["bias"], "field", "bias")

    def nuclei(self):
        block = _section(self.data, "nuclei", "")
        gamma = parse_quantity(block["gamma"], "gyromagnetic", "nuclei.gamma") if "gamma" in block else GAMMA_Y89
        shells = _section(block, "shells", "nuclei.")
        if not isinstance(shells, list):
            raise ConfigError("nuclei.shells: expected a list")
        out = []
        for i, s in enumerate(shells):
            where = f"nuclei.shells[{i}]"
            if not isinstance(s, dict):
                raise ConfigError(f"{where}: expected a mapping")
            try:
                if "distance" in s:
                    r = parse_quantity(s["distance"], "length", where + ".distance")
                    out.append(HostNucleus.spherical(r, parse_number(s.get("theta_deg", 0.0), where),
                                                     parse_number(s.get("phi_deg", 0.0), where), gamma))
                elif "position" in s:
                    out.append(HostNucleus(position=parse_vector(s["position"], "length", where + ".position"),
                                           gamma=gamma))
                elif "a" in s and "b" in s:
                    cpl = (parse_quantity(s["a"], "frequency", where + ".a"),
                           parse_quantity(s["b"], "frequency", where + ".b"))
                    out.append(HostNucleus(couplings=cpl, gamma=gamma))
                else:
                    raise ConfigError(f"{where}: give distance/theta_deg/phi_deg, position, or a and b")
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"{where}: {exc}") from None
        return tuple(out)

    def sweep(self, name):
        block = _section(_section(self.data, "sweeps", ""), name, "sweeps.")
        if not isinstance(block, dict):
            raise ConfigError(f"sweeps.{name}: expected a mapping")
        return block

    def model(self):
        block = self.data.get("model", {})
        where = "model."
        out = {
            "E0": parse_number(block.get("E0", 1.0), where + "E0"),
            "mims": parse_number(block.get("mims", 1.0), where + "mims"),
            "t2_zero": parse_quantity(block.get("t2_zero", "10.3 ms"), "time", where + "t2_zero"),
            "kappa": parse_quantity(block.get("kappa", "1.48 MHz/T"), "gyromagnetic", where + "kappa"),
            "b0": parse_quantity(block.get("b0", "0 T"), "field", where + "b0"),
        }
        if out["t2_zero"] <= 0 or out["kappa"] < 0 or out["mims"] <= 0:
            raise ConfigError("model: t2_zero and mims must be positive, kappa non-negative")
        return out

    def output(self):
        block = self.data.get("output", {})
        fmt = block.get("format", "both")
        if fmt not in ("csv", "json", "both"):
            raise ConfigError(f"output.format: expected csv, json or both, got {fmt!r}")
        return {"dir": str(block.get("dir", "out")), "format": fmt}


def axis_name(name, where):
    if name not in AXES:
        raise ConfigError(f"{where}: unknown axis {name!r}; expected one of {', '.join(AXES)}")
    return name
