"""INI run configuration: parsing, unit resolution, validation and builders.

Frequencies carry their unit in the key suffix:

``_hz``       cyclic frequency, multiplied by 2*pi on load
``_rad_s``    angular frequency, used as is
``_gamma_e``  multiple of the scheme's excited-state decay ``gamma_e``
``_omega_m``  multiple of the mechanical frequency

Every file must declare ``schema = 1`` in ``[run]``.  Unknown sections or
keys, and a quantity given in two units at once, are errors.
"""

from __future__ import annotations

import configparser
import copy
import hashlib
import json
import math
import re
import warnings
from dataclasses import dataclass, field

import numpy as np

from .core import (
    C_LIGHT,
    DEFAULT_WAVELENGTH,
    TWO_PI,
    MechanicalParams,
    OpticalCavityParams,
    validate_cavity,
)
from .eit import DEFAULT_GAMMA_GM, EitMediumParams
from .errors import ConfigValidationError, ParseError, ValidationError
from .rir import RirMediumParams, thermal_distribution

SCHEMA_VERSION = 1

SCHEMES = ("eit_feedback", "rir_cascade", "bare")
OBSERVABLES = ("chi_eit", "chi_rir", "field_eit", "field_rir", "cooling", "xi", "max_damping")
FREQ_UNITS = ("hz", "rad_s", "gamma_e", "omega_m")

# kind: "freq" takes a unit suffix; others are literal key names.
_FIELDS = {
    "run": {
        "schema": "int", "scheme": "str", "observable": "str", "label": "str",
        "wavelength_m": "real",
    },
    "mech": {
        "omega_m": "freq", "quality_factor": "real", "g0": "freq",
        "bath_temperature_k": "real", "effective_mass_kg": "real",
    },
    "cavity_m": {
        "kappa": "freq", "kappa_in": "freq", "input_power_w": "real", "drive": "real",
    },
    "cavity_a": {
        "kappa": "freq", "kappa_in": "freq",
    },
    "eit": {
        "n_atoms": "real", "n_meta": "real", "rabi_control": "freq", "rabi_single_atom": "freq",
        "gamma_e": "freq", "delta_a": "freq", "gamma_gm": "freq", "delta": "freq",
        "general": "bool",
    },
    "rir": {
        "n_atoms": "real", "rabi_control": "freq", "rabi_single_atom": "freq", "delta_a": "freq",
        "omega_r": "freq", "gamma_coh": "freq", "gamma_pop": "freq", "temperature_k": "real",
        "gamma_e": "freq", "medium_length_m": "real", "kappa_a": "freq", "p_max": "real",
        "steps_per_recoil": "int", "delta": "freq",
    },
    "operating": {
        "delta_cm_tilde": "freq", "ca_offset": "freq", "two_photon_offset": "freq",
        "track_cavity": "bool", "coupling": "freq", "eta_c": "real", "baseline": "str",
        "max_photons": "real", "span": "freq", "n_grid": "int",
    },
    "sweep": {
        "axis1": "str", "axis1_start": "real", "axis1_stop": "real", "axis1_n": "int",
        "axis1_scale": "str",
        "axis2": "str", "axis2_start": "real", "axis2_stop": "real", "axis2_n": "int",
        "axis2_scale": "str",
    },
}

_REQUIRED = {
    "run": ("schema", "scheme"),
    "mech": ("omega_m", "quality_factor", "g0", "bath_temperature_k"),
    "cavity_m": ("kappa",),
    "cavity_a": ("kappa",),
    "eit": ("n_atoms", "rabi_control", "rabi_single_atom", "gamma_e", "delta_a"),
    "rir": ("n_atoms", "rabi_control", "rabi_single_atom", "delta_a", "omega_r", "gamma_coh",
            "temperature_k", "gamma_e"),
}

_DEFAULT_OBSERVABLE = {"eit_feedback": "cooling", "rir_cascade": "cooling", "bare": "cooling"}

_BLOCKS = {
    "chi_eit": ("eit",),
    "chi_rir": ("rir",),
    "field_eit": ("eit", "cavity_a"),
    "field_rir": ("rir",),
}
_SCHEME_BLOCKS = {
    "eit_feedback": ("mech", "cavity_m", "cavity_a", "eit"),
    "rir_cascade": ("mech", "cavity_m", "rir"),
    "bare": ("mech", "cavity_m"),
}


# keys that name the same physical quantity in different forms
_ALIASES = {("rir", "kappa_a"): "medium_length_m"}


def _quantity(section, key):
    name = split_key(section, key)[0]
    return _ALIASES.get((section, name), name)


def split_key(section, key):
    """``(field, unit)`` for a config key; ``unit`` is ``None`` for literal keys."""
    fields = _FIELDS.get(section)
    if fields is None:
        raise ConfigValidationError(section, "unknown section")
    if key in fields and fields[key] != "freq":
        return key, None
    for unit in FREQ_UNITS:
        suffix = "_" + unit
        if key.endswith(suffix):
            name = key[: -len(suffix)]
            if fields.get(name) == "freq":
                return name, unit
    raise ConfigValidationError(f"{section}.{key}", "unknown key")


@dataclass
class SweepAxis:
    path: str
    start: float
    stop: float
    n_points: int
    scale: str = "linear"

    def values(self):
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.n_points)
        return np.linspace(self.start, self.stop, self.n_points)


@dataclass
class SweepSpec:
    axis1: SweepAxis
    axis2: SweepAxis | None = None


@dataclass
class RunConfig:
    """Parsed configuration.

    ``raw`` keeps the key strings exactly as written (after overrides) so a
    sweep can rewrite one key and re-resolve; ``values`` holds the resolved
    quantities in SI / rad/s keyed by field name.
    """

    raw: dict
    values: dict = field(default_factory=dict)
    source: str | None = None

    @property
    def scheme(self):
        return self.values["run"]["scheme"]

    @property
    def observable(self):
        return self.values["run"]["observable"]

    def with_overrides(self, overrides):
        """New config with ``{"section.key": value}`` applied and re-resolved."""
        raw = copy.deepcopy(self.raw)
        for path, value in overrides.items():
            section, key = _split_path(path)
            sect = raw.setdefault(section, {})
            name = _quantity(section, key)
            for other in list(sect):
                if other != key and _quantity(section, other) == name:
                    del sect[other]
            sect[key] = _to_text(value)
        return resolve(raw, source=self.source)

    @property
    def sweep(self):
        return self.values.get("sweep_spec")

    def param_hash(self):
        payload = json.dumps(self.hz_view(), sort_keys=True)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def hz_view(self):
        """Resolved parameters with angular quantities expressed in Hz."""
        out = {}
        for section, vals in self.values.items():
            if section == "sweep_spec":
                continue
            kinds = _FIELDS.get(section, {})
            for name, v in vals.items():
                if kinds.get(name) == "freq":
                    out[f"{section}.{name}_hz"] = _fmt(v / TWO_PI)
                else:
                    out[f"{section}.{name}"] = _fmt(v)
        return out

    # --- builders ------------------------------------------------------------------

    def mechanical(self):
        m = self.values["mech"]
        return MechanicalParams(
            omega_m=m["omega_m"], quality_factor=m["quality_factor"], g0=m["g0"],
            bath_temperature=m["bath_temperature_k"], effective_mass=m.get("effective_mass_kg"))

    def cavity_m(self):
        c = self.values["cavity_m"]
        kin = c.get("kappa_in", 0.5 * c["kappa"])
        wl = self.values["run"]["wavelength_m"]
        if "drive" in c:
            cav = OpticalCavityParams(c["kappa"], kin, 0.0, c["drive"], c.get("input_power_w", 0.0), wl)
            return validate_cavity(cav)
        return OpticalCavityParams.from_power(c["kappa"], c.get("input_power_w", 0.0), kin, 0.0, wl)

    def cavity_a(self, drive=1.0):
        c = self.values["cavity_a"]
        kin = c.get("kappa_in", 0.5 * c["kappa"])
        return validate_cavity(OpticalCavityParams(c["kappa"], kin, 0.0, drive))

    def eit_medium(self):
        e = self.values["eit"]
        return EitMediumParams(
            n_atoms=e["n_atoms"], rabi_control=e["rabi_control"],
            rabi_single_atom=e["rabi_single_atom"], gamma_e=e["gamma_e"], delta_a=e["delta_a"],
            gamma_gm=e.get("gamma_gm", DEFAULT_GAMMA_GM), n_meta=e.get("n_meta", 0.0))

    def rir_medium(self):
        r = self.values["rir"]
        return RirMediumParams(
            n_atoms=r["n_atoms"], rabi_control=r["rabi_control"],
            rabi_single_atom=r["rabi_single_atom"], delta_a=r["delta_a"], omega_r=r["omega_r"],
            gamma_coh=r["gamma_coh"], temperature=r["temperature_k"], gamma_e=r["gamma_e"],
            medium_length=r["medium_length_m"], gamma_pop=r.get("gamma_pop"))

    def rir_grid(self, medium=None):
        medium = medium or self.rir_medium()
        r = self.values["rir"]
        return thermal_distribution(medium.temperature, medium.omega_r, p_max=r.get("p_max"),
                                    steps_per_recoil=r.get("steps_per_recoil"),
                                    gamma_coh=medium.gamma_coh)

    def operating(self):
        o = dict(self.values.get("operating", {}))
        wm = self.values["mech"]["omega_m"] if "mech" in self.values else None
        o.setdefault("delta_cm_tilde", -wm if wm else 0.0)
        o.setdefault("ca_offset", 0.0)
        o.setdefault("two_photon_offset", 0.0)
        o.setdefault("track_cavity", True)
        o.setdefault("eta_c", 0.0)
        o.setdefault("baseline", "same_eta_c")
        o.setdefault("max_photons", None)
        o.setdefault("span", 3.0 * wm if wm else 0.0)
        o.setdefault("n_grid", 2001)
        o.setdefault("coupling", None)
        return o


def _to_text(value):
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, int, np.integer)):
        return str(value)
    return repr(float(value))


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _split_path(path):
    if "." not in path:
        raise ConfigValidationError(path, "expected section.key")
    section, key = path.split(".", 1)
    return section, key


def _line_index(text):
    """Map ``(section, key) -> (line, column_of_value)`` by a light scan."""
    index = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", s)
        if m:
            section = m.group(1).strip()
            continue
        m = re.match(r"\s*([^=:\s]+)\s*[=:]\s*", line)
        if m and section is not None:
            index[(section, m.group(1).strip().lower())] = (lineno, m.end() + 1)
    return index


def parse_text(text, source=None):
    """Parse INI text into the raw ``{section: {key: str}}`` mapping."""
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source or "<config>")
    except configparser.MissingSectionHeaderError as exc:
        raise ParseError("key outside any section", exc.lineno, 1) from None
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"duplicate key {exc.option!r}", exc.lineno, 1) from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"duplicate section {exc.section!r}", exc.lineno, 1) from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0] if exc.errors else None
        raise ParseError("malformed line", lineno, 1) from None
    raw = {s: dict(parser.items(s)) for s in parser.sections()}
    return raw, _line_index(text)


def load_config(path, overrides=None):
    """Read, resolve and validate a config file; ``overrides`` maps dotted keys to values."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigValidationError(str(path), f"cannot read: {exc.strerror}") from None
    return loads(text, source=str(path), overrides=overrides)


def loads(text, source=None, overrides=None):
    raw, index = parse_text(text, source)
    cfg = resolve(raw, source=source, index=index)
    if overrides:
        cfg = cfg.with_overrides(overrides)
    return cfg


def _convert(kind, text, path, where):
    try:
        if kind == "real":
            v = float(text)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == "int":
            v = float(text)
            if v != int(v):
                raise ValueError
            return int(v)
        if kind == "bool":
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        return text.strip()
    except ValueError:
        line, col = where if where else (None, None)
        raise ParseError(f"{path}: cannot read {text!r} as {kind}", line, col) from None


def resolve(raw, source=None, index=None):
    """Turn raw strings into validated values (rad/s for frequencies)."""
    index = index or {}
    parsed = {}
    units = {}
    for section, items in raw.items():
        if section not in _FIELDS:
            raise ConfigValidationError(section, "unknown section")
        parsed[section] = {}
        for key, text in items.items():
            path = f"{section}.{key}"
            name, unit = split_key(section, key)
            if name in parsed[section]:
                raise ConfigValidationError(path, f"{section}.{name} given more than once")
            kind = _FIELDS[section][name]
            value = _convert("real" if kind == "freq" else kind, text, path,
                             index.get((section, key)))
            parsed[section][name] = value
            if unit:
                units[(section, name)] = unit

    run = parsed.get("run")
    if run is None:
        raise ConfigValidationError("run", "missing section")
    if run.get("schema") != SCHEMA_VERSION:
        raise ConfigValidationError("run.schema", f"must be {SCHEMA_VERSION}")
    if run.get("scheme") not in SCHEMES:
        raise ConfigValidationError("run.scheme", f"must be one of {', '.join(SCHEMES)}")
    run.setdefault("observable", _DEFAULT_OBSERVABLE[run["scheme"]])
    if run["observable"] not in OBSERVABLES:
        raise ConfigValidationError("run.observable", f"must be one of {', '.join(OBSERVABLES)}")
    run.setdefault("wavelength_m", DEFAULT_WAVELENGTH)
    if not run["wavelength_m"] > 0:
        raise ConfigValidationError("run.wavelength_m", "must be > 0")

    needed = _BLOCKS.get(run["observable"], _SCHEME_BLOCKS[run["scheme"]])
    for block in needed:
        if block not in parsed:
            raise ConfigValidationError(block, f"section required for {run['scheme']}/{run['observable']}")
    for block, req in _REQUIRED.items():
        if block in parsed:
            for name in req:
                if name not in parsed[block]:
                    raise ConfigValidationError(f"{block}.{name}", "required key missing")

    # unit scaling, in dependency order: plain Hz first, then gamma_e / omega_m multiples
    def scale(section, name, value):
        unit = units.get((section, name))
        if unit is None or unit == "rad_s":
            return value
        if unit == "hz":
            return TWO_PI * value
        if unit == "gamma_e":
            ref = _gamma_e_for(section, parsed, units)
            if ref is None:
                raise ConfigValidationError(f"{section}.{name}_gamma_e", "no gamma_e to refer to")
            return value * ref
        ref = parsed.get("mech", {}).get("omega_m")
        if ref is None or units.get(("mech", "omega_m")) == "omega_m":
            raise ConfigValidationError(f"{section}.{name}_omega_m", "no mech.omega_m to refer to")
        return value * scale("mech", "omega_m", ref)

    values = {}
    for section, vals in parsed.items():
        values[section] = {}
        for name, v in vals.items():
            if _FIELDS[section][name] == "freq":
                values[section][name] = scale(section, name, v)
            else:
                values[section][name] = v

    if "rir" in values:
        r = values["rir"]
        if "medium_length_m" in r and "kappa_a" in r:
            raise ConfigValidationError("rir.kappa_a", "give medium_length_m or kappa_a, not both")
        if "kappa_a" in r:
            r["medium_length_m"] = C_LIGHT / r.pop("kappa_a")
        if "medium_length_m" not in r:
            raise ConfigValidationError("rir.medium_length_m", "required key missing")
    if "sweep" in values:
        values["sweep_spec"] = _sweep_spec(values["sweep"], raw)

    cfg = RunConfig(raw=copy.deepcopy(raw), values=values, source=source)
    _validate(cfg)
    return cfg


def _gamma_e_for(section, parsed, units):
    for block in ((section,) if section in ("eit", "rir") else ()) + ("eit", "rir"):
        g = parsed.get(block, {}).get("gamma_e")
        if g is not None:
            unit = units.get((block, "gamma_e"))
            if unit == "gamma_e":
                return None
            return TWO_PI * g if unit == "hz" else g
    return None


def _sweep_spec(s, raw):
    if "axis1" not in s:
        raise ConfigValidationError("sweep.axis1", "required key missing")
    axes = []
    for k in ("axis1", "axis2"):
        if k not in s:
            continue
        path = s[k]
        section, key = _split_path(path)
        if section in ("run", "sweep"):
            raise ConfigValidationError(f"sweep.{k}", f"cannot sweep {path}")
        try:
            split_key(section, key)
        except ConfigValidationError:
            raise ConfigValidationError(f"sweep.{k}", f"{path} does not name a config key") from None
        for part in ("start", "stop", "n"):
            if f"{k}_{part}" not in s:
                raise ConfigValidationError(f"sweep.{k}_{part}", "required key missing")
        axis = SweepAxis(path, s[f"{k}_start"], s[f"{k}_stop"], s[f"{k}_n"], s.get(f"{k}_scale", "linear"))
        if axis.n_points < 1:
            raise ConfigValidationError(f"sweep.{k}_n", "must be >= 1")
        if axis.n_points >= 2 and axis.start == axis.stop:
            raise ConfigValidationError(f"sweep.{k}_stop", "must differ from start")
        if axis.scale not in ("linear", "log"):
            raise ConfigValidationError(f"sweep.{k}_scale", "must be linear or log")
        if axis.scale == "log" and not (axis.start > 0 and axis.stop > 0):
            raise ConfigValidationError(f"sweep.{k}_start", "log axes need positive bounds")
        axes.append(axis)
    return SweepSpec(*axes)


def _validate(cfg):
    """Build every parameter block the run needs so physical invariants are checked."""
    needed = _BLOCKS.get(cfg.observable, _SCHEME_BLOCKS[cfg.scheme])
    builders = {
        "mech": cfg.mechanical, "cavity_m": cfg.cavity_m, "cavity_a": cfg.cavity_a,
        "eit": cfg.eit_medium, "rir": cfg.rir_medium,
    }
    for block in needed:
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                builders[block]()
        except ValidationError as exc:
            raise ConfigValidationError(f"{block}.{exc.field}", str(exc).split(": ", 1)[-1]) from None
    op = cfg.values.get("operating", {})
    if op.get("baseline", "same_eta_c") not in ("same_eta_c", "filtered"):
        raise ConfigValidationError("operating.baseline", "must be same_eta_c or filtered")
    if "n_grid" in op and op["n_grid"] < 3:
        raise ConfigValidationError("operating.n_grid", "must be >= 3")


def dump_text(raw):
    """Serialize a raw mapping back to INI text (deterministic key order)."""
    lines = []
    for section in _FIELDS:
        if section not in raw:
            continue
        lines.append(f"[{section}]")
        for key, value in raw[section].items():
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
