"""Run configuration: INI-style files with one section per subcommand.

Example::

    [free-evolve]
    sigma_p = 0.3
    p0 = 1, 0, 0

Keys are strict: an unknown key is a :class:`ParseError` that names the
closest known key. Command-line flags override file values.
"""
from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ProperTimeError, ValidationError

__all__ = ["SCHEMAS", "RunConfig", "parse_config", "read_config_file"]


def _floats(n=None):
    def parse(text):
        if isinstance(text, (list, tuple)):
            vals = [float(x) for x in text]
        else:
            vals = [float(x) for x in str(text).replace(",", " ").split()]
        if n is not None and len(vals) != n:
            raise ValueError(f"expected {n} numbers, got {len(vals)}")
        return tuple(vals)
    return parse


def _ints(n):
    def parse(text):
        vals = _floats(n)(text)
        if any(v != int(v) for v in vals):
            raise ValueError("expected integers")
        return tuple(int(v) for v in vals)
    return parse


def _int(text):
    v = float(text)
    if v != int(v):
        raise ValueError("expected an integer")
    return int(v)


def _bool(text):
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected a boolean")


def _str(text):
    return str(text).strip()


# key -> (parser, default)
SCHEMAS = {
    "derive-d": {},
    "free-evolve": {
        "m": (float, 1.0),
        "dims": (_ints(3), (256, 1, 1)),
        "pmax": (_floats(3), (8.0, 0.0, 0.0)),
        "center": (_floats(3), (0.0, 0.0, 0.0)),
        "p0": (_floats(3), (1.0, 0.0, 0.0)),
        "sigma_p": (float, 0.5),
        "spin": (_floats(2), (1.0, 0.0)),
        "branch": (_str, "positive"),
        "theta": (float, float(np.pi / 4)),
        "t0": (float, 0.0),
        "t1": (float, 20.0),
        "nsamples": (_int, 1025),
        "out": (_str, "free_evolve.csv"),
        "spectrum": (_str, ""),
    },
    "fw-check": {
        "dims": (_ints(2), (24, 24)),
        "m": (float, 1.0),
        "e": (float, 1.0),
        "b_coeff": (float, 0.1),
        "kappa": (float, 0.5),
        "width": (float, 1.6),
        "spin": (_floats(2), (1.0, 0.0)),
        "vscales": (_floats(), (0.4, 0.2, 0.1, 0.05)),
        "out": (_str, "fw_check.csv"),
    },
    "magnetar": {
        "bmin": (float, 1.0),
        "bmax": (float, 1e11),
        "steps": (_int, 12),
        "log": (_bool, True),
        "out": (_str, "magnetar.csv"),
    },
    "selftest": {
        "seed": (_int, 20240917),
    },
}


@dataclass
class RunConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, key):
        try:
            return self.__dict__["values"][key]
        except KeyError:
            raise AttributeError(key) from None


def _unknown_key(key, command, where):
    known = list(SCHEMAS[command])
    close = difflib.get_close_matches(key, known, n=1)
    hint = f"; did you mean {close[0]!r}?" if close else ""
    return ParseError(f"{where}: unknown key {key!r} for {command}{hint}")


def read_config_file(path) -> dict:
    """Parse ``[section]`` / ``key = value`` text into ``{section: {key: (value, lineno)}}``."""
    path = Path(path)
    if not path.is_file():
        raise ParseError(f"config file {path} does not exist")
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in SCHEMAS:
                raise ParseError(f"{path}:{lineno}: unknown section [{current}]")
            sections.setdefault(current, {})
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        if current is None:
            raise ParseError(f"{path}:{lineno}: key outside of any [section]")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in sections[current]:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        sections[current][key] = (value, f"{path}:{lineno}")
    return sections


def parse_config(command: str, path=None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, file section and flag overrides, then validate."""
    if command not in SCHEMAS:
        raise ParseError(f"unknown subcommand {command!r}")
    schema = SCHEMAS[command]
    raw: dict = {}
    if path:
        section = read_config_file(path).get(command, {})
        for key, (value, where) in section.items():
            if key not in schema:
                raise _unknown_key(key, command, where)
            raw[key] = (value, where)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in schema:
            raise _unknown_key(key, command, "flag")
        raw[key] = (value, f"flag --{key.replace('_', '-')}")
    values = {}
    for key, (parser, default) in schema.items():
        if key in raw:
            value, where = raw[key]
            try:
                values[key] = parser(value)
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{where}: bad value for {key!r}: {exc}") from None
        else:
            values[key] = default
    cfg = RunConfig(command, values)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    """Check every numeric field against the owning module's preconditions."""
    v = cfg.values
    if cfg.command == "free-evolve":
        from .wavepacket import MomentumGrid, WavepacketSpec

        if not v["sigma_p"] > 0:
            raise ValidationError("sigma_p > 0")
        if not v["m"] > 0:
            raise ValidationError("m > 0")
        if v["nsamples"] < 3 or v["nsamples"] % 2 == 0:
            raise ValidationError("nsamples must be odd and >= 3")
        if v["t1"] < v["t0"]:
            raise ValidationError("t1 >= t0")
        try:
            spin = np.asarray(v["spin"], dtype=float)
            v["spin"] = tuple((spin / np.linalg.norm(spin)).tolist())
            MomentumGrid(v["dims"], v["pmax"], v["m"], v["center"])
            WavepacketSpec(v["p0"], v["sigma_p"], v["spin"], v["branch"], v["theta"])
        except ProperTimeError:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(str(exc)) from None
    elif cfg.command == "fw-check":
        if min(v["dims"]) < 8:
            raise ValidationError("dims >= 8 per axis")
        for key in ("m", "kappa", "width"):
            if not v[key] > 0:
                raise ValidationError(f"{key} > 0")
        s = v["vscales"]
        if len(s) < 2 or any(x <= 0 for x in s) or any(b >= a for a, b in zip(s, s[1:])):
            raise ValidationError("vscales must be positive, strictly decreasing, at least two")
        spin = np.asarray(v["spin"], dtype=float)
        if not np.linalg.norm(spin) > 0:
            raise ValidationError("spin must be nonzero")
        v["spin"] = tuple((spin / np.linalg.norm(spin)).tolist())
    elif cfg.command == "magnetar":
        if not v["bmin"] > 0:
            raise ValidationError("bmin > 0")
        if not v["bmax"] >= v["bmin"]:
            raise ValidationError("bmax >= bmin")
        if v["steps"] < 1:
            raise ValidationError("steps >= 1")
