"""Structured-text run configuration.

Grammar (documented in the README):

    # comment lines and trailing comments start with '#'
    [section]
    key = value

Two sections are recognized: [simulation] and [initial_data].  Keys may
appear at most once per section; duplicates are parse errors.  Unknown
sections or keys are validation errors, as are constraint violations
(power-of-two n, alpha >= 1, s > 1 + d/2, ...).  Values keep their textual
form until validation, which records every default it fills in.
"""

from __future__ import annotations

from .solver import InitialData, SimConfig


class ConfigError(Exception):
    """Configuration problem; ``line`` is set for parse errors."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_SIM_KEYS = {
    "dim": int,
    "n": int,
    "alpha": float,
    "s": float,
    "t_end": float,
    "dt": "dt",
    "dt_max": float,
    "cfl_safety": float,
    "snapshot_stride": int,
    "dealiasing": str,
}

_INIT_KEYS = {
    "recipe": str,
    "seed": int,
    "u_amplitude": float,
    "b_amplitude": float,
    "kband": int,
    "sigma_decay": float,
    "k": "ktuple",
    "b_k": "ktuple",
}


def parse_sections(text: str) -> dict:
    """Raw key=value sections; duplicate keys/sections are parse errors."""
    sections: dict = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            name = line[1:-1].strip()
            if not name:
                raise ConfigError("empty section name", lineno)
            if name in sections:
                raise ConfigError(f"duplicate section [{name}]", lineno)
            sections[name] = {}
            current = name
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        if current is None:
            raise ConfigError("key outside of any [section]", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in sections[current]:
            raise ConfigError(f"duplicate key {key!r} in [{current}]", lineno)
        sections[current][key] = value
    return sections


def _convert(key: str, value: str, kind):
    try:
        if kind is int:
            return int(value)
        if kind is float:
            return float(value)
        if kind is str:
            return value
        if kind == "dt":
            return "auto" if value == "auto" else float(value)
        if kind == "ktuple":
            return tuple(int(p) for p in value.split(","))
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r} ({exc})") from None
    raise AssertionError(kind)


def config_from_sections(sections: dict) -> SimConfig:
    unknown = set(sections) - {"simulation", "initial_data"}
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    sim_raw = dict(sections.get("simulation", {}))
    init_raw = dict(sections.get("initial_data", {}))

    sim_kwargs = {}
    for key, value in sim_raw.items():
        if key not in _SIM_KEYS:
            raise ConfigError(f"unknown key {key!r} in [simulation]")
        sim_kwargs[key] = _convert(key, value, _SIM_KEYS[key])
    init_kwargs = {}
    for key, value in init_raw.items():
        if key not in _INIT_KEYS:
            raise ConfigError(f"unknown key {key!r} in [initial_data]")
        init_kwargs[key] = _convert(key, value, _INIT_KEYS[key])

    try:
        initial = InitialData(**init_kwargs)
        return SimConfig(initial=initial, **sim_kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str, overrides: list[str] | None = None) -> SimConfig:
    """Parse and validate a config file; overrides are 'section.key=value'."""
    with open(path) as fh:
        sections = parse_sections(fh.read())
    for item in overrides or []:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        sections.setdefault(section.strip(), {})[key.strip()] = value.strip()
    return config_from_sections(sections)


def canonical_text(config: SimConfig) -> str:
    """Normalized config serialization: stable key order, 17-digit floats."""

    def fmt(v):
        if isinstance(v, float):
            return format(v, ".17g")
        if isinstance(v, tuple):
            return ",".join(str(x) for x in v)
        return str(v)

    lines = ["[simulation]"]
    for key in sorted(_SIM_KEYS):
        lines.append(f"{key} = {fmt(getattr(config, key))}")
    lines.append("")
    lines.append("[initial_data]")
    init = config.initial
    for key in sorted(_INIT_KEYS):
        val = getattr(init, key)
        if val is None:
            continue
        lines.append(f"{key} = {fmt(val)}")
    return "\n".join(lines) + "\n"
