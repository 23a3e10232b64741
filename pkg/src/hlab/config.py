"""Scenario configuration files (INI-style ``key = value`` with ``[section]`` headers)."""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from pathlib import Path

from .grid import TWO_PI, Grid
from .scenarios import SCENARIOS
from .thermo import EquationOfState


class ConfigError(ValueError):
    pass


@dataclass
class ScenarioConfig:
    scenario: str
    dims: int = 2
    n: int = 32
    length: float = TWO_PI
    stencil_order: int = 4
    eos_kind: str = "ideal"
    gamma: float = 5.0 / 3.0
    K: float = 1.0
    c_v: float = 1.0
    t_end: float = 0.5
    dt: float | None = None
    cfl: float = 0.4
    steps: int | None = None
    output_every: int = 1
    tracers: int = 0
    seed: int = 0
    magnetic: bool = True
    entropy: str = "aligned"
    checks: list[str] = field(default_factory=list)
    threshold: float = 3.5
    output_dir: Path = Path("hlab_out")

    def grid(self, n: int | None = None) -> Grid:
        return Grid.cube(self.dims, n or self.n, self.length, stencil_order=self.stencil_order)

    def eos(self) -> EquationOfState:
        return EquationOfState(self.eos_kind, self.gamma, self.K, self.c_v)


_FIELDS = {
    "scenario": {
        "name": ("scenario", str),
        "seed": ("seed", int),
        "t_end": ("t_end", float),
        "dt": ("dt", float),
        "cfl": ("cfl", float),
        "steps": ("steps", int),
        "output_every": ("output_every", int),
        "tracers": ("tracers", int),
        "magnetic": ("magnetic", "bool"),
        "entropy": ("entropy", str),
    },
    "grid": {
        "dims": ("dims", int),
        "n": ("n", int),
        "length": ("length", float),
        "stencil_order": ("stencil_order", int),
    },
    "eos": {
        "kind": ("eos_kind", str),
        "gamma": ("gamma", float),
        "k": ("K", float),
        "c_v": ("c_v", float),
    },
    "checks": {
        "names": ("checks", "list"),
        "threshold": ("threshold", float),
    },
    "output": {"dir": ("output_dir", Path)},
}


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """1-based line number of ``key`` inside ``[section]`` (or of the header)."""
    current = None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
            if key is None and current == section:
                return i
            continue
        if key is not None and current == section:
            m = re.match(r"\s*([^=:#;\s]+)\s*[=:]", line)
            if m and m.group(1).lower() == key:
                return i
    return 0


def parse_config(text: str, source: str = "<config>") -> ScenarioConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: no section header before {exc.line.strip()!r}") from exc
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: duplicate key {exc.option!r} in [{exc.section}]") from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"{source}:{exc.lineno}: duplicate section [{exc.section}]") from exc
    except configparser.ParsingError as exc:
        # configparser stores the offending line as its repr
        line, text = exc.errors[0]
        raise ConfigError(f"{source}:{line}: cannot parse line {text.replace(chr(92) + 'n', '')}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc.message.splitlines()[0]}") from exc

    def fail(msg, section, key=None):
        line = _line_of(text, section, key)
        where = f"{source}:{line}" if line else source
        raise ConfigError(f"{where}: {msg}")

    values: dict = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in _FIELDS:
            fail(f"unknown section [{section}]", sec)
        for key, raw in parser.items(section):
            if key not in _FIELDS[sec]:
                fail(f"unknown key {key!r} in [{section}]", sec, key)
            attr, kind = _FIELDS[sec][key]
            try:
                if kind == "list":
                    value = [v.strip() for v in raw.replace("\n", ",").split(",") if v.strip()]
                elif kind == "bool":
                    value = parser.getboolean(section, key)
                else:
                    value = kind(raw)
            except ValueError:
                fail(f"bad value {raw!r} for {key}", sec, key)
            values[attr] = value

    if "scenario" not in values:
        fail("missing required key 'name' in [scenario]", "scenario")
    if values["scenario"] not in SCENARIOS:
        fail(f"unknown scenario {values['scenario']!r}; choose from {', '.join(SCENARIOS)}", "scenario", "name")
    cfg = ScenarioConfig(**values)
    checks = [
        ("t_end", cfg.t_end > 0, "t_end must be positive", "scenario"),
        ("output_every", cfg.output_every >= 1, "output_every must be >= 1", "scenario"),
        ("tracers", cfg.tracers >= 0, "tracers must be >= 0", "scenario"),
        ("dims", cfg.dims in (2, 3), "dims must be 2 or 3", "grid"),
        ("n", cfg.n >= 8, "n must be at least 8", "grid"),
    ]
    for key, ok, msg, sec in checks:
        if not ok:
            fail(msg, sec, key)
    try:
        cfg.eos()
    except ValueError as exc:
        fail(str(exc), "eos")
    try:
        cfg.grid()
    except ValueError as exc:
        fail(str(exc), "grid")
    from .checks import validate_check

    for name in cfg.checks:
        try:
            validate_check(name)
        except ValueError as exc:
            fail(str(exc), "checks", "names")
    return cfg


def load_config(path: str | Path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    return parse_config(text, str(path))
