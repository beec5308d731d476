"""Run configuration: plain-text `key = value` sections, fully resolvable.

Every knob has a default; the resolved manifest written by the runner echoes
all of them so a run is reproducible from its artifacts alone. The `seed`
key is reserved for randomized scenarios; the documented scenario set is
deterministic and ignores it.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .trajectory import SolveMode

__all__ = ["RunConfig", "parse_config", "render_manifest"]

_SECTIONS = {
    "grid": ("n", "extent"),
    "time": ("horizon", "steps", "windows"),
    "norms": ("p", "q"),
    "solver": (
        "mode",
        "picard_tol",
        "elliptic_tol",
        "max_sweeps",
        "renormalize_director",
        "blowup_threshold",
        "parallel_sweep",
    ),
    "scenario": ("name", "epsilon", "wavenumber", "amplitude", "director", "seed"),
    "output": ("directory", "dump_stride", "dump_trajectory"),
}


@dataclass(frozen=True)
class RunConfig:
    # grid
    n: int = 17
    extent: float = 1.0
    # time
    horizon: float = 0.05
    steps: int = 32
    windows: int = 1
    # norm exponents
    p: float = 4.0
    q: float = 8.0
    # solver
    mode: str = "picard_global"
    picard_tol: float = 1e-8
    elliptic_tol: float = 1e-10
    max_sweeps: int = 50
    renormalize_director: bool = False
    blowup_threshold: float = 1e6
    parallel_sweep: bool = False
    # scenario
    scenario: str = "equilibrium"
    epsilon: float = 0.01
    wavenumber: int = 4
    amplitude: float = 1.0
    director: tuple[float, float, float] = (0.0, 0.0, 1.0)
    seed: int = 0
    # output
    output_dir: str = "out"
    dump_stride: int = 0
    dump_trajectory: bool = False

    def __post_init__(self):
        if self.n < 8:
            raise ConfigError(f"grid n must be >= 8, got {self.n}")
        if self.extent <= 0:
            raise ConfigError("extent must be positive")
        if self.horizon <= 0:
            raise ConfigError("horizon must be positive")
        if self.steps < 1 or self.windows < 1:
            raise ConfigError("steps and windows must be >= 1")
        if self.mode not in (m.value for m in SolveMode):
            raise ConfigError(
                f"mode must be one of {[m.value for m in SolveMode]}, got {self.mode!r}"
            )
        from .scenarios import SCENARIOS

        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")
        if not 0 < self.picard_tol < 1:
            raise ConfigError("picard_tol must lie in (0, 1)")
        if not 0 < self.elliptic_tol < 1:
            raise ConfigError("elliptic_tol must lie in (0, 1)")
        e = np.asarray(self.director, dtype=np.float64)
        if e.shape != (3,) or np.linalg.norm(e) == 0:
            raise ConfigError("director must be a nonzero 3-vector")
        if self.dump_stride < 0:
            raise ConfigError("dump_stride must be >= 0")

    @property
    def unit_director(self) -> np.ndarray:
        e = np.asarray(self.director, dtype=np.float64)
        return e / np.linalg.norm(e)


def _parse_director(raw: str) -> tuple[float, float, float]:
    parts = raw.replace(",", " ").split()
    if len(parts) != 3:
        raise ConfigError(f"director needs three components, got {raw!r}")
    return tuple(float(p) for p in parts)


def parse_config(path: str) -> RunConfig:
    """Read a `key = value` sectioned config file into a RunConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        read = parser.read(path)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from err
    if not read:
        raise ConfigError(f"config file not found: {path}")

    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")

    kwargs = {}

    def take(section, key, conv, dest=None):
        if parser.has_option(section, key):
            raw = parser.get(section, key)
            try:
                kwargs[dest or key] = conv(raw)
            except ConfigError:
                raise
            except ValueError as err:
                raise ConfigError(f"bad value for [{section}] {key}: {raw!r}") from err

    as_bool = lambda raw: configparser.ConfigParser.BOOLEAN_STATES[raw.strip().lower()]

    take("grid", "n", int)
    take("grid", "extent", float)
    take("time", "horizon", float)
    take("time", "steps", int)
    take("time", "windows", int)
    take("norms", "p", float)
    take("norms", "q", float)
    take("solver", "mode", str)
    take("solver", "picard_tol", float)
    take("solver", "elliptic_tol", float)
    take("solver", "max_sweeps", int)
    take("solver", "renormalize_director", as_bool)
    take("solver", "blowup_threshold", float)
    take("solver", "parallel_sweep", as_bool)
    take("scenario", "name", str, dest="scenario")
    take("scenario", "epsilon", float)
    take("scenario", "wavenumber", int)
    take("scenario", "amplitude", float)
    take("scenario", "director", _parse_director)
    take("scenario", "seed", int)
    take("output", "directory", str, dest="output_dir")
    take("output", "dump_stride", int)
    take("output", "dump_trajectory", as_bool)

    try:
        return RunConfig(**kwargs)
    except ConfigError:
        raise
    except (TypeError, ValueError) as err:
        raise ConfigError(str(err)) from err


def render_manifest(cfg: RunConfig) -> str:
    """Full resolved configuration, every default made explicit."""
    e = cfg.director
    lines = [
        "[grid]",
        f"n = {cfg.n}",
        f"extent = {cfg.extent!r}",
        "",
        "[time]",
        f"horizon = {cfg.horizon!r}",
        f"steps = {cfg.steps}",
        f"windows = {cfg.windows}",
        "",
        "[norms]",
        f"p = {cfg.p!r}",
        f"q = {cfg.q!r}",
        "",
        "[solver]",
        f"mode = {cfg.mode}",
        f"picard_tol = {cfg.picard_tol!r}",
        f"elliptic_tol = {cfg.elliptic_tol!r}",
        f"max_sweeps = {cfg.max_sweeps}",
        f"renormalize_director = {str(cfg.renormalize_director).lower()}",
        f"blowup_threshold = {cfg.blowup_threshold!r}",
        f"parallel_sweep = {str(cfg.parallel_sweep).lower()}",
        "",
        "[scenario]",
        f"name = {cfg.scenario}",
        f"epsilon = {cfg.epsilon!r}",
        f"wavenumber = {cfg.wavenumber}",
        f"amplitude = {cfg.amplitude!r}",
        f"director = {e[0]!r} {e[1]!r} {e[2]!r}",
        f"seed = {cfg.seed}",
        "",
        "[output]",
        f"directory = {cfg.output_dir}",
        f"dump_stride = {cfg.dump_stride}",
        f"dump_trajectory = {str(cfg.dump_trajectory).lower()}",
        "",
    ]
    return "\n".join(lines)
