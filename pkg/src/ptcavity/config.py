"""Run configuration: a flat key = value document with fixed sections.

An empty document yields the default transducer configuration
(delta = 0, omega_m = 6, kappa = 20, gamma_m = 0.2, gain 16, g1 = 19.8,
g = 5, all MHz).  Unknown sections or keys are rejected by name, and every
violated invariant is reported at once.
"""

from __future__ import annotations

import configparser
import io
import math
from dataclasses import dataclass

from .dynamics import OracleConfig
from .errors import ConfigError
from .model import CoupledModeSystem
from .sensitivity import BracketMode, SensitivityParams, OMEGA0_1550NM
from .spectrum import MechanicalMode

__all__ = ["RunConfig", "parse_config", "default_config"]

_AUTO = "auto"


@dataclass
class RunConfig:
    # [system]
    mode: str = "PT"
    delta: float = 0.0
    kappa: float = 20.0
    gamma_or_kappa1: float = 16.0
    g1: float = 19.8
    g: float = 5.0
    # [mechanics]
    omega_m: float = 6.0
    gamma_m: float = 0.2
    z0: float = 0.2
    # [numerics]
    ladder_order: int = 5
    grid_points: int = 16001
    drive_eps: float = 1.0
    dt: float | None = None
    t_end: float | None = None
    transition_tol: float = 1e-9
    oracle_tol: float = 1e-3
    # [sensitivity]
    p_in: float = 1e-3
    omega0: float = OMEGA0_1550NM
    bracket_mode: str = "DIMENSIONAL"
    # [sweep]
    sweep_parameter: str = "g1_over_threshold"
    sweep_start: float = 0.9
    sweep_stop: float = 3.0
    sweep_count: int = 420
    sweep_spacing: str = "linear"
    # [output]
    output_dir: str = "out"

    # ---- builders -------------------------------------------------------

    def system(self) -> CoupledModeSystem:
        d2 = -self.gamma_or_kappa1 if self.mode == "PT" else self.gamma_or_kappa1
        return CoupledModeSystem(delta=self.delta, d1=self.kappa, d2=d2, g1=self.g1, g=self.g)

    def ep_system(self, g1: float | None = None) -> CoupledModeSystem:
        """Loss-loss counterpart sharing d1 and g; the second loss rate
        mirrors the gain magnitude."""
        return CoupledModeSystem(
            delta=self.delta,
            d1=self.kappa,
            d2=abs(self.gamma_or_kappa1),
            g1=self.g1 if g1 is None else g1,
            g=self.g,
        )

    def mechanical(self) -> MechanicalMode:
        return MechanicalMode(omega_m=self.omega_m, gamma_m=self.gamma_m, z0=self.z0)

    def sensitivity_params(self) -> SensitivityParams:
        return SensitivityParams(
            p_in=self.p_in, omega0=self.omega0, bracket_mode=BracketMode[self.bracket_mode]
        )

    def oracle_config(self) -> OracleConfig:
        return OracleConfig(
            dt=self.dt, t_end=self.t_end, order=self.ladder_order, tolerance=self.oracle_tol
        )

    # ---- serialisation ---------------------------------------------------

    def to_text(self) -> str:
        def num(v):
            if v is None:
                return _AUTO
            if isinstance(v, int):
                return str(v)
            return repr(float(v))

        return (
            "[system]\n"
            f"mode = {self.mode}\n"
            f"delta = {num(self.delta)}\n"
            f"kappa = {num(self.kappa)}\n"
            f"gamma_or_kappa1 = {num(self.gamma_or_kappa1)}\n"
            f"g1 = {num(self.g1)}\n"
            f"g = {num(self.g)}\n"
            "\n[mechanics]\n"
            f"omega_m = {num(self.omega_m)}\n"
            f"gamma_m = {num(self.gamma_m)}\n"
            f"z0 = {num(self.z0)}\n"
            "\n[numerics]\n"
            f"ladder_order = {self.ladder_order}\n"
            f"grid_points = {self.grid_points}\n"
            f"drive_eps = {num(self.drive_eps)}\n"
            f"dt = {num(self.dt)}\n"
            f"t_end = {num(self.t_end)}\n"
            f"transition_tol = {num(self.transition_tol)}\n"
            f"oracle_tol = {num(self.oracle_tol)}\n"
            "\n[sensitivity]\n"
            f"p_in = {num(self.p_in)}\n"
            f"omega0 = {num(self.omega0)}\n"
            f"bracket_mode = {self.bracket_mode}\n"
            "\n[sweep]\n"
            f"parameter = {self.sweep_parameter}\n"
            f"start = {num(self.sweep_start)}\n"
            f"stop = {num(self.sweep_stop)}\n"
            f"count = {self.sweep_count}\n"
            f"spacing = {self.sweep_spacing}\n"
            "\n[output]\n"
            f"dir = {self.output_dir}\n"
        )


# (section, key) -> (attribute, parser)
def _float(v: str) -> float:
    return float(v)


def _optional_float(v: str):
    return None if v.strip().lower() == _AUTO else float(v)


def _int(v: str) -> int:
    return int(v)


def _str(v: str) -> str:
    return v.strip()


def _upper(v: str) -> str:
    return v.strip().upper()


def _lower(v: str) -> str:
    return v.strip().lower()


_SCHEMA = {
    ("system", "mode"): ("mode", _upper),
    ("system", "delta"): ("delta", _float),
    ("system", "kappa"): ("kappa", _float),
    ("system", "gamma_or_kappa1"): ("gamma_or_kappa1", _float),
    ("system", "g1"): ("g1", _float),
    ("system", "g"): ("g", _float),
    ("mechanics", "omega_m"): ("omega_m", _float),
    ("mechanics", "gamma_m"): ("gamma_m", _float),
    ("mechanics", "z0"): ("z0", _float),
    ("numerics", "ladder_order"): ("ladder_order", _int),
    ("numerics", "grid_points"): ("grid_points", _int),
    ("numerics", "drive_eps"): ("drive_eps", _float),
    ("numerics", "dt"): ("dt", _optional_float),
    ("numerics", "t_end"): ("t_end", _optional_float),
    ("numerics", "transition_tol"): ("transition_tol", _float),
    ("numerics", "oracle_tol"): ("oracle_tol", _float),
    ("sensitivity", "p_in"): ("p_in", _float),
    ("sensitivity", "omega0"): ("omega0", _float),
    ("sensitivity", "bracket_mode"): ("bracket_mode", _upper),
    ("sweep", "parameter"): ("sweep_parameter", _str),
    ("sweep", "start"): ("sweep_start", _float),
    ("sweep", "stop"): ("sweep_stop", _float),
    ("sweep", "count"): ("sweep_count", _int),
    ("sweep", "spacing"): ("sweep_spacing", _lower),
    ("output", "dir"): ("output_dir", _str),
}

_SECTIONS = {s for s, _ in _SCHEMA}

_SWEEP_PARAMETERS = ("g1_over_Gamma", "g1_over_threshold")


def _validate(cfg: RunConfig) -> list:
    bad = []
    if cfg.mode not in ("PT", "EP"):
        bad.append(f"mode must be PT or EP, got {cfg.mode!r}")
    for name, positive in (
        ("kappa", True),
        ("omega_m", True),
        ("gamma_m", True),
        ("drive_eps", True),
        ("p_in", True),
        ("omega0", True),
        ("g1", False),
        ("g", False),
        ("z0", False),
        ("gamma_or_kappa1", False),
    ):
        v = getattr(cfg, name)
        if not math.isfinite(v):
            bad.append(f"{name} must be finite, got {v}")
        elif positive and v <= 0:
            bad.append(f"{name} must be > 0, got {v}")
        elif not positive and v < 0:
            bad.append(f"{name} must be >= 0, got {v}")
    if not math.isfinite(cfg.delta):
        bad.append(f"delta must be finite, got {cfg.delta}")
    if cfg.ladder_order < 2:
        bad.append(f"ladder_order must be >= 2, got {cfg.ladder_order}")
    if cfg.grid_points < 101:
        bad.append(f"grid_points must be >= 101, got {cfg.grid_points}")
    for name in ("dt", "t_end"):
        v = getattr(cfg, name)
        if v is not None and (not math.isfinite(v) or v <= 0):
            bad.append(f"{name} must be 'auto' or a positive number, got {v}")
    if not (0.0 < cfg.transition_tol <= 1e-2):
        bad.append(f"transition_tol must be in (0, 1e-2], got {cfg.transition_tol}")
    if cfg.oracle_tol <= 0:
        bad.append(f"oracle_tol must be > 0, got {cfg.oracle_tol}")
    if cfg.bracket_mode not in ("DIMENSIONAL", "AS_PRINTED"):
        bad.append(f"bracket_mode must be DIMENSIONAL or AS_PRINTED, got {cfg.bracket_mode!r}")
    if cfg.sweep_parameter not in _SWEEP_PARAMETERS:
        bad.append(
            f"sweep parameter must be one of {_SWEEP_PARAMETERS}, got {cfg.sweep_parameter!r}"
        )
    if cfg.sweep_count < 2:
        bad.append(f"sweep count must be >= 2, got {cfg.sweep_count}")
    if cfg.sweep_spacing not in ("linear", "log"):
        bad.append(f"sweep spacing must be linear or log, got {cfg.sweep_spacing!r}")
    elif cfg.sweep_spacing == "log" and (cfg.sweep_start <= 0 or cfg.sweep_stop <= 0):
        bad.append("log spacing requires positive sweep endpoints")
    if not (math.isfinite(cfg.sweep_start) and math.isfinite(cfg.sweep_stop)):
        bad.append("sweep endpoints must be finite")
    elif cfg.sweep_start >= cfg.sweep_stop:
        bad.append(
            f"sweep start must be below stop, got [{cfg.sweep_start}, {cfg.sweep_stop}]"
        )
    return bad


def parse_config(text: str) -> RunConfig:
    """Parse and fully validate a configuration document.

    Raises :class:`ConfigError` with line/field diagnostics on parse errors,
    unknown sections/keys, or invariant violations (all of them listed).
    """
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#", ";"), inline_comment_prefixes=("#", ";")
    )
    try:
        parser.read_file(io.StringIO(text))
    except configparser.Error as exc:
        raise ConfigError(f"could not parse configuration: {exc}") from exc

    cfg = RunConfig()
    problems = []
    for section in parser.sections():
        if section not in _SECTIONS:
            problems.append(f"unknown section [{section}]")
            continue
        for key, raw in parser.items(section):
            entry = _SCHEMA.get((section, key))
            if entry is None:
                problems.append(f"unknown key '{key}' in section [{section}]")
                continue
            attr, conv = entry
            try:
                setattr(cfg, attr, conv(raw))
            except ValueError:
                problems.append(f"could not parse [{section}] {key} = {raw!r}")
    if problems:
        raise ConfigError("invalid configuration:\n  " + "\n  ".join(problems))

    violations = _validate(cfg)
    if violations:
        raise ConfigError("configuration failed validation:\n  " + "\n  ".join(violations))
    return cfg


def default_config() -> RunConfig:
    return RunConfig()
