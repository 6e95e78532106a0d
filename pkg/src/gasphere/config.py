"""INI-style run configuration.

A config file is flat sectioned ``key = value`` text.  Each CLI command
reads its own section plus the shared ``[run]`` section; ``evolve`` also
reads ``[diagnostics]``.  Every section and key found in the file is
validated against the schema below, so typos fail fast no matter which
command is invoked.  Command-line flags override file values.
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from typing import Callable, Dict, Mapping, Optional, Tuple

from . import setups
from .errors import ConfigError

Sections = Dict[str, Dict[str, str]]

_EVOLVE_BASE_KEYS = frozenset({
    "ic", "cells", "r_max", "t_end", "beta", "cfl", "snapshot_every",
    "second_order", "stop_on_collapse",
})

# ic name -> (builder, {ini key suffix: builder kwarg}, required suffixes)
IC_REGISTRY: Dict[str, Tuple[Callable, Dict[str, str], frozenset]] = {
    "uniform-ball": (setups.uniform_ball,
                     {"n_dim": "N", "radius": "R", "rho0": "rho0",
                      "gamma": "gamma", "k": "K", "g": "g"},
                     frozenset({"radius", "rho0"})),
    "stationary65": (setups.stationary_gamma65,
                     {"k": "K", "a_coef": "A", "g": "g", "cutoff": "cutoff"},
                     frozenset()),
    "isothermal-disk": (setups.isothermal_disk,
                        {"k": "K", "scale": "a", "alpha": "alpha", "g": "g",
                         "cutoff": "cutoff", "profile_h": "profile_h"},
                        frozenset()),
    "cored-disk": (setups.cored_disk,
                   {"rho_c": "rho_c", "core": "core", "k": "K", "g": "g",
                    "cutoff": "cutoff"},
                   frozenset()),
    "gaussian": (setups.gaussian_ball,
                 {"n_dim": "N", "gamma": "gamma", "k": "K", "g": "g",
                  "rho_c": "rho_c", "sigma": "sigma", "v0": "v0",
                  "cutoff": "cutoff"},
                 frozenset()),
}

_IC_INT_KEYS = frozenset({"n_dim"})

SECTION_KEYS: Dict[str, frozenset] = {
    "run": frozenset({"name", "out", "seed", "threads", "no_plot"}),
    "lane-emden": frozenset({"n", "alpha", "z_max", "h"}),
    "family": frozenset({
        "kind", "n_dim", "k", "lam", "mu", "a0", "a1", "t_end", "dt",
        "alpha", "profile_h", "profile_z_max", "residual_times",
        "residual_step", "residual_levels", "residual_points",
        "residual_lo", "residual_hi",
    }),
    "evolve": _EVOLVE_BASE_KEYS | frozenset(
        "ic_" + suffix for _, keymap, _req in IC_REGISTRY.values()
        for suffix in keymap),
    "diagnostics": frozenset({"gap_window", "eps_margin", "e_scale",
                              "domain_measure"}),
    "classify": frozenset({
        "n_dim", "gamma", "beta", "e0", "m", "g", "k", "domain_measure",
        "sup_functional", "eps", "eps_margin", "e_scale", "h0", "hdot0",
    }),
    "sweep": frozenset({"cells", "k", "m", "g", "domain_measure", "e_scale"}),
}


def read_config_file(path: Optional[str]) -> Sections:
    """Parse and validate an INI file into plain string sections."""
    if path is None:
        return {}
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from exc
    sections: Sections = {}
    for name in parser.sections():
        sections[name] = dict(parser.items(name))
    validate_sections(sections)
    return sections


def validate_sections(sections: Mapping[str, Mapping[str, str]]) -> None:
    for name, keys in sections.items():
        allowed = SECTION_KEYS.get(name)
        if allowed is None:
            raise ConfigError(
                f"unknown config section [{name}]; expected one of "
                + ", ".join(sorted(SECTION_KEYS)))
        for key in keys:
            if key not in allowed:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")


def merge_overrides(sections: Sections, overrides: Mapping[Tuple[str, str], str]) -> Sections:
    """Apply CLI flag overrides ((section, key) -> raw string) on top."""
    merged: Sections = {name: dict(vals) for name, vals in sections.items()}
    for (section, key), value in overrides.items():
        merged.setdefault(section, {})[key] = value
    validate_sections(merged)
    return merged


def _get(sections: Sections, section: str, key: str) -> Optional[str]:
    return sections.get(section, {}).get(key)


def _require(sections: Sections, section: str, key: str) -> str:
    value = _get(sections, section, key)
    if value is None:
        raise ConfigError(f"missing required key {key!r} in section [{section}]")
    return value


def _as_float(section: str, key: str, text: str) -> float:
    try:
        return float(text)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r} is not a number") from exc


def _as_int(section: str, key: str, text: str) -> int:
    try:
        return int(text)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r} is not an integer") from exc


_BOOL_WORDS = {"true": True, "yes": True, "on": True, "1": True,
               "false": False, "no": False, "off": False, "0": False}


def _as_bool(section: str, key: str, text: str) -> bool:
    try:
        return _BOOL_WORDS[text.strip().lower()]
    except KeyError as exc:
        raise ConfigError(f"[{section}] {key} = {text!r} is not a boolean") from exc


def _opt_float(sections: Sections, section: str, key: str,
               default: Optional[float]) -> Optional[float]:
    text = _get(sections, section, key)
    if text is None or text.strip().lower() == "none":
        return default
    return _as_float(section, key, text)


def _float_or(sections: Sections, section: str, key: str, default: float) -> float:
    text = _get(sections, section, key)
    return default if text is None else _as_float(section, key, text)


def _int_or(sections: Sections, section: str, key: str, default: int) -> int:
    text = _get(sections, section, key)
    return default if text is None else _as_int(section, key, text)


def _bool_or(sections: Sections, section: str, key: str, default: bool) -> bool:
    text = _get(sections, section, key)
    return default if text is None else _as_bool(section, key, text)


def resolve_gamma(section: str, text: str, n_dim: int) -> float:
    """Parse a gamma value; the token 'critical' means 2(N-1)/N exactly."""
    if text.strip().lower() == "critical":
        return 2.0 * (n_dim - 1) / n_dim
    return _as_float(section, "gamma", text)


@dataclass(frozen=True)
class RunSettings:
    name: Optional[str] = None
    out: str = "runs"
    seed: Optional[int] = None
    threads: int = 1
    no_plot: bool = False


def build_run_settings(sections: Sections) -> RunSettings:
    seed_text = _get(sections, "run", "seed")
    return RunSettings(
        name=_get(sections, "run", "name"),
        out=_get(sections, "run", "out") or "runs",
        seed=None if seed_text is None else _as_int("run", "seed", seed_text),
        threads=_int_or(sections, "run", "threads", 1),
        no_plot=_bool_or(sections, "run", "no_plot", False),
    )


@dataclass(frozen=True)
class LaneEmdenConfig:
    n: float
    alpha: float = 1.0
    z_max: float = 50.0
    h: float = 1e-4


def build_lane_emden_config(sections: Sections) -> LaneEmdenConfig:
    cfg = LaneEmdenConfig(
        n=_as_float("lane-emden", "n", _require(sections, "lane-emden", "n")),
        alpha=_float_or(sections, "lane-emden", "alpha", 1.0),
        z_max=_float_or(sections, "lane-emden", "z_max", 50.0),
        h=_float_or(sections, "lane-emden", "h", 1e-4),
    )
    if cfg.n < 0.0:
        raise ConfigError(f"[lane-emden] n must be >= 0, got {cfg.n}")
    if cfg.h <= 0.0 or cfg.z_max <= cfg.h:
        raise ConfigError("[lane-emden] need h > 0 and z_max > h")
    return cfg


@dataclass(frozen=True)
class FamilyConfig:
    kind: str
    n_dim: int
    k: float
    lam: float
    t_end: float
    a0: float = 1.0
    a1: float = 0.0
    dt: float = 1e-3
    alpha: float = 1.0
    mu: Optional[float] = None
    profile_h: float = 1e-3
    profile_z_max: float = 50.0
    residual_times: Tuple[float, ...] = ()
    residual_step: float = 2e-3
    residual_levels: int = 3
    residual_points: int = 48
    residual_lo: float = 0.2
    residual_hi: float = 0.8


def build_family_config(sections: Sections) -> FamilyConfig:
    kind = _require(sections, "family", "kind").strip().lower()
    if kind not in ("power", "isothermal2d"):
        raise ConfigError(f"[family] kind must be power or isothermal2d, got {kind!r}")
    times_text = _get(sections, "family", "residual_times")
    if times_text:
        try:
            times = tuple(float(tok) for tok in times_text.split(",") if tok.strip())
        except ValueError as exc:
            raise ConfigError(f"[family] residual_times = {times_text!r} "
                              "must be comma-separated numbers") from exc
    else:
        times = ()
    cfg = FamilyConfig(
        kind=kind,
        n_dim=_as_int("family", "n_dim", _require(sections, "family", "n_dim")),
        k=_as_float("family", "k", _require(sections, "family", "k")),
        lam=_as_float("family", "lam", _require(sections, "family", "lam")),
        t_end=_as_float("family", "t_end", _require(sections, "family", "t_end")),
        a0=_float_or(sections, "family", "a0", 1.0),
        a1=_float_or(sections, "family", "a1", 0.0),
        dt=_float_or(sections, "family", "dt", 1e-3),
        alpha=_float_or(sections, "family", "alpha",
                        0.0 if kind == "isothermal2d" else 1.0),
        mu=_opt_float(sections, "family", "mu", None),
        profile_h=_float_or(sections, "family", "profile_h", 1e-3),
        profile_z_max=_float_or(sections, "family", "profile_z_max", 50.0),
        residual_times=times,
        residual_step=_float_or(sections, "family", "residual_step", 2e-3),
        residual_levels=_int_or(sections, "family", "residual_levels", 3),
        residual_points=_int_or(sections, "family", "residual_points", 48),
        residual_lo=_float_or(sections, "family", "residual_lo", 0.2),
        residual_hi=_float_or(sections, "family", "residual_hi", 0.8),
    )
    if cfg.t_end <= 0.0 or cfg.dt <= 0.0:
        raise ConfigError("[family] t_end and dt must be positive")
    if not 0.0 < cfg.residual_lo < cfg.residual_hi <= 1.0:
        raise ConfigError("[family] need 0 < residual_lo < residual_hi <= 1")
    if cfg.residual_levels < 1 or cfg.residual_points < 2:
        raise ConfigError("[family] residual_levels >= 1 and residual_points >= 2")
    return cfg


@dataclass(frozen=True)
class EvolveConfig:
    ic: str
    cells: int
    r_max: float
    t_end: float
    beta: float = 0.0
    cfl: float = 0.4
    snapshot_every: Optional[float] = None
    second_order: bool = True
    stop_on_collapse: bool = True
    ic_params: Mapping[str, object] = field(default_factory=dict)


def build_evolve_config(sections: Sections) -> EvolveConfig:
    ic = _require(sections, "evolve", "ic").strip().lower()
    entry = IC_REGISTRY.get(ic)
    if entry is None:
        raise ConfigError(f"[evolve] unknown ic {ic!r}; expected one of "
                          + ", ".join(sorted(IC_REGISTRY)))
    _builder, keymap, required = entry
    present = {key for key in sections.get("evolve", {}) if key.startswith("ic_")}
    allowed = {"ic_" + suffix for suffix in keymap}
    for key in sorted(present - allowed):
        raise ConfigError(f"[evolve] key {key!r} does not apply to ic {ic!r}")
    for suffix in sorted(required):
        if "ic_" + suffix not in present:
            raise ConfigError(f"[evolve] ic {ic!r} requires key ic_{suffix}")
    params: Dict[str, object] = {}
    for suffix, kwarg in keymap.items():
        text = _get(sections, "evolve", "ic_" + suffix)
        if text is None:
            continue
        if suffix in _IC_INT_KEYS:
            params[kwarg] = _as_int("evolve", "ic_" + suffix, text)
        elif suffix == "cutoff" and text.strip().lower() == "none":
            params[kwarg] = None
        else:
            params[kwarg] = _as_float("evolve", "ic_" + suffix, text)
    cfg = EvolveConfig(
        ic=ic,
        cells=_as_int("evolve", "cells", _require(sections, "evolve", "cells")),
        r_max=_as_float("evolve", "r_max", _require(sections, "evolve", "r_max")),
        t_end=_as_float("evolve", "t_end", _require(sections, "evolve", "t_end")),
        beta=_float_or(sections, "evolve", "beta", 0.0),
        cfl=_float_or(sections, "evolve", "cfl", 0.4),
        snapshot_every=_opt_float(sections, "evolve", "snapshot_every", None),
        second_order=_bool_or(sections, "evolve", "second_order", True),
        stop_on_collapse=_bool_or(sections, "evolve", "stop_on_collapse", True),
        ic_params=params,
    )
    if cfg.cells < 4:
        raise ConfigError("[evolve] cells must be at least 4")
    if cfg.r_max <= 0.0 or cfg.t_end <= 0.0:
        raise ConfigError("[evolve] r_max and t_end must be positive")
    if not 0.0 < cfg.cfl <= 1.0:
        raise ConfigError("[evolve] cfl must lie in (0, 1]")
    if cfg.beta < 0.0:
        raise ConfigError("[evolve] beta must be >= 0")
    return cfg


def build_initial_state(cfg: EvolveConfig):
    builder, _keymap, _required = IC_REGISTRY[cfg.ic]
    try:
        return builder(cfg.cells, cfg.r_max, beta=cfg.beta, **cfg.ic_params)
    except ValueError as exc:
        raise ConfigError(f"invalid initial condition: {exc}") from exc


@dataclass(frozen=True)
class DiagnosticsSettings:
    gap_window: Optional[float] = None
    eps_margin: float = 0.0
    e_scale: float = 1.0
    domain_measure: Optional[float] = None


def build_diagnostics_settings(sections: Sections) -> DiagnosticsSettings:
    cfg = DiagnosticsSettings(
        gap_window=_opt_float(sections, "diagnostics", "gap_window", None),
        eps_margin=_float_or(sections, "diagnostics", "eps_margin", 0.0),
        e_scale=_float_or(sections, "diagnostics", "e_scale", 1.0),
        domain_measure=_opt_float(sections, "diagnostics", "domain_measure", None),
    )
    if cfg.eps_margin < 0.0:
        raise ConfigError("[diagnostics] eps_margin must be >= 0")
    if cfg.e_scale <= 0.0:
        raise ConfigError("[diagnostics] e_scale must be > 0")
    return cfg


@dataclass(frozen=True)
class ClassifyConfig:
    n_dim: int
    gamma: float
    e0: float
    m: float
    beta: float = 0.0
    g: float = 1.0
    k: Optional[float] = None
    domain_measure: Optional[float] = None
    sup_functional: Optional[float] = None
    eps: Optional[float] = None
    eps_margin: float = 0.0
    e_scale: float = 1.0
    h0: Optional[float] = None
    hdot0: float = 0.0


def build_classify_config(sections: Sections) -> ClassifyConfig:
    n_dim = _as_int("classify", "n_dim", _require(sections, "classify", "n_dim"))
    gamma = resolve_gamma("classify", _require(sections, "classify", "gamma"), n_dim)
    return ClassifyConfig(
        n_dim=n_dim,
        gamma=gamma,
        e0=_as_float("classify", "e0", _require(sections, "classify", "e0")),
        m=_as_float("classify", "m", _require(sections, "classify", "m")),
        beta=_float_or(sections, "classify", "beta", 0.0),
        g=_float_or(sections, "classify", "g", 1.0),
        k=_opt_float(sections, "classify", "k", None),
        domain_measure=_opt_float(sections, "classify", "domain_measure", None),
        sup_functional=_opt_float(sections, "classify", "sup_functional", None),
        eps=_opt_float(sections, "classify", "eps", None),
        eps_margin=_float_or(sections, "classify", "eps_margin", 0.0),
        e_scale=_float_or(sections, "classify", "e_scale", 1.0),
        h0=_opt_float(sections, "classify", "h0", None),
        hdot0=_float_or(sections, "classify", "hdot0", 0.0),
    )


@dataclass(frozen=True)
class SweepCell:
    n_dim: int
    gamma: float
    e0: float
    beta: float = 0.0


@dataclass(frozen=True)
class SweepConfig:
    cells: Tuple[SweepCell, ...]
    k: float = 1.0
    m: float = 1.0
    g: float = 1.0
    domain_measure: float = 1.0
    e_scale: float = 1.0


def parse_sweep_cells(text: str) -> Tuple[SweepCell, ...]:
    """Parse one cell per line, e.g. 'n_dim=4 gamma=critical e0=-1 beta=0.5'."""
    cells = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields: Dict[str, str] = {}
        for token in line.split():
            if "=" not in token:
                raise ConfigError(f"sweep cell line {lineno}: token {token!r} "
                                  "is not key=value")
            key, _, value = token.partition("=")
            if key in fields:
                raise ConfigError(f"sweep cell line {lineno}: duplicate key {key!r}")
            fields[key] = value
        unknown = set(fields) - {"n_dim", "gamma", "e0", "beta"}
        if unknown:
            raise ConfigError(f"sweep cell line {lineno}: unknown keys "
                              + ", ".join(sorted(unknown)))
        for need in ("n_dim", "gamma", "e0"):
            if need not in fields:
                raise ConfigError(f"sweep cell line {lineno}: missing {need}")
        n_dim = _as_int("sweep", "n_dim", fields["n_dim"])
        cells.append(SweepCell(
            n_dim=n_dim,
            gamma=resolve_gamma("sweep", fields["gamma"], n_dim),
            e0=_as_float("sweep", "e0", fields["e0"]),
            beta=_as_float("sweep", "beta", fields.get("beta", "0")),
        ))
    if not cells:
        raise ConfigError("sweep cells text contains no cells")
    return tuple(cells)


def build_sweep_config(sections: Sections) -> SweepConfig:
    cells = parse_sweep_cells(_require(sections, "sweep", "cells"))
    cfg = SweepConfig(
        cells=cells,
        k=_float_or(sections, "sweep", "k", 1.0),
        m=_float_or(sections, "sweep", "m", 1.0),
        g=_float_or(sections, "sweep", "g", 1.0),
        domain_measure=_float_or(sections, "sweep", "domain_measure", 1.0),
        e_scale=_float_or(sections, "sweep", "e_scale", 1.0),
    )
    if cfg.k <= 0.0 or cfg.m <= 0.0 or cfg.g <= 0.0 or cfg.domain_measure <= 0.0:
        raise ConfigError("[sweep] k, m, g and domain_measure must be positive")
    return cfg
