"""Scenario files: a flat, typed key-value format with per-scheme sections.

Example::

    [scenario]
    topology = plane
    ports = 15x15
    aperture = 5x4          # wavelengths
    users = 5
    channel = geometric     # rayleigh | geometric
    rice_k_dB = -20
    num_paths = 30
    snr_dB = 10
    realizations = 500
    master_seed = 20260810
    gammas = 1, 2, 3        # outage thresholds, bits/s/Hz

    [scheme:slow-fama]

    [scheme:fahm-geport]
    ports_selected = 2      # or: port_policy = effective

Keys are case-sensitive; dB-valued fields carry a ``_dB`` suffix.
Scheme section names double as output labels; add ``type = <kind>``
when one kind appears more than once. Presets shipped with the package
resolve by bare name (``fig2`` .. ``fig9``, ``table1``).
"""

from __future__ import annotations

import configparser
from importlib import resources
from pathlib import Path

import numpy as np

from .channel import PortGrid, load_coupling_matrix
from .simulate import (
    ChannelSpec,
    ConfigError,
    SCHEME_KINDS,
    ScenarioConfig,
    SchemeSpec,
)

__all__ = [
    "parse_config",
    "resolve_config_path",
    "available_presets",
    "parse_values",
    "config_snapshot",
]

_SCENARIO = "scenario"
_SCHEME_PREFIX = "scheme:"

_KNOWN_SCENARIO_KEYS = {
    "topology",
    "ports",
    "aperture",
    "users",
    "channel",
    "rice_k_dB",
    "num_paths",
    "los_theta_rad",
    "los_phi_rad",
    "snr_dB",
    "realizations",
    "master_seed",
    "gammas",
    "coupling_file",
}
_KNOWN_SCHEME_KEYS = {"type", "ports_selected", "port_policy", "rho", "n_max"}


def available_presets() -> list[str]:
    """Names of the scenario presets shipped inside the package."""
    root = resources.files("fahm") / "presets"
    return sorted(p.name[: -len(".ini")] for p in root.iterdir() if p.name.endswith(".ini"))


def resolve_config_path(spec: str) -> Path:
    """Interpret --config as a path first, then as a packaged preset name."""
    path = Path(spec)
    if path.exists():
        return path
    if "/" not in spec and "\\" not in spec:
        preset = resources.files("fahm") / "presets" / f"{spec}.ini"
        with resources.as_file(preset) as concrete:
            if concrete.exists():
                return Path(concrete)
    raise ConfigError("config", f"no such config file or preset: '{spec}'")


def _get(section, key, fieldname, convert, required=True, default=None):
    if key not in section or section[key].strip() == "":
        if required:
            raise ConfigError(fieldname, "missing required key")
        return default
    raw = section[key].strip()
    try:
        return convert(raw)
    except ValueError as exc:
        raise ConfigError(fieldname, f"cannot parse '{raw}'") from exc


def _parse_pair(raw: str, convert, fieldname: str):
    parts = raw.lower().replace("x", " ").split()
    try:
        values = tuple(convert(p) for p in parts)
    except ValueError as exc:
        raise ConfigError(fieldname, f"cannot parse '{raw}'") from exc
    if len(values) not in (1, 2):
        raise ConfigError(fieldname, f"expected one value or a WxH pair, got '{raw}'")
    return values


def parse_values(spec: str, integer: bool = False) -> list:
    """Sweep value specs: 'a:step:b' (inclusive) or a comma list."""
    spec = spec.strip()
    conv = int if integer else float
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ConfigError("values", f"range spec must be start:step:stop, got '{spec}'")
        try:
            start, step, stop = (float(p) for p in parts)
        except ValueError as exc:
            raise ConfigError("values", f"cannot parse '{spec}'") from exc
        if step == 0:
            raise ConfigError("values", "step must be nonzero")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        if count < 1:
            raise ConfigError("values", f"empty range '{spec}'")
        vals = [start + k * step for k in range(count)]
    else:
        try:
            vals = [float(p) for p in spec.split(",") if p.strip() != ""]
        except ValueError as exc:
            raise ConfigError("values", f"cannot parse '{spec}'") from exc
        if not vals:
            raise ConfigError("values", "no values given")
    return [conv(v) for v in vals]


def parse_config(path, seed_override=None) -> ScenarioConfig:
    """Read and validate a scenario file into a ScenarioConfig."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keep key case so the _dB suffix survives
    read = parser.read(path)
    if not read:
        raise ConfigError("config", f"cannot read config file '{path}'")
    if _SCENARIO not in parser:
        raise ConfigError("scenario", "missing [scenario] section")
    sc = parser[_SCENARIO]

    for key in sc:
        if key not in _KNOWN_SCENARIO_KEYS:
            raise ConfigError(key, "unknown scenario key")

    topology = _get(sc, "topology", "topology", str)
    ports = _parse_pair(_get(sc, "ports", "ports", str), int, "ports")
    aperture = _parse_pair(_get(sc, "aperture", "aperture", str), float, "aperture")
    if topology == "line":
        if len(ports) != 1 or len(aperture) != 1:
            raise ConfigError("topology", "line grids take single ports/aperture values")
        grid = PortGrid.line(ports[0], aperture[0])
    elif topology == "plane":
        if len(ports) != 2 or len(aperture) != 2:
            raise ConfigError("topology", "plane grids take N1xN2 ports and W1xW2 aperture")
        try:
            grid = PortGrid.plane(ports[0], ports[1], aperture[0], aperture[1])
        except ValueError as exc:
            raise ConfigError("ports", str(exc)) from exc
    else:
        raise ConfigError("topology", f"must be 'line' or 'plane', got '{topology}'")

    channel_kind = _get(sc, "channel", "channel", str, required=False, default="rayleigh")
    channel = ChannelSpec(
        kind=channel_kind,
        rice_k_db=_get(sc, "rice_k_dB", "rice_k_dB", float, required=(channel_kind == "geometric"), default=0.0),
        num_paths=_get(sc, "num_paths", "num_paths", int, required=(channel_kind == "geometric"), default=1),
        los_theta=_get(sc, "los_theta_rad", "los_theta_rad", float, required=False, default=float(np.pi / 2)),
        los_phi=_get(sc, "los_phi_rad", "los_phi_rad", float, required=False, default=0.0),
    )

    gammas_raw = _get(sc, "gammas", "gammas", str, required=False, default="")
    gammas = tuple(float(g) for g in gammas_raw.split(",") if g.strip() != "") if gammas_raw else ()

    coupling_path = _get(sc, "coupling_file", "coupling_file", str, required=False)
    coupling = None
    if coupling_path:
        base = Path(path).parent
        resolved = Path(coupling_path)
        if not resolved.is_absolute():
            resolved = base / resolved
        try:
            coupling = load_coupling_matrix(resolved)
        except (OSError, ValueError) as exc:
            raise ConfigError("coupling_file", str(exc)) from exc

    schemes = []
    for section_name in parser.sections():
        if section_name == _SCENARIO:
            continue
        if not section_name.startswith(_SCHEME_PREFIX):
            raise ConfigError(section_name, "sections must be [scenario] or [scheme:<label>]")
        label = section_name[len(_SCHEME_PREFIX):]
        sec = parser[section_name]
        for key in sec:
            if key not in _KNOWN_SCHEME_KEYS:
                raise ConfigError(key, f"unknown key in [{section_name}]")
        kind = _get(sec, "type", f"{section_name}.type", str, required=False, default=label)
        if kind not in SCHEME_KINDS:
            raise ConfigError(
                f"{section_name}.type",
                f"unknown scheme kind '{kind}' (choose from {SCHEME_KINDS})",
            )
        ports_selected = _get(sec, "ports_selected", f"{section_name}.ports_selected", int, required=False)
        policy = _get(sec, "port_policy", f"{section_name}.port_policy", str, required=False, default=None)
        if policy is None:
            policy = "effective" if (kind in ("fahm-geport", "fahm-geport-naive") and ports_selected is None) else "fixed"
        schemes.append(
            SchemeSpec(
                kind=kind,
                label=label,
                ports_selected=ports_selected,
                port_policy=policy,
                rho=_get(sec, "rho", f"{section_name}.rho", float, required=False, default=0.4),
                n_max=_get(sec, "n_max", f"{section_name}.n_max", int, required=False),
            )
        )

    master_seed = _get(sc, "master_seed", "master_seed", int)
    if seed_override is not None:
        master_seed = int(seed_override)

    cfg = ScenarioConfig(
        grid=grid,
        users=_get(sc, "users", "users", int),
        channel=channel,
        snr_db=_get(sc, "snr_dB", "snr_dB", float),
        schemes=tuple(schemes),
        realizations=_get(sc, "realizations", "realizations", int),
        master_seed=master_seed,
        gammas=gammas,
        coupling=coupling,
        coupling_path=str(coupling_path) if coupling_path else None,
    )
    return cfg


def config_snapshot(cfg: ScenarioConfig) -> dict:
    """Fully resolved configuration, JSON-ready, for run manifests."""
    grid = cfg.grid
    return {
        "topology": grid.topology,
        "ports": list(grid.counts),
        "aperture": list(grid.aperture),
        "users": cfg.users,
        "channel": {
            "kind": cfg.channel.kind,
            "rice_k_dB": cfg.channel.rice_k_db,
            "num_paths": cfg.channel.num_paths,
            "los_theta_rad": cfg.channel.los_theta,
            "los_phi_rad": cfg.channel.los_phi,
        },
        "snr_dB": cfg.snr_db,
        "realizations": cfg.realizations,
        "master_seed": cfg.master_seed,
        "gammas": list(cfg.gammas),
        "coupling_file": cfg.coupling_path,
        "schemes": [
            {
                "label": s.name,
                "kind": s.kind,
                "ports_selected": s.ports_selected,
                "port_policy": s.port_policy,
                "rho": s.rho,
                "n_max": s.n_max,
            }
            for s in cfg.schemes
        ],
    }
