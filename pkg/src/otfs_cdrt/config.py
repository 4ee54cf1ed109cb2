"""Scenario and sweep configuration from TOML files.

Unknown keys are rejected so typos surface as errors instead of silently
falling back to defaults.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .channel import LINKS, ChannelProfile
from .frame import FrameParams
from .modem import PowerAllocation
from .montecarlo import McConfig, default_workers
from .protocol import SCHEMES, RateTargets, Scenario

PRESETS = ("general", "special")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SweepConfig:
    scenario: Scenario
    snr_grid_db: tuple[float, ...]
    schemes: tuple[str, ...] = SCHEMES
    mc: McConfig = field(default_factory=McConfig)
    pr_over_ps: float = 0.5
    source: str = "<defaults>"

    def __post_init__(self):
        if not self.snr_grid_db:
            raise ConfigError("the SNR grid is empty")

    def scenario_at(self, snr_db: float, scheme: str | None = None) -> Scenario:
        rho_s = db_to_linear(snr_db)
        return self.scenario.with_snr(
            rho_s, rho_s * self.pr_over_ps, scheme=scheme or self.scenario.scheme
        )


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


_ALLOWED = {
    "frame": {"M", "N", "delta_f", "carrier_hz"},
    "power": {"alpha_c", "alpha_e", "pr_over_ps"},
    "rates": {"R_xc", "R_xe", "R_xbarc"},
    "channel": {"k_taps", "l_taps", "omega", "links"},
    "sweep": {"snr_db", "schemes", "strict_eq19", "payload"},
    "montecarlo": {"trials", "seed", "workers"},
}


def _table(data: dict, name: str) -> dict:
    section = data.get(name, {})
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table")
    unknown = set(section) - _ALLOWED[name]
    if unknown:
        raise ConfigError(f"[{name}] has unknown keys: {', '.join(sorted(unknown))}")
    return section


def _get(section: dict, table: str, key: str, kind, default: Any = None):
    if key not in section:
        if default is None:
            raise ConfigError(f"[{table}] missing required key '{key}'")
        return default
    value = section[key]
    try:
        if kind is int and (isinstance(value, bool) or int(value) != value):
            raise TypeError
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"[{table}] {key} = {value!r} is not a valid {kind.__name__}") from None


def _snr_grid(spec) -> tuple[float, ...]:
    if isinstance(spec, dict):
        try:
            start, stop, step = float(spec["start"]), float(spec["stop"]), float(spec["step"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("[sweep] snr_db table needs numeric start, stop and step") from None
        if step <= 0 or stop < start:
            raise ConfigError("[sweep] snr_db needs step > 0 and stop >= start")
        count = int(round((stop - start) / step)) + 1
        return tuple(float(x) for x in np.round(start + step * np.arange(count), 10))
    if isinstance(spec, list):
        if not spec:
            raise ConfigError("[sweep] the SNR grid is empty")
        try:
            return tuple(float(x) for x in spec)
        except (TypeError, ValueError):
            raise ConfigError("[sweep] snr_db list must be numeric") from None
    raise ConfigError("[sweep] snr_db must be a list or a {start, stop, step} table")


def _profiles(section: dict) -> dict[str, ChannelProfile]:
    omega = section.get("omega", {})
    links = section.get("links", {})
    if set(omega) - set(LINKS) or set(links) - set(LINKS):
        bad = sorted((set(omega) | set(links)) - set(LINKS))
        raise ConfigError(f"[channel] unknown link(s) {bad}; links are {list(LINKS)}")
    out = {}
    for link in LINKS:
        override = links.get(link, {})
        k = override.get("k_taps", section.get("k_taps"))
        l = override.get("l_taps", section.get("l_taps"))
        if k is None or l is None:
            raise ConfigError(f"[channel] no taps given for link {link}")
        om = override.get("omega", omega.get(link))
        if om is None:
            raise ConfigError(f"[channel.omega] missing {link}")
        try:
            out[link] = ChannelProfile.from_taps(k, l, float(om), link)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[channel] link {link}: {exc}") from None
    return out


def parse_config(data: dict, source: str = "<dict>") -> SweepConfig:
    unknown = set(data) - set(_ALLOWED)
    if unknown:
        raise ConfigError(f"unknown table(s): {', '.join(sorted(unknown))}")
    fr = _table(data, "frame")
    pw = _table(data, "power")
    rt = _table(data, "rates")
    chan = _table(data, "channel")
    sw = _table(data, "sweep")
    mc = _table(data, "montecarlo")
    try:
        frame = FrameParams(
            M=_get(fr, "frame", "M", int),
            N=_get(fr, "frame", "N", int),
            delta_f=_get(fr, "frame", "delta_f", float),
            carrier_hz=_get(fr, "frame", "carrier_hz", float, 4e9),
        )
        alloc = PowerAllocation(
            _get(pw, "power", "alpha_c", float, 0.1), _get(pw, "power", "alpha_e", float, 0.9)
        )
        ratio = _get(pw, "power", "pr_over_ps", float, 0.5)
        rates = RateTargets(
            _get(rt, "rates", "R_xc", float, 1.8),
            _get(rt, "rates", "R_xe", float, 1.0),
            _get(rt, "rates", "R_xbarc", float, 1.0),
        )
        schemes = tuple(sw.get("schemes", SCHEMES))
        bad = [s for s in schemes if s not in SCHEMES]
        if bad or not schemes:
            raise ConfigError(f"[sweep] schemes {bad or '[]'} invalid; choose from {SCHEMES}")
        grid = _snr_grid(sw.get("snr_db", {"start": 0.0, "stop": 40.0, "step": 2.0}))
        scenario = Scenario(
            frame=frame,
            profiles=_profiles(chan),
            alloc=alloc,
            rho_s=db_to_linear(grid[0]),
            rho_r=db_to_linear(grid[0]) * ratio,
            rates=rates,
            scheme=schemes[0],
            strict_eq19=bool(sw.get("strict_eq19", False)),
            payload=str(sw.get("payload", "qpsk")),
        )
        mcc = McConfig(
            trials=_get(mc, "montecarlo", "trials", int, 100_000),
            master_seed=_get(mc, "montecarlo", "seed", int, 2024),
            parallelism=_get(mc, "montecarlo", "workers", int, default_workers()),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return SweepConfig(scenario, grid, schemes, mcc, ratio, source)


def load_config(path: str | Path) -> SweepConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    return loads_config(text, str(path))


def loads_config(text: str, source: str = "<string>") -> SweepConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        # message carries "(at line X, column Y)"
        raise ConfigError(f"{source}: {exc}") from None
    try:
        return parse_config(data, source)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def preset_text(name: str) -> str:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")
    return resources.files("otfs_cdrt").joinpath("configs", f"{name}.toml").read_text()


def load_preset(name: str) -> SweepConfig:
    return loads_config(preset_text(name), f"<preset:{name}>")
