"""Scenario configuration and the named presets."""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .ladder import FlippingModel, LadderParams
from .single_atom import RateParams, rabi_from_photon_rate

MODELS = ("single", "ladder", "decomposition")
MODES = ("trajectory", "spectrum", "fractions", "relaxation", "g2", "revival")


class ConfigError(ValueError):
    pass


# Named scenarios; rates in units of gamma_rd.
PRESETS = {
    "fig3": dict(n_atoms=(3,), omega=30.0, gamma=1.0, gamma_rg=1.0, gamma_rd=1.0,
                 flipping="prop:0.5,0.5", t_max=10.0, t_steps=2001),
    "fig4": dict(n_atoms=(3,), omega=30.0, gamma=1.0, gamma_rg=1.0, gamma_rd=1.0,
                 flipping="prop:0.5,0.5", seed_time=2.5, delta_steps=2048),
    # gamma_rg chosen inside the ordering Omega >> gamma_rg >> gamma_rd
    "fig5": dict(n_atoms=(10, 100), omega=300.0, gamma=1.0, gamma_rg=10.0, gamma_rd=1.0,
                 flipping="none", mode="fractions"),
    "mollow": dict(n_atoms=(1,), omega=30.0, gamma=1.0, gamma_rg=0.0, gamma_rd=0.0,
                   flipping="none", seed_time=8.0, delta_steps=4097),
    "wfl": dict(n_atoms=(1,), omega=0.3, gamma=1.0, gamma_rg=1.0, gamma_rd=1.0,
                flipping="none", seed_time=8.0 / 3.0, delta_range=0.1, delta_steps=2049),
}


def parse_flipping(spec: str, base_dir: Optional[Path] = None) -> FlippingModel:
    """``none`` | ``prop:<c_rg>,<c_rd>`` | ``table:<file>`` (two columns D_rg, D_rd per rung)."""
    spec = spec.strip()
    if spec == "none":
        return FlippingModel.none()
    kind, _, arg = spec.partition(":")
    try:
        if kind == "prop":
            c_rg, c_rd = (float(x) for x in arg.split(","))
            return FlippingModel.proportional(c_rg, c_rd)
        if kind == "table":
            path = Path(arg)
            if base_dir is not None and not path.is_absolute():
                path = base_dir / path
            rows = np.loadtxt(path, delimiter="," if path.suffix == ".csv" else None, ndmin=2)
            return FlippingModel.table(rows[:, 0], rows[:, 1])
    except (ValueError, OSError, IndexError) as exc:
        raise ConfigError(f"bad flipping spec {spec!r}: {exc}") from exc
    raise ConfigError(f"unknown flipping spec {spec!r}")


@dataclass
class ScenarioConfig:
    model: str = "ladder"
    mode: str = "trajectory"
    preset: Optional[str] = None
    n_atoms: tuple = (3,)
    omega: Optional[float] = 30.0
    photon_rate: Optional[float] = None
    gamma: float = 1.0
    gamma_rg: float = 1.0
    gamma_rd: float = 1.0
    flipping: str = "none"
    t_max: Optional[float] = None
    t_steps: int = 1201
    delta_range: Optional[float] = None
    delta_steps: int = 2048
    seed_time: Optional[float] = None
    method: str = "quadrature"
    tau_max: Optional[float] = None
    tau_steps: int = 4001
    out: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        self.n_atoms = tuple(int(n) for n in self.n_atoms)

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}")
        if not self.n_atoms or min(self.n_atoms) < 1:
            raise ConfigError("n must list atom numbers >= 1")
        if self.model == "single" and self.n_atoms != (1,):
            raise ConfigError("the single-atom model has N = 1")
        for name in ("gamma", "gamma_rg", "gamma_rd"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be a non-negative rate")
        if self.photon_rate is not None and self.photon_rate < 0:
            raise ConfigError("photon rate must be non-negative")
        if self.resolved_omega() < 0:
            raise ConfigError("omega must be non-negative")
        if self.gamma + self.gamma_rg + self.gamma_rd <= 0:
            raise ConfigError("total decay rate must be positive")
        for name in ("t_max", "delta_range", "seed_time", "tau_max"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("t_steps", "delta_steps", "tau_steps"):
            if getattr(self, name) < 2:
                raise ConfigError(f"{name} must be at least 2 (empty grid)")
        if self.method not in ("quadrature", "resolvent", "both"):
            raise ConfigError("method must be quadrature, resolvent or both")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if len(self.n_atoms) > 1 and self.mode not in ("fractions", "relaxation"):
            raise ConfigError("several atom numbers are only supported with --fractions or --relaxation")
        self.flipping_model()
        return self

    def resolved_omega(self) -> float:
        if self.photon_rate is not None:
            return rabi_from_photon_rate(self.photon_rate, self.gamma)
        return float(self.omega if self.omega is not None else 0.0)

    def rate_params(self) -> RateParams:
        try:
            return RateParams(self.gamma, self.gamma_rg, self.gamma_rd, self.resolved_omega())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def flipping_model(self) -> FlippingModel:
        try:
            return parse_flipping(self.flipping)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def ladder_params(self, n: int) -> LadderParams:
        try:
            return LadderParams(n, self.rate_params(), self.flipping_model())
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["n_atoms"] = list(self.n_atoms)
        d["omega_resolved"] = self.resolved_omega()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known - {"omega_resolved"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        d = {k: v for k, v in d.items() if k in known}
        if "n_atoms" in d and isinstance(d["n_atoms"], int):
            d["n_atoms"] = (d["n_atoms"],)
        return cls(**d)


def load_config_file(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def resolve(model: str, preset: Optional[str] = None, file_values: Optional[dict] = None,
            overrides: Optional[dict] = None) -> ScenarioConfig:
    """Defaults, then preset, then config file, then explicit flags."""
    values: dict = {"model": model}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
        values.update(PRESETS[preset])
        values["preset"] = preset
    if file_values:
        values.update(file_values)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    values["model"] = model
    if model == "single":
        values.setdefault("n_atoms", (1,))
    try:
        cfg = ScenarioConfig.from_dict(values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()

