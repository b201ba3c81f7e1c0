"""Run configuration: JSON schema, validation, and object builders.

The file format is plain JSON with one section per model stage.  All
physical quantities carry their unit in the key name (dBm, MHz, ms, GHz).
Unknown keys are rejected with the offending dotted path, and parse ->
serialize -> parse is the identity.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .aging import AgingProfile, FrameConfig, aging_profile, design_tau_c, doppler_from_speed
from .energy import PowerModel
from .scenario import Scenario, SystemDims, generate_scenario


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass
class ScenarioSection:
    L: int = 100
    K: int = 20
    N: int = 2
    area_side_m: float = 500.0
    asd_deg: object = 30.0          # degrees, or the string "uncorrelated"
    shadowing: bool = True


@dataclass
class AgingSection:
    tau_c: object = 200             # samples, or "auto" for the sign-change rule
    tau_p: int = 10
    T_s_ms: float = 0.01
    f_c_GHz: float = 2.0
    f_D_Ts: object = 0.002          # scalar or per-UE list
    speeds_kmh: object = None       # alternative to f_D_Ts


@dataclass
class EstimationSection:
    p_pilot_dBm: object = 20.0      # scalar or per-UE list
    noise_dBm: float = -96.0


@dataclass
class UplinkSection:
    schemes: list = field(default_factory=lambda: ["lsfd", "mf"])
    power_control: str = "full"
    p_dBm: float = 20.0
    sc_est_draws: int = 200
    sc_candidate_aps: object = None


@dataclass
class DownlinkSection:
    schemes: list = field(default_factory=lambda: ["coherent", "noncoherent"])
    power_control: str = "full"
    p_dBm: float = 23.0


@dataclass
class PowerSection:
    B_MHz: float = 20.0
    amp_eff_ue: float = 0.4
    amp_eff_ap: float = 0.4
    P_ue_W: float = 0.1
    P_ap_antenna_W: float = 0.2
    P_fronthaul_W: float = 0.825
    P_traffic_W_per_Gbps: float = 0.25
    normalized_snr: bool = False


_SECTION_TYPES = {
    "scenario": ScenarioSection,
    "aging": AgingSection,
    "estimation": EstimationSection,
    "uplink": UplinkSection,
    "downlink": DownlinkSection,
    "power": PowerSection,
}

_UL_SCHEMES = ("lsfd", "mf", "sc")
_DL_SCHEMES = ("coherent", "noncoherent")
_POWER_MODES = ("full", "sccpc")


@dataclass
class RunConfig:
    scenario: ScenarioSection = field(default_factory=ScenarioSection)
    aging: AgingSection = field(default_factory=AgingSection)
    estimation: EstimationSection = field(default_factory=EstimationSection)
    uplink: UplinkSection = field(default_factory=UplinkSection)
    downlink: DownlinkSection = field(default_factory=DownlinkSection)
    power: PowerSection = field(default_factory=PowerSection)
    drops: int = 200
    trials: int = 0                 # > 0 turns on the consistency pass
    seed: int = 1
    out_dir: str = "results"
    workers: int = 1
    oracle_rel_tol: float = 0.05

    # -- construction ---------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigError("top level must be an object")
        cfg = cls()
        known_top = set(_SECTION_TYPES) | {
            "drops", "trials", "seed", "out_dir", "workers", "oracle_rel_tol"}
        for key, val in data.items():
            if key not in known_top:
                raise ConfigError(f"unknown key: {key}")
            if key in _SECTION_TYPES:
                section = _SECTION_TYPES[key]()
                if not isinstance(val, dict):
                    raise ConfigError(f"{key}: must be an object")
                for sub, subval in val.items():
                    if not hasattr(section, sub):
                        raise ConfigError(f"unknown key: {key}.{sub}")
                    setattr(section, sub, subval)
                setattr(cfg, key, section)
            else:
                setattr(cfg, key, val)
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return asdict(self)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def override(self, dotted: str, value):
        """Set a config key by dotted path, e.g. 'scenario.L=50'."""
        parts = dotted.split(".")
        obj = self
        for p in parts[:-1]:
            if not hasattr(obj, p):
                raise ConfigError(f"unknown key: {dotted}")
            obj = getattr(obj, p)
        if not hasattr(obj, parts[-1]):
            raise ConfigError(f"unknown key: {dotted}")
        setattr(obj, parts[-1], value)
        self.validate()

    # -- validation -----------------------------------------------------

    def validate(self):
        s = self.scenario
        for name, v in (("L", s.L), ("K", s.K), ("N", s.N)):
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"scenario.{name}: must be a positive integer")
        if not (isinstance(s.area_side_m, (int, float)) and s.area_side_m > 0):
            raise ConfigError("scenario.area_side_m: must be positive")
        if not (s.asd_deg == "uncorrelated"
                or (isinstance(s.asd_deg, (int, float)) and s.asd_deg > 0)):
            raise ConfigError('scenario.asd_deg: must be positive degrees or "uncorrelated"')

        a = self.aging
        if not (a.tau_c == "auto" or (isinstance(a.tau_c, int) and a.tau_c > a.tau_p)):
            raise ConfigError('aging.tau_c: must be an integer > tau_p, or "auto"')
        if not (isinstance(a.tau_p, int) and a.tau_p >= 1):
            raise ConfigError("aging.tau_p: must be a positive integer")
        if a.f_D_Ts is None and a.speeds_kmh is None:
            raise ConfigError("aging: set either f_D_Ts or speeds_kmh")
        for fname in ("f_D_Ts", "speeds_kmh"):
            v = getattr(a, fname)
            if v is None:
                continue
            vals = np.atleast_1d(np.asarray(v, dtype=float))
            if np.any(vals < 0):
                raise ConfigError(f"aging.{fname}: must be nonnegative")
            if vals.size not in (1, s.K):
                raise ConfigError(f"aging.{fname}: need a scalar or one value per UE")

        if self.uplink.power_control not in _POWER_MODES:
            raise ConfigError(f"uplink.power_control: one of {_POWER_MODES}")
        if self.downlink.power_control not in _POWER_MODES:
            raise ConfigError(f"downlink.power_control: one of {_POWER_MODES}")
        for sch in self.uplink.schemes:
            if sch not in _UL_SCHEMES:
                raise ConfigError(f"uplink.schemes: unknown scheme {sch!r}")
        for sch in self.downlink.schemes:
            if sch not in _DL_SCHEMES:
                raise ConfigError(f"downlink.schemes: unknown scheme {sch!r}")
        if not self.uplink.schemes and not self.downlink.schemes:
            raise ConfigError("no schemes requested")

        for name, v in (("drops", self.drops), ("seed", self.seed),
                        ("workers", self.workers)):
            if not isinstance(v, int) or (v < 1 and name != "seed"):
                raise ConfigError(f"{name}: must be a positive integer")
        if not isinstance(self.trials, int) or self.trials < 0:
            raise ConfigError("trials: must be a nonnegative integer")

    # -- derived quantities ---------------------------------------------

    @property
    def sigma2(self) -> float:
        return dbm_to_watt(self.estimation.noise_dBm)

    def f_d_ts_values(self) -> np.ndarray:
        a = self.aging
        if a.f_D_Ts is not None:
            vals = np.atleast_1d(np.asarray(a.f_D_Ts, dtype=float))
        else:
            t_s = a.T_s_ms * 1e-3
            speeds = np.atleast_1d(np.asarray(a.speeds_kmh, dtype=float))
            vals = np.array([doppler_from_speed(v, a.f_c_GHz * 1e9, t_s) for v in speeds])
        if vals.size == 1:
            vals = np.full(self.scenario.K, vals[0])
        return vals

    def frame(self) -> FrameConfig:
        a = self.aging
        tau_c = a.tau_c
        if tau_c == "auto":
            fmax = float(self.f_d_ts_values().max())
            if fmax <= 0:
                raise ConfigError('aging.tau_c: "auto" needs a positive Doppler')
            tau_c = design_tau_c(fmax)
            if tau_c <= a.tau_p:
                raise ConfigError("aging.tau_c: design rule gives tau_c <= tau_p")
        return FrameConfig(tau_c=tau_c, tau_p=a.tau_p, t_s=a.T_s_ms * 1e-3)

    def profile(self, frame: FrameConfig) -> AgingProfile:
        return aging_profile(frame, self.f_d_ts_values())

    def build_scenario(self, seed) -> Scenario:
        s = self.scenario
        asd = None if s.asd_deg == "uncorrelated" else float(s.asd_deg)
        return generate_scenario(SystemDims(L=s.L, K=s.K, N=s.N),
                                 s.area_side_m, seed, s.shadowing, asd)

    def pilot_powers(self) -> np.ndarray:
        vals = np.atleast_1d(np.asarray(self.estimation.p_pilot_dBm, dtype=float))
        if vals.size == 1:
            vals = np.full(self.scenario.K, vals[0])
        elif vals.size != self.scenario.K:
            raise ConfigError("estimation.p_pilot_dBm: need a scalar or one value per UE")
        return dbm_to_watt(vals)

    @property
    def p_ul(self) -> float:
        return dbm_to_watt(self.uplink.p_dBm)

    @property
    def p_dl(self) -> float:
        return dbm_to_watt(self.downlink.p_dBm)

    def power_model(self) -> PowerModel:
        p = self.power
        return PowerModel(bandwidth_hz=p.B_MHz * 1e6,
                          amp_eff_ue=p.amp_eff_ue, amp_eff_ap=p.amp_eff_ap,
                          p_circuit_ue=p.P_ue_W,
                          p_circuit_ap_antenna=p.P_ap_antenna_W,
                          p_fronthaul_fixed=p.P_fronthaul_W,
                          p_fronthaul_traffic=p.P_traffic_W_per_Gbps * 1e-9,
                          normalized_snr=p.normalized_snr)
