"""Cell-free massive MIMO spectral and energy efficiency under channel aging.

Closed-form effective-SINR expressions for CPU combining (statistics-optimal
and equal weights), single-serving-AP operation, and coherent/non-coherent
downlink transmission, together with the Monte Carlo estimators that
validate them and a drop-loop experiment harness.
"""

from .aging import (AgingProfile, FrameConfig, aging_profile, design_tau_c,
                    doppler_from_speed, rho, rho_bar)
from .config import ConfigError, RunConfig, dbm_to_watt
from .downlink import (DownlinkPowerControl, downlink_power_control,
                       downlink_sinr_coherent, downlink_sinr_coherent_uncorrelated,
                       downlink_sinr_noncoherent, per_ap_power)
from .energy import (EnergyResult, PowerModel, aggregate_energy, ee_vs_l_sweep,
                     sum_se, total_power)
from .estimation import (EstimationStatistics, PilotAssignment, assign_pilots,
                         error_covariance, estimation_stats, sample_estimates)
from .harness import (CdfSummary, RunResult, cdf, consistency_pass,
                      evaluate_drop, run_energy_curve, run_experiment, sweep)
from .montecarlo import (OracleResult, downlink_oracle, sample_trajectory,
                         smallcell_oracle, smallcell_oracle_n1, uplink_oracle)
from .results import SEResult
from .scenario import (LargeScaleFading, Scenario, ScenarioGeometry,
                       SpatialCorrelation, SystemDims, build_correlation,
                       generate_drop, generate_scenario, pathloss_db,
                       shadowing_covariance)
from .special import besselj0, besselj0_first_zero, e1, expe1
from .uplink import (UplinkPowerControl, full_power, lsfd_weights, mf_weights,
                     sccpc_cellfree, sccpc_smallcell,
                     smallcell_closed_form_perinstant, smallcell_se,
                     uplink_se_lsfd, uplink_se_mf, uplink_sinr_cf,
                     uplink_sinr_uncorrelated)

__version__ = "0.1.0"

__all__ = [
    "AgingProfile", "FrameConfig", "aging_profile", "design_tau_c",
    "doppler_from_speed", "rho", "rho_bar",
    "ConfigError", "RunConfig", "dbm_to_watt",
    "DownlinkPowerControl", "downlink_power_control", "downlink_sinr_coherent",
    "downlink_sinr_coherent_uncorrelated",
    "downlink_sinr_noncoherent", "per_ap_power",
    "EnergyResult", "PowerModel", "aggregate_energy", "ee_vs_l_sweep",
    "sum_se", "total_power",
    "EstimationStatistics", "PilotAssignment", "assign_pilots",
    "error_covariance", "estimation_stats", "sample_estimates",
    "CdfSummary", "RunResult", "cdf", "consistency_pass", "evaluate_drop",
    "run_energy_curve", "run_experiment", "sweep",
    "OracleResult", "downlink_oracle", "sample_trajectory", "smallcell_oracle",
    "smallcell_oracle_n1", "uplink_oracle",
    "SEResult",
    "LargeScaleFading", "Scenario", "ScenarioGeometry", "SpatialCorrelation",
    "SystemDims", "build_correlation", "generate_drop", "generate_scenario",
    "pathloss_db", "shadowing_covariance",
    "besselj0", "besselj0_first_zero", "e1", "expe1",
    "UplinkPowerControl", "full_power", "lsfd_weights", "mf_weights",
    "sccpc_cellfree", "sccpc_smallcell", "smallcell_closed_form_perinstant",
    "smallcell_se", "uplink_se_lsfd",
    "uplink_se_mf", "uplink_sinr_cf",
    "uplink_sinr_uncorrelated",
]
