"""Experiment driver: drop loop, aggregation, consistency pass, file outputs.

A run evaluates the configured schemes over many independent drops and
writes per-scheme CDF tables plus a manifest.  All randomness is keyed by
(seed, drop, purpose), so results are identical for any worker count, and
all file contents are built in memory before anything is written: a failed
run leaves no partial outputs.
"""

from __future__ import annotations

import csv
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .aging import AgingProfile, FrameConfig
from .config import RunConfig
from .downlink import (DownlinkPowerControl, downlink_power_control,
                       downlink_sinr_coherent, downlink_sinr_noncoherent)
from .energy import EnergyResult, aggregate_energy, sum_se, total_power
from .estimation import EstimationStatistics, assign_pilots, estimation_stats
from .montecarlo import downlink_oracle, smallcell_oracle, smallcell_oracle_n1, uplink_oracle
from .results import SEResult
from .sampling import stream
from .scenario import Scenario
from .uplink import (UplinkPowerControl, full_power, mf_weights, sccpc_cellfree,
                     sccpc_smallcell, smallcell_closed_form_perinstant, smallcell_se,
                     uplink_se_lsfd, uplink_se_mf, uplink_sinr_cf)

# purpose keys for the per-drop random streams
_SALT_SCENARIO = 0
_SALT_PILOTS = 1
_SALT_SC = 2
_SALT_SC_PC = 3


# -- empirical distributions ---------------------------------------------

@dataclass
class CdfSummary:
    """Sorted sample set with the usual distribution summaries."""

    samples: np.ndarray

    def __post_init__(self):
        self.samples = np.sort(np.asarray(self.samples, dtype=float).ravel())
        if self.samples.size == 0:
            raise ValueError("empty sample set")

    def quantile(self, q) -> float:
        return float(np.quantile(self.samples, q))

    @property
    def median(self) -> float:
        return self.quantile(0.5)

    @property
    def p05(self) -> float:
        return self.quantile(0.05)

    @property
    def mean(self) -> float:
        return float(self.samples.mean())

    def rows(self):
        """(value, empirical CDF) pairs, probability (i + 1) / M."""
        m = self.samples.size
        return [(float(v), (i + 1) / m) for i, v in enumerate(self.samples)]


def cdf(values) -> CdfSummary:
    return CdfSummary(np.asarray(values))


def _drop_jackknife(samples: np.ndarray, fn):
    """Leave-one-drop-out standard error of fn over pooled per-UE samples."""
    d = samples.shape[0]
    full = float(fn(samples.reshape(-1)))
    if d < 2:
        return full, float("nan")
    vals = np.array([float(fn(np.delete(samples, i, axis=0).reshape(-1)))
                     for i in range(d)])
    return full, float(np.sqrt((d - 1) / d * ((vals - vals.mean()) ** 2).sum()))


# -- one drop -------------------------------------------------------------

@dataclass
class DropContext:
    """Everything deterministic about one drop, before any scheme runs."""

    scenario: Scenario
    pilots: object
    stats: EstimationStatistics
    frame: FrameConfig
    profile: AgingProfile
    pc_cf: UplinkPowerControl            # cell-free uplink power control
    dpc: DownlinkPowerControl = None


@dataclass
class DropResult:
    se: dict                             # scheme -> (K,) bits/s/Hz
    energy: EnergyResult = None
    extras: dict = field(default_factory=dict)


def build_drop(cfg: RunConfig, drop_index: int,
               frame: FrameConfig = None, profile: AgingProfile = None) -> DropContext:
    if frame is None:
        frame = cfg.frame()
    if profile is None:
        profile = cfg.profile(frame)
    scn = cfg.build_scenario(stream(cfg.seed, drop_index, _SALT_SCENARIO))
    pilots = assign_pilots(cfg.scenario.K, frame.tau_p,
                           stream(cfg.seed, drop_index, _SALT_PILOTS),
                           cfg.pilot_powers())
    stats = estimation_stats(scn, pilots, profile, frame, cfg.sigma2)
    if cfg.uplink.power_control == "sccpc":
        pc_cf = sccpc_cellfree(scn.lsf.beta, cfg.p_ul)
    else:
        pc_cf = full_power(cfg.scenario.K, cfg.p_ul)
    dpc = None
    if cfg.downlink.schemes:
        dpc = downlink_power_control(stats, scn.lsf.beta,
                                     cfg.downlink.power_control, cfg.p_dl)
    return DropContext(scenario=scn, pilots=pilots, stats=stats, frame=frame,
                       profile=profile, pc_cf=pc_cf, dpc=dpc)


def _smallcell_for_drop(cfg: RunConfig, ctx: DropContext, drop_index: int):
    """Small-cell SE with the AP association always chosen under full power."""
    args = (ctx.scenario, ctx.stats, ctx.pilots, ctx.profile, ctx.frame)
    kwargs = dict(est_draws=cfg.uplink.sc_est_draws,
                  candidate_aps=cfg.uplink.sc_candidate_aps)
    res = smallcell_se(*args, full_power(cfg.scenario.K, cfg.p_ul),
                       seed=stream(cfg.seed, drop_index, _SALT_SC), **kwargs)
    if cfg.uplink.power_control == "sccpc":
        serving = res.extras["serving_ap"]
        pc = sccpc_smallcell(ctx.scenario.lsf.beta, serving, cfg.p_ul)
        res = smallcell_se(*args, pc, seed=stream(cfg.seed, drop_index, _SALT_SC_PC),
                           serving_ap=serving, **kwargs)
        res.extras["pc"] = pc
    else:
        res.extras["pc"] = full_power(cfg.scenario.K, cfg.p_ul)
    return res


def evaluate_drop(cfg: RunConfig, drop_index: int,
                  frame: FrameConfig = None, profile: AgingProfile = None) -> DropResult:
    """All configured schemes on one drop; returns per-UE SE per scheme."""
    ctx = build_drop(cfg, drop_index, frame, profile)
    results: dict[str, SEResult] = {}
    for sch in cfg.uplink.schemes:
        if sch == "lsfd":
            results[sch] = uplink_se_lsfd(ctx.stats, ctx.pilots, ctx.profile,
                                          ctx.frame, ctx.pc_cf)
        elif sch == "mf":
            results[sch] = uplink_se_mf(ctx.stats, ctx.pilots, ctx.profile,
                                        ctx.frame, ctx.pc_cf)
        elif sch == "sc":
            results[sch] = _smallcell_for_drop(cfg, ctx, drop_index)
    for sch in cfg.downlink.schemes:
        if sch == "coherent":
            results[sch] = downlink_sinr_coherent(ctx.stats, ctx.pilots,
                                                  ctx.profile, ctx.frame, ctx.dpc)
        else:
            results[sch] = downlink_sinr_noncoherent(ctx.stats, ctx.pilots,
                                                     ctx.profile, ctx.frame, ctx.dpc)

    energy = None
    ul_pick = next((s for s in ("lsfd", "mf", "sc") if s in results), None)
    dl_pick = next((s for s in ("coherent", "noncoherent") if s in results), None)
    if ul_pick and dl_pick:
        pc = results[ul_pick].extras["pc"] if ul_pick == "sc" else ctx.pc_cf
        se_sum = sum_se(results[ul_pick], results[dl_pick])
        energy = total_power(cfg.power_model(), ctx.frame, ctx.scenario.dims,
                             pc.p_u, pc.eta, ctx.dpc.p_d, ctx.dpc.mu,
                             ctx.stats.tr_q, se_sum, cfg.sigma2)

    extras = {}
    if "sc" in results:
        extras["serving_ap"] = results["sc"].extras["serving_ap"]
    return DropResult(se={k: v.se for k, v in results.items()},
                      energy=energy, extras=extras)


def _drop_task(args):
    cfg, d = args
    return d, evaluate_drop(cfg, d)


def _map_drops(cfg: RunConfig):
    if cfg.workers <= 1:
        frame = cfg.frame()
        profile = cfg.profile(frame)
        return [evaluate_drop(cfg, d, frame, profile) for d in range(cfg.drops)]
    with ProcessPoolExecutor(max_workers=cfg.workers) as ex:
        pairs = list(ex.map(_drop_task, [(cfg, d) for d in range(cfg.drops)]))
    pairs.sort(key=lambda t: t[0])
    return [r for _, r in pairs]


# -- closed form vs simulation -------------------------------------------

def _oracle_seed(cfg: RunConfig, idx: int) -> int:
    """Integer seed for one consistency check, decorrelated from the drops."""
    return int(np.random.SeedSequence((cfg.seed, 77, idx)).generate_state(1)[0])


def _compare(link, scheme, quantity, instants, closed, orc_val, orc_err):
    rows = []
    for j, n in enumerate(instants):
        for k in range(closed.shape[0]):
            o = float(orc_val[k, j])
            c = float(closed[k, j])
            rel = abs(c - o) / max(abs(o), np.finfo(float).tiny)
            rows.append({"link": link, "scheme": scheme, "quantity": quantity,
                         "instant": int(n), "ue": k, "closed": c, "oracle": o,
                         "oracle_stderr": float(orc_err[k, j]), "rel_err": rel})
    return rows


def consistency_pass(cfg: RunConfig, drop_index: int = 0):
    """Check each closed-form SINR against its simulation estimate on one drop.

    Returns (rows, max_rel_err); each row compares one (scheme, instant, UE)
    value at cfg.trials simulation trials.
    """
    ctx = build_drop(cfg, drop_index)
    frame, profile = ctx.frame, ctx.profile
    probes = np.array([frame.lam, (frame.lam + frame.tau_c) // 2, frame.tau_c])
    idx = probes - frame.lam
    rows = []

    for sch in cfg.uplink.schemes:
        if sch == "lsfd":
            res = uplink_se_lsfd(ctx.stats, ctx.pilots, profile, frame, ctx.pc_cf)
            w = res.extras["weights"][:, idx, :]
            orc = uplink_oracle(ctx.scenario, ctx.stats, ctx.pilots, profile, frame,
                                ctx.pc_cf, w, probes, cfg.trials,
                                seed=_oracle_seed(cfg, 0))
            rows += _compare("uplink", sch, "sinr", probes, res.sinr[:, idx],
                             orc.sinr, orc.stderr)
        elif sch == "mf":
            res = uplink_se_mf(ctx.stats, ctx.pilots, profile, frame, ctx.pc_cf)
            orc = uplink_oracle(ctx.scenario, ctx.stats, ctx.pilots, profile, frame,
                                ctx.pc_cf, mf_weights(ctx.scenario.dims.L), probes,
                                cfg.trials, seed=_oracle_seed(cfg, 1))
            rows += _compare("uplink", sch, "sinr", probes, res.sinr[:, idx],
                             orc.sinr, orc.stderr)
        elif sch == "sc":
            rows += _smallcell_consistency(cfg, ctx, probes)

    for i, sch in enumerate(cfg.downlink.schemes):
        closed = downlink_sinr_coherent(ctx.stats, ctx.pilots, profile, frame, ctx.dpc) \
            if sch == "coherent" else \
            downlink_sinr_noncoherent(ctx.stats, ctx.pilots, profile, frame, ctx.dpc)
        orc = downlink_oracle(ctx.scenario, ctx.stats, ctx.pilots, profile, frame,
                              ctx.dpc, probes, cfg.trials, mode=sch,
                              seed=_oracle_seed(cfg, 4 + i))
        rows += _compare("downlink", sch, "sinr", probes, closed.sinr[:, idx],
                         orc.sinr, orc.stderr)

    max_rel = max((r["rel_err"] for r in rows), default=0.0)
    return rows, max_rel


def _smallcell_consistency(cfg: RunConfig, ctx: DropContext, probes):
    """Small-cell closed path vs an independently seeded estimate, per instant.

    With single-antenna APs the exponential-integral expression is checked
    against the estimate-conditioned oracle; with multiple antennas two
    independent draws of the conditional-average estimator are compared.
    Both sides are evaluated at the AP the closed path would select.
    """
    K = cfg.scenario.K
    pc = full_power(K, cfg.p_ul)
    if ctx.scenario.dims.N == 1:
        se_inst = smallcell_closed_form_perinstant(
            ctx.scenario.lsf.beta, ctx.stats, ctx.pilots, ctx.profile, ctx.frame,
            pc, ctx.frame.data_instants)
        serving = (se_inst.sum(axis=2)).argmax(axis=1)
        closed = se_inst[np.arange(K), serving][:, probes - ctx.frame.lam]
        orc = smallcell_oracle_n1(ctx.scenario, ctx.stats, ctx.pilots, ctx.profile,
                                  ctx.frame, pc, probes, cfg.trials,
                                  seed=_oracle_seed(cfg, 2))
        o_val = orc.extras["se_inst"][np.arange(K), serving]
        o_err = orc.extras["se_inst_stderr"][np.arange(K), serving]
        return _compare("uplink", "sc", "se_inst", probes, closed, o_val, o_err)
    cand_n = cfg.uplink.sc_candidate_aps
    a = smallcell_oracle(ctx.scenario, ctx.stats, ctx.pilots, ctx.profile, ctx.frame,
                         pc, probes, cfg.trials, seed=_oracle_seed(cfg, 2),
                         candidate_aps=cand_n)
    b = smallcell_oracle(ctx.scenario, ctx.stats, ctx.pilots, ctx.profile, ctx.frame,
                         pc, probes, cfg.trials, seed=_oracle_seed(cfg, 3),
                         candidate_aps=cand_n)
    pos = a.extras["se_inst"].sum(axis=2).argmax(axis=1)
    a_val = a.extras["se_inst"][np.arange(K), pos]
    b_val = b.extras["se_inst"][np.arange(K), pos]
    b_err = b.extras["se_inst_stderr"][np.arange(K), pos]
    return _compare("uplink", "sc", "se_inst", probes, a_val, b_val, b_err)


# -- full runs ------------------------------------------------------------

@dataclass
class RunResult:
    config: RunConfig
    se_samples: dict                     # scheme -> (drops, K)
    energy_drops: list
    energy: EnergyResult = None
    oracle_rows: list = None
    oracle_max_rel_err: float = None
    oracle_passed: bool = None
    out_dir: str = None
    files: list = field(default_factory=list)

    def summary(self) -> dict:
        out = {}
        for sch, samples in sorted(self.se_samples.items()):
            c = cdf(samples)
            out[sch] = {"median": c.median, "p05": c.p05, "mean": c.mean}
        return out


def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _build_outputs(result: RunResult) -> list:
    files = []
    for sch in sorted(result.se_samples):
        rows = [(_fmt(v), _fmt(p)) for v, p in cdf(result.se_samples[sch]).rows()]
        files.append((f"cdf_{sch}.csv", _csv_text(["se_bits_per_hz", "cdf"], rows)))
    if result.energy_drops:
        rows = [(d, _fmt(e.p_tx_ul), _fmt(e.p_tx_dl), _fmt(e.p_cp),
                 _fmt(e.p_total), _fmt(e.se_sum), _fmt(e.ee))
                for d, e in enumerate(result.energy_drops)]
        files.append(("energy.csv", _csv_text(
            ["drop", "p_tx_ul_w", "p_tx_dl_w", "p_cp_w", "p_total_w",
             "se_sum_bits_per_hz", "ee_bits_per_joule"], rows)))
    if result.oracle_rows is not None:
        rows = [(r["link"], r["scheme"], r["quantity"], r["instant"], r["ue"],
                 _fmt(r["closed"]), _fmt(r["oracle"]), _fmt(r["oracle_stderr"]),
                 _fmt(r["rel_err"]))
                for r in result.oracle_rows]
        files.append(("oracle_report.csv", _csv_text(
            ["link", "scheme", "quantity", "instant", "ue", "closed", "oracle",
             "oracle_stderr", "rel_err"], rows)))

    # the worker count is an execution detail with no effect on the numbers;
    # keeping it out of the manifest makes outputs byte-identical across
    # worker counts
    cfg_dict = result.config.to_dict()
    cfg_dict.pop("workers", None)
    manifest = {
        "config": cfg_dict,
        "versions": {"cfmimo": _package_version(), "numpy": np.__version__},
        "summary": result.summary(),
        "energy": None,
        "oracle": None,
        "files": [name for name, _ in files] + ["run_manifest.json"],
    }
    if result.energy is not None:
        e = result.energy
        manifest["energy"] = {"p_tx_ul_w": e.p_tx_ul, "p_tx_dl_w": e.p_tx_dl,
                              "p_cp_w": e.p_cp, "p_total_w": e.p_total,
                              "se_sum_bits_per_hz": e.se_sum,
                              "ee_bits_per_joule": e.ee}
    if result.oracle_rows is not None:
        manifest["oracle"] = {"trials": result.config.trials,
                              "rel_tol": result.config.oracle_rel_tol,
                              "max_rel_err": result.oracle_max_rel_err,
                              "passed": result.oracle_passed}
    files.append(("run_manifest.json",
                  json.dumps(manifest, indent=2, sort_keys=True) + "\n"))
    return files


def _package_version() -> str:
    try:
        from importlib.metadata import PackageNotFoundError, version
        return version("cfmimo")
    except Exception:
        return "unknown"


def run_experiment(cfg: RunConfig, out_dir=None, write: bool = True) -> RunResult:
    """Evaluate all drops, optionally run the consistency pass, write outputs.

    Output files are only written after every drop has finished; rerunning
    with the same config and seed reproduces them byte for byte.
    """
    drops = _map_drops(cfg)
    schemes = sorted(drops[0].se)
    se_samples = {sch: np.stack([d.se[sch] for d in drops]) for sch in schemes}
    energy_drops = [d.energy for d in drops if d.energy is not None]
    result = RunResult(config=cfg, se_samples=se_samples, energy_drops=energy_drops,
                       energy=aggregate_energy(energy_drops) if energy_drops else None)
    if cfg.trials > 0:
        rows, max_rel = consistency_pass(cfg)
        result.oracle_rows = rows
        result.oracle_max_rel_err = max_rel
        result.oracle_passed = bool(max_rel <= cfg.oracle_rel_tol)
    if write:
        result.out_dir = str(out_dir if out_dir is not None else cfg.out_dir)
        files = _build_outputs(result)
        os.makedirs(result.out_dir, exist_ok=True)
        for name, text in files:
            with open(os.path.join(result.out_dir, name), "w") as fh:
                fh.write(text)
        result.files = [name for name, _ in files]
    return result


# -- parameter sweeps -----------------------------------------------------

_AXIS_PATHS = {
    "f_D_Ts": "aging.f_D_Ts",
    "N": "scenario.N",
    "L": "scenario.L",
    "tau_p": "aging.tau_p",
    "asd_deg": "scenario.asd_deg",
}

_SWEEP_STATS = (("median", lambda x: np.quantile(x, 0.5)),
                ("p05", lambda x: np.quantile(x, 0.05)),
                ("mean", np.mean))


def sweep(cfg: RunConfig, axis: str, values, out_dir=None, write: bool = True):
    """Rerun the experiment along one axis; returns and writes tidy rows.

    Columns: axis value, scheme, power-control mode, statistic (median, p05,
    mean over the pooled per-UE SEs, plus energy figures when both link
    directions run), value, and a leave-one-drop-out standard error.
    """
    if axis not in _AXIS_PATHS:
        raise ValueError(f"unknown sweep axis {axis!r}; one of {sorted(_AXIS_PATHS)}")
    rows = []
    for v in values:
        sub = RunConfig.from_dict(cfg.to_dict())
        sub.trials = 0
        sub.override(_AXIS_PATHS[axis], v)
        res = run_experiment(sub, write=False)
        for sch in sorted(res.se_samples):
            pmode = (sub.downlink.power_control if sch in ("coherent", "noncoherent")
                     else sub.uplink.power_control)
            for stat_name, fn in _SWEEP_STATS:
                val, err = _drop_jackknife(res.se_samples[sch], fn)
                rows.append({"axis_value": v, "scheme": sch, "power_mode": pmode,
                             "statistic": stat_name, "value": val, "stderr": err})
        if res.energy_drops:
            se_sums = np.array([e.se_sum for e in res.energy_drops])
            totals = np.array([e.p_total for e in res.energy_drops])
            bw = sub.power_model().bandwidth_hz

            def ee_of(keep):
                return bw * se_sums[keep].mean() / totals[keep].mean()

            d = len(se_sums)
            full = ee_of(np.ones(d, dtype=bool))
            if d >= 2:
                vals = np.array([ee_of(np.arange(d) != i) for i in range(d)])
                err = float(np.sqrt((d - 1) / d * ((vals - vals.mean()) ** 2).sum()))
            else:
                err = float("nan")
            rows.append({"axis_value": v, "scheme": "lsfd+coherent",
                         "power_mode": sub.uplink.power_control, "statistic": "ee",
                         "value": float(full), "stderr": err})
            rows.append({"axis_value": v, "scheme": "lsfd+coherent",
                         "power_mode": sub.uplink.power_control,
                         "statistic": "p_total", "value": float(totals.mean()),
                         "stderr": float(totals.std(ddof=1) / np.sqrt(d)) if d >= 2
                         else float("nan")})
    if write:
        out = str(out_dir if out_dir is not None else cfg.out_dir)
        os.makedirs(out, exist_ok=True)
        table = [(r["axis_value"], r["scheme"], r["power_mode"], r["statistic"],
                  _fmt(r["value"]), _fmt(r["stderr"])) for r in rows]
        with open(os.path.join(out, f"sweep_{axis}.csv"), "w") as fh:
            fh.write(_csv_text([axis, "scheme", "power_mode", "statistic",
                                "value", "stderr"], table))
    return rows


def run_energy_curve(cfg: RunConfig, l_values, drops=None):
    """One aggregated EnergyResult per AP count; used for the EE-vs-L curve."""
    out = []
    for l_val in l_values:
        sub = RunConfig.from_dict(cfg.to_dict())
        sub.trials = 0
        if drops is not None:
            sub.drops = int(drops)
        if "lsfd" not in sub.uplink.schemes:
            sub.uplink.schemes = ["lsfd"] + list(sub.uplink.schemes)
        if "coherent" not in sub.downlink.schemes:
            sub.downlink.schemes = ["coherent"] + list(sub.downlink.schemes)
        sub.override("scenario.L", int(l_val))
        res = run_experiment(sub, write=False)
        out.append((int(l_val), res.energy))
    return out
