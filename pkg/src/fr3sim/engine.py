"""Pipeline orchestration: scenario -> channel -> association -> scheduling
-> link -> power, over Monte-Carlo snapshots, with CSV/JSON reports.

Per run the topology, load profile and hotspot centers are fixed; each
snapshot re-drops UEs and redraws channel and scheduling randomness.
Percentiles are nearest-rank over the per-UE sample pooled across
snapshots; power is averaged over snapshots.
"""

import csv
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import assoc, channel, link, power, sched
from .scenario import (FIVEG, FOURG, SIXG, ScenarioConfig, Topology,
                       drop_users, generate_topology, load_scenario)

log = logging.getLogger(__name__)

_DOM_LOS = 61
_DOM_SHADOW = 62
_DOM_O2I = 63
_DOM_SCHED = 64

TECH_ORDER = (FOURG, FIVEG, SIXG)


@dataclass
class RunSpec:
    config: ScenarioConfig
    n_snapshots: int = 10
    out_dir: Optional[str] = None
    noise_figure_db: float = link.NOISE_FIGURE_DB
    overhead_factor: float = link.OVERHEAD_FACTOR
    mcs_table_path: Optional[str] = None
    power_presets_path: Optional[str] = None

    def __post_init__(self):
        if self.n_snapshots < 1:
            raise ValueError("n_snapshots must be >= 1")

    @classmethod
    def from_file(cls, path, **kwargs) -> "RunSpec":
        config, topo = load_scenario(path)
        spec = cls(config=config, **kwargs)
        spec._explicit_topology = topo
        return spec


@dataclass
class MetricsReport:
    strategy: str
    seed: int
    n_snapshots: int
    throughput_mbps: np.ndarray          # pooled per-UE sample
    percentiles: dict                    # mean/p5/p50/p95
    attachment_share: dict
    power_kw: dict                       # total + by_technology + by_component
    config_hash: str
    per_snapshot_power: list = field(default_factory=list)


def nearest_rank(values, pct: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    v = np.sort(np.asarray(values, dtype=float))
    if v.size == 0:
        return float("nan")
    rank = max(1, math.ceil(pct / 100.0 * v.size))
    return float(v[rank - 1])


def config_hash(config: ScenarioConfig) -> str:
    from .scenario import _config_to_dict
    blob = json.dumps(_config_to_dict(config), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# snapshot pipeline


@dataclass
class SnapshotResult:
    ues: list
    attachments: assoc.AttachmentTable
    allocations: dict
    state: link.SnapshotState
    eff_db: np.ndarray
    se: np.ndarray
    n_alloc: np.ndarray
    throughput_mbps: np.ndarray
    power_report: power.PowerReport


def build_links(topo: Topology, ues, snapshot: int,
                noise_figure_db: float = link.NOISE_FIGURE_DB):
    """Frozen large-scale state for every UE-cell pair.

    Returns (coupling_db, los, k_db) arrays of shape (n_ue, n_cell):
    coupling = -(pathloss + shadowing + O2I); k_db is the Rician K-factor
    (NaN on NLoS links, which fade Rayleigh).
    """
    cfg = topo.config
    n_ue, n_cell = len(ues), len(topo.cells)
    ux = np.array([u.x for u in ues])
    uy = np.array([u.y for u in ues])
    indoor = np.array([u.indoor for u in ues])
    uh = cfg.ue_height_m

    rng_los = channel_rng(cfg.seed, _DOM_LOS, snapshot)
    rng_sf = channel_rng(cfg.seed, _DOM_SHADOW, snapshot)
    rng_o2i = channel_rng(cfg.seed, _DOM_O2I, snapshot)
    u_los = rng_los.uniform(size=(n_ue, n_cell))
    z_sf = rng_sf.standard_normal((n_ue, n_cell))
    d_in = channel.sample_inside_distance(rng_o2i, size=n_ue)

    coupling = np.empty((n_ue, n_cell))
    los = np.empty((n_ue, n_cell), dtype=bool)
    k_db = np.full((n_ue, n_cell), np.nan)
    for ci, cell in enumerate(topo.cells):
        site = topo.site_by_id(cell.site_id)
        model = channel.classify_model(site.height_m)
        dx, dy = ux - site.x, uy - site.y
        d2d = np.hypot(dx, dy)
        d3d = np.hypot(d2d, site.height_m - uh)
        p_los = channel.los_probability(model, d2d, uh)
        l = u_los[:, ci] < p_los
        pl = channel.pathloss(model, l, cell.carrier_ghz, d2d, d3d,
                              site.height_m, uh)
        sigma = np.where(l, channel.SHADOWING_STD_DB[(model, True)],
                         channel.SHADOWING_STD_DB[(model, False)])
        sf = z_sf[:, ci] * sigma
        o2i = np.where(indoor,
                       channel.o2i_material_loss_db(cell.carrier_ghz)
                       + 0.5 * d_in, 0.0)
        coupling[:, ci] = -(pl + sf + o2i)
        los[:, ci] = l
        k_db[:, ci] = np.where(l, channel.DEFAULT_RICIAN_K_DB[model], np.nan)
    return coupling, los, k_db


def channel_rng(seed, domain, snapshot):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((int(seed), int(domain), int(snapshot)))))


def run_snapshot(topo: Topology, snapshot: int, spec: RunSpec,
                 mcs_table: link.McsTable, presets: dict) -> SnapshotResult:
    cfg = topo.config
    ues = drop_users(cfg, topo, snapshot)
    ux = np.array([u.x for u in ues])
    uy = np.array([u.y for u in ues])

    coupling, _, k_db = build_links(topo, ues, snapshot, spec.noise_figure_db)
    table = assoc.associate_all(topo, coupling, ux, uy, cfg.ue_height_m)
    assoc.refine_all(topo, table, ux, uy, cfg.ue_height_m)

    allocations = {}
    for ci, cell in enumerate(topo.cells):
        members = np.flatnonzero(table.serving_cell == ci)
        pairs = {int(u): (int(table.csirs_pair[u, 0]), int(table.csirs_pair[u, 1]))
                 for u in members}
        demands = {int(u): ues[u].demand_prb for u in members}
        rng = channel_rng(cfg.seed, _DOM_SCHED, snapshot * 100000 + cell.id)
        allocations[cell.id] = sched.allocate(cell.id, cell.n_prb, pairs,
                                              demands, rng)

    fading = link.FadingStore(cfg.seed, snapshot, topo.cells, k_db)
    state = link.SnapshotState(
        topo=topo, ue_x=ux, ue_y=uy, ue_height_m=cfg.ue_height_m,
        coupling_db=coupling, attachments=table, allocations=allocations,
        fading=fading, noise_figure_db=spec.noise_figure_db)
    eff, se, n_alloc, tput = link.compute_ue_metrics(state, mcs_table,
                                                     spec.overhead_factor)

    loads = {cid: a.occupied_prb_fraction() for cid, a in allocations.items()}
    preport = power.network_power(topo, loads, presets)
    return SnapshotResult(ues=ues, attachments=table, allocations=allocations,
                          state=state, eff_db=eff, se=se, n_alloc=n_alloc,
                          throughput_mbps=tput, power_report=preport)


# ---------------------------------------------------------------------------
# report files


def _write_ue_metrics(path, results):
    cols = ["snapshot", "ue_id", "x_m", "y_m", "indoor", "hotspot_id",
            "demand_prb", "technology", "cell_id", "ssb_beam", "csirs_beam0",
            "csirs_beam1", "rsrp_dbm", "allocated_prb", "eff_sinr_db_l0",
            "eff_sinr_db_l1", "se_l0", "se_l1", "throughput_mbps"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for snap, r in enumerate(results):
            t = r.attachments
            for u, ue in enumerate(r.ues):
                outage = t.serving_cell[u] < 0
                w.writerow([
                    snap, ue.id, f"{ue.x:.2f}", f"{ue.y:.2f}", int(ue.indoor),
                    "" if ue.hotspot_id is None else ue.hotspot_id,
                    ue.demand_prb,
                    "outage" if outage else t.technology[u],
                    -1 if outage else int(t.serving_cell[u]),
                    -1 if outage else int(t.ssb_beam[u]),
                    int(t.csirs_pair[u, 0]), int(t.csirs_pair[u, 1]),
                    "" if outage else f"{t.rsrp_dbm[u]:.3f}",
                    int(r.n_alloc[u]),
                    _fmt(r.eff_db[u, 0]), _fmt(r.eff_db[u, 1]),
                    f"{r.se[u, 0]:.4f}", f"{r.se[u, 1]:.4f}",
                    f"{r.throughput_mbps[u]:.6f}"])


def _fmt(x):
    return "" if np.isnan(x) else f"{x:.4f}"


def _write_power(path, results):
    cols = ["snapshot", "radio_id", "technology", "deployment_class", "n_trx",
            "bandwidth_mhz", "load_fraction", "baseline_w", "baseband_w",
            "trx_w", "pa_overhead_w", "radiated_w", "total_w"]
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(cols)
        for snap, r in enumerate(results):
            for rp in r.power_report.radios:
                w.writerow([snap, rp.radio_id, rp.technology,
                            rp.deployment_class, rp.n_trx, rp.bandwidth_mhz,
                            f"{rp.load_fraction:.6f}", f"{rp.baseline_w:.3f}",
                            f"{rp.baseband_w:.3f}", f"{rp.trx_w:.3f}",
                            f"{rp.pa_overhead_w:.3f}", f"{rp.radiated_w:.3f}",
                            f"{rp.total_w:.3f}"])


def _write_allocations(path, results):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["snapshot", "cell", "beam", "ue", "prb_count"])
        for snap, r in enumerate(results):
            for cid in sorted(r.allocations):
                for row in sched.allocation_rows(r.allocations[cid]):
                    w.writerow([snap, *row])


def summarize(spec: RunSpec, results) -> MetricsReport:
    cfg = spec.config
    pooled = np.concatenate([r.throughput_mbps for r in results])
    percentiles = {
        "mean": float(pooled.mean()),
        "p5": nearest_rank(pooled, 5),
        "p50": nearest_rank(pooled, 50),
        "p95": nearest_rank(pooled, 95),
    }
    n_total = sum(len(r.ues) for r in results)
    share = {}
    for tech in TECH_ORDER:
        n = sum(int((r.attachments.technology == tech).sum()) for r in results)
        share[tech] = n / n_total
    share["outage"] = sum(int((r.attachments.serving_cell < 0).sum())
                          for r in results) / n_total
    totals = [r.power_report.network_total_kw for r in results]
    by_tech, by_comp = {}, {}
    for r in results:
        for k, v in r.power_report.by_technology_kw.items():
            by_tech[k] = by_tech.get(k, 0.0) + v / len(results)
        for k, v in r.power_report.by_component_kw.items():
            by_comp[k] = by_comp.get(k, 0.0) + v / len(results)
    return MetricsReport(
        strategy=cfg.strategy, seed=cfg.seed, n_snapshots=spec.n_snapshots,
        throughput_mbps=pooled, percentiles=percentiles,
        attachment_share=share,
        power_kw={"total": float(np.mean(totals)),
                  "by_technology": {k: float(v) for k, v in sorted(by_tech.items())},
                  "by_component": {k: float(v) for k, v in sorted(by_comp.items())}},
        config_hash=config_hash(cfg), per_snapshot_power=totals)


def summary_dict(report: MetricsReport, cfg: ScenarioConfig) -> dict:
    return {
        "meta": {
            "format": 1,
            "strategy": report.strategy,
            "seed": report.seed,
            "n_snapshots": report.n_snapshots,
            "sixg_bandwidth_mhz": cfg.sixg_bandwidth_mhz,
            "sixg_n_trx": cfg.sixg_n_trx,
            "config_sha256": report.config_hash,
        },
        "throughput_mbps": report.percentiles,
        "attachment_share": {k: round(v, 6) for k, v in
                             sorted(report.attachment_share.items())},
        "power_kw": report.power_kw,
    }


def run(spec: RunSpec) -> MetricsReport:
    """Execute the full pipeline for one strategy; deterministic under
    (config.seed, spec). Writes ue_metrics.csv, power.csv, allocations.csv
    and summary.json when out_dir is set."""
    cfg = spec.config
    topo = getattr(spec, "_explicit_topology", None)
    if topo is None:
        topo = generate_topology(cfg)
    mcs = link.McsTable.from_file(spec.mcs_table_path)
    presets = power.load_power_presets(spec.power_presets_path)
    results = []
    for snap in range(spec.n_snapshots):
        try:
            results.append(run_snapshot(topo, snap, spec, mcs, presets))
        except Exception as e:
            raise RuntimeError(
                f"snapshot {snap} failed in stage "
                f"{type(e).__name__}: {e}") from e
    report = summarize(spec, results)
    if spec.out_dir:
        os.makedirs(spec.out_dir, exist_ok=True)
        _write_ue_metrics(os.path.join(spec.out_dir, "ue_metrics.csv"), results)
        _write_power(os.path.join(spec.out_dir, "power.csv"), results)
        _write_allocations(os.path.join(spec.out_dir, "allocations.csv"), results)
        with open(os.path.join(spec.out_dir, "summary.json"), "w") as f:
            json.dump(summary_dict(report, cfg), f, indent=2, sort_keys=True)
            f.write("\n")
    return report


def compare(specs, baseline_index: int = 0, out_path: Optional[str] = None):
    """Run several specs and tabulate percentiles/power with ratios to the
    baseline row. Warns (does not fail) on mismatched seeds."""
    seeds = {s.config.seed for s in specs}
    if len(seeds) > 1:
        log.warning("compare() specs use different seeds %s; ratios mix "
                    "topologies", sorted(seeds))
    reports = [run(s) for s in specs]
    base = reports[baseline_index]
    rows = []
    for spec, rep in zip(specs, reports):
        row = {
            "strategy": rep.strategy,
            "sixg_bandwidth_mhz": spec.config.sixg_bandwidth_mhz,
            "sixg_n_trx": spec.config.sixg_n_trx,
            "mean_mbps": rep.percentiles["mean"],
            "p5_mbps": rep.percentiles["p5"],
            "p50_mbps": rep.percentiles["p50"],
            "p95_mbps": rep.percentiles["p95"],
            "power_kw": rep.power_kw["total"],
        }
        for key, bkey in (("ratio_mean", "mean"), ("ratio_p5", "p5"),
                          ("ratio_p50", "p50"), ("ratio_p95", "p95")):
            denom = base.percentiles[bkey]
            row[key] = rep.percentiles[bkey] / denom if denom else float("nan")
        row["ratio_power"] = (rep.power_kw["total"] / base.power_kw["total"]
                              if base.power_kw["total"] else float("nan"))
        rows.append(row)
    if out_path:
        with open(out_path, "w", newline="") as f:
            w = csv.DictWriter(f, fieldnames=list(rows[0].keys()))
            w.writeheader()
            for row in rows:
                w.writerow({k: (f"{v:.6f}" if isinstance(v, float) else v)
                            for k, v in row.items()})
    return rows
