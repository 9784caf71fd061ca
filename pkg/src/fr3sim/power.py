"""Component-based radio and network power model.

Each radio's draw decomposes into five parts: always-on baseline, baseband
processing (scales with bandwidth), transceiver chains, power-amplifier
overhead, and the radiated-output term P_out/efficiency with
P_out = linear(tx_power) x load_fraction. Presets are per technology and
deployment class and ship as a data file for recalibration.

Architectures: AAU radios (5G/6G and by extension all per-TRX-amplifier
units) count PA overhead per chain; legacy MCPA radios count one shared
per-band block, and co-located 4G carriers whose bands are spectrally
adjacent share a single block per (site, sector) adjacency group.
"""

import json
from dataclasses import dataclass, replace
from importlib import resources

import numpy as np

from .units import dbm_to_watt

MCPA_ADJACENCY_GAP_GHZ = 0.25


@dataclass(frozen=True)
class PowerParams:
    p_baseline_w: float
    p_baseband_per_mhz_w: float
    p_per_trx_w: float
    p_pa_overhead_per_chain_w: float
    pa_efficiency: float
    architecture: str  # "MCPA_shared" | "AAU_per_trx"

    def __post_init__(self):
        vals = (self.p_baseline_w, self.p_baseband_per_mhz_w,
                self.p_per_trx_w, self.p_pa_overhead_per_chain_w)
        if any(v < 0 for v in vals):
            raise ValueError("power components must be non-negative")
        if not 0.0 < self.pa_efficiency <= 1.0:
            raise ValueError("pa_efficiency must be in (0, 1]")
        if self.architecture not in ("MCPA_shared", "AAU_per_trx"):
            raise ValueError(f"unknown architecture {self.architecture!r}")


@dataclass
class RadioPower:
    radio_id: int
    technology: str
    deployment_class: str
    n_trx: int
    bandwidth_mhz: float
    load_fraction: float
    baseline_w: float
    baseband_w: float
    trx_w: float
    pa_overhead_w: float
    radiated_w: float

    @property
    def total_w(self) -> float:
        return (self.baseline_w + self.baseband_w + self.trx_w
                + self.pa_overhead_w + self.radiated_w)


@dataclass
class PowerReport:
    radios: list
    network_total_kw: float
    by_technology_kw: dict
    by_component_kw: dict


def load_power_presets(path=None) -> dict:
    if path is None:
        text = resources.files("fr3sim.data").joinpath("power_presets.json").read_text()
    else:
        with open(path) as f:
            text = f.read()
    doc = json.loads(text)
    return {k: PowerParams(**v) for k, v in doc.items() if not k.startswith("_")}


def params_for(cell, presets: dict) -> PowerParams:
    key = f"SixG_{cell.deployment_class}" if cell.technology == "SixG" \
        else cell.technology
    return presets[key]


def radio_power(cell, load_fraction: float, params: PowerParams) -> RadioPower:
    """Five-component draw of one radio at the given load.

    load_fraction is the fraction of the carrier's PRBs actually carrying a
    transmission, in [0, 1].
    """
    if not 0.0 <= load_fraction <= 1.0:
        raise ValueError(f"load_fraction {load_fraction} outside [0, 1]")
    pa_chains = cell.n_trx if params.architecture == "AAU_per_trx" else 1
    p_out = dbm_to_watt(cell.tx_power_dbm) * load_fraction
    return RadioPower(
        radio_id=cell.id, technology=cell.technology,
        deployment_class=cell.deployment_class, n_trx=cell.n_trx,
        bandwidth_mhz=cell.bandwidth_mhz, load_fraction=load_fraction,
        baseline_w=params.p_baseline_w,
        baseband_w=params.p_baseband_per_mhz_w * cell.bandwidth_mhz,
        trx_w=cell.n_trx * params.p_per_trx_w,
        pa_overhead_w=pa_chains * params.p_pa_overhead_per_chain_w,
        radiated_w=p_out / params.pa_efficiency)


def _dedupe_mcpa_blocks(topo, radios: dict) -> None:
    """Within each (site, sector) group of MCPA radios, spectrally adjacent
    carriers share one PA-overhead block (kept on the lowest cell id)."""
    groups = {}
    for cell in topo.cells:
        if cell.id not in radios:
            continue
        groups.setdefault((cell.site_id, round(cell.azimuth_deg, 3)), []).append(cell)
    for members in groups.values():
        mcpa = [c for c in members
                if radios[c.id].pa_overhead_w > 0 and _is_mcpa(radios[c.id])]
        if len(mcpa) < 2:
            continue
        mcpa.sort(key=lambda c: c.carrier_ghz)
        chain = [mcpa[0]]
        for c in mcpa[1:]:
            if c.carrier_ghz - chain[-1].carrier_ghz <= MCPA_ADJACENCY_GAP_GHZ:
                chain.append(c)
            else:
                _share_block(chain, radios)
                chain = [c]
        _share_block(chain, radios)


def _is_mcpa(radio: RadioPower) -> bool:
    return getattr(radio, "_mcpa", False)


def _share_block(chain, radios) -> None:
    if len(chain) < 2:
        return
    owner = min(chain, key=lambda c: c.id)
    for c in chain:
        if c.id != owner.id:
            radios[c.id].pa_overhead_w = 0.0


def network_power(topo, load_fractions: dict, presets: dict) -> PowerReport:
    """Sum radio_power over all radios with MCPA block sharing applied.

    load_fractions: cell_id -> occupied-PRB fraction (missing cells idle).
    """
    radios = {}
    for cell in topo.cells:
        params = params_for(cell, presets)
        rp = radio_power(cell, float(load_fractions.get(cell.id, 0.0)), params)
        rp._mcpa = params.architecture == "MCPA_shared"
        radios[cell.id] = rp
    _dedupe_mcpa_blocks(topo, radios)
    entries = [radios[c.id] for c in topo.cells]
    by_tech = {}
    by_comp = {"baseline": 0.0, "baseband": 0.0, "trx": 0.0,
               "pa_overhead": 0.0, "radiated": 0.0}
    total = 0.0
    for r in entries:
        total += r.total_w
        by_tech[r.technology] = by_tech.get(r.technology, 0.0) + r.total_w / 1e3
        by_comp["baseline"] += r.baseline_w / 1e3
        by_comp["baseband"] += r.baseband_w / 1e3
        by_comp["trx"] += r.trx_w / 1e3
        by_comp["pa_overhead"] += r.pa_overhead_w / 1e3
        by_comp["radiated"] += r.radiated_w / 1e3
    return PowerReport(radios=entries, network_total_kw=total / 1e3,
                       by_technology_kw=by_tech, by_component_kw=by_comp)
