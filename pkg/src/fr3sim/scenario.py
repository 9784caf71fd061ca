"""Multi-layer network topology and UE population.

Builds the three-layer (4G/5G/6G) deployment either from a statistical
generator calibrated to the commercial-deployment statistics (cell counts,
bandwidth split, TRX and tx-power distributions) or from an explicit
site/cell listing in a YAML scenario file.

Coverage regions: a cell's "estimated coverage area" is the Voronoi region
of its site (among sites of the same layer) intersected with its 120 degree
sector wedge and the rectangular service area.
"""

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
import yaml

from .antenna import ArrayGeometry
from .sched import estimate_demand

FOURG = "FourG"
FIVEG = "FiveG"
SIXG = "SixG"

STRATEGIES = ("FourG", "FourG_FiveG", "CoLoc6G_UMa",
              "NonCoLoc6G_UMi", "NonCoLoc6G_UPi")

STRATEGY_LAYERS = {
    "FourG": (FOURG,),
    "FourG_FiveG": (FOURG, FIVEG),
    "CoLoc6G_UMa": (FOURG, FIVEG, SIXG),
    "NonCoLoc6G_UMi": (FOURG, FIVEG, SIXG),
    "NonCoLoc6G_UPi": (FOURG, FIVEG, SIXG),
}

ALLOWED_TRX = (2, 4, 8, 64, 128, 256)

# RNG stream tags (SeedSequence spawn keys); fixed so that adding a layer
# never perturbs the draws of another.
_DOM_SITES_4G = 11
_DOM_CELLS_4G = 12
_DOM_SITES_5G = 21
_DOM_CELLS_5G = 22
_DOM_SIXG = 31
_DOM_LOAD = 41
_DOM_HOTSPOTS = 42
_DOM_UE_DROP = 51


class ScenarioError(Exception):
    """Configuration or generation failure (with diagnostic)."""


class ScenarioFileError(ScenarioError):
    """Scenario file does not match the documented schema."""


def domain_rng(seed: int, domain: int, *extra) -> np.random.Generator:
    """Independent deterministic stream for one purpose under one seed."""
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence((int(seed), int(domain)) + tuple(int(e) for e in extra))))


# ---------------------------------------------------------------------------
# domain types


@dataclass
class Site:
    id: int
    x: float
    y: float
    height_m: float
    layer: str


@dataclass
class Cell:
    id: int
    site_id: int
    azimuth_deg: float
    technology: str
    carrier_ghz: float
    bandwidth_mhz: float
    n_prb: int
    n_trx: int
    tx_power_dbm: float
    array: ArrayGeometry
    n_ssb_beams: int
    n_csirs_beams: int
    deployment_class: str  # UMa | UMi | UPi

    def __post_init__(self):
        if self.n_prb <= 0 or self.bandwidth_mhz <= 0:
            raise ScenarioError(f"cell {self.id}: n_prb and bandwidth must be positive")
        if self.n_trx not in ALLOWED_TRX:
            raise ScenarioError(f"cell {self.id}: n_trx {self.n_trx} not in {ALLOWED_TRX}")
        if self.n_csirs_beams > self.n_trx:
            raise ScenarioError(
                f"cell {self.id}: {self.n_csirs_beams} CSI-RS beams exceeds "
                f"{self.n_trx} TRX ports")

    @property
    def prb_bandwidth_hz(self) -> float:
        return prb_bandwidth_hz(self.technology, self.bandwidth_mhz)


@dataclass
class UserTerminal:
    id: int
    x: float
    y: float
    indoor: bool
    demand_prb: int
    height_m: float = 1.5
    hotspot_id: Optional[int] = None

    def __post_init__(self):
        if self.demand_prb < 1:
            raise ScenarioError(f"UE {self.id}: demand_prb must be >= 1")


def prb_bandwidth_hz(technology: str, bandwidth_mhz: float) -> float:
    """PRB width by numerology, keeping 273 PRBs per Table-level bandwidths:
    4G 180 kHz (15 kHz SCS), 5G 360 kHz (30 kHz), 6G 720 kHz at 200 MHz
    (60 kHz) and 1.44 MHz at 400 MHz (120 kHz)."""
    if technology == FOURG:
        return 180e3
    if technology == FIVEG:
        return 360e3
    if technology == SIXG:
        return 720e3 if bandwidth_mhz <= 200 else 1440e3
    raise ScenarioError(f"unknown technology {technology!r}")


def fourg_array(n_trx: int, downtilt_deg: float) -> ArrayGeometry:
    """4G panels: compact dual-pol column up to an 8x4 planar mMIMO array."""
    if n_trx <= 8:
        return ArrayGeometry(4, 1, True, 0.5, downtilt_deg)
    return ArrayGeometry(8, 4, True, 0.5, downtilt_deg)


def sixg_array(n_trx: int, downtilt_deg: float) -> ArrayGeometry:
    return ArrayGeometry(16 if n_trx == 128 else 32, 4, True, 0.5, downtilt_deg)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class HotspotConfig:
    count: int = 15
    ues_per_hotspot: int = 40
    radius_m: float = 40.0
    min_separation_m: float = 80.0

    def validate(self):
        if self.min_separation_m <= 0:
            raise ScenarioError("hotspot min separation must be positive")


@dataclass
class FourGLayerConfig:
    n_sites: int = 47
    n_cells: int = 204
    carriers_ghz: tuple = (1.815, 1.89, 2.02, 2.33, 2.62)
    bandwidth_mhz: float = 20.0
    n_narrowband_cells: int = 20
    narrowband_mhz: float = 10.0
    n_prb_per_mhz: float = 5.0  # LTE: 100 PRB in 20 MHz
    trx_choices: tuple = (2, 4, 8, 64)
    trx_probs: tuple = (0.30, 0.40, 0.20, 0.10)
    tx_power_median_dbm: float = 45.9
    tx_power_spread_db: float = 2.5
    tx_power_range_dbm: tuple = (40.0, 52.0)
    site_height_range_m: tuple = (20.0, 30.0)
    min_site_separation_m: float = 150.0


@dataclass
class FiveGLayerConfig:
    n_sites: int = 15
    n_cells: int = 45
    carrier_ghz: float = 2.703
    bandwidth_mhz: float = 100.0
    n_prb: int = 273
    n_trx: int = 64
    tx_power_mean_dbm: float = 53.2
    tx_power_spread_db: float = 0.8
    tx_power_range_dbm: tuple = (51.3, 54.7)
    site_height_range_m: tuple = (20.0, 30.0)
    min_site_separation_m: float = 150.0


@dataclass
class SixGLayerConfig:
    n_cells: int = 45
    carrier_ghz: float = 10.0
    n_prb: int = 273
    tx_power_uma_umi_dbm: float = 55.0
    tx_power_upi_dbm: float = 52.0
    tx_power_400mhz_boost_db: float = 3.0
    umi_height_m: float = 10.0
    upi_height_m: float = 6.0
    min_site_separation_m: float = 80.0


@dataclass
class LoadConfig:
    """Stand-in for the per-cell hourly counters, drawn once per run:
    heavy-tailed UE-count weights, and per-cell PRB usage that scales with
    the hosted UE count (usage = count x per-UE level, capped at the pool,
    so congested cells show the real busy-hour per-UE collapse)."""
    ue_weight_sigma: float = 1.0
    per_ue_demand_median: float = 24.0
    per_ue_demand_sigma: float = 0.5
    hotspot_demand_factor: float = 3.0


@dataclass
class ScenarioConfig:
    seed: int = 1
    strategy: str = "FourG_FiveG"
    area_km2: float = 6.2
    aspect_ratio: float = 1.0
    sixg_bandwidth_mhz: float = 200.0
    sixg_n_trx: int = 128
    n_baseline_ues: int = 3604
    indoor_probability: float = 0.8
    ue_height_m: float = 1.5
    downtilt_uma_deg: float = 6.0
    downtilt_umi_deg: float = 0.0
    hotspots: HotspotConfig = field(default_factory=HotspotConfig)
    fourg: FourGLayerConfig = field(default_factory=FourGLayerConfig)
    fiveg: FiveGLayerConfig = field(default_factory=FiveGLayerConfig)
    sixg: SixGLayerConfig = field(default_factory=SixGLayerConfig)
    load: LoadConfig = field(default_factory=LoadConfig)

    def validate(self):
        if self.strategy not in STRATEGIES:
            raise ScenarioError(f"unknown strategy {self.strategy!r}; "
                                f"expected one of {STRATEGIES}")
        if self.area_km2 <= 0:
            raise ScenarioError("area_km2 must be positive")
        if not 0.0 <= self.indoor_probability <= 1.0:
            raise ScenarioError("indoor_probability must be in [0, 1]")
        if self.sixg_bandwidth_mhz not in (200.0, 400.0):
            raise ScenarioError("sixg_bandwidth_mhz must be 200 or 400")
        if self.sixg_n_trx not in (128, 256):
            raise ScenarioError("sixg_n_trx must be 128 or 256")
        self.hotspots.validate()

    @property
    def area_size_m(self) -> tuple:
        w = math.sqrt(self.area_km2 * 1e6 * self.aspect_ratio)
        return w, self.area_km2 * 1e6 / w


# ---------------------------------------------------------------------------
# topology


@dataclass
class Topology:
    config: ScenarioConfig
    sites: list
    cells: list
    hotspot_centers: np.ndarray      # (n_hotspots, 2)
    sixg_positions: np.ndarray       # (n_6g_positions, 2), empty unless non-co-located
    cell_ue_counts: np.ndarray       # baseline UEs hosted per cell (0 for 6G)
    cell_prb_used: np.ndarray        # average PRBs in use per cell (0 for 6G)

    @property
    def area_size_m(self):
        return self.config.area_size_m

    def cells_of(self, technology: str):
        return [c for c in self.cells if c.technology == technology]

    def site_by_id(self, site_id: int) -> Site:
        return self.sites[site_id]

    def demand_per_ue(self) -> np.ndarray:
        """ceil(prb_used / hosted UEs) per cell, 0 where the cell hosts none."""
        out = np.zeros(len(self.cells), dtype=int)
        for i, _ in enumerate(self.cells):
            if self.cell_ue_counts[i] > 0:
                out[i] = estimate_demand(int(self.cell_prb_used[i]),
                                         int(self.cell_ue_counts[i]))
        return out

    def network_mean_demand(self) -> int:
        """Network-average per-UE PRB requirement (total usage over total
        active UEs); the demand assigned to synthetic hotspot UEs."""
        total_ues = int(self.cell_ue_counts.sum())
        if total_ues == 0:
            return 1
        return estimate_demand(int(self.cell_prb_used.sum()), total_ues)


def _truncated_normal(rng, mean, std, lo, hi, size):
    x = rng.normal(mean, std, size=size)
    for _ in range(100):
        bad = (x < lo) | (x > hi)
        if not bad.any():
            break
        x[bad] = rng.normal(mean, std, size=int(bad.sum()))
    return np.clip(x, lo, hi)


def _place_sites(rng, n, w, h, min_sep, other_positions=None, max_tries=20000):
    placed = []
    others = np.asarray(other_positions) if other_positions is not None and len(other_positions) else None
    tries = 0
    while len(placed) < n:
        tries += 1
        if tries > max_tries:
            raise ScenarioError(
                f"could not place {n} sites with {min_sep} m separation in a "
                f"{w:.0f}x{h:.0f} m area after {max_tries} tries; area too small")
        p = rng.uniform((0.0, 0.0), (w, h))
        if placed and np.min(np.linalg.norm(np.array(placed) - p, axis=1)) < min_sep:
            continue
        if others is not None and np.min(np.linalg.norm(others - p, axis=1)) < min_sep / 2:
            continue
        placed.append(p)
    return np.array(placed)


def _wrap_deg(a):
    return (np.asarray(a) + 180.0) % 360.0 - 180.0


def _sector_mask(points, site_xy, layer_site_xy, site_idx, azimuth_deg):
    """Points whose nearest same-layer site is `site_idx` and that fall in
    the 120 degree wedge around `azimuth_deg`."""
    d2 = ((points[:, None, :] - layer_site_xy[None, :, :]) ** 2).sum(axis=2)
    nearest = d2.argmin(axis=1) == site_idx
    ang = np.degrees(np.arctan2(points[:, 1] - site_xy[1], points[:, 0] - site_xy[0]))
    in_wedge = np.abs(_wrap_deg(ang - azimuth_deg)) <= 60.0
    return nearest & in_wedge


def sample_in_coverage(rng, cell: Cell, topo_sites, w, h, n, max_batches=400):
    """Uniform points in the cell's coverage region (rejection sampling)."""
    site = topo_sites[cell.site_id]
    layer_sites = [s for s in topo_sites if s.layer == cell.technology]
    layer_xy = np.array([(s.x, s.y) for s in layer_sites])
    local_idx = next(i for i, s in enumerate(layer_sites) if s.id == site.id)
    got = []
    for _ in range(max_batches):
        pts = rng.uniform((0.0, 0.0), (w, h), size=(2048, 2))
        ok = _sector_mask(pts, (site.x, site.y), layer_xy, local_idx, cell.azimuth_deg)
        got.extend(pts[ok][: n - len(got)])
        if len(got) >= n:
            return np.array(got)
    # degenerate geometry: fall back to points near the site inside the wedge
    while len(got) < n:
        r = 20.0 + 100.0 * math.sqrt(rng.uniform())
        a = math.radians(cell.azimuth_deg + rng.uniform(-55.0, 55.0))
        p = (min(max(site.x + r * math.cos(a), 1.0), w - 1.0),
             min(max(site.y + r * math.sin(a), 1.0), h - 1.0))
        got.append(p)
    return np.array(got)


def _build_fourg(config: ScenarioConfig, w, h):
    lc = config.fourg
    rng_sites = domain_rng(config.seed, _DOM_SITES_4G)
    rng_cells = domain_rng(config.seed, _DOM_CELLS_4G)
    pos = _place_sites(rng_sites, lc.n_sites, w, h, lc.min_site_separation_m)
    heights = rng_sites.uniform(*lc.site_height_range_m, size=lc.n_sites)
    sites = [Site(i, pos[i, 0], pos[i, 1], heights[i], FOURG)
             for i in range(lc.n_sites)]

    # tri-sector base plus extra carriers on random sectors up to n_cells
    rotations = rng_cells.uniform(0.0, 120.0, size=lc.n_sites)
    slots = [(s, rotations[s] + k * 120.0) for s in range(lc.n_sites) for k in range(3)]
    n_extra = lc.n_cells - len(slots)
    if n_extra < 0:
        slots = slots[:lc.n_cells]
        n_extra = 0
    extra_idx = rng_cells.choice(len(slots), size=n_extra, replace=False)

    carriers = list(lc.carriers_ghz)
    cell_slots = [(s, az, None) for (s, az) in slots]
    base_carriers = rng_cells.choice(len(carriers), size=len(slots))
    cell_slots = [(s, az, carriers[base_carriers[i]])
                  for i, (s, az, _) in enumerate(cell_slots)]
    for i in extra_idx:
        s, az, used = cell_slots[i]
        remaining = [c for c in carriers if c != used]
        cell_slots.append((s, az, remaining[rng_cells.integers(len(remaining))]))

    n = len(cell_slots)
    trx = rng_cells.choice(lc.trx_choices, size=n, p=lc.trx_probs)
    tx = _truncated_normal(rng_cells, lc.tx_power_median_dbm, lc.tx_power_spread_db,
                           *lc.tx_power_range_dbm, size=n)
    narrow = np.zeros(n, dtype=bool)
    narrow[rng_cells.choice(n, size=lc.n_narrowband_cells, replace=False)] = True

    cells = []
    for i, (s, az, carrier) in enumerate(cell_slots):
        bw = lc.narrowband_mhz if narrow[i] else lc.bandwidth_mhz
        n_prb = int(round(bw * lc.n_prb_per_mhz))
        tilt = config.downtilt_uma_deg if heights[s] > 15.0 else config.downtilt_umi_deg
        cells.append(Cell(
            id=i, site_id=s, azimuth_deg=az % 360.0, technology=FOURG,
            carrier_ghz=float(carrier), bandwidth_mhz=float(bw), n_prb=n_prb,
            n_trx=int(trx[i]), tx_power_dbm=float(tx[i]),
            array=fourg_array(int(trx[i]), tilt),
            n_ssb_beams=1, n_csirs_beams=int(trx[i]),
            deployment_class="UMa" if heights[s] > 15.0 else "UMi"))
    return sites, cells


def _build_fiveg(config: ScenarioConfig, w, h, fourg_sites, id0_site, id0_cell):
    lc = config.fiveg
    rng_sites = domain_rng(config.seed, _DOM_SITES_5G)
    rng_cells = domain_rng(config.seed, _DOM_CELLS_5G)
    other = np.array([(s.x, s.y) for s in fourg_sites])
    pos = _place_sites(rng_sites, lc.n_sites, w, h, lc.min_site_separation_m, other)
    heights = rng_sites.uniform(*lc.site_height_range_m, size=lc.n_sites)
    sites = [Site(id0_site + i, pos[i, 0], pos[i, 1], heights[i], FIVEG)
             for i in range(lc.n_sites)]
    rotations = rng_cells.uniform(0.0, 120.0, size=lc.n_sites)
    tx = _truncated_normal(rng_cells, lc.tx_power_mean_dbm, lc.tx_power_spread_db,
                           *lc.tx_power_range_dbm, size=lc.n_cells)
    cells = []
    for i in range(lc.n_cells):
        s = i // 3
        az = (rotations[s] + (i % 3) * 120.0) % 360.0
        tilt = config.downtilt_uma_deg if heights[s] > 15.0 else config.downtilt_umi_deg
        cells.append(Cell(
            id=id0_cell + i, site_id=id0_site + s, azimuth_deg=az,
            technology=FIVEG, carrier_ghz=lc.carrier_ghz,
            bandwidth_mhz=lc.bandwidth_mhz, n_prb=lc.n_prb, n_trx=lc.n_trx,
            tx_power_dbm=float(tx[i]), array=ArrayGeometry(8, 4, True, 0.5, tilt),
            n_ssb_beams=8, n_csirs_beams=lc.n_trx,
            deployment_class="UMa" if heights[s] > 15.0 else "UMi"))
    return sites, cells


def _draw_loads(config: ScenarioConfig, cells):
    """Per-cell hosted-UE counts (multinomial over lognormal weights,
    4G/5G cells only) and per-cell PRB usage."""
    rng = domain_rng(config.seed, _DOM_LOAD)
    host = np.array([c.technology in (FOURG, FIVEG) for c in cells])
    weights = np.where(host, np.exp(rng.normal(0.0, config.load.ue_weight_sigma,
                                               size=len(cells))), 0.0)
    counts = np.zeros(len(cells), dtype=int)
    if host.any():
        counts = rng.multinomial(config.n_baseline_ues, weights / weights.sum())
    # per-UE PRB requirement: the median is calibrated in 180 kHz (LTE) PRB
    # units; a carrier with wider PRBs needs proportionally fewer of them
    # for the same traffic
    per_ue = np.exp(rng.normal(np.log(config.load.per_ue_demand_median),
                               config.load.per_ue_demand_sigma, size=len(cells)))
    per_ue = per_ue * np.array([180e3 / c.prb_bandwidth_hz for c in cells])
    n_prb = np.array([c.n_prb for c in cells])
    prb_used = np.where(host, np.minimum(np.round(counts * per_ue), n_prb), 0.0)
    return counts, prb_used


def _pick_separated_positions(rng, ranked_cells, topo_sites, w, h, n, min_sep,
                              existing=None, tries_per_position=200):
    """One position per ranked cell, separated by min_sep from all others."""
    centers = [] if existing is None else [tuple(p) for p in existing]
    out = []
    for cell in ranked_cells[:n]:
        placed = False
        for _ in range(tries_per_position):
            cand = sample_in_coverage(rng, cell, topo_sites, w, h, 1)[0]
            if not centers or np.min(np.linalg.norm(
                    np.array(centers) - cand, axis=1)) >= min_sep:
                centers.append(tuple(cand))
                out.append(cand)
                placed = True
                break
        if not placed:
            raise ScenarioError(
                f"could not place a hotspot/6G position in cell {cell.id} with "
                f"{min_sep} m separation after {tries_per_position} tries")
    return np.array(out)


def _build_sixg(config: ScenarioConfig, sites, cells, hotspot_centers,
                extra_positions, id0_site, id0_cell, host_cells=None):
    lc = config.sixg
    rng = domain_rng(config.seed, _DOM_SIXG)
    strategy = config.strategy
    boost = lc.tx_power_400mhz_boost_db if config.sixg_bandwidth_mhz >= 400 else 0.0
    n_trx = config.sixg_n_trx
    n_ssb = 16 if n_trx == 128 else 32
    new_sites, new_cells = [], []

    if strategy == "CoLoc6G_UMa":
        tx = lc.tx_power_uma_umi_dbm + boost
        fiveg_cells = [c for c in cells if c.technology == FIVEG]
        for i, fc in enumerate(fiveg_cells):
            site = sites[fc.site_id]
            tilt = config.downtilt_uma_deg if site.height_m > 15.0 else config.downtilt_umi_deg
            new_cells.append(Cell(
                id=id0_cell + i, site_id=fc.site_id, azimuth_deg=fc.azimuth_deg,
                technology=SIXG, carrier_ghz=lc.carrier_ghz,
                bandwidth_mhz=config.sixg_bandwidth_mhz, n_prb=lc.n_prb,
                n_trx=n_trx, tx_power_dbm=tx, array=sixg_array(n_trx, tilt),
                n_ssb_beams=n_ssb, n_csirs_beams=n_trx,
                deployment_class="UMa" if site.height_m > 15.0 else "UMi"))
        return new_sites, new_cells

    # non-co-located: independent single-sector cells at the hotspot centers
    # plus the additional high-load positions
    klass = "UMi" if strategy == "NonCoLoc6G_UMi" else "UPi"
    height = lc.umi_height_m if klass == "UMi" else lc.upi_height_m
    tx = (lc.tx_power_uma_umi_dbm if klass == "UMi" else lc.tx_power_upi_dbm) + boost
    positions = np.vstack([hotspot_centers, extra_positions]) \
        if len(extra_positions) else hotspot_centers
    if len(positions) != lc.n_cells:
        raise ScenarioError(
            f"expected {lc.n_cells} 6G positions, got {len(positions)}")
    # traffic-aware orientation: each single-sector cell points away from
    # its source macro site, into the outer mass of the host cell's wedge
    azimuths = rng.uniform(0.0, 360.0, size=len(positions))
    if host_cells is not None:
        for i, (x, y) in enumerate(positions):
            hs = sites[host_cells[i].site_id]
            if math.hypot(x - hs.x, y - hs.y) > 1.0:
                azimuths[i] = math.degrees(math.atan2(y - hs.y, x - hs.x)) % 360.0
    for i, (x, y) in enumerate(positions):
        new_sites.append(Site(id0_site + i, float(x), float(y), height, SIXG))
        new_cells.append(Cell(
            id=id0_cell + i, site_id=id0_site + i, azimuth_deg=float(azimuths[i]),
            technology=SIXG, carrier_ghz=lc.carrier_ghz,
            bandwidth_mhz=config.sixg_bandwidth_mhz, n_prb=lc.n_prb,
            n_trx=n_trx, tx_power_dbm=tx,
            array=sixg_array(n_trx, config.downtilt_umi_deg),
            n_ssb_beams=n_ssb, n_csirs_beams=n_trx, deployment_class=klass))
    return new_sites, new_cells


def generate_topology(config: ScenarioConfig) -> Topology:
    """Build sites, cells, load profile and hotspot centers for a strategy.

    Deterministic under config.seed; the 4G and 5G layers use their own RNG
    streams so 6G additions never perturb them.
    """
    config.validate()
    w, h = config.area_size_m
    layers = STRATEGY_LAYERS[config.strategy]

    sites, cells = _build_fourg(config, w, h)
    if FIVEG in layers:
        s5, c5 = _build_fiveg(config, w, h, sites, len(sites), len(cells))
        sites, cells = sites + s5, cells + c5

    counts, prb_used = _draw_loads(config, cells)

    rng_hs = domain_rng(config.seed, _DOM_HOTSPOTS)
    order = np.lexsort((np.arange(len(cells)), -counts))
    ranked = [cells[i] for i in order]
    n_hs = config.hotspots.count
    hotspot_centers = _pick_separated_positions(
        rng_hs, ranked, sites, w, h, n_hs, config.hotspots.min_separation_m)

    sixg_positions = np.empty((0, 2))
    if SIXG in layers:
        if config.strategy != "CoLoc6G_UMa":
            n_extra = config.sixg.n_cells - n_hs
            sixg_positions = _pick_separated_positions(
                rng_hs, ranked[n_hs:], sites, w, h, n_extra,
                config.sixg.min_site_separation_m, existing=hotspot_centers)
        s6, c6 = _build_sixg(config, sites, cells, hotspot_centers,
                             sixg_positions, len(sites), len(cells),
                             host_cells=ranked[:config.sixg.n_cells])
        sites, cells = sites + s6, cells + c6
        counts = np.concatenate([counts, np.zeros(len(c6), dtype=int)])
        prb_used = np.concatenate([prb_used, np.zeros(len(c6))])

    return Topology(config=config, sites=sites, cells=cells,
                    hotspot_centers=hotspot_centers,
                    sixg_positions=sixg_positions,
                    cell_ue_counts=counts, cell_prb_used=prb_used)


# ---------------------------------------------------------------------------
# UE dropping


def drop_users(config: ScenarioConfig, topo: Topology, snapshot: int = 0):
    """Place baseline UEs per hosted-cell counts plus hotspot UEs.

    Baseline UEs are uniform within their host cell's coverage region;
    each hotspot drops `ues_per_hotspot` UEs uniformly within its radius.
    Indoor flags are independent Bernoulli(indoor_probability) draws.
    Deterministic under (config.seed, snapshot).
    """
    rng = domain_rng(config.seed, _DOM_UE_DROP, snapshot)
    w, h = config.area_size_m
    demand = topo.demand_per_ue()

    ues = []
    uid = 0
    for ci, cell in enumerate(topo.cells):
        n = int(topo.cell_ue_counts[ci])
        if n == 0:
            continue
        pts = sample_in_coverage(rng, cell, topo.sites, w, h, n)
        for k in range(n):
            ues.append(UserTerminal(
                id=uid, x=float(pts[k, 0]), y=float(pts[k, 1]),
                indoor=bool(rng.uniform() < config.indoor_probability),
                demand_prb=int(demand[ci]), height_m=config.ue_height_m))
            uid += 1

    hs = config.hotspots
    d = max(1, round(topo.network_mean_demand()
                     * config.load.hotspot_demand_factor))
    for hid, center in enumerate(topo.hotspot_centers):
        for _ in range(hs.ues_per_hotspot):
            while True:
                r = hs.radius_m * math.sqrt(rng.uniform())
                a = rng.uniform(0.0, 2.0 * math.pi)
                x, y = center[0] + r * math.cos(a), center[1] + r * math.sin(a)
                if 0.0 <= x <= w and 0.0 <= y <= h:
                    break
            ues.append(UserTerminal(
                id=uid, x=float(x), y=float(y),
                indoor=bool(rng.uniform() < config.indoor_probability),
                demand_prb=d, height_m=config.ue_height_m, hotspot_id=hid))
            uid += 1
    return ues


# ---------------------------------------------------------------------------
# scenario files (YAML)


def _config_to_dict(config: ScenarioConfig) -> dict:
    d = asdict(config)
    for key in ("hotspots", "fourg", "fiveg", "sixg", "load"):
        d[key] = {k: (list(v) if isinstance(v, tuple) else v)
                  for k, v in d[key].items()}
    return d


def _config_from_dict(data: dict) -> ScenarioConfig:
    def build(cls, sub):
        fields = {f.name: f for f in cls.__dataclass_fields__.values()}
        unknown = set(sub) - set(fields)
        if unknown:
            raise ScenarioFileError(
                f"unknown field(s) {sorted(unknown)} in {cls.__name__} section")
        kwargs = {}
        for k, v in sub.items():
            kwargs[k] = tuple(v) if isinstance(v, list) else v
        return cls(**kwargs)

    data = dict(data)
    nested = {"hotspots": HotspotConfig, "fourg": FourGLayerConfig,
              "fiveg": FiveGLayerConfig, "sixg": SixGLayerConfig,
              "load": LoadConfig}
    kwargs = {}
    for key, cls in nested.items():
        if key in data:
            sub = data.pop(key)
            if not isinstance(sub, dict):
                raise ScenarioFileError(f"section {key!r} must be a mapping")
            kwargs[key] = build(cls, sub)
    top_fields = {f.name for f in ScenarioConfig.__dataclass_fields__.values()}
    unknown = set(data) - top_fields
    if unknown:
        raise ScenarioFileError(f"unknown top-level field(s) {sorted(unknown)}")
    kwargs.update(data)
    cfg = ScenarioConfig(**kwargs)
    cfg.validate()
    return cfg


def topology_to_dict(topo: Topology) -> dict:
    return {
        "sites": [{"id": s.id, "x_m": round(s.x, 3), "y_m": round(s.y, 3),
                   "height_m": round(s.height_m, 3), "layer": s.layer}
                  for s in topo.sites],
        "cells": [{"id": c.id, "site_id": c.site_id,
                   "azimuth_deg": round(c.azimuth_deg, 3),
                   "technology": c.technology, "carrier_ghz": c.carrier_ghz,
                   "bandwidth_mhz": c.bandwidth_mhz, "n_prb": c.n_prb,
                   "n_trx": c.n_trx, "tx_power_dbm": round(c.tx_power_dbm, 3),
                   "array_rows": c.array.n_rows, "array_cols": c.array.n_cols,
                   "downtilt_deg": c.array.downtilt_deg,
                   "n_ssb_beams": c.n_ssb_beams,
                   "n_csirs_beams": c.n_csirs_beams,
                   "deployment_class": c.deployment_class}
                  for c in topo.cells],
        "hotspot_centers": [[round(float(x), 3), round(float(y), 3)]
                            for x, y in topo.hotspot_centers],
        "cell_ue_counts": [int(v) for v in topo.cell_ue_counts],
        "cell_prb_used": [float(v) for v in topo.cell_prb_used],
    }


def topology_from_dict(config: ScenarioConfig, data: dict) -> Topology:
    try:
        sites = [Site(r["id"], r["x_m"], r["y_m"], r["height_m"], r["layer"])
                 for r in data["sites"]]
        cells = []
        for r in data["cells"]:
            tilt = r.get("downtilt_deg", 0.0)
            cells.append(Cell(
                id=r["id"], site_id=r["site_id"], azimuth_deg=r["azimuth_deg"],
                technology=r["technology"], carrier_ghz=r["carrier_ghz"],
                bandwidth_mhz=r["bandwidth_mhz"], n_prb=r["n_prb"],
                n_trx=r["n_trx"], tx_power_dbm=r["tx_power_dbm"],
                array=ArrayGeometry(r["array_rows"], r["array_cols"], True, 0.5, tilt),
                n_ssb_beams=r["n_ssb_beams"], n_csirs_beams=r["n_csirs_beams"],
                deployment_class=r["deployment_class"]))
    except KeyError as e:
        raise ScenarioFileError(f"topology record missing field {e}") from None
    n = len(cells)
    counts = np.asarray(data.get("cell_ue_counts", np.zeros(n, dtype=int)), dtype=int)
    prb_used = np.asarray(data.get("cell_prb_used", np.zeros(n)), dtype=float)
    centers = np.asarray(data.get("hotspot_centers", np.empty((0, 2))), dtype=float)
    if centers.size == 0:
        centers = centers.reshape(0, 2)
    return Topology(config=config, sites=sites, cells=cells,
                    hotspot_centers=centers,
                    sixg_positions=np.empty((0, 2)),
                    cell_ue_counts=counts, cell_prb_used=prb_used)


def save_scenario(path, config: ScenarioConfig, topology: Topology = None):
    doc = {"config": _config_to_dict(config)}
    if topology is not None:
        doc["topology"] = topology_to_dict(topology)
    with open(path, "w") as f:
        yaml.safe_dump(doc, f, sort_keys=True)


def load_scenario(path):
    """Load a scenario file: returns (ScenarioConfig, Topology or None)."""
    with open(path) as f:
        try:
            doc = yaml.safe_load(f)
        except yaml.YAMLError as e:
            raise ScenarioFileError(f"not valid YAML: {e}") from None
    if not isinstance(doc, dict):
        raise ScenarioFileError("scenario file must be a mapping with a 'config' section")
    config = _config_from_dict(doc.get("config", {}))
    topo = None
    if "topology" in doc:
        topo = topology_from_dict(config, doc["topology"])
    return config, topo
