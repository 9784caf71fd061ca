"""Per-PRB SINR, effective SINR (MIESM), MCS mapping and UE throughput.

Transmission model: on every PRB a cell's power budget tx_power/n_prb is
split equally across the beam directions active on that PRB, and each
direction splits equally across the two polarization panels. A victim's
layer L receives co-polarized power from the panel-L unit of every active
(cell, direction) on its carrier except its own serving direction; the two
polarizations are uncoupled (no cross-polar leakage). Fading is scalar per
(link, polarization, PRB) and multiplies the deterministic beam gain.
"""

import json
from dataclasses import dataclass
from importlib import resources
from typing import Optional

import numpy as np

from .antenna import array_factor_db, element_gain, get_codebook
from .channel import sample_fading
from .geometry import local_angles
from .units import db_to_linear, dbm_to_watt, thermal_noise_dbm

NOISE_FIGURE_DB = 7.0
OVERHEAD_FACTOR = 0.86
MAX_SPECTRAL_EFFICIENCY = 7.4063  # 256QAM r=948/1024


# ---------------------------------------------------------------------------
# MCS table


@dataclass(frozen=True)
class McsTable:
    thresholds_db: np.ndarray        # strictly increasing
    efficiencies: np.ndarray         # strictly increasing, bit/s/Hz

    def __post_init__(self):
        t, e = self.thresholds_db, self.efficiencies
        if len(t) != len(e) or len(t) == 0:
            raise ValueError("MCS table needs matching non-empty columns")
        if not (np.all(np.diff(t) > 0) and np.all(np.diff(e) > 0)):
            raise ValueError("MCS thresholds and efficiencies must be strictly increasing")
        if e[-1] > MAX_SPECTRAL_EFFICIENCY + 1e-9:
            raise ValueError(f"max spectral efficiency {e[-1]} exceeds "
                             f"{MAX_SPECTRAL_EFFICIENCY} (256QAM r~0.926)")

    @classmethod
    def from_file(cls, path=None) -> "McsTable":
        if path is None:
            text = resources.files("fr3sim.data").joinpath("mcs_table.json").read_text()
        else:
            with open(path) as f:
                text = f.read()
        doc = json.loads(text)
        entries = doc["entries"]
        return cls(np.array([e["sinr_threshold_db"] for e in entries]),
                   np.array([e["spectral_efficiency"] for e in entries]))


def sinr_to_mcs(eff_sinr_db, table: McsTable):
    """Spectral efficiency of the highest MCS whose threshold <= eff (inclusive);
    below the lowest threshold the codeword is in outage (0 bit/s/Hz)."""
    idx = np.searchsorted(table.thresholds_db, np.asarray(eff_sinr_db), side="right") - 1
    eff = np.where(idx >= 0, table.efficiencies[np.maximum(idx, 0)], 0.0)
    return float(eff) if np.isscalar(eff_sinr_db) else eff


def effective_sinr(sinr_linear, beta: float = 1.0) -> float:
    """MIESM compression of per-PRB linear SINRs to one value in dB.

    eff = beta * (2^(mean(log2(1 + s/beta))) - 1); beta=1 is plain
    capacity averaging. Constant inputs are a fixed point of the map.
    """
    s = np.asarray(sinr_linear, dtype=float)
    if s.size == 0:
        raise ValueError("effective SINR needs at least one PRB")
    cap = np.log2(1.0 + s / beta)
    eff = beta * (2.0 ** cap.mean() - 1.0)
    return 10.0 * np.log10(eff)


def ue_throughput(se_per_layer, n_allocated_prb: int, prb_bandwidth_hz: float,
                  overhead_factor: float = OVERHEAD_FACTOR) -> float:
    """Mbps: sum over layers of SE x allocated PRBs x PRB bandwidth x overhead."""
    return float(np.sum(se_per_layer) * n_allocated_prb * prb_bandwidth_hz
                 * overhead_factor / 1e6)


# ---------------------------------------------------------------------------
# snapshot state shared by the scalar reference and the vectorized path


@dataclass
class SinrGrid:
    ue_id: int
    prbs: np.ndarray       # allocated PRB indices, sorted
    sinr: np.ndarray       # (2, len(prbs)) linear ratios, per layer


_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer, vectorized over uint64 (wraparound intended)."""
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def _uniforms(h0, idx) -> np.ndarray:
    """Index-addressable U(0,1) stream values: finalize(h0 + (i+1)*golden)."""
    with np.errstate(over="ignore"):
        bits = _mix64(h0 + (idx.astype(np.uint64) + np.uint64(1)) * _GOLDEN)
    return np.maximum((bits >> np.uint64(11)) * 2.0 ** -53, 2.0 ** -60)


class FadingStore:
    """Deterministic per-(ue, cell, polarization, PRB) Rician fading.

    Values are counter-based (SplitMix64 over a packed index), so any subset
    can be materialized in any order and the scalar and vectorized SINR
    paths see identical gains. Scatter components are exact CN(0,1) draws
    (complex Box-Muller); LoS links add the K-weighted deterministic term
    with a per-(link, polarization) random phase.
    """

    def __init__(self, seed: int, snapshot: int, cells, k_db: np.ndarray):
        base = (np.uint64(seed & 0xFFFFFFFFFFFF) << np.uint64(16)) \
            ^ np.uint64(snapshot & 0xFFFF)
        self._h0 = _mix64(base[None] if np.ndim(base) else np.array([base]))[0]
        self._n_prb = {c.id: c.n_prb for c in cells}
        self._max_prb = max(self._n_prb.values()) if self._n_prb else 0
        self._k_db = k_db                     # (n_ue, n_cell), NaN -> Rayleigh

    def _pair_hash(self, ue_ids, cell_id) -> np.ndarray:
        packed = (np.asarray(ue_ids, dtype=np.uint64) << np.uint64(20)) \
            ^ np.uint64(cell_id)
        return _mix64(packed ^ self._h0)

    def gather(self, ue_ids, cell_id: int, prb_idx) -> np.ndarray:
        """Complex gains h[(ue, prb), pol] for parallel index arrays
        ue_ids/prb_idx; returns shape (len(prb_idx), 2)."""
        h = self._pair_hash(ue_ids, cell_id)
        prb = np.asarray(prb_idx, dtype=np.uint64)
        out = np.empty((prb.size, 2), dtype=complex)
        stride = np.uint64(2 * self._max_prb + 2)
        for pol in (0, 1):
            i0 = np.uint64(pol) * stride + prb * np.uint64(2)
            u1 = _uniforms(h, i0)
            u2 = _uniforms(h, i0 + np.uint64(1))
            scatter = np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)
            k_db = self._k_db[np.asarray(ue_ids, dtype=int), cell_id]
            k = 10.0 ** (k_db / 10.0)
            rayleigh = np.isnan(k_db)
            k = np.where(rayleigh, 0.0, k)
            u_phase = _uniforms(h, np.full(prb.size, 2 * stride, dtype=np.uint64)
                                + np.uint64(pol))
            los = np.sqrt(k / (k + 1.0)) * np.exp(2j * np.pi * u_phase)
            out[:, pol] = np.where(rayleigh, scatter,
                                   los + np.sqrt(1.0 / (k + 1.0)) * scatter)
        return out

    def get(self, ue_id: int, cell_id: int) -> np.ndarray:
        """Full (2, n_prb) gain vector of one link."""
        n = self._n_prb[cell_id]
        g = self.gather(np.full(n, ue_id), cell_id, np.arange(n))
        return g.T.copy()


@dataclass
class SnapshotState:
    """Everything the SINR computation reads: frozen topology, large-scale
    coupling, attachments with refined pairs, per-cell allocations, fading."""

    topo: object
    ue_x: np.ndarray
    ue_y: np.ndarray
    ue_height_m: float
    coupling_db: np.ndarray          # (n_ue, n_cell)
    attachments: object              # assoc.AttachmentTable
    allocations: dict                # cell_id -> sched.Allocation
    fading: FadingStore
    noise_figure_db: float = NOISE_FIGURE_DB

    def carrier_group(self, cell) -> list:
        return [c for c in self.topo.cells if c.carrier_ghz == cell.carrier_ghz]


def _beam_powers_w(cell, alloc):
    """Active beam list, 0/1 activity (n_prb, n_beams) and per-(direction,
    panel) transmit power (n_prb,) given the equal-split budget."""
    beams = alloc.active_beams()
    act = alloc.beam_prb_activity(beams)
    n_active = act.sum(axis=1)
    p_prb = dbm_to_watt(cell.tx_power_dbm) / cell.n_prb
    with np.errstate(divide="ignore", invalid="ignore"):
        p_dir_panel = np.where(n_active > 0, p_prb / np.maximum(n_active, 1) / 2.0, 0.0)
    return beams, act, p_dir_panel


def _beam_gain_linear(cell, site, beams, ue_x, ue_y, ue_h):
    """Linear power gain of the given beam directions toward each UE."""
    az, el, _, _ = local_angles(cell, site, np.atleast_1d(ue_x),
                                np.atleast_1d(ue_y), ue_h)
    cb = get_codebook(cell.array, "CSIRS", cell.n_csirs_beams)
    af = array_factor_db(cell.array, cb.codewords[:, beams], az, el)
    return db_to_linear(element_gain(az, el)[None, :] + af)


def per_prb_sinr(state: SnapshotState, ue_id: int, prb: int, layer: int) -> float:
    """Reference per-PRB per-layer SINR (linear), by direct enumeration.

    S = serving received power on the UE's refined beam for this layer;
    I = co-polarized power from every other active (cell, direction) on the
    same carrier that scheduled this PRB; N = thermal noise + noise figure.
    """
    att = state.attachments
    ci = int(att.serving_cell[ue_id])
    if ci < 0:
        raise ValueError(f"UE {ue_id} is in outage")
    cell = state.topo.cells[ci]
    alloc = state.allocations[cell.id]
    prbs = alloc.by_ue.get(ue_id, np.empty(0, dtype=int))
    if prb not in prbs:
        raise ValueError(f"PRB {prb} not allocated to UE {ue_id}")
    pair = att.csirs_pair[ue_id]
    serving_beam = int(pair[layer])

    signal = 0.0
    interference = 0.0
    for other in state.carrier_group(cell):
        o_alloc = state.allocations.get(other.id)
        if o_alloc is None or prb >= other.n_prb:
            continue
        beams, act, p_dp = _beam_powers_w(other, o_alloc)
        if not beams or p_dp[prb] == 0.0:
            continue
        g = _beam_gain_linear(other, state.topo.site_by_id(other.site_id),
                              beams, state.ue_x[ue_id], state.ue_y[ue_id],
                              state.ue_height_m)[:, 0]
        coupling = db_to_linear(state.coupling_db[ue_id, other.id])
        h2 = np.abs(state.fading.get(ue_id, other.id)[layer, prb]) ** 2
        for j, b in enumerate(beams):
            if act[prb, j] == 0.0:
                continue
            p_rx = p_dp[prb] * g[j] * coupling * h2
            if other.id == cell.id and b == serving_beam:
                signal += p_rx
            else:
                interference += p_rx
    noise = dbm_to_watt(thermal_noise_dbm(cell.prb_bandwidth_hz,
                                          state.noise_figure_db))
    return signal / (interference + noise)


def compute_sinr_grids(state: SnapshotState) -> dict:
    """Vectorized SINR grids for every UE with a non-empty allocation.

    Same semantics as per_prb_sinr, organized per carrier group with
    gather/scatter over each victim's allocated PRBs.
    """
    topo = state.topo
    att = state.attachments
    grids = {}
    carriers = sorted({c.carrier_ghz for c in topo.cells})
    for carrier in carriers:
        group = [c for c in topo.cells if c.carrier_ghz == carrier]
        group_ids = {c.id for c in group}
        victims = [u for u in range(att.n_ue)
                   if att.serving_cell[u] >= 0
                   and att.serving_cell[u] in group_ids
                   and len(state.allocations[int(att.serving_cell[u])]
                           .by_ue.get(u, ())) > 0]
        if not victims:
            continue
        victims = np.array(victims)
        v_index = {u: i for i, u in enumerate(victims)}
        prbs_of = {u: state.allocations[int(att.serving_cell[u])].by_ue[u]
                   for u in victims}
        rows = np.concatenate([prbs_of[u] for u in victims])
        cols = np.concatenate([np.full(len(prbs_of[u]), v_index[u], dtype=int)
                               for u in victims])
        starts = np.cumsum([0] + [len(prbs_of[u]) for u in victims])
        itotal = np.zeros((2, rows.size))
        sig = np.zeros((2, rows.size))

        for other in group:
            o_alloc = state.allocations.get(other.id)
            if o_alloc is None:
                continue
            beams, act, p_dp = _beam_powers_w(other, o_alloc)
            if not beams:
                continue
            # carriers of different widths couple on their common PRB indices
            pos = np.flatnonzero(rows < other.n_prb)
            if pos.size == 0:
                continue
            vrows, vcols = rows[pos], cols[pos]
            g = _beam_gain_linear(other, topo.site_by_id(other.site_id), beams,
                                  state.ue_x[victims], state.ue_y[victims],
                                  state.ue_height_m)          # (n_beams, n_vic)
            w = act * p_dp[:, None]                            # (n_prb, n_beams)
            base = (w[vrows, :] * g[:, vcols].T).sum(axis=1)   # per (victim prb)
            coupling = db_to_linear(state.coupling_db[victims, other.id])
            h2 = np.abs(state.fading.gather(victims[vcols], other.id, vrows)) ** 2
            contrib = base[:, None] * coupling[vcols, None] * h2
            itotal[:, pos] += contrib.T
            # serving-direction power of this cell's own victims is signal
            mine = np.flatnonzero(att.serving_cell[victims] == other.id)
            if mine.size:
                sel = np.isin(vcols, mine)
                beam_col = {b: j for j, b in enumerate(beams)}
                for layer in (0, 1):
                    pair_b = att.csirs_pair[victims[vcols[sel]], layer]
                    jj = np.array([beam_col[b] for b in pair_b])
                    own = (w[vrows[sel], jj] * g[jj, vcols[sel]]
                           * coupling[vcols[sel]] * h2[sel, layer])
                    sig[layer, pos[sel]] = own
                    itotal[layer, pos[sel]] -= own

        for i, u in enumerate(victims):
            cell = topo.cells[int(att.serving_cell[u])]
            noise = dbm_to_watt(thermal_noise_dbm(cell.prb_bandwidth_hz,
                                                  state.noise_figure_db))
            sl = slice(starts[i], starts[i + 1])
            grids[int(u)] = SinrGrid(
                ue_id=int(u), prbs=prbs_of[u],
                sinr=sig[:, sl] / (itotal[:, sl] + noise))
    return grids


def compute_ue_metrics(state: SnapshotState, table: McsTable,
                       overhead_factor: float = OVERHEAD_FACTOR):
    """Per-UE effective SINR (dB, 2 layers), spectral efficiency, allocated
    PRB count and throughput (Mbps). Unallocated or outage UEs get zeros
    (effective SINR reported as NaN)."""
    n_ue = state.attachments.n_ue
    grids = compute_sinr_grids(state)
    eff = np.full((n_ue, 2), np.nan)
    se = np.zeros((n_ue, 2))
    n_alloc = np.zeros(n_ue, dtype=int)
    tput = np.zeros(n_ue)
    for u, grid in grids.items():
        cell = state.topo.cells[int(state.attachments.serving_cell[u])]
        n_alloc[u] = grid.prbs.size
        for layer in (0, 1):
            eff[u, layer] = effective_sinr(grid.sinr[layer])
            se[u, layer] = sinr_to_mcs(eff[u, layer], table)
        tput[u] = ue_throughput(se[u], n_alloc[u], cell.prb_bandwidth_hz,
                                overhead_factor)
    return eff, se, n_alloc, tput
