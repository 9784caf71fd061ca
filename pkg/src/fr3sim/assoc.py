"""SSB-based initial access, priority reselection, CSI-RS beam refinement.

Each UE measures the best SSB beam of every detectable cell (RSRP uses the
frozen per-link fading average, i.e. no instantaneous fading term, and the
full cell tx power since SSB beams are time-multiplexed). Among technologies
whose best RSRP strictly exceeds that technology's reselection threshold
(4G has none), the highest-priority technology wins; within it the strongest
(cell, beam), ties broken by lowest cell id.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .antenna import array_factor_db, element_gain, get_codebook
from .geometry import local_angles

PRIORITY = {"FourG": 0, "FiveG": 1, "SixG": 2}

# reselection thresholds, dBm; strict "exceeds" comparison
RESELECT_THRESHOLD_DBM = {"FiveG": -110.0, "SixG": -108.0}

# below this RSRP a cell is not detectable at all
DETECTION_FLOOR_DBM = -122.0


@dataclass
class Attachment:
    ue_id: int
    cell_id: int
    ssb_beam_index: int
    csirs_beam_pair: Optional[tuple]
    rsrp_ssb_dbm: float
    technology: str


def ssb_tx_power_per_re_dbm(cell) -> float:
    """Per-resource-element SSB transmit power.

    The full cell power drives each time-multiplexed SSB beam (no splitting
    across beams); RSRP is a per-RE quantity, so the power spectral density
    over the carrier's 12 x n_prb subcarriers is what a UE measures.
    """
    return cell.tx_power_dbm - 10.0 * np.log10(12.0 * cell.n_prb)


def ssb_rsrp(tx_power_per_re_dbm: float, beam_gain_db: float, link) -> float:
    """RSRP of one SSB beam: tx + beam gain - pathloss - shadowing - O2I.

    The fading term enters at its unit-mean average (L3-filtered RSRP).
    """
    return tx_power_per_re_dbm + beam_gain_db + link.coupling_db


def best_ssb_beam(cell, site, ue_x, ue_y, ue_height_m):
    """Strongest SSB beam gain (dB) and its index, per UE."""
    az, el, _, _ = local_angles(cell, site, ue_x, ue_y, ue_height_m)
    cb = get_codebook(cell.array, "SSB", cell.n_ssb_beams)
    g = element_gain(az, el)[None, :] + array_factor_db(
        cell.array, cb.codewords, az, el)
    idx = g.argmax(axis=0)
    return g[idx, np.arange(g.shape[1])], idx


@dataclass
class AttachmentTable:
    """Vectorized association result; serving_cell is -1 for outage UEs."""

    serving_cell: np.ndarray     # (n_ue,) int
    ssb_beam: np.ndarray         # (n_ue,) int
    rsrp_dbm: np.ndarray         # (n_ue,) float
    technology: np.ndarray       # (n_ue,) object (str), "" for outage
    csirs_pair: np.ndarray       # (n_ue, 2) int, -1 until refined

    @property
    def n_ue(self):
        return self.serving_cell.shape[0]

    def attachment(self, ue_id: int) -> Optional[Attachment]:
        if self.serving_cell[ue_id] < 0:
            return None
        pair = tuple(int(b) for b in self.csirs_pair[ue_id])
        if pair[0] < 0:
            pair = None
        return Attachment(ue_id, int(self.serving_cell[ue_id]),
                          int(self.ssb_beam[ue_id]), pair,
                          float(self.rsrp_dbm[ue_id]),
                          str(self.technology[ue_id]))


def associate(ue_id: int, best_by_tech: dict,
              thresholds: dict = RESELECT_THRESHOLD_DBM,
              detection_floor_dbm: float = DETECTION_FLOOR_DBM) -> Optional[Attachment]:
    """Priority-based selection among per-technology best candidates.

    best_by_tech: technology -> (rsrp_dbm, cell_id, ssb_beam_index), already
    tie-broken by lowest cell id. Returns None when no technology is
    detectable (outage).
    """
    for tech in sorted(best_by_tech, key=lambda t: -PRIORITY[t]):
        rsrp, cell_id, beam = best_by_tech[tech]
        if rsrp < detection_floor_dbm:
            continue
        if tech in thresholds and not rsrp > thresholds[tech]:
            continue
        return Attachment(ue_id, cell_id, beam, None, rsrp, tech)
    return None


def associate_all(topo, coupling_db: np.ndarray, ue_x, ue_y, ue_height_m,
                  thresholds: dict = RESELECT_THRESHOLD_DBM,
                  detection_floor_dbm: float = DETECTION_FLOOR_DBM) -> AttachmentTable:
    """Associate every UE given the frozen large-scale coupling matrix
    coupling_db[(ue, cell)] = -(pathloss + shadowing + O2I)."""
    n_ue = coupling_db.shape[0]
    cells = topo.cells
    rsrp = np.empty((n_ue, len(cells)))
    beam = np.empty((n_ue, len(cells)), dtype=int)
    for ci, cell in enumerate(cells):
        g, idx = best_ssb_beam(cell, topo.site_by_id(cell.site_id),
                               ue_x, ue_y, ue_height_m)
        rsrp[:, ci] = ssb_tx_power_per_re_dbm(cell) + g + coupling_db[:, ci]
        beam[:, ci] = idx

    serving = np.full(n_ue, -1, dtype=int)
    s_beam = np.zeros(n_ue, dtype=int)
    s_rsrp = np.full(n_ue, -np.inf)
    s_tech = np.array([""] * n_ue, dtype=object)
    techs = sorted({c.technology for c in cells}, key=lambda t: -PRIORITY[t])
    undecided = np.ones(n_ue, dtype=bool)
    for tech in techs:
        cols = np.array([ci for ci, c in enumerate(cells) if c.technology == tech])
        sub = rsrp[:, cols]
        best_local = sub.argmax(axis=1)          # first max -> lowest cell id
        best_rsrp = sub[np.arange(n_ue), best_local]
        ok = best_rsrp >= detection_floor_dbm
        if tech in thresholds:
            ok &= best_rsrp > thresholds[tech]
        take = undecided & ok
        ci_best = cols[best_local]
        serving[take] = ci_best[take]
        s_beam[take] = beam[np.arange(n_ue), ci_best][take]
        s_rsrp[take] = best_rsrp[take]
        s_tech[take] = tech
        undecided &= ~take
    return AttachmentTable(serving_cell=serving, ssb_beam=s_beam,
                           rsrp_dbm=s_rsrp, technology=s_tech,
                           csirs_pair=np.full((n_ue, 2), -1, dtype=int))


def refine_beams(cell, site, ue_x, ue_y, ue_height_m):
    """Best CSI-RS beam index per polarization panel, per UE.

    Fading is scalar per polarization and beam-independent, so the
    deterministic beam gain decides and both panels report the same index.
    Returns an (n_ue, 2) index array.
    """
    az, el, _, _ = local_angles(cell, site, np.atleast_1d(ue_x),
                                np.atleast_1d(ue_y), ue_height_m)
    cb = get_codebook(cell.array, "CSIRS", cell.n_csirs_beams)
    g = element_gain(az, el)[None, :] + array_factor_db(
        cell.array, cb.codewords, az, el)
    idx = g.argmax(axis=0)
    return np.column_stack([idx, idx])


def refine_all(topo, table: AttachmentTable, ue_x, ue_y, ue_height_m) -> None:
    """Fill table.csirs_pair for every attached UE, grouped by serving cell."""
    ue_x = np.asarray(ue_x, dtype=float)
    ue_y = np.asarray(ue_y, dtype=float)
    for ci in np.unique(table.serving_cell):
        if ci < 0:
            continue
        cell = topo.cells[ci]
        members = np.flatnonzero(table.serving_cell == ci)
        pair = refine_beams(cell, topo.site_by_id(cell.site_id),
                            ue_x[members], ue_y[members], ue_height_m)
        table.csirs_pair[members] = pair
