"""Demand-driven per-beam PRB allocation.

Every CSI-RS beam direction of a cell owns a full copy of the cell's PRB
pool (spatial reuse across beams). UEs are processed in random order; each
draws min(demand, remaining) PRBs uniformly without replacement from its
beam pair's remaining pool. A dual-layer UE uses the SAME PRB indices on
both polarization panels, so one draw feeds both layers; when the pair's
indices differ the draw comes from the intersection of the two pools.
"""

import math
from dataclasses import dataclass, field

import numpy as np


def estimate_demand(cell_prb_used: int, active_ues: int) -> int:
    """Average per-UE PRB requirement: ceil(usage / active UEs), at least 1."""
    if active_ues < 1:
        raise ValueError("active_ues must be >= 1 (no demand for an empty cell)")
    return max(1, math.ceil(cell_prb_used / active_ues))


@dataclass
class Allocation:
    """Per-beam PRB assignment of one cell.

    by_beam[beam][ue_id] is the sorted array of PRB indices the UE holds
    under that beam direction; by_ue[ue_id] is the UE's (shared) PRB set.
    """

    cell_id: int
    n_prb: int
    by_beam: dict = field(default_factory=dict)   # beam -> {ue_id: np.ndarray}
    by_ue: dict = field(default_factory=dict)     # ue_id -> np.ndarray

    def beam_prb_activity(self, beams) -> np.ndarray:
        """0/1 activity matrix (n_prb, len(beams)) over beam directions."""
        act = np.zeros((self.n_prb, len(beams)))
        for j, b in enumerate(beams):
            for prbs in self.by_beam.get(b, {}).values():
                act[prbs, j] = 1.0
        return act

    def active_beams(self):
        return sorted(b for b, m in self.by_beam.items()
                      if any(len(p) for p in m.values()))

    def occupied_prb_fraction(self) -> float:
        """Fraction of the carrier's PRBs carried by at least one beam."""
        occupied = np.zeros(self.n_prb, dtype=bool)
        for prbs in self.by_ue.values():
            occupied[prbs] = True
        return float(occupied.sum()) / self.n_prb


def allocate(cell_id: int, n_prb: int, ue_beam_pairs: dict, demands: dict,
             rng: np.random.Generator) -> Allocation:
    """Allocate PRBs for one cell.

    ue_beam_pairs: ue_id -> (beam_pol0, beam_pol1) refined CSI-RS indices.
    demands: ue_id -> requested PRB count.
    Pool exhaustion is a normal outcome; affected UEs get a partial or
    empty set. Deterministic under the given generator.
    """
    pools = {}

    def pool(beam):
        if beam not in pools:
            pools[beam] = np.ones(n_prb, dtype=bool)
        return pools[beam]

    alloc = Allocation(cell_id=cell_id, n_prb=n_prb)
    order = list(ue_beam_pairs.keys())
    rng.shuffle(order)
    for ue in order:
        b0, b1 = ue_beam_pairs[ue]
        avail = pool(b0) if b0 == b1 else (pool(b0) & pool(b1))
        candidates = np.flatnonzero(avail)
        take = min(int(demands[ue]), candidates.size)
        if take > 0:
            prbs = np.sort(rng.choice(candidates, size=take, replace=False))
        else:
            prbs = np.empty(0, dtype=int)
        pool(b0)[prbs] = False
        if b1 != b0:
            pool(b1)[prbs] = False
        alloc.by_ue[ue] = prbs
        alloc.by_beam.setdefault(b0, {})[ue] = prbs
        if b1 != b0:
            alloc.by_beam.setdefault(b1, {})[ue] = prbs
    return alloc


def allocation_rows(alloc: Allocation):
    """(cell, beam, ue, prb_count) rows for the allocation dump."""
    rows = []
    for beam in sorted(alloc.by_beam):
        for ue in sorted(alloc.by_beam[beam]):
            rows.append((alloc.cell_id, beam, ue, len(alloc.by_beam[beam][ue])))
    return rows
