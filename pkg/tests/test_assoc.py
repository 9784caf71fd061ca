import numpy as np
import pytest

from fr3sim.antenna import array_factor_db, element_gain, get_codebook
from fr3sim.assoc import (DETECTION_FLOOR_DBM, RESELECT_THRESHOLD_DBM,
                          associate, associate_all, best_ssb_beam,
                          refine_all, refine_beams, ssb_rsrp,
                          ssb_tx_power_per_re_dbm)
from fr3sim.channel import LinkState
from fr3sim.geometry import local_angles
from fr3sim.scenario import Site

from conftest import make_cell, make_topo


def _link(pl=0.0, sf=0.0, o2i=0.0):
    return LinkState(ue_id=0, cell_id=0, los=True, distance_2d=100.0,
                     distance_3d=100.0, pathloss_db=pl, shadowing_db=sf,
                     o2i_loss_db=o2i, rician_k_db=9.0)


def test_rsrp_chain_identity():
    assert ssb_rsrp(30.0, 0.0, _link()) == pytest.approx(30.0)


def test_rsrp_pathloss_monotone():
    base = ssb_rsrp(30.0, 5.0, _link(pl=80.0))
    assert ssb_rsrp(30.0, 5.0, _link(pl=90.0)) == pytest.approx(base - 10.0)


def test_per_re_power_normalization():
    cell = make_cell(tx=53.0, n_prb=273)
    assert ssb_tx_power_per_re_dbm(cell) == pytest.approx(
        53.0 - 10.0 * np.log10(12 * 273))


def test_priority_wins_over_raw_rsrp():
    best = {"FourG": (-80.0, 1, 0), "SixG": (-100.0, 9, 3)}
    att = associate(0, best)
    assert att.technology == "SixG" and att.cell_id == 9


def test_thresholds_exclude_upper_layers():
    best = {"FourG": (-95.0, 1, 0), "FiveG": (-111.0, 5, 2),
            "SixG": (-109.0, 9, 3)}
    att = associate(0, best)
    assert att.technology == "FourG"


def test_threshold_boundary_is_strict():
    # RSRP exactly at the threshold does not count as "exceeds"
    best = {"FourG": (-95.0, 1, 0),
            "FiveG": (RESELECT_THRESHOLD_DBM["FiveG"], 5, 2),
            "SixG": (RESELECT_THRESHOLD_DBM["SixG"], 9, 3)}
    assert associate(0, best).technology == "FourG"
    best["SixG"] = (RESELECT_THRESHOLD_DBM["SixG"] + 1e-9, 9, 3)
    assert associate(0, best).technology == "SixG"


def test_single_fourg_cell_always_eligible():
    att = associate(0, {"FourG": (-119.0, 1, 0)})
    assert att is not None and att.technology == "FourG"


def test_outage_below_detection_floor():
    assert associate(0, {"FourG": (DETECTION_FLOOR_DBM - 1.0, 1, 0)}) is None


def test_priority_monotone_in_sixg_rsrp():
    # raising the 6G RSRP through the threshold never demotes the UE
    from fr3sim.assoc import PRIORITY
    last = -1
    for rsrp in np.linspace(-115.0, -95.0, 41):
        att = associate(0, {"FourG": (-90.0, 1, 0), "SixG": (rsrp, 9, 3)})
        pri = PRIORITY[att.technology]
        assert pri >= last
        last = pri


def _two_cell_topo():
    sites = [Site(0, 500.0, 500.0, 25.0, "FourG"),
             Site(1, 1500.0, 500.0, 25.0, "FiveG")]
    cells = [make_cell(cid=0, site_id=0, tech="FourG", carrier=1.89, bw=20,
                       n_prb=100, n_trx=4, tx=46.0, rows=4, cols=1,
                       n_ssb=1, n_csirs=4),
             make_cell(cid=1, site_id=1, tech="FiveG", tx=53.0)]
    return make_topo(cells, sites)


def test_associate_all_unique_attachment():
    topo = _two_cell_topo()
    rng = np.random.default_rng(0)
    n = 200
    x, y = rng.uniform(0, 2000, n), rng.uniform(0, 1000, n)
    coupling = -rng.uniform(80.0, 120.0, (n, 2))
    table = associate_all(topo, coupling, x, y, 1.5)
    attached = table.serving_cell >= 0
    assert attached.all()
    assert set(np.unique(table.serving_cell)) <= {0, 1}
    # rsrp recorded equals the best beam of the chosen cell
    assert np.all(np.isfinite(table.rsrp_dbm[attached]))


def test_refined_beam_dominates_ssb(small_config):
    # CSI-RS refinement never loses to the serving SSB beam (enumeration per
    # UE over both codebooks; the SSB lattice nests inside the CSI-RS one)
    topo = _two_cell_topo()
    cell = topo.cells[1]
    site = topo.site_by_id(cell.site_id)
    rng = np.random.default_rng(1)
    x, y = rng.uniform(0, 2000, 300), rng.uniform(0, 1000, 300)
    ssb_gain, _ = best_ssb_beam(cell, site, x, y, 1.5)
    pair = refine_beams(cell, site, x, y, 1.5)
    az, el, _, _ = local_angles(cell, site, x, y, 1.5)
    cb = get_codebook(cell.array, "CSIRS", cell.n_csirs_beams)
    af = array_factor_db(cell.array, cb.codewords, az, el)
    refined_gain = element_gain(az, el) + af[pair[:, 0], np.arange(len(x))]
    assert np.all(refined_gain >= ssb_gain - 1e-9)
    assert np.all((pair >= 0) & (pair < cell.n_csirs_beams))


def test_refine_pair_symmetric_across_panels():
    topo = _two_cell_topo()
    cell = topo.cells[1]
    pair = refine_beams(cell, topo.site_by_id(cell.site_id),
                        [100.0, 900.0], [200.0, 800.0], 1.5)
    assert np.array_equal(pair[:, 0], pair[:, 1])


def test_refine_all_fills_pairs():
    topo = _two_cell_topo()
    rng = np.random.default_rng(3)
    n = 50
    x, y = rng.uniform(0, 2000, n), rng.uniform(0, 1000, n)
    coupling = -rng.uniform(80.0, 110.0, (n, 2))
    table = associate_all(topo, coupling, x, y, 1.5)
    refine_all(topo, table, x, y, 1.5)
    attached = table.serving_cell >= 0
    assert np.all(table.csirs_pair[attached] >= 0)
