import numpy as np
import pytest

from fr3sim.antenna import ArrayGeometry
from fr3sim.scenario import (Cell, ScenarioConfig, Site, Topology,
                             FourGLayerConfig, FiveGLayerConfig,
                             SixGLayerConfig, HotspotConfig)


def make_cell(cid=0, site_id=0, azimuth=0.0, tech="FiveG", carrier=2.703,
              bw=100.0, n_prb=273, n_trx=64, tx=53.0, rows=8, cols=4,
              tilt=0.0, n_ssb=8, n_csirs=64, klass="UMa"):
    return Cell(id=cid, site_id=site_id, azimuth_deg=azimuth, technology=tech,
                carrier_ghz=carrier, bandwidth_mhz=bw, n_prb=n_prb,
                n_trx=n_trx, tx_power_dbm=tx,
                array=ArrayGeometry(rows, cols, True, 0.5, tilt),
                n_ssb_beams=n_ssb, n_csirs_beams=n_csirs,
                deployment_class=klass)


def make_topo(cells, sites, config=None):
    config = config or ScenarioConfig()
    n = len(cells)
    return Topology(config=config, sites=sites, cells=cells,
                    hotspot_centers=np.empty((0, 2)),
                    sixg_positions=np.empty((0, 2)),
                    cell_ue_counts=np.zeros(n, dtype=int),
                    cell_prb_used=np.zeros(n))


@pytest.fixture
def small_config():
    """Shrunken generator config for fast engine-level tests."""
    def build(strategy="FourG_FiveG", seed=3, **kw):
        return ScenarioConfig(
            seed=seed, strategy=strategy, area_km2=2.0, n_baseline_ues=250,
            fourg=FourGLayerConfig(n_sites=8, n_cells=30, n_narrowband_cells=3),
            fiveg=FiveGLayerConfig(n_sites=3, n_cells=9),
            sixg=SixGLayerConfig(n_cells=9),
            hotspots=HotspotConfig(count=3, ues_per_hotspot=10),
            **kw)
    return build
