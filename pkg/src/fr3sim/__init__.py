"""System-level simulator for heterogeneous 4G/5G/6G networks in the
FR3 upper mid-band: deployment-calibrated scenarios, DFT beamforming,
3GPP UMa/UMi propagation, demand-driven scheduling, effective-SINR
throughput and component-based power estimation."""

from .scenario import (Cell, ScenarioConfig, Site, Topology, UserTerminal,
                       drop_users, generate_topology, load_scenario,
                       save_scenario, STRATEGIES)
from .antenna import ArrayGeometry, BeamCodebook, beam_gain, build_codebook, element_gain
from .channel import (classify_model, los_probability, o2i_penetration,
                      pathloss, sample_fading, sample_shadowing)
from .assoc import Attachment, associate, refine_beams, ssb_rsrp
from .sched import Allocation, allocate, estimate_demand
from .link import (McsTable, effective_sinr, per_prb_sinr, sinr_to_mcs,
                   ue_throughput)
from .power import PowerParams, PowerReport, network_power, radio_power
from .engine import MetricsReport, RunSpec, compare, run

__version__ = "0.1.0"
