"""Large- and small-scale propagation per 3GPP TR 38.901 UMa/UMi.

Large scale: LoS probability, LoS/NLoS pathloss with breakpoint handling,
lognormal shadowing, and the low-loss outdoor-to-indoor penetration model.
Small scale: per-PRB i.i.d. Rician fading, scalar per polarization (the
beamforming gain is deterministic via the codebook array factor; fading
multiplies it).

All formulas take frequency in GHz and distances in meters.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0

UMA_UMI_HEIGHT_THRESHOLD_M = 15.0
MIN_MODEL_DISTANCE_M = 10.0

# sigma_SF in dB per (model, los) from TR 38.901 Table 7.4.1-1
SHADOWING_STD_DB = {
    ("UMa", True): 4.0,
    ("UMa", False): 6.0,
    ("UMi", True): 4.0,
    ("UMi", False): 7.82,
}

# Rician K-factor means (dB) used for LoS links; NLoS is Rayleigh (K -> 0)
DEFAULT_RICIAN_K_DB = {"UMa": 9.0, "UMi": 9.0}


def classify_model(antenna_height_m: float) -> str:
    """UMa iff the antenna sits above 15 m, else UMi (strict inequality)."""
    return "UMa" if antenna_height_m > UMA_UMI_HEIGHT_THRESHOLD_M else "UMi"


def los_probability(model: str, distance_2d_m, ue_height_m=1.5):
    """TR 38.901 Table 7.4.2-1 LoS probability for UMa / UMi."""
    d = np.asarray(distance_2d_m, dtype=float)
    d_safe = np.maximum(d, 1e-9)
    if model == "UMi":
        p = 18.0 / d_safe + np.exp(-d_safe / 36.0) * (1.0 - 18.0 / d_safe)
    elif model == "UMa":
        h = np.asarray(ue_height_m, dtype=float)
        c_h = np.where(h <= 13.0, 0.0, ((np.maximum(h, 13.0) - 13.0) / 10.0) ** 1.5)
        base = 18.0 / d_safe + np.exp(-d_safe / 63.0) * (1.0 - 18.0 / d_safe)
        p = base * (1.0 + c_h * 1.25 * (d_safe / 100.0) ** 3 * np.exp(-d_safe / 150.0))
    else:
        raise ValueError(f"unknown model {model!r}")
    return np.where(d <= 18.0, 1.0, np.minimum(p, 1.0))


def _breakpoint_distance_m(freq_ghz, h_bs_m, h_ut_m):
    # effective antenna heights with 1 m effective environment height
    return 4.0 * (h_bs_m - 1.0) * (h_ut_m - 1.0) * freq_ghz * 1e9 / SPEED_OF_LIGHT


def pathloss(model: str, los, freq_ghz, d2d_m, d3d_m, h_bs_m, h_ut_m=1.5):
    """TR 38.901 UMa/UMi pathloss in dB, vectorized over distances.

    NLoS returns max(PL_LoS, PL'_NLoS) per the standard. Distances below the
    10 m model minimum are clamped to 10 m.
    """
    d2d = np.maximum(np.asarray(d2d_m, dtype=float), MIN_MODEL_DISTANCE_M)
    d3d = np.maximum(np.asarray(d3d_m, dtype=float), MIN_MODEL_DISTANCE_M)
    f = float(freq_ghz)
    if not 0.5 <= f <= 100.0:
        raise ValueError(f"frequency {f} GHz outside 38.901 validity (0.5-100)")
    d_bp = _breakpoint_distance_m(f, h_bs_m, h_ut_m)
    if model == "UMa":
        pl1 = 28.0 + 22.0 * np.log10(d3d) + 20.0 * np.log10(f)
        pl2 = (28.0 + 40.0 * np.log10(d3d) + 20.0 * np.log10(f)
               - 9.0 * np.log10(d_bp ** 2 + (h_bs_m - h_ut_m) ** 2))
        pl_los = np.where(d2d <= d_bp, pl1, pl2)
        pl_nlos_prime = (13.54 + 39.08 * np.log10(d3d) + 20.0 * np.log10(f)
                         - 0.6 * (h_ut_m - 1.5))
    elif model == "UMi":
        pl1 = 32.4 + 21.0 * np.log10(d3d) + 20.0 * np.log10(f)
        pl2 = (32.4 + 40.0 * np.log10(d3d) + 20.0 * np.log10(f)
               - 9.5 * np.log10(d_bp ** 2 + (h_bs_m - h_ut_m) ** 2))
        pl_los = np.where(d2d <= d_bp, pl1, pl2)
        pl_nlos_prime = (22.4 + 35.3 * np.log10(d3d) + 21.3 * np.log10(f)
                         - 0.3 * (h_ut_m - 1.5))
    else:
        raise ValueError(f"unknown model {model!r}")
    los_arr = np.asarray(los, dtype=bool)
    return np.where(los_arr, pl_los, np.maximum(pl_los, pl_nlos_prime))


def sample_shadowing(model: str, los, rng: np.random.Generator, size=None):
    """Zero-mean lognormal shadowing draw(s) with the model's sigma_SF."""
    sigma = SHADOWING_STD_DB[(model, bool(los))]
    return rng.normal(0.0, sigma, size=size)


def o2i_material_loss_db(freq_ghz) -> float:
    """Low-loss building penetration (glass/concrete composite), frequency
    dependent: 5 - 10*log10(0.3*10^(-L_glass/10) + 0.7*10^(-L_concrete/10))."""
    f = np.asarray(freq_ghz, dtype=float)
    l_glass = 2.0 + 0.2 * f
    l_concrete = 5.0 + 4.0 * f
    return 5.0 - 10.0 * np.log10(
        0.3 * 10.0 ** (-l_glass / 10.0) + 0.7 * 10.0 ** (-l_concrete / 10.0))


def sample_inside_distance(rng: np.random.Generator, size=None):
    """38.901 low-loss O2I inside distance: min of two U(0, 25) draws."""
    return np.minimum(rng.uniform(0.0, 25.0, size=size),
                      rng.uniform(0.0, 25.0, size=size))


def o2i_penetration(freq_ghz, rng: np.random.Generator, indoor: bool) -> float:
    """O2I loss in dB: 0 for outdoor, else material loss + 0.5 dB/m inside."""
    if not indoor:
        return 0.0
    d_in = sample_inside_distance(rng)
    return float(o2i_material_loss_db(freq_ghz) + 0.5 * d_in)


def sample_fading(n_prb: int, rician_k_db: Optional[float],
                  rng: np.random.Generator, n_pol: int = 2) -> np.ndarray:
    """Per-PRB complex channel gains, shape (n_pol, n_prb), unit mean power.

    LoS links: deterministic component of power K/(K+1) with a random fixed
    phase, plus circular Gaussian of power 1/(K+1). rician_k_db=None means
    NLoS (Rayleigh, K -> 0).
    """
    if n_prb < 1:
        raise ValueError("n_prb must be >= 1")
    scatter = (rng.standard_normal((n_pol, n_prb))
               + 1j * rng.standard_normal((n_pol, n_prb))) / np.sqrt(2.0)
    if rician_k_db is None:
        return scatter
    k = 10.0 ** (rician_k_db / 10.0)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=(n_pol, 1))
    los_part = np.sqrt(k / (k + 1.0)) * np.exp(1j * phase)
    return los_part + np.sqrt(1.0 / (k + 1.0)) * scatter


@dataclass
class LinkState:
    """Frozen large-scale state of one UE-cell link (one snapshot)."""

    ue_id: int
    cell_id: int
    los: bool
    distance_2d: float
    distance_3d: float
    pathloss_db: float
    shadowing_db: float
    o2i_loss_db: float
    rician_k_db: Optional[float]
    fading: Optional[np.ndarray] = None  # (2, n_prb) complex when realized

    @property
    def coupling_db(self) -> float:
        """- (pathloss + shadowing + O2I): add tx power and beam gain to get rx."""
        return -(self.pathloss_db + self.shadowing_db + self.o2i_loss_db)
