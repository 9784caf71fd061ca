"""dB / linear / dBm conversion helpers used across the package."""

import numpy as np


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def dbm_to_watt(x_dbm):
    return 10.0 ** ((np.asarray(x_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(x_w):
    return 10.0 * np.log10(np.asarray(x_w, dtype=float)) + 30.0


def thermal_noise_dbm(bandwidth_hz, noise_figure_db=0.0):
    """Thermal noise power over a bandwidth: -174 dBm/Hz + 10log10(B) + NF."""
    return -174.0 + 10.0 * np.log10(bandwidth_hz) + noise_figure_db
