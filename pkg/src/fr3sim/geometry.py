"""Cell-local direction geometry shared by association and link stages."""

import numpy as np


def wrap_deg(a):
    return (np.asarray(a, dtype=float) + 180.0) % 360.0 - 180.0


def local_angles(cell, site, ue_x, ue_y, ue_height_m):
    """Direction of each UE in the cell panel's local frame.

    Returns (az_off_deg, el_off_deg, d2d_m, d3d_m); el_off is positive below
    the (downtilted) boresight.
    """
    dx = np.asarray(ue_x, dtype=float) - site.x
    dy = np.asarray(ue_y, dtype=float) - site.y
    d2d = np.hypot(dx, dy)
    dz = site.height_m - np.asarray(ue_height_m, dtype=float)
    d3d = np.hypot(d2d, dz)
    az_off = wrap_deg(np.degrees(np.arctan2(dy, dx)) - cell.azimuth_deg)
    depression = np.degrees(np.arctan2(dz, np.maximum(d2d, 1e-9)))
    el_off = depression - cell.array.downtilt_deg
    return az_off, el_off, d2d, d3d
