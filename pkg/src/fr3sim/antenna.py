"""Antenna arrays and 2D-DFT beam codebooks.

Arrays are cross-polarized uniform planar/linear panels. Beamforming is
evaluated per polarization panel: a codeword is a unit-norm complex weight
vector over one panel of n_rows x n_cols elements, and beam gain toward a
direction is the 3GPP element pattern plus the array factor of the codeword.

Directions are given as offsets from the panel boresight (after mechanical
azimuth and electrical downtilt are applied): az_off in degrees (positive =
counter-clockwise), el_off in degrees (positive = below boresight).
"""

from dataclasses import dataclass, field

import numpy as np

ELEMENT_PEAK_DBI = 8.0
ELEMENT_HPBW_DEG = 65.0
ELEMENT_FLOOR_DB = 30.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Per-polarization panel geometry of a cross-polarized array."""

    n_rows: int
    n_cols: int
    dual_polarized: bool = True
    element_spacing: float = 0.5  # wavelengths, vertical and horizontal
    downtilt_deg: float = 0.0

    @property
    def n_elements_per_pol(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def n_elements(self) -> int:
        return self.n_elements_per_pol * (2 if self.dual_polarized else 1)


def element_gain(az_off_deg, el_off_deg):
    """3GPP TR 38.901 element pattern, in dBi.

    8 dBi peak, 65 deg half-power beamwidth in both cuts, 30 dB
    front-to-back / sidelobe floor. Defined for all angles.
    """
    az = np.asarray(az_off_deg, dtype=float)
    el = np.asarray(el_off_deg, dtype=float)
    a_v = -np.minimum(12.0 * (el / ELEMENT_HPBW_DEG) ** 2, ELEMENT_FLOOR_DB)
    a_h = -np.minimum(12.0 * (az / ELEMENT_HPBW_DEG) ** 2, ELEMENT_FLOOR_DB)
    return ELEMENT_PEAK_DBI - np.minimum(-(a_v + a_h), ELEMENT_FLOOR_DB)


def _signed_dft_freqs(m: int) -> np.ndarray:
    """Signed DFT frequency set {k/m : k = -ceil(m/2)+1 .. floor(m/2)}."""
    k = np.arange(m)
    k = np.where(k <= m // 2 if m % 2 else k < m // 2, k, k - m)
    # put them in ascending order for reproducible beam indexing
    return np.sort(k) / m


def steering_vector(array: ArrayGeometry, az_off_deg, el_off_deg) -> np.ndarray:
    """Unit-norm steering vector(s) of one panel, shape (n_elements_per_pol, ...).

    Element (r, c) phase: 2*pi*spacing*(r*u_el + c*u_az) with
    u_el = -sin(el_off) (rows count downward) and u_az = sin(az_off)*cos(el_off).
    """
    az = np.deg2rad(np.asarray(az_off_deg, dtype=float))
    el = np.deg2rad(np.asarray(el_off_deg, dtype=float))
    u_el = -np.sin(el) * array.element_spacing
    u_az = np.sin(az) * np.cos(el) * array.element_spacing
    r = np.arange(array.n_rows)
    c = np.arange(array.n_cols)
    # kron over (rows, cols): element index = r * n_cols + c
    rows_ph = np.exp(1j * 2.0 * np.pi * r[:, None] * np.atleast_1d(u_el)[None, :])
    cols_ph = np.exp(1j * 2.0 * np.pi * c[:, None] * np.atleast_1d(u_az)[None, :])
    v = (rows_ph[:, None, :] * cols_ph[None, :, :]).reshape(
        array.n_elements_per_pol, -1)
    v /= np.sqrt(array.n_elements_per_pol)
    if np.isscalar(az_off_deg) and np.isscalar(el_off_deg):
        return v[:, 0]
    return v


@dataclass(frozen=True)
class BeamCodebook:
    """A set of 2D-DFT codewords over one polarization panel.

    codewords[:, k] is the k-th unit-norm weight vector; steering_deg[k] is
    its (az, el) beam center; freqs[k] the (el, az) DFT frequencies.
    """

    kind: str  # "SSB" or "CSIRS"
    array: ArrayGeometry
    codewords: np.ndarray           # (n_elements_per_pol, n_beams) complex
    steering_deg: np.ndarray        # (n_beams, 2) -> (az_off, el_off)
    freqs: np.ndarray               # (n_beams, 2) -> (f_el, f_az)

    @property
    def n_beams(self) -> int:
        return self.codewords.shape[1]


def _codewords_from_freqs(array: ArrayGeometry, f_el, f_az):
    r = np.arange(array.n_rows)
    c = np.arange(array.n_cols)
    f_el = np.asarray(f_el, dtype=float)
    f_az = np.asarray(f_az, dtype=float)
    rows_ph = np.exp(1j * 2.0 * np.pi * r[:, None] * f_el[None, :])
    cols_ph = np.exp(1j * 2.0 * np.pi * c[:, None] * f_az[None, :])
    w = (rows_ph[:, None, :] * cols_ph[None, :, :]).reshape(
        array.n_elements_per_pol, -1)
    return w / np.sqrt(array.n_elements_per_pol)


def _freqs_to_steering(spacing, f_el, f_az):
    sin_el = np.clip(-np.asarray(f_el) / spacing, -1.0, 1.0)
    el = np.arcsin(sin_el)
    cos_el = np.cos(el)
    with np.errstate(divide="ignore", invalid="ignore"):
        sin_az = np.where(cos_el > 1e-9,
                          np.asarray(f_az) / spacing / np.where(cos_el > 1e-9, cos_el, 1.0),
                          0.0)
    az = np.arcsin(np.clip(sin_az, -1.0, 1.0))
    return np.rad2deg(az), np.rad2deg(el)


def _csirs_grid(array: ArrayGeometry, size: int):
    """(M_el, M_az) DFT set sizes for a CSI-RS codebook of `size` codewords.

    Azimuth is oversampled 2x when the panel has more than one column
    (e.g. a 16x4 panel reaches 128 beams as 16 elevation x 8 azimuth).
    """
    if array.n_cols == 1:
        return size, 1
    for m_az in (2 * array.n_cols, array.n_cols):
        if size % m_az == 0:
            return size // m_az, m_az
    raise ValueError(
        f"codebook size {size} not factorable into an elevation x azimuth "
        f"beam grid for a {array.n_rows}x{array.n_cols} panel")


def _ssb_freq_sets(array: ArrayGeometry, size: int):
    """SSB beam frequencies: a coarse subset of the CSI-RS DFT lattice.

    Azimuth picks symmetric columns of the 2x-oversampled azimuth set;
    elevation picks broadside-and-downward rows of the critical elevation
    set so that every SSB codeword also exists in the CSI-RS codebook.
    """
    if size == 1:
        return np.array([0.0]), np.array([0.0])
    if array.n_cols == 1:
        s_az = 1
    else:
        s_az = min(4, 2 * array.n_cols, size)
        while size % s_az:
            s_az -= 1
    s_el = size // s_az
    if s_el > max(array.n_rows // 2, 1):
        raise ValueError(
            f"SSB size {size} needs {s_el} elevation rows; panel with "
            f"{array.n_rows} rows supports at most {max(array.n_rows // 2, 1)}")
    f_el = -np.arange(s_el) / max(array.n_rows, s_el)
    if s_az == 1:
        f_az = np.array([0.0])
    else:
        m_az = 2 * array.n_cols
        step = m_az // s_az
        if step % 2 == 0:
            k = step // 2 + step * np.arange(s_az // 2)
            f_az = np.sort(np.concatenate([-k, k])) / m_az
        else:
            f_az = _signed_dft_freqs(m_az)[:s_az]
    return f_el, f_az


def build_codebook(array: ArrayGeometry, kind: str, size: int) -> BeamCodebook:
    """Build a unit-norm 2D-DFT codebook of exactly `size` codewords.

    kind "CSIRS": full Kronecker grid (critical elevation, 2x azimuth).
    kind "SSB": coarse subset of the same lattice (see _ssb_freq_sets).
    """
    if size < 1:
        raise ValueError("codebook size must be >= 1")
    if kind == "CSIRS":
        m_el, m_az = _csirs_grid(array, size)
        f_el = _signed_dft_freqs(m_el)
        f_az = _signed_dft_freqs(m_az)
    elif kind == "SSB":
        f_el, f_az = _ssb_freq_sets(array, size)
    else:
        raise ValueError(f"unknown codebook kind {kind!r}")
    grid = np.array([(fe, fa) for fe in f_el for fa in f_az])
    w = _codewords_from_freqs(array, grid[:, 0], grid[:, 1])
    az, el = _freqs_to_steering(array.element_spacing, grid[:, 0], grid[:, 1])
    cb = BeamCodebook(kind=kind, array=array, codewords=w,
                      steering_deg=np.column_stack([az, el]), freqs=grid)
    if cb.n_beams != size:
        raise ValueError(f"grid produced {cb.n_beams} codewords, wanted {size}")
    return cb


def critically_sampled_codebook(array: ArrayGeometry) -> BeamCodebook:
    """Complete orthonormal DFT basis (oversampling 1) over the panel."""
    f_el = _signed_dft_freqs(array.n_rows)
    f_az = _signed_dft_freqs(array.n_cols)
    grid = np.array([(fe, fa) for fe in f_el for fa in f_az])
    w = _codewords_from_freqs(array, grid[:, 0], grid[:, 1])
    az, el = _freqs_to_steering(array.element_spacing, grid[:, 0], grid[:, 1])
    return BeamCodebook(kind="CSIRS", array=array, codewords=w,
                        steering_deg=np.column_stack([az, el]), freqs=grid)


def array_factor_db(array: ArrayGeometry, codewords, az_off_deg, el_off_deg):
    """20*log10(|steering^H w| * sqrt(N)) for each (codeword, direction).

    Returns shape (n_beams, n_dir). Peak value is 10*log10(N) at a perfectly
    matched direction.
    """
    v = steering_vector(array, np.atleast_1d(az_off_deg), np.atleast_1d(el_off_deg))
    w = codewords if codewords.ndim == 2 else codewords[:, None]
    proj = np.abs(w.conj().T @ v)
    n = array.n_elements_per_pol
    return 20.0 * np.log10(np.maximum(proj * np.sqrt(n), 1e-12))


def beam_gain(array: ArrayGeometry, codeword, az_off_deg, el_off_deg):
    """Element pattern plus array factor of one codeword, in dB."""
    af = array_factor_db(array, np.asarray(codeword), az_off_deg, el_off_deg)
    g = element_gain(az_off_deg, el_off_deg) + af[0]
    if np.isscalar(az_off_deg) and np.isscalar(el_off_deg):
        return float(g[0]) if g.ndim else float(g)
    return g


_CODEBOOK_CACHE: dict = {}


def get_codebook(array: ArrayGeometry, kind: str, size: int) -> BeamCodebook:
    """Memoized build_codebook (codebooks are immutable after construction)."""
    key = (array, kind, size)
    if key not in _CODEBOOK_CACHE:
        _CODEBOOK_CACHE[key] = build_codebook(array, kind, size)
    return _CODEBOOK_CACHE[key]


def dump_codebook(codebook: BeamCodebook) -> str:
    """Codebook weights and steering angles as inspectable structured text."""
    lines = [f"kind: {codebook.kind}",
             f"panel: {codebook.array.n_rows}x{codebook.array.n_cols}",
             f"n_beams: {codebook.n_beams}", "beams:"]
    for k in range(codebook.n_beams):
        az, el = codebook.steering_deg[k]
        fe, fa = codebook.freqs[k]
        w = " ".join(f"{z.real:+.6f}{z.imag:+.6f}j"
                     for z in codebook.codewords[:, k])
        lines.append(f"  - index: {k}")
        lines.append(f"    az_off_deg: {az:.3f}")
        lines.append(f"    el_off_deg: {el:.3f}")
        lines.append(f"    dft_freqs: [{fe:.6f}, {fa:.6f}]")
        lines.append(f"    weights: [{w}]")
    return "\n".join(lines) + "\n"
