"""
Grid-matched sensing codebook design for uniform planar arrays.

The device carries co-located transmit and receive UPAs in the x-z plane with
boresight along +y. Beams are not laid out on a uniform angle grid; instead a
virtual camera sensor is placed one focal length in front of the array and one
beam is steered through the center of each sensor cell. The resulting map of
per-beam range estimates is then pixel-aligned with a camera depth map of the
same resolution, which is the whole point of the construction.

Geometry chain:
    sensor_grid       cell centers (x, F_L, z) of the virtual sensor plane
    grid_angles       per-cell steering angles (theta_z, theta_x) measured
                      from the array axes, plus the azimuth phi used when
                      projecting range onto depth
    steering_vector   UPA response for one (theta_z, theta_x) pair
    design_codebook   the full beam set, optionally Gaussian-tapered for
                      sidelobe reduction and phase-quantized for 2-bit
                      phase shifters

The transmit and receive codebooks are identical (monostatic sensing with
matched beams), so the design stores one weight matrix and hands out
(f_m, w_m) views of the same rows.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "UpaConfig",
    "SceneView",
    "Codebook",
    "sensor_grid",
    "grid_angles",
    "steering_vector",
    "slr_weights",
    "quantize_phases",
    "design_codebook",
    "radiation_pattern",
    "beam_index",
    "beam_vh",
    "write_codebook_csv",
]


@dataclass(frozen=True)
class UpaConfig:
    """Uniform planar array in the x-z plane, boresight +y."""

    n_h: int = 16                      # elements along x
    n_v: int = 16                      # elements along z
    spacing_wavelengths: float = 0.5   # inter-element spacing d_s / lambda
    element_gain_dbi: float = 0.0      # per-element gain, used by the link budget

    def __post_init__(self):
        if self.n_h < 1 or self.n_v < 1:
            raise ValueError("UPA dimensions must be positive")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n(self) -> int:
        """Total element count N = n_h * n_v."""
        return self.n_h * self.n_v


@dataclass(frozen=True)
class SceneView:
    """Virtual camera geometry the codebook is matched to."""

    fov_deg: float = 100.0             # full horizontal field of view
    aspect_ratio: float = 16.0 / 9.0   # sensor width / height
    focal_length_m: float = 0.01343    # F_L; results are invariant to it
    os_h: int = 1                      # horizontal beam oversampling factor
    os_v: int = 1                      # vertical beam oversampling factor

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError("fov_deg must lie in (0, 180)")
        if self.aspect_ratio <= 0:
            raise ValueError("aspect_ratio must be positive")
        if self.focal_length_m <= 0:
            raise ValueError("focal_length_m must be positive")
        if self.os_h < 1 or self.os_v < 1:
            raise ValueError("oversampling factors must be >= 1")

    @property
    def sensor_width_m(self) -> float:
        """S_H = 2 * F_L * tan(FoV/2)."""
        return 2.0 * self.focal_length_m * np.tan(np.radians(self.fov_deg) / 2.0)

    @property
    def sensor_height_m(self) -> float:
        """S_V = S_H / aspect_ratio."""
        return self.sensor_width_m / self.aspect_ratio


def sensor_grid(view: SceneView, n_bar_h: int, n_bar_v: int) -> np.ndarray:
    """
    Cell centers of the virtual sensor plane.

    The sensor spans [-S_H/2, S_H/2] x [-S_V/2, S_V/2] at y = F_L and is
    split into n_bar_h * n_bar_v equal cells. Row 0 is the top of the image
    (largest z), column 0 the left edge (most negative x).

    Returns
    -------
    np.ndarray, shape (n_bar_v, n_bar_h, 3)
        Cell center coordinates (x, y, z) in the device frame, meters.
    """
    if n_bar_h < 1 or n_bar_v < 1:
        raise ValueError("grid dimensions must be positive")
    q_h = view.sensor_width_m / n_bar_h
    q_v = view.sensor_height_m / n_bar_v
    # Symmetric form (k - (n-1)/2) * q is exactly sign-symmetric in floating
    # point, which keeps mirror-symmetry tests exact.
    x = (np.arange(n_bar_h) - (n_bar_h - 1) / 2.0) * q_h
    z = ((n_bar_v - 1) / 2.0 - np.arange(n_bar_v)) * q_v
    pts = np.empty((n_bar_v, n_bar_h, 3))
    pts[:, :, 0] = x[None, :]
    pts[:, :, 1] = view.focal_length_m
    pts[:, :, 2] = z[:, None]
    return pts


def grid_angles(points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Steering and projection angles for sensor-grid points.

    For a point (x, y, z):
        theta_z = pi/2 - arctan(z / hypot(x, y))   angle from the +z axis
        theta_x = pi/2 - arctan(x / hypot(z, y))   angle from the +x axis
        phi     = atan2(y, x)                      azimuth in the x-y plane

    theta_z and theta_x drive the UPA steering phases; (theta_z, phi) convert
    a range estimate into depth via depth = |rho * sin(theta_z) * sin(phi)|.

    Returns
    -------
    (theta_z, theta_x, phi) : each np.ndarray of shape points.shape[:-1]
    """
    x = points[..., 0]
    y = points[..., 1]
    z = points[..., 2]
    theta_z = np.pi / 2.0 - np.arctan2(z, np.hypot(x, y))
    theta_x = np.pi / 2.0 - np.arctan2(x, np.hypot(z, y))
    phi = np.arctan2(y, x)
    return theta_z, theta_x, phi


def steering_vector(theta_z: float, theta_x: float, upa: UpaConfig) -> np.ndarray:
    """
    UPA array response a(theta_z, theta_x), the Kronecker product of the
    vertical and horizontal constituent vectors:

        b_v[r] = exp(-j * 2*pi*d_s/lambda * r * cos(theta_z)),  r = 0..n_v-1
        b_h[r] = exp(-j * 2*pi*d_s/lambda * r * cos(theta_x)),  r = 0..n_h-1
        a = kron(b_v, b_h)

    Entries have unit modulus; ||a||^2 = n.
    """
    k_d = 2.0 * np.pi * upa.spacing_wavelengths
    b_v = np.exp(-1j * k_d * np.arange(upa.n_v) * np.cos(theta_z))
    b_h = np.exp(-1j * k_d * np.arange(upa.n_h) * np.cos(theta_x))
    return np.kron(b_v, b_h)


def slr_weights(n: int, delta: float) -> np.ndarray:
    """
    Gaussian sidelobe-reduction taper for one array axis.

    [c]_r = exp(-(r - mu)^2 / (2 sigma^2)), mu = n/2, sigma = n/delta,
    with the element index r running 1..n. Larger delta widens the mainlobe
    and pushes sidelobes further down; delta = 0 disables the taper.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if delta < 0:
        raise ValueError("delta must be >= 0")
    if delta == 0:
        return np.ones(n)
    r = np.arange(1, n + 1, dtype=float)
    sigma = n / delta
    return np.exp(-((r - n / 2.0) ** 2) / (2.0 * sigma**2))


def quantize_phases(weights: np.ndarray, bits: int) -> np.ndarray:
    """
    Snap weight phases to the 2^bits shifter set {2*pi*k / 2^bits}.

    The modulus of each entry is preserved; only the phase is quantized.
    Exact half-step ties resolve toward the smaller quantized phase, so with
    bits = 2 a phase of pi/4 snaps to 0 rather than pi/2.
    """
    if bits < 1:
        raise ValueError("bits must be >= 1")
    step = 2.0 * np.pi / (2**bits)
    phase = np.mod(np.angle(weights), 2.0 * np.pi)
    k = np.ceil(phase / step - 0.5)      # round half down
    k = np.mod(k, 2**bits)
    return np.abs(weights) * np.exp(1j * step * k)


def beam_index(v: int, h: int, n_bar_h: int) -> int:
    """Linear beam index for 0-based grid cell (v, h); row-major, v outer."""
    return v * n_bar_h + h


def beam_vh(m: int, n_bar_h: int) -> tuple[int, int]:
    """Inverse of beam_index: 0-based (v, h) for linear beam m."""
    return divmod(m, n_bar_h)


@dataclass
class Codebook:
    """
    Grid-matched beam pair codebook.

    weights[m] is both the transmit beam f_m and the combining vector w_m
    (identical arrays, monostatic matched beams). Beams are ordered row-major
    over the sensor grid: m = v * n_bar_h + h with v = 0 the top image row.
    """

    upa: UpaConfig
    view: SceneView
    n_bar_h: int
    n_bar_v: int
    grid_points: np.ndarray            # (n_bar_v, n_bar_h, 3) sensor cell centers
    theta_z: np.ndarray                # (n_bar_v, n_bar_h) steering angles
    theta_x: np.ndarray
    phi: np.ndarray                    # (n_bar_v, n_bar_h) projection azimuths
    weights: np.ndarray                # (M, n) complex beam weights
    slr_delta_h: float = 0.0
    slr_delta_v: float = 0.0
    phase_bits: int | None = None
    combine_norm_sq: np.ndarray = field(init=False)  # ||w_m||^2 per beam

    def __post_init__(self):
        self.combine_norm_sq = np.sum(np.abs(self.weights) ** 2, axis=1)

    @property
    def m(self) -> int:
        """Number of beams M = n_bar_v * n_bar_h."""
        return self.n_bar_h * self.n_bar_v

    def pair(self, m: int) -> tuple[np.ndarray, np.ndarray]:
        """(f_m, w_m) for one beam; both views of the same weight row."""
        row = self.weights[m]
        return row, row


def design_codebook(
    upa: UpaConfig,
    view: SceneView,
    slr_delta_h: float = 0.0,
    slr_delta_v: float = 0.0,
    phase_bits: int | None = None,
) -> Codebook:
    """
    Design the grid-matched sensing codebook.

    One beam per sensor cell: n_bar_h = n_h * os_h columns and
    n_bar_v = n_v * os_v rows, M = n_bar_h * n_bar_v beams in total.
    Optional Gaussian tapers (slr_delta_* > 0) are applied per axis before
    the optional phase quantization; quantization always runs last.
    """
    n_bar_h = upa.n_h * view.os_h
    n_bar_v = upa.n_v * view.os_v
    pts = sensor_grid(view, n_bar_h, n_bar_v)
    theta_z, theta_x, phi = grid_angles(pts)

    k_d = 2.0 * np.pi * upa.spacing_wavelengths
    # Constituent vectors for every beam at once: (M, n_v) and (M, n_h).
    cos_tz = np.cos(theta_z).reshape(-1)
    cos_tx = np.cos(theta_x).reshape(-1)
    b_v = np.exp(-1j * k_d * np.outer(cos_tz, np.arange(upa.n_v)))
    b_h = np.exp(-1j * k_d * np.outer(cos_tx, np.arange(upa.n_h)))
    if slr_delta_v > 0:
        b_v = b_v * slr_weights(upa.n_v, slr_delta_v)[None, :]
    if slr_delta_h > 0:
        b_h = b_h * slr_weights(upa.n_h, slr_delta_h)[None, :]
    # Row-wise Kronecker product; index layout matches steering_vector.
    weights = (b_v[:, :, None] * b_h[:, None, :]).reshape(-1, upa.n)
    if phase_bits is not None:
        weights = quantize_phases(weights, phase_bits)

    return Codebook(
        upa=upa,
        view=view,
        n_bar_h=n_bar_h,
        n_bar_v=n_bar_v,
        grid_points=pts,
        theta_z=theta_z,
        theta_x=theta_x,
        phi=phi,
        weights=weights,
        slr_delta_h=slr_delta_h,
        slr_delta_v=slr_delta_v,
        phase_bits=phase_bits,
    )


def radiation_pattern(
    beam: np.ndarray,
    upa: UpaConfig,
    theta_z: np.ndarray,
    theta_x: np.ndarray,
) -> np.ndarray:
    """
    Normalized transmit power pattern |a(theta_z, theta_x)^H f|^2 of one beam
    over a grid of angles, peak-normalized to 1. theta_z and theta_x must be
    broadcastable against each other.
    """
    theta_z, theta_x = np.broadcast_arrays(theta_z, theta_x)
    k_d = 2.0 * np.pi * upa.spacing_wavelengths
    b_v = np.exp(-1j * k_d * np.cos(theta_z)[..., None] * np.arange(upa.n_v))
    b_h = np.exp(-1j * k_d * np.cos(theta_x)[..., None] * np.arange(upa.n_h))
    f = beam.reshape(upa.n_v, upa.n_h)
    # a^H f = b_v^H F b_h* term by term: contract vertical then horizontal.
    inner = np.einsum("...v,vh,...h->...", b_v.conj(), f, b_h.conj())
    power = np.abs(inner) ** 2
    peak = power.max()
    if peak == 0:
        raise ValueError("beam has zero pattern")
    return power / peak


def write_codebook_csv(cb: Codebook, path) -> None:
    """
    Dump a codebook to CSV, one row per beam:
    m, v, h, theta_z, theta_x, phi, x, y, z, then the n weight entries as
    interleaved re/im columns (w0_re, w0_im, ...).
    """
    n = cb.upa.n
    header = ["m", "v", "h", "theta_z_rad", "theta_x_rad", "phi_rad", "x_m", "y_m", "z_m"]
    for i in range(n):
        header += [f"w{i}_re", f"w{i}_im"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for m in range(cb.m):
            v, h = beam_vh(m, cb.n_bar_h)
            pt = cb.grid_points[v, h]
            row = [
                m,
                v,
                h,
                repr(float(cb.theta_z[v, h])),
                repr(float(cb.theta_x[v, h])),
                repr(float(cb.phi[v, h])),
                repr(float(pt[0])),
                repr(float(pt[1])),
                repr(float(pt[2])),
            ]
            w = cb.weights[m]
            for i in range(n):
                row += [repr(float(w[i].real)), repr(float(w[i].imag))]
            writer.writerow(row)
