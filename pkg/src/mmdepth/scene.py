"""
Planar-facet scenes, ray-cast ground truth, and backscatter path extraction.

A scene is a set of coplanar convex quads with material tags plus a device
pose. The device frame is right-handed with boresight along +y and up along
+z; the virtual sensor of mmdepth.codebook lives in this frame.

Two consumers look at the same geometry:

  ground_truth_maps     per-pixel ray casting through the sensor grid; the
                        reference the estimated maps are scored against.
  trace_backscatter_paths
                        the radio view: each facet is subdivided into small
                        cells and every visible cell contributes one
                        monostatic path (delay 2*rho/c, matched departure and
                        arrival angles, radar-equation amplitude with a seeded
                        scattering phase). Facets whose orthogonal foot point
                        contains the device's mirror image add a deterministic
                        specular path, which is all that survives on glass.

Scattering strength reduces the directive-lobe material model to a single
scattered-to-incident field ratio per material (see the material table);
sigma_RCS of a cell defaults to BACKSCATTER_GAIN * scatter_ratio * cell_area.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .codebook import SceneView, sensor_grid

__all__ = [
    "BACKSCATTER_GAIN",
    "Material",
    "MATERIALS",
    "PlanarFacet",
    "DevicePose",
    "Scene",
    "PathSet",
    "ground_truth_maps",
    "trace_backscatter_paths",
    "scene_from_dict",
    "scene_to_dict",
    "load_scene",
    "save_scene",
]

_COPLANAR_TOL = 1e-9
MISS = np.inf  # ground-truth sentinel for rays that leave the scene

# Dimensionless backscatter gain of a subdivision cell relative to its
# geometric area: sigma_RCS = BACKSCATTER_GAIN * scatter_ratio * cell_area.
# A coherent flat patch of area A would contribute up to 4*pi*A/lambda^2
# (~1.26e3 for a 5 cm cell at 60 GHz); rough-surface spreading keeps the
# effective value well below that. Calibrated on the one-wall reference
# scene so the per-beam detector operates in its accurate regime.
BACKSCATTER_GAIN = 450.0


@dataclass(frozen=True)
class Material:
    """
    Surface material, reduced to scalar scattering descriptors.

    scatter_ratio is the scattered-to-incident electric field ratio; the
    remaining fields describe the diffuse lobe shape of the source model and
    are carried for completeness (the tracer folds them into scatter_ratio).
    """

    name: str
    scatter_ratio: float               # scattered / incident field ratio, 0..1
    forward_backward: float = 0.75     # forward-to-backward scattered power split
    cross_pol: float = 0.40            # cross-polarized fraction
    lobe_narrowness: float = 0.40      # directive lobe width parameter

    def __post_init__(self):
        if not 0.0 <= self.scatter_ratio <= 1.0:
            raise ValueError("scatter_ratio must lie in [0, 1]")


MATERIALS: dict[str, Material] = {
    m.name: m
    for m in (
        Material("concrete", 0.40),
        Material("ceilingboard", 0.30),
        Material("wood", 0.15),
        Material("floorboard", 0.15),
        Material("drywall", 0.10),
        Material("glass", 0.00),
    )
}


def _as_unit(v, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(3)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError(f"{what} must be nonzero")
    return v / n


@dataclass
class PlanarFacet:
    """
    Convex coplanar quad. Vertices are (4, 3) world coordinates in winding
    order; coplanarity is checked to 1e-9 relative to the facet extent.
    rcs_sqm optionally overrides the total diffuse RCS of the facet,
    otherwise it derives from area * material.scatter_ratio.
    """

    vertices: np.ndarray
    material: Material
    rcs_sqm: float | None = None

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.shape != (4, 3):
            raise ValueError("facet needs exactly 4 vertices of 3 coordinates")
        self.vertices = v
        n = np.cross(v[1] - v[0], v[2] - v[0])
        nn = np.linalg.norm(n)
        if nn == 0:
            raise ValueError("degenerate facet (collinear vertices)")
        scale = max(np.linalg.norm(v - v.mean(axis=0), axis=1).max(), 1e-30)
        off = abs(np.dot(v[3] - v[0], n / nn))
        if off > _COPLANAR_TOL * scale:
            raise ValueError(f"facet vertices not coplanar (offset {off:.3e} m)")
        # Convexity: all cross products of consecutive edges along the normal.
        edges = np.roll(v, -1, axis=0) - v
        turns = np.cross(edges, np.roll(edges, -1, axis=0)) @ (n / nn)
        if not (np.all(turns > -1e-12 * scale**2) or np.all(turns < 1e-12 * scale**2)):
            raise ValueError("facet is not convex")

    @property
    def normal(self) -> np.ndarray:
        n = np.cross(self.vertices[1] - self.vertices[0], self.vertices[2] - self.vertices[0])
        return n / np.linalg.norm(n)

    @property
    def area_sqm(self) -> float:
        v = self.vertices
        return 0.5 * (
            np.linalg.norm(np.cross(v[1] - v[0], v[2] - v[0]))
            + np.linalg.norm(np.cross(v[2] - v[0], v[3] - v[0]))
        )


@dataclass
class DevicePose:
    """Device position and orientation: boresight maps to +y, up to +z."""

    position: np.ndarray
    boresight: np.ndarray = field(default_factory=lambda: np.array([0.0, 1.0, 0.0]))
    up: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=float).reshape(3)
        y = _as_unit(self.boresight, "boresight")
        up = _as_unit(self.up, "up")
        z = up - np.dot(up, y) * y  # Gram-Schmidt: up need not be exactly orthogonal
        zn = np.linalg.norm(z)
        if zn < 1e-9:
            raise ValueError("up vector is parallel to boresight")
        z = z / zn
        x = np.cross(y, z)
        self.boresight = y
        self.up = z
        self._rotation = np.column_stack([x, y, z])  # device -> world

    @property
    def rotation(self) -> np.ndarray:
        """3x3 device-to-world rotation; columns are the device axes."""
        return self._rotation

    def to_world(self, dirs_device: np.ndarray) -> np.ndarray:
        return dirs_device @ self._rotation.T

    def to_device(self, vecs_world: np.ndarray) -> np.ndarray:
        return vecs_world @ self._rotation


@dataclass
class Scene:
    """Facet list, device pose, and the scene-wide path-loss exponent."""

    facets: list[PlanarFacet]
    device: DevicePose
    path_loss_exponent: float = 1.0

    def __post_init__(self):
        if not self.facets:
            raise ValueError("scene needs at least one facet")
        if self.path_loss_exponent <= 0:
            raise ValueError("path_loss_exponent must be positive")


def _ray_quad(origin: np.ndarray, dirs: np.ndarray, facet: PlanarFacet) -> np.ndarray:
    """
    Distances t >= 0 where rays origin + t*dirs hit the facet, inf on miss.
    dirs is (..., 3) of unit vectors.
    """
    v = facet.vertices
    n = facet.normal
    denom = dirs @ n
    offset = np.dot(v[0] - origin, n)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(np.abs(denom) > 1e-15, offset / denom, -1.0)
    pts = origin + t[..., None] * dirs
    # The normal follows the winding, so interior points satisfy
    # cross(edge, p - v_i) . n >= 0 for every edge whichever way the quad
    # was wound.
    inside = np.ones(t.shape, dtype=bool)
    for i in range(4):
        edge = v[(i + 1) % 4] - v[i]
        side = np.cross(edge, pts - v[i]) @ n
        inside &= side >= -1e-12
    return np.where((t > 1e-12) & inside, t, np.inf)


def ground_truth_maps(scene: Scene, view: SceneView, resolution: tuple[int, int]):
    """
    Ray-cast reference maps at the requested resolution.

    One ray is cast through each sensor-cell center of the same virtual
    sensor geometry the codebook uses, at (rows, cols) resolution. The range
    map holds euclidean distance to the nearest facet hit; the depth map
    holds the boresight (device-frame y) component of the hit point. Misses
    are +inf in both. Depth never exceeds range, with equality only on
    boresight.

    Returns
    -------
    (range_map, depth_map) : float arrays of shape (rows, cols), meters.
    """
    rows, cols = resolution
    pts = sensor_grid(view, cols, rows).reshape(-1, 3)
    dirs_dev = pts / np.linalg.norm(pts, axis=1, keepdims=True)
    dirs = scene.device.to_world(dirs_dev)
    t_best = np.full(dirs.shape[0], np.inf)
    for facet in scene.facets:
        t = _ray_quad(scene.device.position, dirs, facet)
        t_best = np.minimum(t_best, t)
    range_map = t_best.reshape(rows, cols)
    depth = t_best * dirs_dev[:, 1]
    depth_map = np.where(np.isfinite(t_best), depth, MISS).reshape(rows, cols)
    return range_map, depth_map


@dataclass
class PathSet:
    """
    Struct-of-arrays monostatic path collection.

    amplitude already folds sqrt(G), the carrier phase e^(-j*2*pi*f_c*tau),
    and the per-path scattering phase, so downstream only multiplies by the
    beam couplings and the pulse. Angles are device-frame steering angles.
    """

    delay_s: np.ndarray          # round-trip delays tau = 2*rho/c
    amplitude: np.ndarray        # complex path amplitudes
    theta_z: np.ndarray          # angle from the device z axis
    theta_x: np.ndarray          # angle from the device x axis
    range_m: np.ndarray          # one-way range rho
    specular: np.ndarray         # bool, True for image-source paths

    def __post_init__(self):
        n = len(self.delay_s)
        for name in ("amplitude", "theta_z", "theta_x", "range_m", "specular"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"PathSet field {name} length mismatch")

    def __len__(self) -> int:
        return len(self.delay_s)

    @property
    def max_delay_s(self) -> float:
        return float(self.delay_s.max()) if len(self) else 0.0


def _subdivide(facet: PlanarFacet, cell_size_m: float):
    """
    Split a quad into roughly square cells by bilinear interpolation of the
    corners. Returns cell centers (K, 3) and areas (K,) that sum to the
    facet area.
    """
    v = facet.vertices
    n_u = max(1, int(np.ceil(np.linalg.norm(v[1] - v[0]) / cell_size_m)))
    n_w = max(1, int(np.ceil(np.linalg.norm(v[3] - v[0]) / cell_size_m)))
    u = (np.arange(n_u) + 0.5) / n_u
    w = (np.arange(n_w) + 0.5) / n_w
    uu, ww = np.meshgrid(u, w, indexing="ij")
    uu = uu.reshape(-1, 1)
    ww = ww.reshape(-1, 1)
    centers = (
        (1 - uu) * (1 - ww) * v[0]
        + uu * (1 - ww) * v[1]
        + uu * ww * v[2]
        + (1 - uu) * ww * v[3]
    )
    # Bilinear-patch area elements via the cross product of the local tangents.
    du = (1 - ww) * (v[1] - v[0]) + ww * (v[2] - v[3])
    dw = (1 - uu) * (v[3] - v[0]) + uu * (v[2] - v[1])
    areas = np.linalg.norm(np.cross(du, dw), axis=1) / (n_u * n_w)
    return centers, areas


def _visible(scene: Scene, targets: np.ndarray, skip_facet: int) -> np.ndarray:
    """True where the segment device->target is not blocked by another facet."""
    origin = scene.device.position
    delta = targets - origin
    dist = np.linalg.norm(delta, axis=1)
    dirs = delta / dist[:, None]
    vis = np.ones(len(targets), dtype=bool)
    for j, facet in enumerate(scene.facets):
        if j == skip_facet:
            continue
        t = _ray_quad(origin, dirs, facet)
        vis &= ~(t < dist - 1e-9)
    return vis


def _device_angles(scene: Scene, targets: np.ndarray):
    """Steering angles and ranges of world-frame target points."""
    delta = targets - scene.device.position
    rho = np.linalg.norm(delta, axis=1)
    u_dev = scene.device.to_device(delta / rho[:, None])
    theta_z = np.arccos(np.clip(u_dev[:, 2], -1.0, 1.0))
    theta_x = np.arccos(np.clip(u_dev[:, 0], -1.0, 1.0))
    return theta_z, theta_x, rho


def trace_backscatter_paths(
    scene: Scene,
    tx_gain_dbi: float,
    rx_gain_dbi: float,
    wavelength_m: float,
    cell_size_m: float = 0.05,
    seed: int | np.random.SeedSequence = 0,
    include_specular: bool = True,
    include_two_bounce: bool = False,
) -> PathSet:
    """
    Extract the monostatic backscatter paths of a scene.

    Diffuse mechanism: every facet is subdivided into ~cell_size_m cells;
    each cell whose line of sight to the device is clear contributes one
    path with sigma_RCS = BACKSCATTER_GAIN * scatter_ratio * cell_area (or
    the facet's rcs_sqm override apportioned by area), delay tau = 2*rho/c,
    and amplitude sqrt(G) * e^(-j*2*pi*f_c*tau) * e^(j*xi) with xi drawn
    uniformly from a stream seeded by `seed`. Zero-amplitude cells (glass)
    are dropped.

    Specular mechanism (include_specular): a facet whose plane contains the
    orthogonal foot of the device inside its bounds returns a mirror image
    of the transmitter; the path uses the image-source gain
    G = G_T*G_R*lambda^2*(1 - scatter_ratio^2) / ((4*pi)^2 * (2*rho)^2) and
    a deterministic carrier phase.

    Two-bounce specular chains between facet pairs (double image-source
    construction) are available behind include_two_bounce and disabled by
    default.
    """
    if cell_size_m <= 0:
        raise ValueError("cell_size_m must be positive")
    rng = np.random.default_rng(seed)
    f_c = SPEED_OF_LIGHT / wavelength_m
    pl = scene.path_loss_exponent

    delays, amps, tzs, txs, rhos, specs = [], [], [], [], [], []

    for fi, facet in enumerate(scene.facets):
        centers, areas = _subdivide(facet, cell_size_m)
        # Draw the phases before any pruning so the set of random numbers a
        # facet consumes depends only on its own geometry.
        xi = rng.uniform(0.0, 2.0 * np.pi, size=len(centers))
        if facet.rcs_sqm is not None:
            sigma = facet.rcs_sqm * areas / areas.sum()
        else:
            sigma = BACKSCATTER_GAIN * facet.material.scatter_ratio * areas
        keep = sigma > 0
        keep &= _visible(scene, centers, fi)
        if not np.any(keep):
            continue
        centers, areas, sigma, xi = centers[keep], areas[keep], sigma[keep], xi[keep]
        theta_z, theta_x, rho = _device_angles(scene, centers)
        tau = 2.0 * rho / SPEED_OF_LIGHT
        # Vectorized form of channel.path_gain over the surviving cells.
        g_t = 10.0 ** (tx_gain_dbi / 10.0)
        g_r = 10.0 ** (rx_gain_dbi / 10.0)
        gain = g_t * g_r * wavelength_m**2 * sigma / ((4.0 * np.pi) ** 3 * rho ** (2.0 * pl))
        amp = np.sqrt(gain) * np.exp(1j * (xi - 2.0 * np.pi * f_c * tau))
        delays.append(tau)
        amps.append(amp)
        tzs.append(theta_z)
        txs.append(theta_x)
        rhos.append(rho)
        specs.append(np.zeros(len(rho), dtype=bool))

    if include_specular:
        for fi, facet in enumerate(scene.facets):
            spec = _specular_path(scene, fi, tx_gain_dbi, rx_gain_dbi, wavelength_m, f_c)
            if spec is not None:
                tau, amp, theta_z, theta_x, rho = spec
                delays.append(np.array([tau]))
                amps.append(np.array([amp]))
                tzs.append(np.array([theta_z]))
                txs.append(np.array([theta_x]))
                rhos.append(np.array([rho]))
                specs.append(np.array([True]))

    if include_two_bounce:
        for path in _two_bounce_paths(scene, tx_gain_dbi, rx_gain_dbi, wavelength_m, f_c):
            tau, amp, theta_z, theta_x, rho = path
            delays.append(np.array([tau]))
            amps.append(np.array([amp]))
            tzs.append(np.array([theta_z]))
            txs.append(np.array([theta_x]))
            rhos.append(np.array([rho]))
            specs.append(np.array([True]))

    if not delays:
        raise ValueError("scene produced no backscatter paths")
    return PathSet(
        delay_s=np.concatenate(delays),
        amplitude=np.concatenate(amps),
        theta_z=np.concatenate(tzs),
        theta_x=np.concatenate(txs),
        range_m=np.concatenate(rhos),
        specular=np.concatenate(specs),
    )


def _point_in_facet(point: np.ndarray, facet: PlanarFacet) -> bool:
    v = facet.vertices
    n = facet.normal
    for i in range(4):
        if np.dot(np.cross(v[(i + 1) % 4] - v[i], point - v[i]), n) < -1e-12:
            return False
    return True


def _specular_path(scene: Scene, fi: int, tx_gain_dbi, rx_gain_dbi, wavelength_m, f_c):
    """Mirror return of the device in facet fi, or None if geometry rules it out."""
    facet = scene.facets[fi]
    n = facet.normal
    d = scene.device.position
    dist = np.dot(d - facet.vertices[0], n)  # signed distance to the plane
    foot = d - dist * n
    rho = abs(float(dist))
    if rho < 1e-9 or not _point_in_facet(foot, facet):
        return None
    if not _visible(scene, foot[None, :], fi)[0]:
        return None
    refl = 1.0 - facet.material.scatter_ratio**2  # power not diffused stays specular
    if refl <= 0:
        return None
    g_t = 10.0 ** (tx_gain_dbi / 10.0)
    g_r = 10.0 ** (rx_gain_dbi / 10.0)
    gain = g_t * g_r * wavelength_m**2 * refl / ((4.0 * np.pi) ** 2 * (2.0 * rho) ** 2)
    tau = 2.0 * rho / SPEED_OF_LIGHT
    theta_z, theta_x, _ = _device_angles(scene, foot[None, :])
    amp = np.sqrt(gain) * np.exp(-1j * 2.0 * np.pi * f_c * tau)
    return tau, amp, float(theta_z[0]), float(theta_x[0]), rho


def _two_bounce_paths(scene: Scene, tx_gain_dbi, rx_gain_dbi, wavelength_m, f_c):
    """
    Double-mirror specular chains device -> A -> B -> device, by imaging the
    device through B then through A and walking the unfolded straight line.
    """
    g_t = 10.0 ** (tx_gain_dbi / 10.0)
    g_r = 10.0 ** (rx_gain_dbi / 10.0)
    d = scene.device.position
    out = []
    for ai, fa in enumerate(scene.facets):
        for bi, fb in enumerate(scene.facets):
            if ai == bi:
                continue
            refl = (1.0 - fa.material.scatter_ratio**2) * (1.0 - fb.material.scatter_ratio**2)
            if refl <= 0:
                continue
            nb = fb.normal
            img_b = d - 2.0 * np.dot(d - fb.vertices[0], nb) * nb
            na = fa.normal
            img_ba = img_b - 2.0 * np.dot(img_b - fa.vertices[0], na) * na
            total = np.linalg.norm(img_ba - d)
            if total < 1e-9:
                continue
            u = (img_ba - d) / total
            t_a = _ray_quad(d, u[None, :], fa)[0]
            if not np.isfinite(t_a) or t_a >= total:
                continue
            x_a = d + t_a * u
            # Reflect the continuation at A and find the B crossing.
            u2 = u - 2.0 * np.dot(u, na) * na
            t_b = _ray_quad(x_a, u2[None, :], fb)[0]
            if not np.isfinite(t_b):
                continue
            x_b = x_a + t_b * u2
            leg3 = np.linalg.norm(d - x_b)
            length = t_a + t_b + leg3
            gain = g_t * g_r * wavelength_m**2 * refl / ((4.0 * np.pi) ** 2 * length**2)
            tau = length / SPEED_OF_LIGHT
            tz_d, tx_d, _ = _device_angles(scene, x_a[None, :])
            amp = np.sqrt(gain) * np.exp(-1j * 2.0 * np.pi * f_c * tau)
            out.append((tau, amp, float(tz_d[0]), float(tx_d[0]), length / 2.0))
    return out


# ---------------------------------------------------------------------------
# JSON scene configs
# ---------------------------------------------------------------------------

def _material_from_spec(spec) -> Material:
    if isinstance(spec, str):
        try:
            return MATERIALS[spec]
        except KeyError:
            raise ValueError(f"unknown material {spec!r}; catalog: {sorted(MATERIALS)}") from None
    if isinstance(spec, dict):
        allowed = {"name", "scatter_ratio", "forward_backward", "cross_pol", "lobe_narrowness"}
        extra = set(spec) - allowed
        if extra:
            raise ValueError(f"unknown material keys {sorted(extra)}")
        return Material(**spec)
    raise ValueError("material must be a catalog name or an inline object")


def scene_from_dict(data: dict) -> Scene:
    """Build a Scene from a JSON-shaped dict; unknown keys are rejected."""
    allowed = {"facets", "device", "path_loss_exponent"}
    extra = set(data) - allowed
    if extra:
        raise ValueError(f"unknown scene keys {sorted(extra)}")
    facets = []
    for fd in data["facets"]:
        f_allowed = {"vertices", "material", "rcs_sqm"}
        f_extra = set(fd) - f_allowed
        if f_extra:
            raise ValueError(f"unknown facet keys {sorted(f_extra)}")
        facets.append(
            PlanarFacet(
                vertices=np.asarray(fd["vertices"], dtype=float),
                material=_material_from_spec(fd["material"]),
                rcs_sqm=fd.get("rcs_sqm"),
            )
        )
    dev = data.get("device", {})
    d_allowed = {"position", "boresight", "up"}
    d_extra = set(dev) - d_allowed
    if d_extra:
        raise ValueError(f"unknown device keys {sorted(d_extra)}")
    pose = DevicePose(
        position=np.asarray(dev.get("position", [0.0, 0.0, 0.0]), dtype=float),
        boresight=np.asarray(dev.get("boresight", [0.0, 1.0, 0.0]), dtype=float),
        up=np.asarray(dev.get("up", [0.0, 0.0, 1.0]), dtype=float),
    )
    return Scene(facets=facets, device=pose, path_loss_exponent=data.get("path_loss_exponent", 1.0))


def scene_to_dict(scene: Scene) -> dict:
    return {
        "facets": [
            {
                "vertices": f.vertices.tolist(),
                "material": {
                    "name": f.material.name,
                    "scatter_ratio": f.material.scatter_ratio,
                    "forward_backward": f.material.forward_backward,
                    "cross_pol": f.material.cross_pol,
                    "lobe_narrowness": f.material.lobe_narrowness,
                },
                **({"rcs_sqm": f.rcs_sqm} if f.rcs_sqm is not None else {}),
            }
            for f in scene.facets
        ],
        "device": {
            "position": scene.device.position.tolist(),
            "boresight": scene.device.boresight.tolist(),
            "up": scene.device.up.tolist(),
        },
        "path_loss_exponent": scene.path_loss_exponent,
    }


def load_scene(path) -> Scene:
    with open(path) as fh:
        return scene_from_dict(json.load(fh))


def save_scene(scene: Scene, path) -> None:
    with open(path, "w") as fh:
        json.dump(scene_to_dict(scene), fh, indent=2)
