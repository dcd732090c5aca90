"""Rotation construction, sampling, metrics, and sphere-angle conversions.

Conventions used throughout the package:

- Points are float64 arrays; a single direction is shape (3,), a set is
  (N, 3) with rows on the unit sphere.
- Rotations are 3x3 matrices acting on column vectors, so a point set is
  rotated with ``points @ r.T``.
- Azimuth alpha = atan2(y, x) and polar beta = acos(z), both in degrees,
  alpha wrapped to [0, 360), beta in [0, 180].
- Axis direction angles are theta_x = atan2(z, y), theta_y = atan2(x, z),
  theta_z = atan2(y, x), each wrapped to [0, 360).  atan2(0, 0) is taken
  as 0 so binning at the poles stays deterministic.
"""

import numpy as np

from .errors import DegenerateMeanError, EmptySetError, NotUnitVectorError, ZeroVectorError

AXES = ("x", "y", "z")


def normalize(v):
    """Scale v (shape (3,) or (N, 3)) to unit length.

    Raises ZeroVectorError if any row has norm <= 1e-12.
    """
    v = np.asarray(v, dtype=np.float64)
    norms = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(norms <= 1e-12):
        raise ZeroVectorError("cannot normalize a near-zero vector")
    return v / norms


def check_unit(v, tol=1e-6, what="vector"):
    """Raise NotUnitVectorError unless every row of v has norm 1 within tol."""
    v = np.asarray(v, dtype=np.float64)
    err = np.abs(np.linalg.norm(v, axis=-1) - 1.0)
    worst = float(np.max(err)) if err.size else 0.0
    if worst > tol:
        raise NotUnitVectorError(f"{what} deviates from unit norm by {worst:.3g}")
    return v


def spherical_coords(p):
    """Azimuth/polar angles in degrees for unit directions.

    Accepts shape (3,) or (N, 3); returns matching scalars or arrays
    (alpha in [0, 360), beta in [0, 180]).
    """
    p = np.asarray(p, dtype=np.float64)
    alpha = np.mod(np.degrees(np.arctan2(p[..., 1], p[..., 0])), 360.0)
    alpha = np.where(alpha >= 360.0, 0.0, alpha)  # tiny negatives wrap to 360.0
    beta = np.degrees(np.arccos(np.clip(p[..., 2], -1.0, 1.0)))
    if p.ndim == 1:
        return float(alpha), float(beta)
    return alpha, beta


def from_spherical(alpha_deg, beta_deg):
    """Unit direction(s) for azimuth/polar angles in degrees."""
    a = np.radians(np.asarray(alpha_deg, dtype=np.float64))
    b = np.radians(np.asarray(beta_deg, dtype=np.float64))
    sb = np.sin(b)
    return np.stack([sb * np.cos(a), sb * np.sin(a), np.cos(b)], axis=-1)


def axis_direction_angles(p):
    """Direction angles (theta_x, theta_y, theta_z) in degrees, in [0, 360).

    theta_x = atan2(z, y), theta_y = atan2(x, z), theta_z = atan2(y, x).
    Accepts (3,) or (N, 3); returns shape (..., 3).
    """
    p = np.asarray(p, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    ang = np.stack(
        [np.arctan2(z, y), np.arctan2(x, z), np.arctan2(y, x)], axis=-1
    )
    out = np.mod(np.degrees(ang), 360.0)
    return np.where(out >= 360.0, 0.0, out)


def axis_rotation(axis, angle_deg):
    """Right-handed rotation matrix about a coordinate axis ('x', 'y', 'z')."""
    t = np.radians(float(angle_deg))
    c, s = np.cos(t), np.sin(t)
    axis = str(axis).lower()
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis must be one of {AXES}, got {axis!r}")


def compose_zyx(tz_deg, ty_deg, tx_deg):
    """R_z(tz) @ R_y(ty) @ R_x(tx), angles in degrees."""
    return (
        axis_rotation("z", tz_deg)
        @ axis_rotation("y", ty_deg)
        @ axis_rotation("x", tx_deg)
    )


def rotation_between_vectors(v1, v2):
    """Rotation taking v2 onto v1 (both unit): result @ v2 == v1.

    Uses the Rodrigues formula about the v2 x v1 axis; equal vectors give
    the identity and antipodal vectors a 180-degree flip about any
    perpendicular axis.
    """
    v1 = check_unit(np.asarray(v1, dtype=np.float64), what="v1")
    v2 = check_unit(np.asarray(v2, dtype=np.float64), what="v2")
    cross = np.cross(v2, v1)
    s = float(np.linalg.norm(cross))
    c = float(np.dot(v2, v1))
    if s < 1e-12:
        if c > 0.0:
            return np.eye(3)
        # antipodal: 180 degrees about any axis perpendicular to v2
        helper = np.zeros(3)
        helper[int(np.argmin(np.abs(v2)))] = 1.0
        u = normalize(np.cross(v2, helper))
        return -np.eye(3) + 2.0 * np.outer(u, u)
    u = cross / s
    theta = np.arctan2(s, c)
    k = np.array(
        [[0.0, -u[2], u[1]], [u[2], 0.0, -u[0]], [-u[1], u[0], 0.0]]
    )
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def geodesic_angle_deg(r1, r2):
    """Angle in degrees of the rotation r1.T @ r2, in [0, 180]."""
    cos_t = (np.trace(np.asarray(r1).T @ np.asarray(r2)) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(cos_t, -1.0, 1.0))))


def is_rotation(m, tol=1e-9):
    """True if m is orthonormal with determinant +1 within tol."""
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        return False
    return bool(
        np.all(np.abs(m.T @ m - np.eye(3)) <= tol)
        and abs(np.linalg.det(m) - 1.0) <= tol
    )


def sample_rotations(n, seed):
    """n rotations drawn uniformly on SO(3), deterministic per seed.

    Returns an (n, 3, 3) array.  Sampling normalizes 4D Gaussian draws into
    unit quaternions, which is exactly uniform under the Haar measure.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    q = rng.normal(size=(int(n), 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    out = np.empty((int(n), 3, 3))
    out[:, 0, 0] = 1.0 - 2.0 * (y * y + z * z)
    out[:, 0, 1] = 2.0 * (x * y - w * z)
    out[:, 0, 2] = 2.0 * (x * z + w * y)
    out[:, 1, 0] = 2.0 * (x * y + w * z)
    out[:, 1, 1] = 1.0 - 2.0 * (x * x + z * z)
    out[:, 1, 2] = 2.0 * (y * z - w * x)
    out[:, 2, 0] = 2.0 * (x * z - w * y)
    out[:, 2, 1] = 2.0 * (y * z + w * x)
    out[:, 2, 2] = 1.0 - 2.0 * (x * x + y * y)
    return out


def mean_direction(points):
    """Mean direction and resultant length of a set of unit vectors.

    Returns (direction (3,), resultant in [0, 1]).  Raises EmptySetError on
    empty input and DegenerateMeanError when the resultant length falls
    below 1e-6 (no stable mean direction exists).
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptySetError("mean_direction needs a nonempty (N, 3) set")
    mean = points.mean(axis=0)
    resultant = float(np.linalg.norm(mean))
    if resultant < 1e-6:
        raise DegenerateMeanError(
            f"resultant length {resultant:.3g} is below 1e-6"
        )
    return mean / resultant, resultant
