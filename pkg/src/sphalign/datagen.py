"""Procedural spherical-pattern dataset generator.

Five template families (labelled A1..A5), seven degradation stages
(B1..B7), and per-configuration rotated sources with ground truth.  Every
random draw comes from a stream derived from (seed, indices), so parallel
and serial builds produce byte-identical files.
"""

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import EmptySetError
from .so3 import from_spherical, normalize, sample_rotations

FAMILIES = (
    "SimpleTrajectory",
    "SharpTrajectory",
    "SmallIslands",
    "LargeIslands",
    "NonUniformDensity",
)

STAGES = {
    "B1": (0.0, 0.0),
    "B2": (0.01, 0.0),
    "B3": (0.01, 0.10),
    "B4": (0.01, 0.25),
    "B5": (0.01, 0.50),
    "B6": (0.01, 0.75),
    "B7": (0.01, 0.90),
}

NOISE_MODELS = ("ambient", "tangent")


@dataclass(frozen=True)
class PatternSpec:
    family: str
    n_points: int
    seed: int

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if self.n_points < 100:
            raise ValueError("n_points must be >= 100")

    @property
    def label(self):
        return f"A{FAMILIES.index(self.family) + 1}"


@dataclass(frozen=True)
class StageSpec:
    stage: str
    noise_sigma: float
    outlier_fraction: float

    def __post_init__(self):
        if self.stage not in STAGES:
            raise ValueError(f"unknown stage {self.stage!r}")
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1]")


def stage_spec(name):
    if name not in STAGES:
        raise ValueError(f"unknown stage {name!r}")
    sigma, frac = STAGES[name]
    return StageSpec(stage=name, noise_sigma=sigma, outlier_fraction=frac)


def all_stages():
    return [stage_spec(name) for name in STAGES]


def _stream(*key):
    flat = []
    for part in key:
        if isinstance(part, (list, tuple)):
            flat.extend(int(v) for v in part)
        else:
            flat.append(int(part))
    return np.random.default_rng(np.random.SeedSequence(flat))


def _uniform_sphere(rng, n):
    v = rng.normal(size=(n, 3))
    return normalize(v)


def _tangent_basis(mu):
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(mu)))] = 1.0
    e1 = normalize(np.cross(mu, helper))
    e2 = np.cross(mu, e1)
    return e1, e2


def _vmf(rng, mu, kappa, n):
    """von Mises-Fisher samples about mu; valid for kappa up to ~1e3."""
    u = rng.uniform(size=n)
    w = 1.0 + np.log(u + (1.0 - u) * np.exp(-2.0 * kappa)) / kappa
    w = np.clip(w, -1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    e1, e2 = _tangent_basis(mu)
    sin_t = np.sqrt(np.clip(1.0 - w * w, 0.0, None))
    return (
        w[:, None] * mu[None, :]
        + (sin_t * np.cos(phi))[:, None] * e1[None, :]
        + (sin_t * np.sin(phi))[:, None] * e2[None, :]
    )


def _slerp(a, b, t):
    """Great-circle interpolation between unit vectors a and b."""
    dot = float(np.clip(np.dot(a, b), -1.0, 1.0))
    omega = np.arccos(dot)
    if omega < 1e-9:
        return np.repeat(a[None, :], len(t), axis=0)
    sa = np.sin((1.0 - t) * omega) / np.sin(omega)
    sb = np.sin(t * omega) / np.sin(omega)
    return sa[:, None] * a[None, :] + sb[:, None] * b[None, :]


def _simple_trajectory(rng, n):
    # smooth small-circle arc: a partial ring so the azimuth structure is
    # asymmetric and the mean direction stays well off zero
    radius = rng.uniform(25.0, 50.0)
    span = rng.uniform(200.0, 300.0)
    start = rng.uniform(0.0, 360.0)
    t = np.sort(rng.uniform(0.0, span, size=n))
    polar = radius + rng.normal(0.0, 2.0, size=n)
    pts = from_spherical(start + t, np.clip(polar, 0.5, 179.5))
    frame = sample_rotations(1, rng.integers(2**32))[0]
    return pts @ frame.T


def _sharp_trajectory(rng, n):
    # piecewise great-circle segments with corners, confined to one
    # hemisphere cap so the resultant length stays comfortably > 0.3
    center = _uniform_sphere(rng, 1)[0]
    n_way = int(rng.integers(5, 8))
    waypoints = _vmf(rng, center, 6.0, n_way)
    lengths = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        lengths.append(max(float(np.arccos(np.clip(np.dot(a, b), -1, 1))), 1e-6))
    weights = np.array(lengths) / sum(lengths)
    counts = (weights * n).astype(int)
    counts[int(np.argmax(counts))] += n - int(counts.sum())
    segs = []
    for (a, b), m in zip(zip(waypoints[:-1], waypoints[1:]), counts):
        if m <= 0:
            continue
        segs.append(_slerp(a, b, rng.uniform(0.0, 1.0, size=m)))
    pts = np.vstack(segs)
    jitter = rng.normal(0.0, np.radians(1.0), size=pts.shape)
    return normalize(pts + jitter)


def _islands(rng, n, n_blobs, kappa):
    centers = _uniform_sphere(rng, n_blobs)
    base = n // n_blobs
    counts = np.full(n_blobs, base)
    counts[: n - base * n_blobs] += 1
    parts = [
        _vmf(rng, centers[i], kappa, int(counts[i]))
        for i in range(n_blobs)
        if counts[i] > 0
    ]
    return np.vstack(parts)


def _non_uniform_density(rng, n, gradient=0.9):
    # density p(z) proportional to (1 + gradient*z): full coverage with a
    # linear gradient along z, sampled by inverting the CDF
    u = rng.uniform(size=n)
    g = gradient
    z = (-0.5 + np.sqrt(0.25 - g * (0.5 - 0.25 * g - u))) / (0.5 * g)
    z = np.clip(z, -1.0, 1.0)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=n)
    s = np.sqrt(1.0 - z * z)
    return np.column_stack([s * np.cos(phi), s * np.sin(phi), z])


def generate_template(spec):
    """Deterministic template point set for a pattern family."""
    rng = _stream(spec.seed, 0, FAMILIES.index(spec.family))
    n = spec.n_points
    if spec.family == "SimpleTrajectory":
        return _simple_trajectory(rng, n)
    if spec.family == "SharpTrajectory":
        return _sharp_trajectory(rng, n)
    if spec.family == "SmallIslands":
        return _islands(rng, n, 40, 300.0)
    if spec.family == "LargeIslands":
        return _islands(rng, n, 6, 15.0)
    return _non_uniform_density(rng, n)


def apply_stage(template, stage, seed, noise_model="ambient", return_outlier_mask=False):
    """Degrade a template: replace floor(f*N) points with uniform outliers,
    then perturb every remaining inlier with Gaussian noise and renormalize.

    ``noise_model`` picks where the Gaussian lives: ``ambient`` adds it in
    3D before renormalizing, ``tangent`` adds it in the local tangent plane.
    """
    if noise_model not in NOISE_MODELS:
        raise ValueError(f"noise_model must be one of {NOISE_MODELS}")
    points = np.asarray(template, dtype=np.float64)
    if points.ndim != 2 or points.shape[0] == 0:
        raise EmptySetError("template must be a nonempty (N, 3) array")
    n = points.shape[0]
    rng = _stream(seed)
    out = points.copy()
    n_out = int(np.floor(stage.outlier_fraction * n))
    mask = np.zeros(n, dtype=bool)
    if n_out > 0:
        chosen = rng.choice(n, size=n_out, replace=False)
        mask[chosen] = True
        out[chosen] = _uniform_sphere(rng, n_out)
    if stage.noise_sigma > 0.0:
        inliers = ~mask
        noise = rng.normal(0.0, stage.noise_sigma, size=(int(inliers.sum()), 3))
        if noise_model == "tangent":
            p = out[inliers]
            noise -= (noise * p).sum(axis=1, keepdims=True) * p
        out[inliers] = normalize(out[inliers] + noise)
    if return_outlier_mask:
        return out, mask
    return out


def sample_shape_cloud(seed, n_points=2500):
    """Random lumpy-ball surface cloud scaled into the unit cube.

    A star-shaped surface r(u) = 1 + sum of Gaussian bumps and dents at
    random sphere directions, sampled uniformly in direction.  The curved
    lumps spread the surface normals over the whole sphere with dozens of
    distinct features, which keeps the normal-direction embedding textured
    enough to register partial views; useful as a synthetic registration
    target.
    """
    rng = _stream(seed, 3)
    n_bumps = int(rng.integers(24, 49))
    centers = _uniform_sphere(rng, n_bumps)
    amps = rng.uniform(0.05, 0.18, size=n_bumps) * rng.choice([-1.0, 1.0], size=n_bumps)
    widths = rng.uniform(0.05, 0.22, size=n_bumps)
    dirs = _uniform_sphere(rng, n_points)
    radii = 1.0 + (amps * np.exp(-(1.0 - dirs @ centers.T) / widths)).sum(axis=1)
    pts = dirs * np.maximum(radii, 0.3)[:, None]
    pts -= pts.min(axis=0)
    pts /= pts.max()
    return pts


def partial_view(points, seed, keep_fraction=0.7):
    """Directional cut keeping the floor(f*N) points most exposed to a
    random view direction; a crude single-view visibility surrogate."""
    if not 0.0 < keep_fraction <= 1.0:
        raise ValueError("keep_fraction must lie in (0, 1]")
    points = np.asarray(points, dtype=np.float64)
    rng = _stream(seed, 4)
    direction = _uniform_sphere(rng, 1)[0]
    depth = (points - points.mean(axis=0)) @ direction
    keep = int(np.floor(keep_fraction * points.shape[0]))
    order = np.argsort(-depth, kind="stable")
    return points[np.sort(order[:keep])]


def _write_xyz(path, points):
    lines = ["%.17g %.17g %.17g" % (p[0], p[1], p[2]) for p in points]
    _atomic_write(path, "\n".join(lines) + "\n")


def _atomic_write(path, text):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def build_dataset(
    patterns,
    stages,
    n_rotations,
    seed,
    out_dir,
    noise_model="ambient",
):
    """Write a full pattern/stage/rotation dataset under out_dir.

    Layout: ``<out_dir>/<pattern>/template.xyz`` and
    ``<out_dir>/<pattern>/<stage>/R<idx>.xyz``; ground truth rotations in
    ``ground_truth.csv``; a JSON manifest describing every configuration.
    One rotation set is shared across all patterns and stages, so R17
    names the same rotation everywhere.  Each configuration's degradation
    uses its own RNG stream, so sources are independently noised.
    Returns the manifest dict.
    """
    if n_rotations < 1:
        raise ValueError("n_rotations must be >= 1")
    labels = [p.label for p in patterns]
    if len(set(labels)) != len(labels):
        raise ValueError("duplicate pattern families in one dataset")
    os.makedirs(out_dir, exist_ok=True)

    rotations = sample_rotations(n_rotations, np.random.SeedSequence([seed, 2]))
    entries = []
    gt_lines = ["config_id," + ",".join(f"r{i}{j}" for i in range(3) for j in range(3))]

    for p_idx, pattern in enumerate(patterns):
        label = pattern.label
        template = generate_template(pattern)
        pattern_dir = os.path.join(out_dir, label)
        os.makedirs(pattern_dir, exist_ok=True)
        template_file = os.path.join(label, "template.xyz")
        _write_xyz(os.path.join(out_dir, template_file), template)
        for s_idx, stage in enumerate(stages):
            stage_dir = os.path.join(pattern_dir, stage.stage)
            os.makedirs(stage_dir, exist_ok=True)
            for r_idx in range(n_rotations):
                config_id = f"{label}{stage.stage}R{r_idx}"
                staged = apply_stage(
                    template,
                    stage,
                    [seed, 1, p_idx, s_idx, r_idx],
                    noise_model=noise_model,
                )
                rot = rotations[r_idx]
                source = staged @ rot.T
                source_file = os.path.join(label, stage.stage, f"R{r_idx}.xyz")
                _write_xyz(os.path.join(out_dir, source_file), source)
                gt_lines.append(
                    config_id + "," + ",".join("%.17g" % v for v in rot.ravel())
                )
                entries.append(
                    {
                        "config_id": config_id,
                        "pattern": label,
                        "family": pattern.family,
                        "stage": stage.stage,
                        "rotation_index": r_idx,
                        "source_file": source_file,
                        "template_file": template_file,
                    }
                )

    _atomic_write(os.path.join(out_dir, "ground_truth.csv"), "\n".join(gt_lines) + "\n")
    manifest = {
        "seed": int(seed),
        "n_rotations": int(n_rotations),
        "noise_model": noise_model,
        "patterns": [
            {
                "label": p.label,
                "family": p.family,
                "n_points": int(p.n_points),
                "seed": int(p.seed),
            }
            for p in patterns
        ],
        "stages": [
            {
                "stage": s.stage,
                "noise_sigma": float(s.noise_sigma),
                "outlier_fraction": float(s.outlier_fraction),
            }
            for s in stages
        ],
        "ground_truth_file": "ground_truth.csv",
        "entries": entries,
    }
    _atomic_write(
        os.path.join(out_dir, "manifest.json"),
        json.dumps(manifest, indent=2, sort_keys=True) + "\n",
    )
    return manifest
