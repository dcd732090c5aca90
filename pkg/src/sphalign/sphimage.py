"""Equirectangular-image rotation estimation.

Images are (180, 360) float arrays with intensities in [0, 1]: rows are
polar bins (north pole at row 0), columns azimuth bins.  Bright pixels
convert to unit directions at pixel centers, and two converted images
align with the hybrid point-pattern aligner.
"""

from functools import lru_cache

import numpy as np

from .align import hybrid_align
from .errors import EmptyResultError
from .so3 import from_spherical, spherical_coords

HEIGHT = 180
WIDTH = 360


def as_image(img):
    """Validate and return a (180, 360) float64 image with values in [0, 1]."""
    img = np.asarray(img, dtype=np.float64)
    if img.shape != (HEIGHT, WIDTH):
        raise ValueError(f"expected ({HEIGHT}, {WIDTH}) image, got {img.shape}")
    if img.min() < 0.0 or img.max() > 1.0:
        raise ValueError("intensities must lie in [0, 1]")
    return img


def resize_equirect(img):
    """Nearest-neighbor resample of any (H, W) intensity grid to 180x360."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError("expected a 2D intensity array")
    if img.shape == (HEIGHT, WIDTH):
        return img.copy()
    rows = np.minimum(
        ((np.arange(HEIGHT) + 0.5) * img.shape[0] / HEIGHT).astype(int),
        img.shape[0] - 1,
    )
    cols = np.minimum(
        ((np.arange(WIDTH) + 0.5) * img.shape[1] / WIDTH).astype(int),
        img.shape[1] - 1,
    )
    return img[np.ix_(rows, cols)]


def rgb_to_gray(rgb):
    """Standard luma conversion for color images."""
    rgb = np.asarray(rgb, dtype=np.float64)
    return rgb[..., 0] * 0.299 + rgb[..., 1] * 0.587 + rgb[..., 2] * 0.114


@lru_cache(maxsize=1)
def _pixel_dirs():
    """Unit direction of every pixel center, shape (180, 360, 3)."""
    alpha = np.arange(WIDTH) + 0.5
    beta = np.arange(HEIGHT) + 0.5
    grid_a, grid_b = np.meshgrid(alpha, beta)
    dirs = from_spherical(grid_a, grid_b)
    dirs.setflags(write=False)
    return dirs


def sph_img_to_points(img, threshold=0.21):
    """Directions of all pixels with intensity >= threshold.

    Raises EmptyResultError when nothing passes (threshold too high).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    img = as_image(img)
    mask = img >= threshold
    if not mask.any():
        raise EmptyResultError(f"no pixel reaches intensity {threshold}")
    return _pixel_dirs()[mask]


def estimate_rotation_images(template, source, threshold=0.21):
    """Hybrid alignment of two images' thresholded point sets.

    The returned rotation maps source directions onto the template, so
    rotate_image(source, rotation) approximates the template.
    """
    template_pts = sph_img_to_points(template, threshold)
    source_pts = sph_img_to_points(source, threshold)
    return hybrid_align(template_pts, source_pts)


def rotate_image(img, rotation):
    """Resample an image under a rotation of the sphere.

    Each output pixel pulls its intensity from the input pixel its
    direction came from (nearest neighbor), so straight rotations of the
    camera frame produce exact column shifts.
    """
    img = as_image(img)
    rotation = np.asarray(rotation, dtype=np.float64)
    pulled = _pixel_dirs() @ rotation  # row-vector form of rotation.T @ d
    alpha, beta = spherical_coords(pulled)
    cols = np.floor(alpha).astype(np.int64) % WIDTH
    rows = np.minimum(np.floor(beta).astype(np.int64), HEIGHT - 1)
    return img[rows, cols]


def synthetic_map(seed=0, n_lobes=60):
    """Feature-rich test image: a seeded mixture of smooth bright lobes.

    Lobe centers stay at mid-latitudes (|z| <= 0.7) with concentration
    >= 20 so the polar caps stay dark.  Bright caps would spike the
    per-axis marginals at fixed grid positions in every image (equirect
    pixels oversample the poles), which aliases the correlation step.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
    n_lobes = int(n_lobes)
    centers = np.empty((0, 3))
    while centers.shape[0] < n_lobes:
        v = rng.normal(size=(2 * n_lobes, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        centers = np.vstack([centers, v[np.abs(v[:, 2]) <= 0.7]])
    centers = centers[:n_lobes]
    kappas = rng.uniform(20.0, 120.0, size=int(n_lobes))
    weights = rng.uniform(0.4, 1.0, size=int(n_lobes))
    dirs = _pixel_dirs()
    img = np.zeros((HEIGHT, WIDTH))
    for mu, kappa, w in zip(centers, kappas, weights):
        img += w * np.exp(kappa * (dirs @ mu - 1.0))
    img /= img.max()
    return img


def continents_map(seed=0, n_seeds=220, land_fraction=0.30, polar_cap_deg=15.0):
    """World-map-style test image: bright irregular landmasses on a dark sea.

    A smooth random field (many overlapping lobes at mid-latitudes) is
    thresholded at the requested land fraction, giving sharp coastlines,
    plus a bright antarctic cap of the given angular radius.  Land
    intensity 0.85, sea 0.02.

    The cap matters: it is one large coherent landmass that scattered
    clutter shapes cannot imitate, so it anchors the per-axis correlation
    peaks even at high clutter coverage.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 7]))
    n_seeds = int(n_seeds)
    centers = np.empty((0, 3))
    while centers.shape[0] < n_seeds:
        v = rng.normal(size=(2 * n_seeds, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        centers = np.vstack([centers, v[np.abs(v[:, 2]) <= 0.7]])
    centers = centers[:n_seeds]
    kappas = rng.uniform(15.0, 150.0, size=n_seeds)
    weights = rng.uniform(0.3, 1.0, size=n_seeds)
    dirs = _pixel_dirs()
    field = np.zeros((HEIGHT, WIDTH))
    for mu, kappa, w in zip(centers, kappas, weights):
        field += w * np.exp(kappa * (dirs @ mu - 1.0))
    cut = np.quantile(field, 1.0 - float(land_fraction))
    img = np.where(field >= cut, 0.85, 0.02)
    img[dirs[:, :, 2] < -np.cos(np.radians(float(polar_cap_deg)))] = 0.85
    return img


def clutter_fraction(modified, original, tol=0.05):
    """Fraction of pixels whose intensity moved by more than tol."""
    modified = as_image(modified)
    original = as_image(original)
    return float((np.abs(modified - original) > tol).mean())


def add_clutter(img, target_coverage, seed=0, max_shapes=10000):
    """Paint random filled circles and rectangles of random intensity until
    the changed-pixel fraction reaches target_coverage.

    Shapes are kept small (around a dozen pixels across) so a given coverage
    scatters into many independent features rather than a few large
    blocks.  Returns (cluttered_image, achieved_coverage).
    """
    img = as_image(img)
    if target_coverage <= 0.0:
        return img.copy(), 0.0
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 8]))
    out = img.copy()
    rr, cc = np.meshgrid(np.arange(HEIGHT), np.arange(WIDTH), indexing="ij")
    coverage = 0.0
    for _ in range(int(max_shapes)):
        luma = rng.uniform(0.0, 1.0)
        r0 = int(rng.integers(0, HEIGHT))
        c0 = int(rng.integers(0, WIDTH))
        if rng.uniform() < 0.5:
            radius = int(rng.integers(3, 9))
            dc = np.abs(cc - c0)
            dc = np.minimum(dc, WIDTH - dc)  # azimuth wraps
            mask = (rr - r0) ** 2 + dc**2 <= radius**2
        else:
            h = int(rng.integers(4, 13))
            w = int(rng.integers(4, 13))
            dc = (cc - c0) % WIDTH
            mask = (rr >= r0) & (rr < r0 + h) & (dc < w)
        out[mask] = luma
        coverage = clutter_fraction(out, img)
        if coverage >= target_coverage:
            break
    return out, coverage
