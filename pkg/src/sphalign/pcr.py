"""Point-cloud registration through spherical embeddings.

Rotation and translation are decoupled: a spherical embedding of each
cloud (centroid-projected points or estimated surface normals) feeds the
correspondence-free aligners, then a voxel-voting coarse step and a
translation-only ICP recover the offset of the rotated source.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, minimum_spanning_tree
from scipy.spatial import cKDTree

from .align import AlignmentResult, SpmcOptions, frs_align, hybrid_align, spmc_align
from .errors import EmptySetError, PointAtCentroidError, TooSparseError
from .so3 import check_unit

EMBEDDINGS = ("case", "egi")
ALIGNERS = ("spmc", "frs", "hybrid")


@dataclass(frozen=True)
class PointCloud:
    """Points in scene units with optional index-aligned unit normals."""

    points: np.ndarray
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (N, 3), got {pts.shape}")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64)
            if nrm.shape != pts.shape:
                raise ValueError("normals must be index-aligned with points")
            check_unit(nrm, tol=1e-6, what="normals")
            object.__setattr__(self, "normals", nrm)

    def __len__(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class RegistrationResult:
    rotation: np.ndarray
    translation: np.ndarray
    coarse_translation: np.ndarray
    embedding: str
    alignment: AlignmentResult

    def to_dict(self):
        return {
            "rotation": [float(v) for v in np.asarray(self.rotation).ravel()],
            "translation": [float(v) for v in self.translation],
            "coarse_translation": [float(v) for v in self.coarse_translation],
            "embedding": self.embedding,
            "alignment": self.alignment.to_dict(),
        }


def _points_of(cloud):
    if isinstance(cloud, PointCloud):
        return cloud.points
    pts = np.asarray(cloud, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"expected a PointCloud or (N, 3) array, got shape {pts.shape}")
    return pts


def case_embed(cloud, centroid=None):
    """Project points radially from the centroid onto the unit sphere.

    Scale- and translation-invariant, rotation-equivariant.  The centroid
    defaults to the arithmetic mean (complete clouds); points closer than
    1e-9 to it cannot be projected and raise PointAtCentroidError.
    """
    pts = _points_of(cloud)
    if pts.shape[0] == 0:
        raise EmptySetError("cannot embed an empty cloud")
    center = pts.mean(axis=0) if centroid is None else np.asarray(centroid, dtype=np.float64)
    rays = pts - center
    dist = np.linalg.norm(rays, axis=1)
    bad = np.nonzero(dist <= 1e-9)[0]
    if bad.size:
        raise PointAtCentroidError(bad.tolist())
    return rays / dist[:, None]


def egi_embed(cloud, neighborhood_radius=0.1, min_neighbors=8):
    """Estimate consistently oriented surface normals as an S2 point set.

    Per-point plane fits over radius neighborhoods (16-NN fallback where
    the radius is too sparse), sign consistency by minimum-spanning-tree
    propagation, and a per-component outward vote so two samplings of the
    same surface embed with compatible signs.
    """
    pts = _points_of(cloud)
    n = pts.shape[0]
    if n < min_neighbors + 1:
        raise TooSparseError(f"cloud of {n} points cannot support {min_neighbors} neighbors")
    tree = cKDTree(pts)
    neighborhoods = tree.query_ball_point(pts, r=float(neighborhood_radius))
    k_fallback = min(16, n - 1)
    sparse = [i for i, nb in enumerate(neighborhoods) if len(nb) - 1 < min_neighbors]
    if sparse:
        _, knn = tree.query(pts[sparse], k=k_fallback + 1)
        knn = np.atleast_2d(knn)
        for row, i in enumerate(sparse):
            neighborhoods[i] = knn[row].tolist()
    keep = np.ones(n, dtype=bool)
    covs = np.zeros((n, 3, 3))
    for i, nb in enumerate(neighborhoods):
        if len(nb) - 1 < min_neighbors:
            keep[i] = False
            continue
        local = pts[nb]
        centered = local - local.mean(axis=0)
        covs[i] = centered.T @ centered
    if (~keep).sum() > 0.5 * n:
        raise TooSparseError("more than half of the cloud has no usable neighborhood")
    kept = np.nonzero(keep)[0]
    _, vecs = np.linalg.eigh(covs[kept])
    normals = vecs[:, :, 0]  # eigenvector of the smallest eigenvalue
    normals = _orient_normals(pts[kept], normals, pts.mean(axis=0))
    return normals


def _orient_normals(pts, normals, centroid):
    """Flip normal signs toward consistency: MST propagation, outward vote."""
    m = pts.shape[0]
    if m == 1:
        return normals
    k = min(16, m - 1)
    tree = cKDTree(pts)
    _, idx = tree.query(pts, k=k + 1)
    rows = np.repeat(np.arange(m), k)
    cols = idx[:, 1:].ravel()
    agree = np.abs((normals[rows] * normals[cols]).sum(axis=1))
    weights = 1.0 - np.clip(agree, 0.0, 1.0) + 1e-9  # keep zero-weight edges stored
    graph = coo_matrix((weights, (rows, cols)), shape=(m, m)).tocsr()
    graph = graph.maximum(graph.T)
    mst = minimum_spanning_tree(graph)
    n_comp, labels = connected_components(graph, directed=False)
    out = normals.copy()
    for comp in range(n_comp):
        members = np.nonzero(labels == comp)[0]
        root = int(members[0])
        order, preds = breadth_first_order(
            mst, i_start=root, directed=False, return_predecessors=True
        )
        for node in order[1:]:
            pred = preds[node]
            if float(out[node] @ out[pred]) < 0.0:
                out[node] = -out[node]
        vote = float(np.sign((out[members] * (pts[members] - centroid)).sum(axis=1)).sum())
        if vote < 0.0:
            out[members] = -out[members]
    return out


def estimate_translation_coarse(source_rotated, target, voxel_size=0.2):
    """Voxel-vote translation: every (source voxel, target voxel) pair casts
    a vote of weight count*count for its index difference; the heaviest
    candidate wins, ties going to the lexicographically smallest difference.
    """
    src = _points_of(source_rotated)
    tgt = _points_of(target)
    if src.shape[0] == 0 or tgt.shape[0] == 0:
        raise EmptySetError("cannot vote with an empty cloud")
    vs = float(voxel_size)
    if vs <= 0.0:
        raise ValueError("voxel_size must be positive")
    s_vox, s_counts = np.unique(
        np.floor(src / vs).astype(np.int64), axis=0, return_counts=True
    )
    t_vox, t_counts = np.unique(
        np.floor(tgt / vs).astype(np.int64), axis=0, return_counts=True
    )
    diffs = (t_vox[None, :, :] - s_vox[:, None, :]).reshape(-1, 3)
    weights = (s_counts[:, None] * t_counts[None, :]).reshape(-1)
    candidates, inverse = np.unique(diffs, axis=0, return_inverse=True)
    votes = np.bincount(inverse, weights=weights)
    best = int(np.argmax(votes))  # first max = lexicographically smallest
    return candidates[best].astype(np.float64) * vs


def translation_only_icp(source, target, initial_t, max_iter=50, tol=1e-6):
    """Refine a translation by alternating nearest-neighbor matching with
    mean-residual updates; rotation is assumed already resolved."""
    src = _points_of(source)
    tgt = _points_of(target)
    if src.shape[0] == 0 or tgt.shape[0] == 0:
        raise EmptySetError("cannot run ICP with an empty cloud")
    tree = cKDTree(tgt)
    t = np.asarray(initial_t, dtype=np.float64).copy()
    for _ in range(int(max_iter)):
        _, match = tree.query(src + t)
        update = (tgt[match] - (src + t)).mean(axis=0)
        t += update
        if float(np.linalg.norm(update)) < tol:
            break
    return t


def register(
    source,
    target,
    embedding="case",
    aligner="spmc",
    voxel_size=0.2,
    source_is_partial=False,
    neighborhood_radius=0.1,
    min_neighbors=8,
    frs_opts=None,
):
    """Full rotation-then-translation registration of source onto target.

    The transform maps source points as p -> rotation @ p + translation.
    CASE embedding requires complete clouds (its centroid is the point
    mean); use EGI for partial sources.
    """
    if embedding not in EMBEDDINGS:
        raise ValueError(f"embedding must be one of {EMBEDDINGS}")
    if aligner not in ALIGNERS:
        raise ValueError(f"aligner must be one of {ALIGNERS}")
    source = source if isinstance(source, PointCloud) else PointCloud(_points_of(source))
    target = target if isinstance(target, PointCloud) else PointCloud(_points_of(target))

    if embedding == "case":
        if source_is_partial:
            raise ValueError(
                "CASE needs complete clouds: a partial cloud's point mean is "
                "not the object centroid; use the EGI embedding instead"
            )
        emb_source = case_embed(source)
        emb_target = case_embed(target)
        spmc_opts = SpmcOptions()
    else:
        emb_source = egi_embed(source, neighborhood_radius, min_neighbors)
        emb_target = egi_embed(target, neighborhood_radius, min_neighbors)
        # folding normals onto the +z hemisphere cancels residual sign noise
        spmc_opts = SpmcOptions(normalize_to_positive_z=True)

    if aligner == "spmc":
        result = spmc_align(emb_target, emb_source, spmc_opts)
    elif aligner == "frs":
        result = frs_align(emb_target, emb_source, frs_opts)
    else:
        result = hybrid_align(emb_target, emb_source, spmc_opts, frs_opts)

    rotated = source.points @ result.rotation.T
    coarse = estimate_translation_coarse(rotated, target.points, voxel_size)
    translation = translation_only_icp(rotated, target.points, coarse)
    return RegistrationResult(
        rotation=result.rotation,
        translation=translation,
        coarse_translation=coarse,
        embedding=embedding,
        alignment=result,
    )
