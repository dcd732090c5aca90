import json

import numpy as np
import pytest

from helpers import unit_sphere
from sphalign import datagen, pcr, so3
from sphalign.errors import (
    EmptySetError,
    NotUnitVectorError,
    PointAtCentroidError,
    TooSparseError,
)
from sphalign.pcr import PointCloud


def _cube_corners():
    return np.array(
        [[x, y, z] for x in (-1.0, 1.0) for y in (-1.0, 1.0) for z in (-1.0, 1.0)]
    )


def test_point_cloud_validation(rng):
    with pytest.raises(ValueError):
        PointCloud(points=np.zeros((4, 2)))
    with pytest.raises(ValueError):
        PointCloud(points=rng.normal(size=(4, 3)), normals=rng.normal(size=(5, 3)))
    with pytest.raises(NotUnitVectorError):
        PointCloud(points=rng.normal(size=(4, 3)), normals=np.full((4, 3), 2.0))


def test_case_embed_cube_corners():
    out = pcr.case_embed(PointCloud(points=_cube_corners()))
    assert np.allclose(out, _cube_corners() / np.sqrt(3.0), atol=1e-12)


def test_case_embed_scale_invariance_is_exact(rng):
    # power-of-two scaling about an explicit centroid divides out bit-exactly
    points = rng.normal(size=(300, 3))
    centroid = np.array([0.25, -0.5, 1.0])
    base = pcr.case_embed(PointCloud(points=points), centroid=centroid)
    scaled = pcr.case_embed(
        PointCloud(points=centroid + 4.0 * (points - centroid)), centroid=centroid
    )
    assert np.array_equal(base, scaled)


def test_case_embed_translation_invariance(rng):
    points = rng.normal(size=(300, 3))
    base = pcr.case_embed(PointCloud(points=points))
    shifted = pcr.case_embed(PointCloud(points=points + np.array([10.0, -3.0, 0.5])))
    assert np.allclose(base, shifted, atol=1e-12)


def test_case_embed_rotation_equivariance(rng):
    points = rng.normal(size=(300, 3))
    centroid = points.mean(axis=0)
    r = so3.sample_rotations(1, 14)[0]
    base = pcr.case_embed(PointCloud(points=points), centroid=centroid)
    rotated = pcr.case_embed(PointCloud(points=points @ r.T), centroid=r @ centroid)
    assert np.allclose(rotated, base @ r.T, atol=1e-9)


def test_case_embed_rejects_point_at_centroid():
    points = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(PointAtCentroidError) as excinfo:
        pcr.case_embed(PointCloud(points=points), centroid=np.zeros(3))
    assert excinfo.value.indices == [0]


def test_case_embed_rejects_empty():
    with pytest.raises(EmptySetError):
        pcr.case_embed(PointCloud(points=np.empty((0, 3))))


def test_egi_embed_plane_normals(rng):
    xy = rng.uniform(-1.0, 1.0, size=(400, 2))
    points = np.column_stack([xy, np.zeros(400)])
    normals = pcr.egi_embed(PointCloud(points=points), neighborhood_radius=0.3)
    assert np.allclose(np.abs(normals[:, 2]), 1.0, atol=1e-9)
    # sign propagation must make the whole plane consistent
    assert len(np.unique(np.sign(normals[:, 2]))) == 1


def test_egi_embed_sphere_normals_point_outward(rng):
    # on a sphere sample the true normal is the point itself; orientation
    # must be outward everywhere, accuracy within 5 degrees for nearly all
    # points (random sampling leaves a few ragged neighborhoods)
    points = unit_sphere(rng, 1500)
    normals = pcr.egi_embed(PointCloud(points=points), neighborhood_radius=0.25)
    dots = np.sum(normals * points, axis=1)
    assert np.all(dots > 0.0)
    assert np.quantile(dots, 0.01) > np.cos(np.radians(5.0))


def test_egi_embed_rotation_equivariance(rng):
    cloud = datagen.sample_shape_cloud(seed=77, n_points=1500)
    r = so3.sample_rotations(1, 15)[0]
    base = pcr.egi_embed(PointCloud(points=cloud))
    rotated = pcr.egi_embed(PointCloud(points=cloud @ r.T))
    dots = np.sum(rotated * (base @ r.T), axis=1)
    assert np.all(dots > np.cos(np.radians(5.0)))


def test_egi_embed_rejects_sparse_cloud(rng):
    with pytest.raises(TooSparseError):
        pcr.egi_embed(PointCloud(points=rng.normal(size=(5, 3))), min_neighbors=8)


def test_coarse_translation_zero_offset(rng):
    points = rng.uniform(-1.0, 1.0, size=(500, 3))
    assert np.allclose(pcr.estimate_translation_coarse(points, points), 0.0)


def test_coarse_translation_integer_voxel_offset(rng):
    points = rng.uniform(-1.0, 1.0, size=(500, 3))
    t = np.array([0.4, 0.2, -0.6])
    est = pcr.estimate_translation_coarse(points, points + t, voxel_size=0.2)
    assert np.allclose(est, t, atol=1e-9)


def test_coarse_translation_quantization_bound(rng):
    points = rng.uniform(-1.0, 1.0, size=(800, 3))
    t = np.array([0.13, 0.0, 0.0])
    est = pcr.estimate_translation_coarse(points, points + t, voxel_size=0.2)
    assert np.all(np.abs(est - t) <= 0.2 + 1e-9)


def test_coarse_translation_validation(rng):
    points = rng.uniform(-1.0, 1.0, size=(10, 3))
    with pytest.raises(EmptySetError):
        pcr.estimate_translation_coarse(np.empty((0, 3)), points)
    with pytest.raises(ValueError):
        pcr.estimate_translation_coarse(points, points, voxel_size=0.0)


def test_icp_recovers_exact_offset(rng):
    points = rng.uniform(-1.0, 1.0, size=(400, 3))
    t = np.array([0.05, -0.03, 0.08])
    est = pcr.translation_only_icp(points, points + t, initial_t=np.zeros(3))
    assert np.allclose(est, t, atol=1e-6)


def test_icp_rejects_empty(rng):
    points = rng.uniform(-1.0, 1.0, size=(10, 3))
    with pytest.raises(EmptySetError):
        pcr.translation_only_icp(np.empty((0, 3)), points, initial_t=np.zeros(3))


def test_register_recovers_rigid_motion():
    base = datagen.sample_shape_cloud(seed=900, n_points=1500)
    rotations = so3.sample_rotations(10, 91)
    t_rng = np.random.default_rng(92)
    rot_errs, trans_errs = [], []
    for r in rotations:
        t = t_rng.uniform(-0.5, 0.5, size=3)
        source = base @ r.T + t
        result = pcr.register(
            PointCloud(points=source), PointCloud(points=base), embedding="case", aligner="spmc"
        )
        rot_errs.append(so3.geodesic_angle_deg(result.rotation, r.T))
        trans_errs.append(np.linalg.norm(result.translation + r.T @ t))
    assert max(rot_errs) < 1.5
    assert np.median(trans_errs) < 0.01


def test_register_rejects_partial_with_case():
    base = datagen.sample_shape_cloud(seed=901, n_points=500)
    with pytest.raises(ValueError):
        pcr.register(
            PointCloud(points=base),
            PointCloud(points=base),
            embedding="case",
            source_is_partial=True,
        )


def test_register_rejects_unknown_options():
    base = datagen.sample_shape_cloud(seed=902, n_points=300)
    cloud = PointCloud(points=base)
    with pytest.raises(ValueError):
        pcr.register(cloud, cloud, embedding="pca")
    with pytest.raises(ValueError):
        pcr.register(cloud, cloud, aligner="ransac")


def test_register_result_serializes():
    base = datagen.sample_shape_cloud(seed=903, n_points=800)
    r = so3.axis_rotation("y", 30.0)
    result = pcr.register(PointCloud(points=base @ r.T), PointCloud(points=base))
    payload = json.loads(json.dumps(result.to_dict()))
    assert payload["embedding"] == "case"
    assert len(payload["translation"]) == 3
    assert np.allclose(np.reshape(payload["rotation"], (3, 3)), result.rotation)
