import json
from pathlib import Path

import numpy as np
import pytest

from sphalign import datagen, fileio, hist, so3
from sphalign.datagen import PatternSpec
from sphalign.errors import EmptySetError


def test_pattern_spec_validation():
    with pytest.raises(ValueError):
        PatternSpec(family="NoSuchFamily", n_points=1000, seed=0)
    with pytest.raises(ValueError):
        PatternSpec(family="SmallIslands", n_points=99, seed=0)


def test_pattern_labels_follow_family_order():
    labels = [
        PatternSpec(family=f, n_points=100, seed=0).label for f in datagen.FAMILIES
    ]
    assert labels == ["A1", "A2", "A3", "A4", "A5"]


def test_stage_table():
    assert datagen.stage_spec("B1").noise_sigma == 0.0
    assert datagen.stage_spec("B1").outlier_fraction == 0.0
    assert datagen.stage_spec("B2").noise_sigma == pytest.approx(0.01)
    assert datagen.stage_spec("B2").outlier_fraction == 0.0
    for name, frac in [("B3", 0.10), ("B4", 0.25), ("B5", 0.50), ("B6", 0.75), ("B7", 0.90)]:
        stage = datagen.stage_spec(name)
        assert stage.noise_sigma == pytest.approx(0.01)
        assert stage.outlier_fraction == pytest.approx(frac)
    assert [s.stage for s in datagen.all_stages()] == [f"B{i}" for i in range(1, 8)]


def test_stage_spec_rejects_unknown():
    with pytest.raises(ValueError):
        datagen.stage_spec("B8")


def test_templates_are_deterministic_and_unit_norm():
    for family in datagen.FAMILIES:
        spec = PatternSpec(family=family, n_points=1500, seed=3)
        a = datagen.generate_template(spec)
        b = datagen.generate_template(spec)
        assert np.array_equal(a, b)
        assert a.shape == (1500, 3)
        assert np.allclose(np.linalg.norm(a, axis=1), 1.0, atol=1e-9)


def test_sharp_trajectory_is_strongly_anisotropic():
    # sharp turning paths still concentrate direction mass; the resultant
    # length stays well above the uniform-cloud baseline
    for seed in range(6):
        spec = PatternSpec(family="SharpTrajectory", n_points=2000, seed=seed)
        _, resultant = so3.mean_direction(datagen.generate_template(spec))
        assert resultant > 0.3


def test_non_uniform_density_occupancy_and_bias():
    spec = PatternSpec(family="NonUniformDensity", n_points=1_000_000, seed=0)
    points = datagen.generate_template(spec)
    h = hist.build_binary_histogram_2d(points)
    assert h.set_cells / (360 * 180) > 0.80
    spec_small = PatternSpec(family="NonUniformDensity", n_points=100_000, seed=1)
    mean_z = datagen.generate_template(spec_small)[:, 2].mean()
    assert 0.25 < mean_z < 0.35


def test_stage_b1_is_identity():
    template = datagen.generate_template(
        PatternSpec(family="SimpleTrajectory", n_points=500, seed=2)
    )
    staged = datagen.apply_stage(template, datagen.stage_spec("B1"), seed=9)
    assert np.array_equal(staged, template)


def test_stage_b7_preserves_shape_and_norms():
    template = datagen.generate_template(
        PatternSpec(family="SmallIslands", n_points=1000, seed=2)
    )
    staged = datagen.apply_stage(template, datagen.stage_spec("B7"), seed=9)
    assert staged.shape == template.shape
    assert np.allclose(np.linalg.norm(staged, axis=1), 1.0, atol=1e-9)


def test_outlier_count_is_floor_of_fraction():
    template = datagen.generate_template(
        PatternSpec(family="LargeIslands", n_points=1003, seed=4)
    )
    for stage_name, frac in [("B3", 0.10), ("B7", 0.90)]:
        _, mask = datagen.apply_stage(
            template, datagen.stage_spec(stage_name), seed=5, return_outlier_mask=True
        )
        assert mask.sum() == int(np.floor(frac * 1003))


def test_noise_displacement_calibration():
    # with sigma = 0.01 the mean angular displacement of inliers is
    # sigma * sqrt(pi/2) radians, about 0.718 degrees, for both noise models
    template = datagen.generate_template(
        PatternSpec(family="SimpleTrajectory", n_points=20000, seed=6)
    )
    expected = 0.01 * np.sqrt(np.pi / 2.0) * 180.0 / np.pi
    for model in datagen.NOISE_MODELS:
        staged = datagen.apply_stage(
            template, datagen.stage_spec("B2"), seed=7, noise_model=model
        )
        angles = np.degrees(
            np.arccos(np.clip(np.sum(staged * template, axis=1), -1.0, 1.0))
        )
        assert abs(angles.mean() - expected) / expected < 0.15


def test_apply_stage_rejects_unknown_noise_model():
    template = datagen.generate_template(
        PatternSpec(family="SimpleTrajectory", n_points=200, seed=0)
    )
    with pytest.raises(ValueError):
        datagen.apply_stage(template, datagen.stage_spec("B2"), seed=0, noise_model="radial")
    with pytest.raises(EmptySetError):
        datagen.apply_stage(np.empty((0, 3)), datagen.stage_spec("B1"), seed=0)


def test_partial_view_keeps_floor_fraction_of_original_rows(rng):
    from helpers import unit_sphere

    points = unit_sphere(rng, 997)
    view = datagen.partial_view(points, seed=12, keep_fraction=0.7)
    assert view.shape == (int(np.floor(0.7 * 997)), 3)
    # every kept row is an original row
    matches = (view[:, None, :] == points[None, :, :]).all(axis=2)
    assert matches.any(axis=1).all()
    assert np.array_equal(view, datagen.partial_view(points, seed=12, keep_fraction=0.7))


def test_partial_view_validates_fraction(rng):
    from helpers import unit_sphere

    points = unit_sphere(rng, 100)
    with pytest.raises(ValueError):
        datagen.partial_view(points, seed=0, keep_fraction=0.0)
    with pytest.raises(ValueError):
        datagen.partial_view(points, seed=0, keep_fraction=1.1)


def test_sample_shape_cloud_bounds_and_determinism():
    cloud = datagen.sample_shape_cloud(seed=500, n_points=1200)
    assert cloud.shape == (1200, 3)
    assert cloud.min() >= 0.0
    assert cloud.max() == pytest.approx(1.0)
    assert np.array_equal(cloud, datagen.sample_shape_cloud(seed=500, n_points=1200))


def test_build_dataset_layout_and_ground_truth(tmp_path):
    patterns = [PatternSpec(family="SmallIslands", n_points=300, seed=1)]
    stages = [datagen.stage_spec("B1"), datagen.stage_spec("B3")]
    out = tmp_path / "ds"
    datagen.build_dataset(patterns, stages, n_rotations=3, seed=11, out_dir=out)

    template = fileio.read_xyz(out / "A3" / "template.xyz")
    assert template.shape == (300, 3)
    sources = sorted(out.glob("A3/B*/R*.xyz"))
    assert len(sources) == 6

    truth = fileio.read_rotations_csv(out / "ground_truth.csv")
    assert len(truth) == 6
    manifest = json.loads(Path(out / "manifest.json").read_text())
    assert len(manifest["entries"]) == 6

    # noiseless sources must be exactly the rotated template
    for config_id, r in truth.items():
        if "B1" in config_id:
            source = fileio.read_xyz(out / "A3" / "B1" / f"R{config_id[-1]}.xyz")
            assert np.allclose(source @ r, template, atol=1e-12)


def test_build_dataset_is_reproducible(tmp_path):
    patterns = [PatternSpec(family="SimpleTrajectory", n_points=200, seed=2)]
    stages = [datagen.stage_spec("B2")]
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        datagen.build_dataset(patterns, stages, n_rotations=2, seed=5, out_dir=out)
    for rel in ["A1/template.xyz", "A1/B2/R0.xyz", "A1/B2/R1.xyz", "ground_truth.csv"]:
        assert (a / rel).read_bytes() == (b / rel).read_bytes()


def test_build_dataset_shares_rotations_across_patterns(tmp_path):
    patterns = [
        PatternSpec(family="SimpleTrajectory", n_points=200, seed=1),
        PatternSpec(family="SharpTrajectory", n_points=200, seed=1),
    ]
    out = tmp_path / "ds"
    datagen.build_dataset(patterns, [datagen.stage_spec("B1")], 2, 13, out)
    truth = fileio.read_rotations_csv(out / "ground_truth.csv")
    assert np.array_equal(truth["A2B1R0"], truth["A1B1R0"])
    assert np.array_equal(truth["A2B1R1"], truth["A1B1R1"])


def test_build_dataset_validation(tmp_path):
    pattern = PatternSpec(family="SmallIslands", n_points=200, seed=1)
    with pytest.raises(ValueError):
        datagen.build_dataset([pattern], [datagen.stage_spec("B1")], 0, 0, tmp_path / "x")
    with pytest.raises(ValueError):
        datagen.build_dataset(
            [pattern, pattern], [datagen.stage_spec("B1")], 1, 0, tmp_path / "y"
        )
