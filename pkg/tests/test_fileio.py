import io

import numpy as np
import pytest

from sphalign import fileio
from sphalign.errors import FormatError


def test_xyz_round_trip(tmp_path, rng):
    points = rng.normal(size=(50, 3))
    path = tmp_path / "cloud.xyz"
    fileio.write_xyz(path, points)
    assert np.allclose(fileio.read_xyz(path), points, atol=1e-15)


def test_xyz_rejects_wrong_columns(tmp_path):
    path = tmp_path / "bad.xyz"
    path.write_text("1.0 2.0\n3.0 4.0\n")
    with pytest.raises(FormatError):
        fileio.read_xyz(path)


def test_ply_round_trip_points_only(tmp_path, rng):
    points = rng.normal(size=(30, 3))
    path = tmp_path / "cloud.ply"
    fileio.write_ply(path, points)
    out_points, out_normals = fileio.read_ply(path)
    assert np.allclose(out_points, points, atol=1e-12)
    assert out_normals is None


def test_ply_round_trip_with_normals(tmp_path, rng):
    points = rng.normal(size=(30, 3))
    normals = rng.normal(size=(30, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    path = tmp_path / "cloud.ply"
    fileio.write_ply(path, points, normals)
    out_points, out_normals = fileio.read_ply(path)
    assert np.allclose(out_points, points, atol=1e-12)
    assert np.allclose(out_normals, normals, atol=1e-12)


def test_ply_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.ply"
    path.write_text("plyx\nend_header\n")
    with pytest.raises(FormatError):
        fileio.read_ply(path)


def test_ply_rejects_truncated_body(tmp_path):
    path = tmp_path / "trunc.ply"
    path.write_text(
        "ply\nformat ascii 1.0\nelement vertex 5\n"
        "property float x\nproperty float y\nproperty float z\n"
        "end_header\n0 0 1\n"
    )
    with pytest.raises(FormatError):
        fileio.read_ply(path)


def test_pgm_binary_round_trip(tmp_path, rng):
    img = rng.uniform(size=(18, 36))
    path = tmp_path / "img.pgm"
    fileio.write_pgm(path, img)
    expected = np.rint(img * 255) / 255.0
    assert np.allclose(fileio.read_pgm(path), expected, atol=1e-12)


def test_pgm_ascii_round_trip(tmp_path, rng):
    img = rng.uniform(size=(18, 36))
    path = tmp_path / "img.pgm"
    fileio.write_pgm(path, img, binary=False)
    assert np.allclose(fileio.read_pgm(path), np.rint(img * 255) / 255.0, atol=1e-12)


def test_pgm_sixteen_bit_quantization(tmp_path, rng):
    img = rng.uniform(size=(10, 12))
    path = tmp_path / "deep.pgm"
    fileio.write_pgm(path, img, maxval=65535)
    out = fileio.read_pgm(path)
    assert np.abs(out - img).max() <= 0.5 / 65535 + 1e-12


def test_ppm_round_trip(tmp_path, rng):
    img = rng.uniform(size=(9, 11, 3))
    path = tmp_path / "img.ppm"
    fileio.write_ppm(path, img)
    assert np.allclose(fileio.read_ppm(path), np.rint(img * 255) / 255.0, atol=1e-12)


def test_pnm_cross_format_rejected(tmp_path, rng):
    gray = rng.integers(0, 256, size=(6, 6)).astype(np.uint8)
    path = tmp_path / "img.pgm"
    fileio.write_pgm(path, gray)
    with pytest.raises(FormatError):
        fileio.read_ppm(path)


def test_image_csv_round_trip(tmp_path, rng):
    img = rng.uniform(size=(20, 30))
    path = tmp_path / "img.csv"
    fileio.write_image_csv(path, img)
    assert np.allclose(fileio.read_image_csv(path), img, atol=1e-12)


def test_load_image_gray_dispatch(tmp_path, rng):
    gray = rng.uniform(size=(18, 36))
    pgm = tmp_path / "a.pgm"
    fileio.write_pgm(pgm, gray)
    out = fileio.load_image_gray(pgm)
    assert out.shape == (18, 36)
    assert out.min() >= 0.0 and out.max() <= 1.0

    rgb = rng.uniform(size=(18, 36, 3))
    ppm = tmp_path / "b.ppm"
    fileio.write_ppm(ppm, rgb)
    assert fileio.load_image_gray(ppm).shape == (18, 36)

    with pytest.raises(FormatError):
        fileio.load_image_gray(tmp_path / "c.tiff")


def test_rotations_csv_round_trip(tmp_path):
    from sphalign import so3

    rots = so3.sample_rotations(3, 77)
    lines = ["config_id," + ",".join(f"r{i}{j}" for i in range(3) for j in range(3))]
    for idx, r in enumerate(rots):
        lines.append(f"A1B1R{idx}," + ",".join("%.17g" % v for v in r.ravel()))
    path = tmp_path / "gt.csv"
    path.write_text("\n".join(lines) + "\n")
    truth = fileio.read_rotations_csv(path)
    assert set(truth) == {"A1B1R0", "A1B1R1", "A1B1R2"}
    for idx, r in enumerate(rots):
        assert np.array_equal(truth[f"A1B1R{idx}"], r)


def test_rotations_csv_rejects_wrong_field_count(tmp_path):
    path = tmp_path / "gt.csv"
    path.write_text("config_id,r00\nA1B1R0,1.0\n")
    with pytest.raises(FormatError):
        fileio.read_rotations_csv(path)


def test_jsonl_from_path_and_stream(tmp_path):
    path = tmp_path / "records.jsonl"
    path.write_text('{"a": 1}\n\n{"a": 2}\n')
    assert fileio.read_jsonl(path) == [{"a": 1}, {"a": 2}]
    assert fileio.read_jsonl(io.StringIO('{"b": 3}\n')) == [{"b": 3}]


def test_json_round_trip(tmp_path):
    path = tmp_path / "blob.json"
    fileio.write_json(path, {"x": [1, 2, 3]})
    assert fileio.read_json(path) == {"x": [1, 2, 3]}
