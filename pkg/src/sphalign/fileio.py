"""Readers and writers for the on-disk formats: XYZ, ASCII PLY, PGM/PPM,
intensity CSV, rotation CSV, and JSON/JSON-lines records."""

import json
import os

import numpy as np

from .errors import FormatError


def write_xyz(path, points):
    points = np.asarray(points, dtype=np.float64)
    lines = ["%.17g %.17g %.17g" % (p[0], p[1], p[2]) for p in points]
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_xyz(path):
    try:
        pts = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise FormatError(f"{path}: not a readable XYZ file ({exc})") from exc
    if pts.size == 0:
        return np.empty((0, 3))
    if pts.shape[1] != 3:
        raise FormatError(f"{path}: expected 3 columns, found {pts.shape[1]}")
    return pts


def write_ply(path, points, normals=None):
    points = np.asarray(points, dtype=np.float64)
    header = ["ply", "format ascii 1.0", f"element vertex {points.shape[0]}"]
    header += [f"property double {c}" for c in ("x", "y", "z")]
    if normals is not None:
        normals = np.asarray(normals, dtype=np.float64)
        header += [f"property double {c}" for c in ("nx", "ny", "nz")]
    header += ["end_header"]
    rows = []
    for i in range(points.shape[0]):
        vals = list(points[i])
        if normals is not None:
            vals += list(normals[i])
        rows.append(" ".join("%.17g" % v for v in vals))
    _atomic_write_text(path, "\n".join(header + rows) + "\n")


def read_ply(path):
    """Parse an ASCII PLY vertex list; returns (points, normals_or_None)."""
    try:
        with open(path, "r") as fh:
            first = fh.readline().strip()
            if first != "ply":
                raise FormatError(f"{path}: missing 'ply' magic")
            fmt = fh.readline().split()
            if len(fmt) < 2 or fmt[0] != "format" or fmt[1] != "ascii":
                raise FormatError(f"{path}: only ASCII PLY is supported")
            n_vertex = None
            props = []
            in_vertex = False
            for line in fh:
                parts = line.split()
                if not parts or parts[0] == "comment":
                    continue
                if parts[0] == "element":
                    in_vertex = parts[1] == "vertex"
                    if in_vertex:
                        n_vertex = int(parts[2])
                elif parts[0] == "property" and in_vertex:
                    props.append(parts[-1])
                elif parts[0] == "end_header":
                    break
            if n_vertex is None:
                raise FormatError(f"{path}: no vertex element")
            for name in ("x", "y", "z"):
                if name not in props:
                    raise FormatError(f"{path}: vertex property {name} missing")
            data = np.empty((n_vertex, len(props)))
            for i in range(n_vertex):
                parts = fh.readline().split()
                if len(parts) < len(props):
                    raise FormatError(f"{path}: truncated vertex list at row {i}")
                data[i] = [float(v) for v in parts[: len(props)]]
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    cols = {name: data[:, i] for i, name in enumerate(props)}
    points = np.column_stack([cols["x"], cols["y"], cols["z"]])
    normals = None
    if all(n in cols for n in ("nx", "ny", "nz")):
        normals = np.column_stack([cols["nx"], cols["ny"], cols["nz"]])
    return points, normals


def _parse_pnm(data, path):
    """Common P2/P3/P5/P6 parsing: returns (magic, width, height, maxval, raster)."""
    if len(data) < 2 or data[0:1] != b"P" or data[1:2] not in b"2356":
        raise FormatError(f"{path}: not a P2/P3/P5/P6 file")
    magic = data[0:2].decode()
    pos = 2
    tokens = []
    while len(tokens) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos : pos + 1] not in b"\r\n":
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(t) for t in tokens)
    except ValueError as exc:
        raise FormatError(f"{path}: bad header token") from exc
    if width <= 0 or height <= 0 or maxval <= 0 or maxval > 65535:
        raise FormatError(f"{path}: invalid dimensions or maxval")
    channels = 3 if magic in ("P3", "P6") else 1
    count = width * height * channels
    if magic in ("P5", "P6"):
        pos += 1  # single whitespace byte after maxval
        if maxval > 255:
            raw = np.frombuffer(data, dtype=">u2", count=count, offset=pos)
        else:
            raw = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos)
        if raw.size < count:
            raise FormatError(f"{path}: truncated raster")
        values = raw.astype(np.float64)
    else:
        try:
            values = np.array(data[pos:].split()[:count], dtype=np.float64)
        except ValueError as exc:
            raise FormatError(f"{path}: bad ASCII raster") from exc
        if values.size < count:
            raise FormatError(f"{path}: truncated raster")
    grid = values.reshape((height, width, channels)) / float(maxval)
    return magic, grid


def read_pgm(path):
    """Load a P2/P5 grayscale image as floats in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, grid = _parse_pnm(data, path)
    if magic not in ("P2", "P5"):
        raise FormatError(f"{path}: {magic} is a color image; use read_ppm")
    return grid[:, :, 0]


def read_ppm(path):
    """Load a P3/P6 color image as floats in [0, 1], shape (H, W, 3)."""
    with open(path, "rb") as fh:
        data = fh.read()
    magic, grid = _parse_pnm(data, path)
    if magic not in ("P3", "P6"):
        raise FormatError(f"{path}: {magic} is grayscale; use read_pgm")
    return grid


def write_pgm(path, img, maxval=255, binary=True):
    img = np.asarray(img, dtype=np.float64)
    levels = np.rint(np.clip(img, 0.0, 1.0) * maxval).astype(np.uint16)
    header = f"{'P5' if binary else 'P2'}\n{img.shape[1]} {img.shape[0]}\n{maxval}\n"
    if binary:
        raster = (
            levels.astype(">u2").tobytes()
            if maxval > 255
            else levels.astype(np.uint8).tobytes()
        )
        _atomic_write_bytes(path, header.encode() + raster)
    else:
        body = "\n".join(" ".join(str(v) for v in row) for row in levels)
        _atomic_write_text(path, header + body + "\n")


def write_ppm(path, rgb, maxval=255, binary=True):
    rgb = np.asarray(rgb, dtype=np.float64)
    levels = np.rint(np.clip(rgb, 0.0, 1.0) * maxval).astype(np.uint16)
    header = f"{'P6' if binary else 'P3'}\n{rgb.shape[1]} {rgb.shape[0]}\n{maxval}\n"
    if binary:
        raster = (
            levels.astype(">u2").tobytes()
            if maxval > 255
            else levels.astype(np.uint8).tobytes()
        )
        _atomic_write_bytes(path, header.encode() + raster)
    else:
        body = "\n".join(
            " ".join(str(v) for v in row.reshape(-1)) for row in levels
        )
        _atomic_write_text(path, header + body + "\n")


def write_image_csv(path, img):
    img = np.asarray(img, dtype=np.float64)
    _atomic_write_text(
        path,
        "\n".join(",".join("%.17g" % v for v in row) for row in img) + "\n",
    )


def read_image_csv(path):
    try:
        return np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except (ValueError, OSError) as exc:
        raise FormatError(f"{path}: not a readable intensity CSV ({exc})") from exc


def load_image_gray(path):
    """Load any supported image format as a grayscale intensity array.

    Color inputs collapse through the standard luma weights.
    """
    ext = os.path.splitext(path)[1].lower()
    if ext == ".pgm":
        return read_pgm(path)
    if ext == ".ppm":
        from .sphimage import rgb_to_gray

        return rgb_to_gray(read_ppm(path))
    if ext == ".csv":
        return read_image_csv(path)
    raise FormatError(f"{path}: unsupported image extension {ext!r}")


def read_rotations_csv(path):
    """Parse a (config_id, 9 rotation entries) CSV into an ordered dict."""
    out = {}
    try:
        with open(path, "r") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("config_id"):
                    continue
                parts = line.split(",")
                if len(parts) != 10:
                    raise FormatError(f"{path}: expected 10 fields, got {len(parts)}")
                out[parts[0]] = np.array(
                    [float(v) for v in parts[1:]], dtype=np.float64
                ).reshape(3, 3)
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return out


def read_json(path):
    with open(path, "r") as fh:
        return json.load(fh)


def write_json(path, obj):
    _atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_jsonl(stream_or_path):
    """Parse JSON-lines records from a path or an open text stream."""
    if hasattr(stream_or_path, "read"):
        lines = stream_or_path.read().splitlines()
    else:
        with open(stream_or_path, "r") as fh:
            lines = fh.read().splitlines()
    records = []
    for line in lines:
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records


def _atomic_write_text(path, text):
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _atomic_write_bytes(path, blob):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
