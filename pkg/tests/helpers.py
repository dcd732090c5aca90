"""Small shared utilities for the test suite."""

import numpy as np


def unit_sphere(rng, n):
    v = rng.normal(size=(n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def frobenius_angle_deg(r1, r2):
    """Geodesic angle via the chordal identity 2*asin(||R1-R2||_F / (2*sqrt(2))).

    Exact for rotations and numerically accurate near zero, where the
    trace/arccos form bottoms out around 1e-6 degrees.
    """
    d = np.linalg.norm(np.asarray(r1) - np.asarray(r2))
    return float(np.degrees(2.0 * np.arcsin(min(d / (2.0 * np.sqrt(2.0)), 1.0))))
