"""Independent reference values, written without importing the package."""

import itertools
import math

import numpy as np

G = 9.81

# One-line re-evaluations of the array sizing formulas (mm, degrees).
spacing = lambda n, a_l=160.0: (a_l - 2 * a_l / n) / n
height = lambda n, th=180.0, a_l=160.0: spacing(n, a_l) * math.pi / (2 * (1 - math.sin(math.radians(th / (2 * n)))))
ceiling = lambda r, R_c=50.0, s_l=5.0, f_l=6.23: R_c / (math.sqrt(3) / 6 + 1 / r) - 2 * s_l - f_l
width = lambda n, r: r * height(n)


def moment_payload(tau, length, arm_mass):
    """Heaviest tip mass a straight horizontal arm holds with base moment ``tau``."""
    return max(0.0, (tau - arm_mass * G * length / 2) / (G * length))


def semicircle_tip(ell):
    return np.array([2 * ell / math.pi, 0.0, 0.0])


def tetra_volume(edge=1.0):
    return edge ** 3 / (6 * math.sqrt(2))


def brute_hull_volume(points):
    """Hull volume as a sum of pyramids over every supporting plane (small inputs only)."""
    pts = np.asarray(points, dtype=float)
    c = pts.mean(axis=0)
    planes = {}
    for i, j, k in itertools.combinations(range(len(pts)), 3):
        n = np.cross(pts[j] - pts[i], pts[k] - pts[i])
        norm = np.linalg.norm(n)
        if norm < 1e-12:
            continue
        n = n / norm
        d = (pts - pts[i]) @ n
        if (d <= 1e-9).all():
            pass
        elif (d >= -1e-9).all():
            n = -n
        else:
            continue
        offset = float(n @ pts[i])
        planes[tuple(np.round(n, 9)) + (round(offset, 9),)] = (n, offset)
    vol = 0.0
    for n, offset in planes.values():
        face = pts[np.abs(pts @ n - offset) < 1e-9]
        fc = face.mean(axis=0)
        u = face[0] - fc
        u /= np.linalg.norm(u)
        w = np.cross(n, u)
        ring = face[np.argsort(np.arctan2((face - fc) @ w, (face - fc) @ u))]
        area = 0.5 * abs(sum(np.dot(np.cross(a - fc, b - fc), n) for a, b in zip(ring, np.roll(ring, -1, axis=0))))
        vol += area * (offset - n @ c) / 3.0
    return vol
