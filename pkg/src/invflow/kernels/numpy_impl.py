"""Vectorised numpy implementation of the per-face kernels.

All kernels take radii ``r`` (N,), faces ``tri`` (F, 3) with 0-based vertex
indices, and ``w`` (F, 3) holding the inversive distance of the edge opposite
each corner.
"""

import numpy as np

PI = np.pi


def face_lengths(r, tri, w):
    ri, rj, rk = r[tri[:, 0]], r[tri[:, 1]], r[tri[:, 2]]
    a = np.sqrt(rj * rj + rk * rk + 2.0 * rj * rk * w[:, 0])
    b = np.sqrt(ri * ri + rk * rk + 2.0 * ri * rk * w[:, 1])
    c = np.sqrt(ri * ri + rj * rj + 2.0 * ri * rj * w[:, 2])
    return np.stack([a, b, c], axis=-1)


def _sorted_lengths(L):
    order = np.argsort(-L, axis=-1, kind="stable")
    s = np.take_along_axis(L, order, axis=-1)
    return order, s[..., 0], s[..., 1], s[..., 2]


def angles_from_lengths(L):
    """Generalised angles for an (..., 3) array of lengths (opposite corners)."""
    order, x, y, z = _sorted_lengths(L)
    slack = z - (x - y)
    ok = slack > 0.0
    prod = (x + (y + z)) * np.where(ok, slack, 0.0) * (z + (x - y)) * (x + (y - z))
    area4 = np.sqrt(np.maximum(prod, 0.0))
    ty = np.arctan2(area4, x * x + z * z - y * y)
    tz = np.arctan2(area4, x * x + y * y - z * z)
    ty = np.where(ok, ty, 0.0)
    tz = np.where(ok, tz, 0.0)
    tx = PI - ty - tz
    out = np.empty_like(L)
    np.put_along_axis(out, order, np.stack([tx, ty, tz], axis=-1), axis=-1)
    return out


def face_angles(r, tri, w):
    return angles_from_lengths(face_lengths(r, tri, w))


def face_in_delta(r, tri, w):
    _, x, y, z = _sorted_lengths(face_lengths(r, tri, w))
    return (z - (x - y)) > 0.0


def curvature(r, tri, w, n):
    ang = face_angles(r, tri, w)
    total = np.zeros(n)
    for c in range(3):
        total += np.bincount(tri[:, c], weights=ang[:, c], minlength=n)
    return 2.0 * PI - total


def curvature_batch(R, tri, w):
    m, n = R.shape
    ri, rj, rk = R[:, tri[:, 0]], R[:, tri[:, 1]], R[:, tri[:, 2]]
    a = np.sqrt(rj * rj + rk * rk + 2.0 * rj * rk * w[:, 0])
    b = np.sqrt(ri * ri + rk * rk + 2.0 * ri * rk * w[:, 1])
    c = np.sqrt(ri * ri + rj * rj + 2.0 * ri * rj * w[:, 2])
    ang = angles_from_lengths(np.stack([a, b, c], axis=-1))
    K = np.full((m, n), 2.0 * PI)
    for col in range(3):
        np.subtract.at(K, (slice(None), tri[:, col]), ang[:, :, col])
    return K


def face_jacobians(r, tri, w):
    """d(theta)/d(u) per face, shape (F, 3, 3); faces outside Delta are NaN."""
    L = face_lengths(r, tri, w)
    ang = angles_from_lengths(L)
    _, x, y, z = _sorted_lengths(L)
    slack = z - (x - y)
    ok = slack > 0.0
    prod = (x + (y + z)) * np.where(ok, slack, 0.0) * (z + (x - y)) * (x + (y - z))
    two_area = 0.5 * np.sqrt(np.maximum(prod, 0.0))
    two_area = np.where(ok, two_area, np.nan)
    cosang = np.cos(ang)
    F = len(tri)
    dth_dl = np.empty((F, 3, 3))
    for i in range(3):
        for j in range(3):
            if i == j:
                dth_dl[:, i, j] = L[:, i] / two_area
            else:
                k = 3 - i - j
                dth_dl[:, i, j] = -L[:, i] * cosang[:, k] / two_area
    rr = r[tri]
    dl_du = np.zeros((F, 3, 3))
    for e in range(3):
        p, q = (e + 1) % 3, (e + 2) % 3
        dl_du[:, e, p] = rr[:, p] * (rr[:, p] + rr[:, q] * w[:, e]) / L[:, e]
        dl_du[:, e, q] = rr[:, q] * (rr[:, q] + rr[:, p] * w[:, e]) / L[:, e]
    return dth_dl @ dl_du
