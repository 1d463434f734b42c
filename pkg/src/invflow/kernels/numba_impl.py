"""Scalar-loop kernels compiled with numba; same contracts as ``numpy_impl``."""

import math

import numpy as np
from numba import njit

PI = math.pi


@njit(cache=True, inline="always")
def _edge(ra, rb, I):
    return math.sqrt(ra * ra + rb * rb + 2.0 * ra * rb * I)


@njit(cache=True)
def _angles3(a, b, c, out):
    # sort so that x >= y >= z, remembering which corner each length faces
    if a >= b and a >= c:
        ix, x = 0, a
        if b >= c:
            iy, y, iz, z = 1, b, 2, c
        else:
            iy, y, iz, z = 2, c, 1, b
    elif b >= c:
        ix, x = 1, b
        if a >= c:
            iy, y, iz, z = 0, a, 2, c
        else:
            iy, y, iz, z = 2, c, 0, a
    else:
        ix, x = 2, c
        if a >= b:
            iy, y, iz, z = 0, a, 1, b
        else:
            iy, y, iz, z = 1, b, 0, a
    slack = z - (x - y)
    if slack <= 0.0:
        out[ix] = PI
        out[iy] = 0.0
        out[iz] = 0.0
        return 0.0
    area4 = math.sqrt((x + (y + z)) * slack * (z + (x - y)) * (x + (y - z)))
    ty = math.atan2(area4, x * x + z * z - y * y)
    tz = math.atan2(area4, x * x + y * y - z * z)
    out[ix] = PI - ty - tz
    out[iy] = ty
    out[iz] = tz
    return area4


@njit(cache=True)
def face_lengths(r, tri, w):
    F = tri.shape[0]
    L = np.empty((F, 3))
    for f in range(F):
        ri, rj, rk = r[tri[f, 0]], r[tri[f, 1]], r[tri[f, 2]]
        L[f, 0] = _edge(rj, rk, w[f, 0])
        L[f, 1] = _edge(ri, rk, w[f, 1])
        L[f, 2] = _edge(ri, rj, w[f, 2])
    return L


@njit(cache=True)
def angles_from_lengths(L):
    F = L.shape[0]
    out = np.empty((F, 3))
    for f in range(F):
        _angles3(L[f, 0], L[f, 1], L[f, 2], out[f])
    return out


@njit(cache=True)
def face_angles(r, tri, w):
    F = tri.shape[0]
    out = np.empty((F, 3))
    for f in range(F):
        ri, rj, rk = r[tri[f, 0]], r[tri[f, 1]], r[tri[f, 2]]
        _angles3(_edge(rj, rk, w[f, 0]), _edge(ri, rk, w[f, 1]), _edge(ri, rj, w[f, 2]), out[f])
    return out


@njit(cache=True)
def face_in_delta(r, tri, w):
    F = tri.shape[0]
    out = np.empty(F, dtype=np.bool_)
    buf = np.empty(3)
    for f in range(F):
        ri, rj, rk = r[tri[f, 0]], r[tri[f, 1]], r[tri[f, 2]]
        area4 = _angles3(_edge(rj, rk, w[f, 0]), _edge(ri, rk, w[f, 1]), _edge(ri, rj, w[f, 2]), buf)
        out[f] = area4 > 0.0
    return out


@njit(cache=True)
def _curvature_into(r, tri, w, K):
    buf = np.empty(3)
    for v in range(K.shape[0]):
        K[v] = 2.0 * PI
    for f in range(tri.shape[0]):
        i, j, k = tri[f, 0], tri[f, 1], tri[f, 2]
        _angles3(_edge(r[j], r[k], w[f, 0]), _edge(r[i], r[k], w[f, 1]), _edge(r[i], r[j], w[f, 2]), buf)
        K[i] -= buf[0]
        K[j] -= buf[1]
        K[k] -= buf[2]


@njit(cache=True)
def curvature(r, tri, w, n):
    K = np.empty(n)
    _curvature_into(r, tri, w, K)
    return K


@njit(cache=True)
def curvature_batch(R, tri, w):
    m, n = R.shape
    K = np.empty((m, n))
    for s in range(m):
        _curvature_into(R[s], tri, w, K[s])
    return K


@njit(cache=True)
def face_jacobians(r, tri, w):
    F = tri.shape[0]
    J = np.empty((F, 3, 3))
    ang = np.empty(3)
    L = np.empty(3)
    rr = np.empty(3)
    dl = np.zeros((3, 3))
    for f in range(F):
        for c in range(3):
            rr[c] = r[tri[f, c]]
        for e in range(3):
            p = (e + 1) % 3
            q = (e + 2) % 3
            L[e] = _edge(rr[p], rr[q], w[f, e])
        area4 = _angles3(L[0], L[1], L[2], ang)
        if area4 <= 0.0:
            J[f, :, :] = np.nan
            continue
        two_area = 0.5 * area4
        for e in range(3):
            p = (e + 1) % 3
            q = (e + 2) % 3
            dl[e, e] = 0.0
            dl[e, p] = rr[p] * (rr[p] + rr[q] * w[f, e]) / L[e]
            dl[e, q] = rr[q] * (rr[q] + rr[p] * w[f, e]) / L[e]
        for i in range(3):
            for t in range(3):
                acc = 0.0
                for j in range(3):
                    if i == j:
                        d = L[i] / two_area
                    else:
                        d = -L[i] * math.cos(ang[3 - i - j]) / two_area
                    acc += d * dl[j, t]
                J[f, i, t] = acc
    return J
