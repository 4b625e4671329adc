# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: grid nearest-neighbor queries and triangle listing.

Contracts match meshseq._kernels._fallback exactly; the package selects
whichever import succeeds.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, sqrt

cnp.import_array()


def min_dists(query, ref):
    """Euclidean distance from each query point to its nearest ref point."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] q = np.ascontiguousarray(query, dtype=np.float64).reshape(-1, 3)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] r = np.ascontiguousarray(ref, dtype=np.float64).reshape(-1, 3)
    cdef Py_ssize_t m = q.shape[0]
    cdef Py_ssize_t k = r.shape[0]
    if k == 0:
        raise ValueError("reference point set is empty")

    cdef int ncells = <int>ceil((k / 2.0) ** (1.0 / 3.0))
    if ncells < 1:
        ncells = 1
    if ncells > 128:
        ncells = 128

    cdef double ox = r[0, 0], oy = r[0, 1], oz = r[0, 2]
    cdef double hx = ox, hy = oy, hz = oz
    cdef Py_ssize_t i
    for i in range(k):
        if r[i, 0] < ox: ox = r[i, 0]
        if r[i, 1] < oy: oy = r[i, 1]
        if r[i, 2] < oz: oz = r[i, 2]
        if r[i, 0] > hx: hx = r[i, 0]
        if r[i, 1] > hy: hy = r[i, 1]
        if r[i, 2] > hz: hz = r[i, 2]
    cdef double extent = hx - ox
    if hy - oy > extent: extent = hy - oy
    if hz - oz > extent: extent = hz - oz

    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(m, dtype=np.float64)
    cdef double best, d, dx0, dy0, dz0
    cdef Py_ssize_t qi, p

    if extent <= 0.0 or ncells == 1:
        # single occupied cell: plain scan
        for qi in range(m):
            best = 1e308
            for p in range(k):
                dx0 = q[qi, 0] - r[p, 0]
                dy0 = q[qi, 1] - r[p, 1]
                dz0 = q[qi, 2] - r[p, 2]
                d = dx0 * dx0 + dy0 * dy0 + dz0 * dz0
                if d < best:
                    best = d
            out[qi] = sqrt(best)
        return out

    cdef double cell = extent / ncells
    cdef cnp.ndarray[cnp.int64_t, ndim=1] flat = np.empty(k, dtype=np.int64)
    cdef long cx, cy, cz
    for i in range(k):
        cx = <long>((r[i, 0] - ox) / cell)
        cy = <long>((r[i, 1] - oy) / cell)
        cz = <long>((r[i, 2] - oz) / cell)
        if cx > ncells - 1: cx = ncells - 1
        if cy > ncells - 1: cy = ncells - 1
        if cz > ncells - 1: cz = ncells - 1
        flat[i] = (cx * ncells + cy) * ncells + cz

    cdef cnp.ndarray[cnp.int64_t, ndim=1] order = np.argsort(flat, kind="stable")
    cdef cnp.ndarray[cnp.int64_t, ndim=1] starts = np.searchsorted(
        flat[order], np.arange(ncells * ncells * ncells + 1, dtype=np.int64)
    ).astype(np.int64)

    cdef cnp.int64_t[:] orderv = order
    cdef cnp.int64_t[:] startsv = starts
    cdef long qcx, qcy, qcz, x, y, z, dxr, dyr, dzr, ring, max_r, zlo, zhi, zstep
    cdef Py_ssize_t s, e, t
    cdef bint on_face

    for qi in range(m):
        qcx = <long>floor((q[qi, 0] - ox) / cell)
        qcy = <long>floor((q[qi, 1] - oy) / cell)
        qcz = <long>floor((q[qi, 2] - oz) / cell)
        best = 1e308
        max_r = ncells
        if qcx < 0 and -qcx > max_r: max_r = -qcx
        if qcy < 0 and -qcy > max_r: max_r = -qcy
        if qcz < 0 and -qcz > max_r: max_r = -qcz
        if qcx > max_r: max_r = qcx
        if qcy > max_r: max_r = qcy
        if qcz > max_r: max_r = qcz
        max_r += ncells
        for ring in range(max_r + 1):
            if best < 1e308 and (ring - 1) * cell > sqrt(best):
                break
            for dxr in range(-ring, ring + 1):
                x = qcx + dxr
                if x < 0 or x >= ncells:
                    continue
                on_face = dxr == -ring or dxr == ring
                for dyr in range(-ring, ring + 1):
                    y = qcy + dyr
                    if y < 0 or y >= ncells:
                        continue
                    if on_face or dyr == -ring or dyr == ring:
                        zlo = -ring; zhi = ring; zstep = 1
                    elif ring > 0:
                        zlo = -ring; zhi = ring; zstep = 2 * ring
                    else:
                        zlo = 0; zhi = 0; zstep = 1
                    dzr = zlo
                    while dzr <= zhi:
                        z = qcz + dzr
                        if 0 <= z < ncells:
                            s = startsv[(x * ncells + y) * ncells + z]
                            e = startsv[(x * ncells + y) * ncells + z + 1]
                            for t in range(s, e):
                                p = orderv[t]
                                dx0 = q[qi, 0] - r[p, 0]
                                dy0 = q[qi, 1] - r[p, 1]
                                dz0 = q[qi, 2] - r[p, 2]
                                d = dx0 * dx0 + dy0 * dy0 + dz0 * dz0
                                if d < best:
                                    best = d
                        if zstep == 0:
                            break
                        dzr += zstep
        out[qi] = sqrt(best)
    return out


def triangles(n, edges):
    """All triangles (i < j < k) of an undirected graph, lexicographic.

    Edges must be (m, 2) with i < j, unique, sorted. Two-pointer
    intersection of forward (higher-index) neighbor lists per edge.
    """
    cdef cnp.ndarray[cnp.int64_t, ndim=2] e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    cdef Py_ssize_t m = e.shape[0]
    cdef Py_ssize_t nn = n
    cdef cnp.ndarray[cnp.int64_t, ndim=1] deg = np.zeros(nn + 1, dtype=np.int64)
    cdef Py_ssize_t t
    for t in range(m):
        deg[e[t, 0] + 1] += 1
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indptr = np.cumsum(deg)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indices = np.empty(m, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fill = indptr[:nn].copy()
    cdef Py_ssize_t u, v
    for t in range(m):
        u = e[t, 0]
        indices[fill[u]] = e[t, 1]
        fill[u] += 1
    for u in range(nn):
        sub = indices[indptr[u]:indptr[u + 1]]
        sub.sort()

    cdef cnp.int64_t[:] ip = indptr
    cdef cnp.int64_t[:] ix = indices

    # pass 1: count, pass 2: fill
    cdef Py_ssize_t count = 0
    cdef Py_ssize_t a, b, ea, eb
    cdef int phase
    cdef cnp.ndarray[cnp.int64_t, ndim=2] tri = np.empty((0, 3), dtype=np.int64)
    cdef Py_ssize_t w = 0
    for phase in range(2):
        if phase == 1:
            tri = np.empty((count, 3), dtype=np.int64)
            w = 0
        for t in range(m):
            u = e[t, 0]
            v = e[t, 1]
            a = ip[u]; ea = ip[u + 1]
            b = ip[v]; eb = ip[v + 1]
            while a < ea and b < eb:
                if ix[a] < ix[b]:
                    a += 1
                elif ix[b] < ix[a]:
                    b += 1
                else:
                    if phase == 0:
                        count += 1
                    else:
                        tri[w, 0] = u
                        tri[w, 1] = v
                        tri[w, 2] = ix[a]
                        w += 1
                    a += 1
                    b += 1
    return tri
