# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: union-find, Prim, Kruskal and the PAMST selection loop.

Mirrors ``dpmst._fallback`` exactly. Random draws come from the caller's
numpy Generator through its BitGenerator capsule, so both backends consume
one stream in the same order and return identical trees.
"""

import numpy as np
cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log, fabs, INFINITY
from libc.stdint cimport int64_t, uint8_t
from numpy.random cimport bitgen_t

cnp.import_array()

NAME = "compiled"


cdef inline Py_ssize_t _find(int64_t[::1] parent, Py_ssize_t a) noexcept nogil:
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


def components(Py_ssize_t n, const int64_t[::1] u, const int64_t[::1] v):
    cdef int64_t[::1] parent = np.arange(n, dtype=np.int64)
    cdef Py_ssize_t count = n, i, ra, rb
    with nogil:
        for i in range(u.shape[0]):
            ra = _find(parent, u[i])
            rb = _find(parent, v[i])
            if ra != rb:
                parent[ra] = rb
                count -= 1
    return count


def kruskal_mst(Py_ssize_t n, const int64_t[::1] u, const int64_t[::1] v,
                const int64_t[::1] order):
    cdef int64_t[::1] parent = np.arange(n, dtype=np.int64)
    out_arr = np.empty(max(n - 1, 0), dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t k = 0, i, e, ra, rb
    with nogil:
        for i in range(order.shape[0]):
            if k >= n - 1:
                break
            e = order[i]
            ra = _find(parent, u[e])
            rb = _find(parent, v[e])
            if ra != rb:
                parent[ra] = rb
                out[k] = e
                k += 1
    return out_arr[:k]


# binary min-heap over (weight, edge id) pairs, stored as parallel arrays
cdef inline bint _less(double wa, int64_t ea, double wb, int64_t eb) noexcept nogil:
    return wa < wb or (wa == wb and ea < eb)


cdef inline void _heap_push(double[::1] hw, int64_t[::1] he, int64_t[::1] hx,
                            Py_ssize_t *size, double w, int64_t e, int64_t x) noexcept nogil:
    cdef Py_ssize_t i = size[0], p
    size[0] += 1
    while i > 0:
        p = (i - 1) >> 1
        if _less(w, e, hw[p], he[p]):
            hw[i] = hw[p]; he[i] = he[p]; hx[i] = hx[p]
            i = p
        else:
            break
    hw[i] = w; he[i] = e; hx[i] = x


cdef inline void _heap_pop(double[::1] hw, int64_t[::1] he, int64_t[::1] hx,
                           Py_ssize_t *size) noexcept nogil:
    cdef Py_ssize_t n = size[0] - 1, i = 0, c
    cdef double w = hw[n]
    cdef int64_t e = he[n], x = hx[n]
    size[0] = n
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _less(hw[c + 1], he[c + 1], hw[c], he[c]):
            c += 1
        if _less(hw[c], he[c], w, e):
            hw[i] = hw[c]; he[i] = he[c]; hx[i] = hx[c]
            i = c
        else:
            break
    if n > 0:
        hw[i] = w; he[i] = e; hx[i] = x


def prim_mst(Py_ssize_t n, const int64_t[::1] indptr, const int64_t[::1] adj_edge,
             const int64_t[::1] adj_node, const double[::1] w, Py_ssize_t start=0):
    if n <= 1:
        return np.empty(0, dtype=np.int64)
    cdef Py_ssize_t cap = adj_edge.shape[0] + 1
    cdef double[::1] hw = np.empty(cap, dtype=np.float64)
    cdef int64_t[::1] he = np.empty(cap, dtype=np.int64)
    cdef int64_t[::1] hx = np.empty(cap, dtype=np.int64)
    cdef uint8_t[::1] in_tree = np.zeros(n, dtype=np.uint8)
    out_arr = np.empty(n - 1, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef Py_ssize_t size = 0, k, count = 0
    cdef int64_t e, x
    with nogil:
        in_tree[start] = 1
        for k in range(indptr[start], indptr[start + 1]):
            _heap_push(hw, he, hx, &size, w[adj_edge[k]], adj_edge[k], adj_node[k])
        while size > 0 and count < n - 1:
            e = he[0]
            x = hx[0]
            _heap_pop(hw, he, hx, &size)
            if in_tree[x]:
                continue
            in_tree[x] = 1
            out[count] = e
            count += 1
            for k in range(indptr[x], indptr[x + 1]):
                if not in_tree[adj_node[k]]:
                    _heap_push(hw, he, hx, &size, w[adj_edge[k]], adj_edge[k], adj_node[k])
    return out_arr[:count]


cdef bitgen_t* _bitgen_of(object rng) except NULL:
    capsule = rng.bit_generator.capsule
    return <bitgen_t*> PyCapsule_GetPointer(capsule, "BitGenerator")


cdef void _pamst_once(Py_ssize_t n, const int64_t[::1] u, const int64_t[::1] v,
                      const int64_t[::1] indptr, const int64_t[::1] adj_edge,
                      const double[::1] w, double scale, Py_ssize_t start,
                      bitgen_t *bg, uint8_t[::1] in_s, int64_t[::1] buf_a,
                      int64_t[::1] buf_b, int64_t[::1] chosen, int64_t[::1] sizes,
                      double[::1] mins) noexcept nogil:
    # The range is kept as a sorted edge-id list. Adding node x toggles its
    # incident edges: a sorted merge that drops ids present on both sides.
    cdef Py_ssize_t step, e, j, k, a, b, lo, hi, x, best
    cdef double m, key, bestkey, r, base, ub
    cdef int64_t[::1] cur = buf_a
    cdef int64_t[::1] nxt = buf_b
    cdef int64_t[::1] tmp
    for j in range(n):
        in_s[j] = 0
    in_s[start] = 1
    j = 0
    for k in range(indptr[start], indptr[start + 1]):
        cur[j] = adj_edge[k]
        j += 1
    for step in range(n - 1):
        m = INFINITY
        for k in range(j):
            if w[cur[k]] < m:
                m = w[cur[k]]
        best = -1
        bestkey = -INFINITY
        for k in range(j):
            e = cur[k]
            r = bg.next_double(bg.state)
            base = scale * (-fabs(w[e] - m))
            # -log(-log r) <= r/(1-r); skip the logs when even that cannot win
            if best >= 0:
                ub = r / (1.0 - r)
                if base + (ub + 1e-9 * (1.0 + ub)) <= bestkey:
                    continue
            key = base + (-log(-log(r)))
            if best < 0 or key > bestkey:
                best = e
                bestkey = key
        chosen[step] = best
        sizes[step] = j
        mins[step] = m
        x = v[best] if in_s[u[best]] else u[best]
        in_s[x] = 1
        a = 0
        b = 0
        lo = indptr[x]
        hi = indptr[x + 1]
        k = lo
        while a < j or k < hi:
            if k >= hi or (a < j and cur[a] < adj_edge[k]):
                nxt[b] = cur[a]
                a += 1
                b += 1
            elif a >= j or adj_edge[k] < cur[a]:
                nxt[b] = adj_edge[k]
                k += 1
                b += 1
            else:
                a += 1
                k += 1
        j = b
        tmp = cur
        cur = nxt
        nxt = tmp


def pamst_run(Py_ssize_t n, const int64_t[::1] u, const int64_t[::1] v,
              const int64_t[::1] indptr, const int64_t[::1] adj_edge,
              const double[::1] w, double scale, Py_ssize_t start, rng):
    cdef Py_ssize_t steps = max(n - 1, 0)
    chosen_arr = np.empty(steps, dtype=np.int64)
    sizes_arr = np.empty(steps, dtype=np.int64)
    mins_arr = np.empty(steps, dtype=np.float64)
    cdef uint8_t[::1] in_s = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] buf_a = np.empty(u.shape[0] + 1, dtype=np.int64)
    cdef int64_t[::1] buf_b = np.empty(u.shape[0] + 1, dtype=np.int64)
    cdef int64_t[::1] chosen = chosen_arr
    cdef int64_t[::1] sizes = sizes_arr
    cdef double[::1] mins = mins_arr
    cdef bitgen_t *bg = _bitgen_of(rng)
    with rng.bit_generator.lock:
        with nogil:
            _pamst_once(n, u, v, indptr, adj_edge, w, scale, start, bg, in_s, buf_a,
                        buf_b, chosen, sizes, mins)
    return chosen_arr, sizes_arr, mins_arr


def pamst_batch(Py_ssize_t n, const int64_t[::1] u, const int64_t[::1] v,
                const int64_t[::1] indptr, const int64_t[::1] adj_edge,
                const double[::1] w, double scale, Py_ssize_t start, rng,
                Py_ssize_t n_runs):
    cdef Py_ssize_t steps = max(n - 1, 0), i
    out_arr = np.empty((n_runs, steps), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t[::1] sizes = np.empty(steps, dtype=np.int64)
    cdef double[::1] mins = np.empty(steps, dtype=np.float64)
    cdef uint8_t[::1] in_s = np.zeros(n, dtype=np.uint8)
    cdef int64_t[::1] buf_a = np.empty(u.shape[0] + 1, dtype=np.int64)
    cdef int64_t[::1] buf_b = np.empty(u.shape[0] + 1, dtype=np.int64)
    cdef bitgen_t *bg = _bitgen_of(rng)
    with rng.bit_generator.lock:
        with nogil:
            for i in range(n_runs):
                _pamst_once(n, u, v, indptr, adj_edge, w, scale, start, bg, in_s,
                            buf_a, buf_b, out[i], sizes, mins)
    return out_arr
