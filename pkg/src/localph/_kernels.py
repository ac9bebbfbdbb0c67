"""Hot loops for persistence computations.

Every function here is compiled with numba unless ``LOCALPH_DISABLE_NUMBA``
is set, in which case it runs as ordinary Python over numpy arrays.
"""

import numpy as np

from ._accel import jit


@jit
def xor_sorted(a, b):
    """Symmetric difference of two ascending int64 arrays (GF(2) column sum)."""
    out = np.empty(len(a) + len(b), dtype=np.int64)
    i = 0
    j = 0
    k = 0
    while i < len(a) and j < len(b):
        if a[i] < b[j]:
            out[k] = a[i]
            i += 1
            k += 1
        elif b[j] < a[i]:
            out[k] = b[j]
            j += 1
            k += 1
        else:
            i += 1
            j += 1
    while i < len(a):
        out[k] = a[i]
        i += 1
        k += 1
    while j < len(b):
        out[k] = b[j]
        j += 1
        k += 1
    return out[:k]


@jit
def reduce_twist(indptr, indices, dims, max_dim):
    """Column reduction with clearing, highest dimension first.

    Returns ``low`` where ``low[j]`` is the pivot row of reduced column ``j``
    (-1 for a zero column). Columns are filtration positions.
    """
    n = len(dims)
    low = np.full(n, -1, dtype=np.int64)
    owner = np.full(n, -1, dtype=np.int64)
    cleared = np.zeros(n, dtype=np.bool_)
    reduced = [np.empty(0, dtype=np.int64) for _ in range(n)]
    for d in range(max_dim, 0, -1):
        for j in range(n):
            if dims[j] != d or cleared[j]:
                continue
            col = indices[indptr[j] : indptr[j + 1]].copy()
            while len(col) > 0 and owner[col[-1]] != -1:
                col = xor_sorted(col, reduced[owner[col[-1]]])
            if len(col) > 0:
                pivot = col[-1]
                low[j] = pivot
                owner[pivot] = j
                reduced[j] = col
                cleared[pivot] = True
    return low


@jit
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@jit
def _tri_before(da, ca, db, cb):
    return da < db or (da == db and ca < cb)


@jit
def _merge_columns(da, ca, db, cb):
    """GF(2) sum of two columns kept ascending by (diameter, code)."""
    m = len(ca) + len(cb)
    out_d = np.empty(m)
    out_c = np.empty(m, dtype=np.int64)
    i = 0
    j = 0
    k = 0
    while i < len(ca) and j < len(cb):
        if ca[i] == cb[j]:
            i += 1
            j += 1
        elif _tri_before(da[i], ca[i], db[j], cb[j]):
            out_d[k] = da[i]
            out_c[k] = ca[i]
            i += 1
            k += 1
        else:
            out_d[k] = db[j]
            out_c[k] = cb[j]
            j += 1
            k += 1
    while i < len(ca):
        out_d[k] = da[i]
        out_c[k] = ca[i]
        i += 1
        k += 1
    while j < len(cb):
        out_d[k] = db[j]
        out_c[k] = cb[j]
        j += 1
        k += 1
    return out_d[:k], out_c[:k]


@jit
def _triangle_code(i, j, k, n):
    # i < j are an edge, k any third vertex
    if k < i:
        return (k * n + i) * n + j
    if k < j:
        return (i * n + k) * n + j
    return (i * n + j) * n + k


@jit
def _edge_coboundary(dist, i, j, dij, t_max):
    """Cofacets of edge (i, j) sorted by (diameter, code)."""
    n = dist.shape[0]
    col_d = np.empty(n)
    col_c = np.empty(n, dtype=np.int64)
    m = 0
    # codes come out ascending in k, so a stable sort by diameter suffices
    for k in range(n):
        if k == i or k == j:
            continue
        dk = max(dij, max(dist[i, k], dist[j, k]))
        if dk > t_max:
            continue
        col_d[m] = dk
        col_c[m] = _triangle_code(i, j, k, n)
        m += 1
    perm = np.argsort(col_d[:m], kind="mergesort")
    return col_d[:m][perm], col_c[:m][perm]


@jit
def _edge_pivot(dist, i, j, dij, t_max):
    """Earliest cofacet of edge (i, j) as (diameter, code); code -1 if none."""
    n = dist.shape[0]
    best_d = np.inf
    best_c = np.int64(-1)
    for k in range(n):
        if k == i or k == j:
            continue
        dk = max(dij, max(dist[i, k], dist[j, k]))
        if dk > t_max:
            continue
        c = _triangle_code(i, j, k, n)
        if dk == dij:
            # no cofacet can come earlier: minimal diameter, codes ascend in k
            return dk, c
        if best_c < 0 or _tri_before(dk, c, best_d, best_c):
            best_d = dk
            best_c = c
    return best_d, best_c


@jit
def rips_low_degree_pairs(dist, t_max):
    """Degree-0 and degree-1 persistence of the Rips filtration of ``dist``.

    Degree 0 comes from union-find over edges in filtration order. Degree 1
    reduces edge coboundaries (rows are triangles, never enumerated up
    front) in reverse filtration order, skipping edges already paired in
    degree 0. A triangle ``i < j < k`` is identified by the code
    ``(i*n + j)*n + k``, which orders triangles lexicographically.

    A column whose earliest cofacet is not yet a pivot is already reduced;
    it is recorded by its edge only and rebuilt if a later column needs it.

    Returns ``(h0_deaths, n_components, h1_births, h1_deaths)``; an
    essential degree-1 class has death ``inf``. Zero-length pairs are kept.
    """
    n = dist.shape[0]
    n_edges = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= t_max:
                n_edges += 1
    ei = np.empty(n_edges, dtype=np.int64)
    ej = np.empty(n_edges, dtype=np.int64)
    ev = np.empty(n_edges)
    e = 0
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= t_max:
                ei[e] = i
                ej[e] = j
                ev[e] = dist[i, j]
                e += 1
    # edges were generated in lexicographic order, so a stable sort by value
    # yields the (value, lexicographic) filtration order
    order = np.argsort(ev, kind="mergesort")
    ei = ei[order]
    ej = ej[order]
    ev = ev[order]

    parent = np.arange(n)
    is_death = np.zeros(n_edges, dtype=np.bool_)
    h0 = np.empty(n_edges)
    n_h0 = 0
    components = n
    for e in range(n_edges):
        a = _find(parent, ei[e])
        b = _find(parent, ej[e])
        if a != b:
            parent[max(a, b)] = min(a, b)
            is_death[e] = True
            h0[n_h0] = ev[e]
            n_h0 += 1
            components -= 1

    pivot_owner = dict()
    pivot_owner[np.int64(-1)] = np.int64(-1)
    # slot s holds the reduced column of edge slot_edge[s]; empty means
    # "the plain coboundary of that edge"
    slot_edge = np.empty(n_edges, dtype=np.int64)
    slot_stored = np.zeros(n_edges, dtype=np.bool_)
    store_d = [np.empty(0) for _ in range(0)]
    store_c = [np.empty(0, dtype=np.int64) for _ in range(0)]
    store_d.append(np.empty(0))
    store_c.append(np.empty(0, dtype=np.int64))
    slot_index = np.zeros(n_edges, dtype=np.int64)
    n_slots = 0
    births = np.empty(n_edges)
    deaths = np.empty(n_edges)
    n_h1 = 0
    for e in range(n_edges - 1, -1, -1):
        if is_death[e]:
            continue
        i = ei[e]
        j = ej[e]
        dij = ev[e]
        births[n_h1] = dij
        pd, pc = _edge_pivot(dist, i, j, dij, t_max)
        if pc < 0:
            deaths[n_h1] = np.inf
            n_h1 += 1
            continue
        if pc not in pivot_owner:
            pivot_owner[pc] = n_slots
            slot_edge[n_slots] = e
            n_slots += 1
            deaths[n_h1] = pd
            n_h1 += 1
            continue
        col_d, col_c = _edge_coboundary(dist, i, j, dij, t_max)
        while len(col_c) > 0 and col_c[0] in pivot_owner:
            slot = pivot_owner[col_c[0]]
            if slot_stored[slot]:
                other_d = store_d[slot_index[slot]]
                other_c = store_c[slot_index[slot]]
            else:
                f = slot_edge[slot]
                other_d, other_c = _edge_coboundary(dist, ei[f], ej[f], ev[f], t_max)
            col_d, col_c = _merge_columns(col_d, col_c, other_d, other_c)
        if len(col_c) > 0:
            pivot_owner[col_c[0]] = n_slots
            slot_edge[n_slots] = e
            slot_stored[n_slots] = True
            slot_index[n_slots] = len(store_c)
            store_d.append(col_d)
            store_c.append(col_c)
            n_slots += 1
            deaths[n_h1] = col_d[0]
        else:
            deaths[n_h1] = np.inf
        n_h1 += 1
    return h0[:n_h0], components, births[:n_h1], deaths[:n_h1]
