"""Hot inner loops.

Every function here is written in the numba-compatible subset of Python and
operates on flat int64 arrays. With JIT disabled (``EDCSMATCH_DISABLE_JIT``)
they run as ordinary Python over numpy arrays, which is slow but identical.
"""
import numpy as np

from ._jit import njit

# Counter slots returned by ``bernstein_stream``.
C_PHASE1_BATCHES = 0
C_EPOCHS = 1
C_MODS = 2
C_INSERTIONS = 3
C_REMOVALS = 4
C_EXHAUSTED = 5
C_LAST_EPOCH_END = 6
C_PEAK_STORED = 7
N_COUNTERS = 8


@njit
def build_csr(n, us, vs):
    """Incidence lists: for vertex x, ``eids[ptr[x]:ptr[x+1]]`` are its edge ids."""
    m = us.shape[0]
    ptr = np.zeros(n + 1, dtype=np.int64)
    for e in range(m):
        ptr[us[e] + 1] += 1
        ptr[vs[e] + 1] += 1
    for x in range(n):
        ptr[x + 1] += ptr[x]
    fill = ptr[:-1].copy()
    eids = np.empty(2 * m, dtype=np.int64)
    for e in range(m):
        eids[fill[us[e]]] = e
        fill[us[e]] += 1
        eids[fill[vs[e]]] = e
        fill[vs[e]] += 1
    return ptr, eids


@njit
def greedy_matching(n, us, vs):
    mate = np.full(n, -1, dtype=np.int64)
    for e in range(us.shape[0]):
        a = us[e]
        b = vs[e]
        if a != b and mate[a] == -1 and mate[b] == -1:
            mate[a] = b
            mate[b] = a
    return mate


@njit
def _lca(a, b, base, mate, parent, seen):
    seen[:] = False
    while True:
        a = base[a]
        seen[a] = True
        if mate[a] == -1:
            break
        a = parent[mate[a]]
    while True:
        b = base[b]
        if seen[b]:
            return b
        b = parent[mate[b]]


@njit
def _mark_path(v, b, child, base, mate, parent, in_blossom):
    while base[v] != b:
        in_blossom[base[v]] = True
        in_blossom[base[mate[v]]] = True
        parent[v] = child
        child = mate[v]
        v = parent[mate[v]]


@njit
def _find_augmenting_path(root, n, ptr, nbr, mate, parent, base, used, in_blossom, seen, queue):
    used[:] = False
    parent[:] = -1
    for i in range(n):
        base[i] = i
    used[root] = True
    head = 0
    tail = 0
    queue[tail] = root
    tail += 1
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(ptr[v], ptr[v + 1]):
            to = nbr[k]
            if base[v] == base[to] or mate[v] == to:
                continue
            if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                cur = _lca(v, to, base, mate, parent, seen)
                in_blossom[:] = False
                _mark_path(v, cur, to, base, mate, parent, in_blossom)
                _mark_path(to, cur, v, base, mate, parent, in_blossom)
                for i in range(n):
                    if in_blossom[base[i]]:
                        base[i] = cur
                        if not used[i]:
                            used[i] = True
                            queue[tail] = i
                            tail += 1
            elif parent[to] == -1:
                parent[to] = v
                if mate[to] == -1:
                    return to
                w = mate[to]
                used[w] = True
                queue[tail] = w
                tail += 1
    return -1


@njit
def edmonds_matching(n, us, vs):
    """Maximum-cardinality matching of a general simple graph.

    Returns ``mate`` with ``mate[x] == -1`` for exposed vertices. Edmonds'
    blossom search from every exposed vertex, seeded with a greedy matching.
    """
    mate = greedy_matching(n, us, vs)
    m = us.shape[0]
    ptr = np.zeros(n + 1, dtype=np.int64)
    for e in range(m):
        ptr[us[e] + 1] += 1
        ptr[vs[e] + 1] += 1
    for x in range(n):
        ptr[x + 1] += ptr[x]
    fill = ptr[:-1].copy()
    nbr = np.empty(2 * m, dtype=np.int64)
    for e in range(m):
        nbr[fill[us[e]]] = vs[e]
        fill[us[e]] += 1
        nbr[fill[vs[e]]] = us[e]
        fill[vs[e]] += 1

    parent = np.full(n, -1, dtype=np.int64)
    base = np.arange(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    in_blossom = np.zeros(n, dtype=np.bool_)
    seen = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    for root in range(n):
        if mate[root] != -1 or ptr[root] == ptr[root + 1]:
            continue
        v = _find_augmenting_path(root, n, ptr, nbr, mate, parent, base, used, in_blossom, seen, queue)
        while v != -1:
            pv = parent[v]
            ppv = mate[pv]
            mate[v] = pv
            mate[pv] = v
            v = ppv
    return mate


@njit
def hopcroft_karp(n_left, n_right, ls, rs):
    """Maximum-cardinality matching of a bipartite graph.

    ``ls[e]`` is a left index in ``[0, n_left)``, ``rs[e]`` a right index in
    ``[0, n_right)``. Returns ``(mate_left, mate_right)``.
    """
    m = ls.shape[0]
    ptr = np.zeros(n_left + 1, dtype=np.int64)
    for e in range(m):
        ptr[ls[e] + 1] += 1
    for x in range(n_left):
        ptr[x + 1] += ptr[x]
    fill = ptr[:-1].copy()
    nbr = np.empty(m, dtype=np.int64)
    for e in range(m):
        nbr[fill[ls[e]]] = rs[e]
        fill[ls[e]] += 1

    mate_l = np.full(n_left, -1, dtype=np.int64)
    mate_r = np.full(n_right, -1, dtype=np.int64)
    dist = np.empty(n_left, dtype=np.int64)
    queue = np.empty(n_left, dtype=np.int64)
    it = np.empty(n_left, dtype=np.int64)
    stack = np.empty(n_left, dtype=np.int64)
    inf = n_left + n_right + 1
    while True:
        # BFS layering from exposed left vertices
        head = 0
        tail = 0
        for x in range(n_left):
            if mate_l[x] == -1:
                dist[x] = 0
                queue[tail] = x
                tail += 1
            else:
                dist[x] = inf
        found = False
        while head < tail:
            x = queue[head]
            head += 1
            for k in range(ptr[x], ptr[x + 1]):
                y = nbr[k]
                z = mate_r[y]
                if z == -1:
                    found = True
                elif dist[z] == inf:
                    dist[z] = dist[x] + 1
                    queue[tail] = z
                    tail += 1
        if not found:
            break
        # iterative DFS along the layering
        for x in range(n_left):
            it[x] = ptr[x]
        for root in range(n_left):
            if mate_l[root] != -1:
                continue
            depth = 0
            stack[0] = root
            while depth >= 0:
                x = stack[depth]
                advanced = False
                while it[x] < ptr[x + 1]:
                    y = nbr[it[x]]
                    z = mate_r[y]
                    if z == -1:
                        # augment along the stack
                        for d in range(depth, -1, -1):
                            a = stack[d]
                            b = nbr[it[a]]
                            mate_l[a] = b
                            mate_r[b] = a
                        depth = -1
                        advanced = True
                        break
                    if dist[z] == dist[x] + 1:
                        depth += 1
                        stack[depth] = z
                        advanced = True
                        break
                    it[x] += 1
                if depth < 0:
                    break
                if not advanced:
                    dist[x] = inf
                    depth -= 1
                    if depth >= 0:
                        it[stack[depth]] += 1
    return mate_l, mate_r


@njit
def _remove_overfull(a, b, beta, us, vs, deg, in_h, ptr, eids):
    # only edges touching the endpoints of the last insertion can be overfull
    removed = 0
    while True:
        best = -1
        best_sum = beta
        for x in (a, b):
            for k in range(ptr[x], ptr[x + 1]):
                f = eids[k]
                if not in_h[f]:
                    continue
                s = deg[us[f]] + deg[vs[f]]
                if s > best_sum or (s == best_sum and best != -1 and f < best):
                    best = f
                    best_sum = s
        if best == -1:
            return removed
        in_h[best] = False
        deg[us[best]] -= 1
        deg[vs[best]] -= 1
        removed += 1


@njit
def bernstein_stream(n, us, vs, order, batch_ptr, beta, threshold, alpha):
    """Two-phase EDCS streaming over batches.

    ``order[batch_ptr[i]:batch_ptr[i+1]]`` are the edge ids of the i-th
    arriving batch, in intra-batch order. An edge is underfull iff its
    current degree sum is ``< threshold`` (the caller encodes beta*(1-lambda)
    exactly as an integer). ``beta`` bounds edge degrees in H.

    Returns ``(in_h, in_u, batch_phase, batch_ins, batch_rem, batch_under,
    counters)``; see the ``C_*`` constants for counter slots.
    """
    m = us.shape[0]
    q = batch_ptr.shape[0] - 1
    ptr, eids = build_csr(n, us, vs)
    deg = np.zeros(n, dtype=np.int64)
    in_h = np.zeros(m, dtype=np.bool_)
    in_u = np.zeros(m, dtype=np.bool_)
    batch_phase = np.zeros(q, dtype=np.int8)
    batch_ins = np.zeros(q, dtype=np.int64)
    batch_rem = np.zeros(q, dtype=np.int64)
    batch_under = np.zeros(q, dtype=np.int64)
    counters = np.zeros(N_COUNTERS, dtype=np.int64)

    phase = 1
    found = False
    in_epoch = 0
    h_size = 0
    u_size = 0
    peak = 0
    for i in range(q):
        batch_phase[i] = phase
        if phase == 1:
            for k in range(batch_ptr[i], batch_ptr[i + 1]):
                e = order[k]
                a = us[e]
                b = vs[e]
                if deg[a] + deg[b] < threshold:
                    in_h[e] = True
                    deg[a] += 1
                    deg[b] += 1
                    h_size += 1
                    found = True
                    batch_ins[i] += 1
                    r = _remove_overfull(a, b, beta, us, vs, deg, in_h, ptr, eids)
                    batch_rem[i] += r
                    if h_size > peak:
                        peak = h_size
                    h_size -= r
            in_epoch += 1
            if in_epoch == alpha:
                counters[C_EPOCHS] += 1
                counters[C_LAST_EPOCH_END] = i + 1
                if not found:
                    phase = 2
                    counters[C_PHASE1_BATCHES] = i + 1
                found = False
                in_epoch = 0
        else:
            for k in range(batch_ptr[i], batch_ptr[i + 1]):
                e = order[k]
                if deg[us[e]] + deg[vs[e]] < threshold:
                    in_u[e] = True
                    u_size += 1
                    batch_under[i] += 1
            if h_size + u_size > peak:
                peak = h_size + u_size
    if phase == 1:
        counters[C_EXHAUSTED] = 1
        counters[C_PHASE1_BATCHES] = q
    for i in range(q):
        counters[C_INSERTIONS] += batch_ins[i]
        counters[C_REMOVALS] += batch_rem[i]
    counters[C_MODS] = counters[C_INSERTIONS] + counters[C_REMOVALS]
    counters[C_PEAK_STORED] = peak
    return in_h, in_u, batch_phase, batch_ins, batch_rem, batch_under, counters
