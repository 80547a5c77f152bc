"""Compiled inner loops for the flow engine and the dynamic-tree decomposition.

Both kernels mirror the pure-Python routines line by line and return identical
results; they run on int64 arrays, so callers only use them after checking
that every quantity stays below ``SAFE``. Set ``HIERFLOW_PURE=1`` to disable.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    from numba import njit
    AVAILABLE = os.environ.get("HIERFLOW_PURE", "") not in ("1", "true", "yes")
except ImportError:  # pragma: no cover
    AVAILABLE = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(f):
            return f
        return wrap if not args or not callable(args[0]) else args[0]

BIG = np.int64(1 << 62)
SAFE = 1 << 60

_enabled = AVAILABLE


def enabled() -> bool:
    return _enabled


def set_enabled(flag: bool) -> bool:
    """Switch the compiled path on or off; returns the previous setting."""
    global _enabled
    prev = _enabled
    _enabled = bool(flag) and AVAILABLE
    return prev


def csr(n: int, owner: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Group item indices by owner, keeping index order inside each group."""
    order = np.argsort(owner, kind="stable").astype(np.int64)
    start = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(owner, minlength=n), out=start[1:])
    return start, order


# ---------------------------------------------------------------- push-relabel

@njit(cache=True)
def _bfs(n, start, adj, ahead, res, excess, dist, queue):
    for v in range(n):
        dist[v] = BIG
    qn = 0
    for v in range(n):
        if excess[v] > 0:
            dist[v] = 0
            queue[qn] = v
            qn += 1
    scans = 0
    i = 0
    while i < qn:
        u = queue[i]
        i += 1
        du = dist[u] + 1
        for j in range(start[u], start[u + 1]):
            a = adj[j]
            scans += 1
            if res[a] > 0:
                x = ahead[a]
                if dist[x] == BIG:
                    dist[x] = du
                    queue[qn] = x
                    qn += 1
    return scans


@njit(cache=True)
def _heap_push(hd, hv, size, d, v):
    i = size
    hd[i] = d
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if hd[p] < hd[i] or (hd[p] == hd[i] and hv[p] <= hv[i]):
            break
        hd[p], hd[i] = hd[i], hd[p]
        hv[p], hv[i] = hv[i], hv[p]
        i = p
    return size + 1


@njit(cache=True)
def _heap_pop(hd, hv, size):
    d = hd[0]
    v = hv[0]
    size -= 1
    hd[0] = hd[size]
    hv[0] = hv[size]
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and (hd[r] < hd[l] or (hd[r] == hd[l] and hv[r] < hv[l])):
            c = r
        if hd[i] < hd[c] or (hd[i] == hd[c] and hv[i] <= hv[c]):
            break
        hd[c], hd[i] = hd[i], hd[c]
        hv[c], hv[i] = hv[i], hv[c]
        i = c
    return d, v, size


@njit(cache=True)
def _dijkstra(n, start, adj, ahead, res, awt, excess, limit, dist):
    for v in range(n):
        dist[v] = BIG
    cap = adj.shape[0] + n + 1
    hd = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for v in range(n):
        if excess[v] > 0:
            dist[v] = 0
            size = _heap_push(hd, hv, size, 0, v)
    scans = 0
    while size > 0:
        d, u, size = _heap_pop(hd, hv, size)
        if d > dist[u]:
            continue
        if d > limit:
            break
        for j in range(start[u], start[u + 1]):
            a = adj[j]
            scans += 1
            if res[a] > 0:
                x = ahead[a]
                nd = d + awt[a]
                if nd < dist[x] and nd <= limit:
                    dist[x] = nd
                    size = _heap_push(hd, hv, size, nd, x)
    return scans


@njit(cache=True)
def _blocking(n, start, adj, ahead, res, awt, dist, target, excess, deficit, hop_mode, sources, ns):
    it = np.empty(n, dtype=np.int64)
    for v in range(n):
        it[v] = start[v]
    path = np.empty(n + 1, dtype=np.int64)
    scans = 0
    for k in range(ns):
        s = sources[k]
        while excess[s] > 0:
            plen = 0
            u = s
            found = False
            while True:
                if deficit[u] > 0 and dist[u] == target:
                    found = True
                    break
                i = it[u]
                du = dist[u]
                nxt = -1
                end = start[u + 1]
                while i < end:
                    a = adj[i]
                    scans += 1
                    if res[a] > 0:
                        x = ahead[a]
                        dx = dist[x]
                        step = 1 if hop_mode else awt[a]
                        if dx <= target and dx == du + step:
                            nxt = a
                            break
                    i += 1
                it[u] = i
                if nxt < 0:
                    if plen == 0:
                        break
                    plen -= 1
                    a = path[plen]
                    u = ahead[a ^ 1]
                    it[u] += 1
                    continue
                path[plen] = nxt
                plen += 1
                u = ahead[nxt]
            if not found:
                break
            b = excess[s]
            if deficit[u] < b:
                b = deficit[u]
            for j in range(plen):
                if res[path[j]] < b:
                    b = res[path[j]]
            for j in range(plen):
                a = path[j]
                res[a] -= b
                res[a ^ 1] += b
            excess[s] -= b
            deficit[u] -= b
    return scans


@njit(cache=True)
def route_phases(n, start, adj, ahead, res, awt, excess, deficit, limit, hop_mode):
    """Run phases until no unsaturated sink is within reach; returns (phases, scans)."""
    dist = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    sources = np.empty(n, dtype=np.int64)
    phases = 0
    scans = 0
    while True:
        ns = 0
        for v in range(n):
            if excess[v] > 0:
                sources[ns] = v
                ns += 1
        anydef = False
        for v in range(n):
            if deficit[v] > 0:
                anydef = True
                break
        if ns == 0 or not anydef:
            break
        if hop_mode:
            scans += _bfs(n, start, adj, ahead, res, excess, dist, queue)
        else:
            scans += _dijkstra(n, start, adj, ahead, res, awt, excess, limit, dist)
        target = BIG
        for v in range(n):
            if deficit[v] > 0 and dist[v] < target:
                target = dist[v]
        if target == BIG or ((not hop_mode) and target > limit):
            break
        phases += 1
        scans += _blocking(n, start, adj, ahead, res, awt, dist, target, excess, deficit,
                           hop_mode, sources, ns)
    return phases, scans


@njit(cache=True)
def distances(n, start, adj, ahead, res, awt, excess, limit):
    dist = np.empty(n, dtype=np.int64)
    scans = _dijkstra(n, start, adj, ahead, res, awt, excess, limit, dist)
    return dist, scans


# ---------------------------------------------------------------- link-cut forest
# rows of the state matrix
_L, _R, _P, _VAL, _MN, _WT, _SM, _A1, _A2, _LZ, _LZ1, _LZ2 = range(12)


@njit(cache=True)
def _is_root(S, x):
    p = S[_P, x]
    return p == -1 or (S[_L, p] != x and S[_R, p] != x)


@njit(cache=True)
def _update(S, x):
    m = S[_VAL, x]
    s = S[_WT, x]
    c = S[_L, x]
    if c != -1:
        if S[_MN, c] < m:
            m = S[_MN, c]
        s += S[_SM, c]
    c = S[_R, x]
    if c != -1:
        if S[_MN, c] < m:
            m = S[_MN, c]
        s += S[_SM, c]
    S[_MN, x] = m
    S[_SM, x] = s


@njit(cache=True)
def _apply(S, x, d, d1, d2):
    if d != 0:
        S[_VAL, x] += d
        S[_MN, x] += d
        S[_LZ, x] += d
    if d1 != 0:
        S[_A1, x] += d1
        S[_LZ1, x] += d1
    if d2 != 0:
        S[_A2, x] += d2
        S[_LZ2, x] += d2


@njit(cache=True)
def _push(S, x):
    d = S[_LZ, x]
    d1 = S[_LZ1, x]
    d2 = S[_LZ2, x]
    if d != 0 or d1 != 0 or d2 != 0:
        c = S[_L, x]
        if c != -1:
            _apply(S, c, d, d1, d2)
        c = S[_R, x]
        if c != -1:
            _apply(S, c, d, d1, d2)
        S[_LZ, x] = 0
        S[_LZ1, x] = 0
        S[_LZ2, x] = 0


@njit(cache=True)
def _rotate(S, x):
    p = S[_P, x]
    g = S[_P, p]
    if S[_L, p] == x:
        b = S[_R, x]
        S[_L, p] = b
        S[_R, x] = p
    else:
        b = S[_L, x]
        S[_R, p] = b
        S[_L, x] = p
    if b != -1:
        S[_P, b] = p
    if g != -1:
        if S[_L, g] == p:
            S[_L, g] = x
        elif S[_R, g] == p:
            S[_R, g] = x
    S[_P, x] = g
    S[_P, p] = x
    _update(S, p)
    _update(S, x)


@njit(cache=True)
def _splay(S, x, chain):
    k = 0
    chain[k] = x
    y = x
    while not _is_root(S, y):
        y = S[_P, y]
        k += 1
        chain[k] = y
    while k >= 0:
        _push(S, chain[k])
        k -= 1
    while not _is_root(S, x):
        p = S[_P, x]
        if not _is_root(S, p):
            g = S[_P, p]
            if (S[_L, g] == p) == (S[_L, p] == x):
                _rotate(S, p)
            else:
                _rotate(S, x)
        _rotate(S, x)


@njit(cache=True)
def _access(S, v, chain):
    last = -1
    x = v
    while x != -1:
        _splay(S, x, chain)
        S[_R, x] = last
        _update(S, x)
        last = x
        x = S[_P, x]
    _splay(S, v, chain)


@njit(cache=True)
def _find_root(S, v, chain):
    _access(S, v, chain)
    x = v
    while True:
        _push(S, x)
        if S[_L, x] == -1:
            break
        x = S[_L, x]
    _splay(S, x, chain)
    return x


@njit(cache=True)
def _path_min(S, v, chain):
    _access(S, v, chain)
    return S[_MN, v]


@njit(cache=True)
def _argmin(S, v, chain):
    _access(S, v, chain)
    target = S[_MN, v]
    x = v
    while True:
        _push(S, x)
        c = S[_L, x]
        if c != -1 and S[_MN, c] == target:
            x = c
        elif S[_VAL, x] == target:
            break
        else:
            x = S[_R, x]
    _splay(S, x, chain)
    return x


@njit(cache=True)
def _flush(S, x, chain, tree_edge, rem, circ, keep):
    e = tree_edge[x]
    _access(S, x, chain)
    c = S[_L, x]
    if c != -1:
        S[_P, c] = -1
        S[_L, x] = -1
    rem[e] = S[_VAL, x]
    circ[e] += S[_A1, x]
    keep[e] += S[_A2, x]
    S[_VAL, x] = BIG
    S[_WT, x] = 0
    S[_A1, x] = 0
    S[_A2, x] = 0
    _update(S, x)
    tree_edge[x] = -1


@njit(cache=True)
def _cut_zeros(S, v, chain, tree_edge, rem, circ, keep):
    while _path_min(S, v, chain) <= 0:
        _flush(S, _argmin(S, v, chain), chain, tree_edge, rem, circ, keep)


@njit(cache=True)
def _grow(S, v, chain, ostart, oedges, ptr, rem, circ, keep, tree_edge, heads, wts):
    while True:
        r = _find_root(S, v, chain)
        i = ptr[r]
        end = ostart[r + 1]
        while i < end and rem[oedges[i]] <= 0:
            i += 1
        ptr[r] = i
        if i >= end:
            return r
        e = oedges[i]
        x = heads[e]
        if _find_root(S, x, chain) == r:
            lam = _path_min(S, x, chain)
            if rem[e] < lam:
                lam = rem[e]
            _access(S, x, chain)
            _apply(S, x, -lam, lam, 0)
            rem[e] -= lam
            circ[e] += lam
            _cut_zeros(S, x, chain, tree_edge, rem, circ, keep)
        else:
            _access(S, r, chain)
            S[_VAL, r] = rem[e]
            S[_WT, r] = wts[e]
            # roots soak up path updates; only the new edge's share counts
            S[_A1, r] = 0
            S[_A2, r] = 0
            _update(S, r)
            S[_P, r] = x
            tree_edge[r] = e
            rem[e] = 0


@njit(cache=True)
def decompose(n, tails, heads, values, wts, threshold, use_threshold):
    """Returns (ok, circ, keep, lam, s, t, W, count)."""
    m = tails.shape[0]
    rem = values.copy()
    circ = np.zeros(m, dtype=np.int64)
    keep = np.zeros(m, dtype=np.int64)
    cnt = np.zeros(n + 1, dtype=np.int64)
    for e in range(m):
        if rem[e] > 0:
            if tails[e] == heads[e]:
                circ[e] += rem[e]
                rem[e] = 0
            else:
                cnt[tails[e] + 1] += 1
    ostart = np.cumsum(cnt)
    fill = ostart[:-1].copy()
    oedges = np.empty(ostart[n], dtype=np.int64)
    for e in range(m):
        if rem[e] > 0:
            u = tails[e]
            oedges[fill[u]] = e
            fill[u] += 1
    ptr = ostart[:-1].copy()
    tree_edge = -np.ones(n, dtype=np.int64)
    S = np.zeros((12, n), dtype=np.int64)
    S[_L, :] = -1
    S[_R, :] = -1
    S[_P, :] = -1
    S[_VAL, :] = BIG
    S[_MN, :] = BIG
    chain = np.empty(n + 1, dtype=np.int64)
    supply = np.zeros(n, dtype=np.int64)
    for e in range(m):
        supply[tails[e]] += values[e]
        supply[heads[e]] -= values[e]
    cap = m + n + 1
    plam = np.empty(cap, dtype=np.int64)
    ps = np.empty(cap, dtype=np.int64)
    pt = np.empty(cap, dtype=np.int64)
    pw = np.empty(cap, dtype=np.int64)
    k = 0
    for s in range(n):
        while supply[s] > 0:
            t = _grow(S, s, chain, ostart, oedges, ptr, rem, circ, keep, tree_edge, heads, wts)
            if t == s:
                return False, circ, keep, plam, ps, pt, pw, k
            lam = _path_min(S, s, chain)
            if supply[s] < lam:
                lam = supply[s]
            _access(S, s, chain)
            W = S[_SM, s]
            short = use_threshold and W <= threshold
            _apply(S, s, -lam, 0, lam if short else 0)
            supply[s] -= lam
            if k == cap:
                return False, circ, keep, plam, ps, pt, pw, k
            plam[k] = lam
            ps[k] = s
            pt[k] = t
            pw[k] = W
            k += 1
            _cut_zeros(S, s, chain, tree_edge, rem, circ, keep)
    for v in range(n):
        _grow(S, v, chain, ostart, oedges, ptr, rem, circ, keep, tree_edge, heads, wts)
    for x in range(n):
        if tree_edge[x] >= 0:
            _flush(S, x, chain, tree_edge, rem, circ, keep)
    for e in range(m):
        if rem[e] != 0:
            return False, circ, keep, plam, ps, pt, pw, k
    return True, circ, keep, plam, ps, pt, pw, k
