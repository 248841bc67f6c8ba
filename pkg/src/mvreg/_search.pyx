# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled engine for the exhaustive divergence search.

Same algorithm, state encoding and visit order as `_search_py`; the hot path
(state transitions, garbage collection of dead events, divergence checks and
canonical packing) runs on C arrays. Deduplication still uses a Python set of
packed byte keys.
"""

from itertools import permutations

from cpython.bytes cimport PyBytes_FromStringAndSize

from libc.string cimport memcmp, memcpy, memset

ENGINE = "compiled"

MAX_REPLICAS = 4
MAX_VALUES = 16
MAX_STEPS = 20

cdef enum:
    MAXR = 4
    MAXV = 16
    MAXE = 24
    NPERM = 24
    PACK_CAP = 1024

cdef struct State:
    int n_events
    unsigned char ev_r[MAXE]
    unsigned char ev_n[MAXE]
    unsigned char ev_v[MAXE]
    unsigned char ev_ctx[MAXE][MAXR]
    unsigned char vv[MAXR][MAXR]
    int n_ent[MAXR]
    unsigned char ent_r[MAXR][MAXE]
    unsigned char ent_n[MAXR][MAXE]
    unsigned char ent_v[MAXR][MAXE]


def explore(
    num_replicas,
    dom_masks,
    max_steps,
    lazy_variant=False,
    symmetry=True,
    gc_events=True,
    progress=None,
):
    """Mirror of `_search_py.explore`; see that module for the contract."""
    cdef int R = num_replicas
    cdef int NV = len(dom_masks)
    if not 1 <= R <= MAX_REPLICAS:
        raise ValueError(f"replica count must be 1..{MAX_REPLICAS}")
    if not 1 <= NV <= MAX_VALUES:
        raise ValueError(f"domain size must be 1..{MAX_VALUES}")
    if not 0 <= max_steps <= MAX_STEPS:
        raise ValueError(f"max_steps must be 0..{MAX_STEPS}")

    cdef int dom[MAXV]
    cdef int i, j
    for i in range(NV):
        dom[i] = dom_masks[i]

    cdef int perms_arr[NPERM][MAXR]
    cdef int n_perms = 0
    if symmetry and R > 1:
        for perm in permutations(range(R)):
            for i in range(R):
                perms_arr[n_perms][i] = perm[i]
            n_perms += 1
    else:
        for i in range(R):
            perms_arr[0][i] = i
        n_perms = 1

    cdef bint lazy = bool(lazy_variant)
    cdef bint gc_on = bool(gc_events)
    cdef int action_count = R * NV + R * R
    cdef int depth, code, p
    cdef State cur, nxt
    cdef unsigned char packed[PACK_CAP]
    cdef unsigned char best[PACK_CAP]
    cdef int pack_len, best_perm, perm_ix
    cdef int div_replica, impl_mask, oracle_mask

    memset(&cur, 0, sizeof(State))
    pack_len = _pack(&cur, perms_arr[0], R, best)
    start_key = PyBytes_FromStringAndSize(<char*> best, pack_len)
    visited = {start_key}
    frontier = [(start_key, b"")]

    for depth in range(1, max_steps + 1):
        next_frontier = []
        last = depth == max_steps
        for packed_state, history in frontier:
            _unpack(packed_state, R, &cur)
            for code in range(action_count):
                if not _apply(&cur, &nxt, code, R, NV, dom, lazy, gc_on):
                    continue
                best_perm = 0
                pack_len = _pack(&nxt, perms_arr[0], R, best)
                for perm_ix in range(1, n_perms):
                    _pack(&nxt, perms_arr[perm_ix], R, packed)
                    if memcmp(packed, best, pack_len) < 0:
                        memcpy(best, packed, pack_len)
                        best_perm = perm_ix
                key = PyBytes_FromStringAndSize(<char*> best, pack_len)
                if key in visited:
                    continue
                visited.add(key)
                nh = history + bytes((code,))
                if best_perm != 0:
                    nh = _permute_history(nh, perms_arr[best_perm], R, NV)
                div_replica = _check(&nxt, R, dom, lazy, &impl_mask, &oracle_mask)
                if div_replica >= 0:
                    if best_perm != 0:
                        div_replica = perms_arr[best_perm][div_replica]
                    actions = _decode_actions(nh, R, NV)
                    return (
                        (actions, div_replica, impl_mask, oracle_mask, depth),
                        len(visited),
                        False,
                    )
                if not last:
                    next_frontier.append((key, nh))
        frontier = next_frontier
        if progress is not None:
            progress(depth, len(visited), len(frontier))
        if not frontier:
            break
    return None, len(visited), True


def decode_actions(history, R, NV):
    return _decode_actions(history, R, NV)


cdef list _decode_actions(bytes history, int R, int NV):
    actions = []
    cdef int code
    for code in history:
        if code < R * NV:
            actions.append(("w", code // NV, code % NV))
        else:
            code -= R * NV
            actions.append(("s", code // R, code % R))
    return actions


cdef bytes _permute_history(bytes history, int* perm, int R, int NV):
    out = bytearray()
    cdef int code
    for code in history:
        if code < R * NV:
            out.append(perm[code // NV] * NV + code % NV)
        else:
            code -= R * NV
            out.append(R * NV + perm[code // R] * R + perm[code % R])
    return bytes(out)


cdef bint _apply(State* cur, State* nxt, int code, int R, int NV,
                 int* dom, bint lazy, bint gc_on) nogil:
    cdef int p, v, a, b, i, k, r, n
    cdef int present, kept_n
    cdef unsigned char kr[2 * MAXE]
    cdef unsigned char kn[2 * MAXE]
    cdef unsigned char kv[2 * MAXE]
    memcpy(nxt, cur, sizeof(State))
    if code < R * NV:
        p = code // NV
        v = code % NV
        n = nxt.vv[p][p] + 1
        k = nxt.n_events
        nxt.ev_r[k] = p
        nxt.ev_n[k] = n
        nxt.ev_v[k] = v
        for i in range(R):
            nxt.ev_ctx[k][i] = nxt.vv[p][i]
        nxt.n_events = k + 1
        nxt.vv[p][p] = n
        nxt.n_ent[p] = 1
        nxt.ent_r[p][0] = p
        nxt.ent_n[p][0] = n
        nxt.ent_v[p][0] = v
    else:
        code -= R * NV
        a = code // R
        b = code % R
        if a == b:
            return False
        kept_n = 0
        # receiver entries kept when shared with the sender or unseen by it
        for i in range(cur.n_ent[b]):
            r = cur.ent_r[b][i]
            n = cur.ent_n[b][i]
            if n > cur.vv[a][r] or _has_entry(cur, a, r, n):
                kr[kept_n] = r
                kn[kept_n] = n
                kv[kept_n] = cur.ent_v[b][i]
                kept_n += 1
        for i in range(cur.n_ent[a]):
            r = cur.ent_r[a][i]
            n = cur.ent_n[a][i]
            if _has_entry(cur, b, r, n):
                continue  # already kept via the receiver loop
            if n > cur.vv[b][r]:
                kr[kept_n] = r
                kn[kept_n] = n
                kv[kept_n] = cur.ent_v[a][i]
                kept_n += 1
        if not lazy:
            present = 0
            for i in range(kept_n):
                present |= 1 << kv[i]
            k = 0
            for i in range(kept_n):
                if not (dom[kv[i]] & present):
                    kr[k] = kr[i]
                    kn[k] = kn[i]
                    kv[k] = kv[i]
                    k += 1
            kept_n = k
        nxt.n_ent[b] = kept_n
        for i in range(kept_n):
            nxt.ent_r[b][i] = kr[i]
            nxt.ent_n[b][i] = kn[i]
            nxt.ent_v[b][i] = kv[i]
        for i in range(R):
            if cur.vv[a][i] > nxt.vv[b][i]:
                nxt.vv[b][i] = cur.vv[a][i]
    if gc_on and nxt.n_events:
        _collect_dead_events(nxt, R)
    return True


cdef inline bint _has_entry(State* s, int replica, int r, int n) nogil:
    cdef int i
    for i in range(s.n_ent[replica]):
        if s.ent_r[replica][i] == r and s.ent_n[replica][i] == n:
            return True
    return False


cdef void _collect_dead_events(State* s, int R) nogil:
    cdef int i, j, p, k
    cdef int r, n
    cdef bint dead_everywhere, found
    cdef unsigned char alive[MAXE]
    cdef int n_alive = 0
    for i in range(s.n_events):
        r = s.ev_r[i]
        n = s.ev_n[i]
        dead_everywhere = True
        for p in range(R):
            found = False
            for j in range(s.n_events):
                if s.ev_n[j] <= s.vv[p][s.ev_r[j]] and s.ev_ctx[j][r] >= n:
                    found = True
                    break
            if not found:
                dead_everywhere = False
                break
        if not dead_everywhere:
            alive[n_alive] = i
            n_alive += 1
    if n_alive == s.n_events:
        return
    for k in range(n_alive):
        i = alive[k]
        if i == k:
            continue
        s.ev_r[k] = s.ev_r[i]
        s.ev_n[k] = s.ev_n[i]
        s.ev_v[k] = s.ev_v[i]
        for p in range(MAXR):
            s.ev_ctx[k][p] = s.ev_ctx[i][p]
    s.n_events = n_alive


cdef int _check(State* s, int R, int* dom, bint lazy,
                int* impl_out, int* oracle_out) nogil:
    """First diverging replica index, or -1; fills the two masks."""
    cdef int p, i, j, impl, fmvr, oracle
    cdef int r, n
    cdef bint dominated
    for p in range(R):
        impl = 0
        for i in range(s.n_ent[p]):
            impl |= 1 << s.ent_v[p][i]
        if lazy:
            impl = _resolve_mask(impl, dom)
        fmvr = 0
        for i in range(s.n_events):
            r = s.ev_r[i]
            n = s.ev_n[i]
            if n > s.vv[p][r]:
                continue
            dominated = False
            for j in range(s.n_events):
                if s.ev_n[j] <= s.vv[p][s.ev_r[j]] and s.ev_ctx[j][r] >= n:
                    dominated = True
                    break
            if not dominated:
                fmvr |= 1 << s.ev_v[i]
        oracle = _resolve_mask(fmvr, dom)
        if impl != oracle:
            impl_out[0] = impl
            oracle_out[0] = oracle
            return p
    return -1


cdef inline int _resolve_mask(int mask, int* dom) nogil:
    cdef int out = 0
    cdef int rest = mask
    cdef int v = 0
    while rest:
        if (rest & 1) and not (dom[v] & mask):
            out |= 1 << v
        rest >>= 1
        v += 1
    return out


cdef int _pack(State* s, int* perm, int R, unsigned char* out) nogil:
    """Canonical bytes under one relabeling; returns the length.

    Layout matches _search_py._pack: event count, sorted permuted event
    chunks (r, n, v, ctx[R]), vv rows in permuted positions, then per replica
    the entry count and sorted permuted (r, n, v) triples.
    """
    cdef int chunk = 3 + R
    cdef unsigned char ev_buf[MAXE * (3 + MAXR)]
    cdef int i, j, k, pos, old
    # build permuted event chunks
    for i in range(s.n_events):
        pos = i * chunk
        ev_buf[pos] = perm[s.ev_r[i]]
        ev_buf[pos + 1] = s.ev_n[i]
        ev_buf[pos + 2] = s.ev_v[i]
        for j in range(R):
            ev_buf[pos + 3 + perm[j]] = s.ev_ctx[i][j]
    _sort_chunks(ev_buf, s.n_events, chunk)
    cdef int w = 0
    out[w] = s.n_events
    w += 1
    for i in range(s.n_events * chunk):
        out[w] = ev_buf[i]
        w += 1
    # vv rows at permuted positions, entries likewise
    cdef int row_base = w
    w += R * R
    for old in range(R):
        pos = row_base + perm[old] * R
        for j in range(R):
            out[pos + perm[j]] = s.vv[old][j]
    cdef unsigned char ent_buf[MAXE * 3]
    cdef int ent_w[MAXR]
    cdef unsigned char ent_block[MAXR][1 + MAXE * 3]
    for old in range(R):
        for i in range(s.n_ent[old]):
            ent_buf[i * 3] = perm[s.ent_r[old][i]]
            ent_buf[i * 3 + 1] = s.ent_n[old][i]
            ent_buf[i * 3 + 2] = s.ent_v[old][i]
        _sort_chunks(ent_buf, s.n_ent[old], 3)
        ent_block[perm[old]][0] = s.n_ent[old]
        for i in range(s.n_ent[old] * 3):
            ent_block[perm[old]][1 + i] = ent_buf[i]
        ent_w[perm[old]] = 1 + s.n_ent[old] * 3
    for old in range(R):
        for i in range(ent_w[old]):
            out[w] = ent_block[old][i]
            w += 1
    return w


cdef void _sort_chunks(unsigned char* buf, int count, int chunk) nogil:
    # insertion sort of fixed-size byte chunks, byte-lexicographic
    cdef int i, j
    cdef unsigned char tmp[3 + MAXR]
    for i in range(1, count):
        memcpy(tmp, buf + i * chunk, chunk)
        j = i - 1
        while j >= 0 and memcmp(buf + j * chunk, tmp, chunk) > 0:
            memcpy(buf + (j + 1) * chunk, buf + j * chunk, chunk)
            j -= 1
        memcpy(buf + (j + 1) * chunk, tmp, chunk)


cdef void _unpack(bytes data, int R, State* s):
    cdef const unsigned char* buf = data
    cdef int chunk = 3 + R
    cdef int i, j, w
    memset(s, 0, sizeof(State))
    w = 0
    s.n_events = buf[w]
    w += 1
    for i in range(s.n_events):
        s.ev_r[i] = buf[w]
        s.ev_n[i] = buf[w + 1]
        s.ev_v[i] = buf[w + 2]
        for j in range(R):
            s.ev_ctx[i][j] = buf[w + 3 + j]
        w += chunk
    for i in range(R):
        for j in range(R):
            s.vv[i][j] = buf[w]
            w += 1
    for i in range(R):
        s.n_ent[i] = buf[w]
        w += 1
        for j in range(s.n_ent[i]):
            s.ent_r[i][j] = buf[w]
            s.ent_n[i][j] = buf[w + 1]
            s.ent_v[i][j] = buf[w + 2]
            w += 3
