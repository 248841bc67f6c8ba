"""Pure-Python engine for the exhaustive divergence search.

Breadth-first search over deduplicated system states: the global event log
(each event keeps the writer's pre-write vector, which encodes causality),
every replica's version vector, and every replica's register entries. A state
diverges when some replica's register read differs from the resolved set of
causally maximal observed values.

Values and replicas are small integers here; the value order arrives as a
per-value bitmask of dominating values. `mvreg.witness` translates to and
from the real domain.

States are deduplicated by a canonical byte encoding, minimized over replica
relabelings (replicas start identical, so runs differing only by names are
the same run). Events observed by every replica as causally overwritten are
dropped from the log: they can never again be read or be maximal anywhere,
and their dots cannot sit in any entry set, so they cannot influence the
future of the run.

The compiled twin in `_search.pyx` implements the same algorithm with the
same canonical encoding and must visit exactly the same states in the same
order.
"""

from itertools import permutations

ENGINE = "python"

# Caps keep every component of a packed state in one byte.
MAX_REPLICAS = 4
MAX_VALUES = 16
MAX_STEPS = 20


def explore(
    num_replicas,
    dom_masks,
    max_steps,
    lazy_variant=False,
    symmetry=True,
    gc_events=True,
    progress=None,
):
    """Search all write/send schedules up to max_steps, probing every state.

    Returns (witness, visited, complete): witness is None or a tuple
    (actions, replica, impl_mask, oracle_mask, depth) where actions is a list
    of (kind, x, y) triples — ("w", replica, value) or ("s", src, dst) —
    visited counts deduplicated states, and complete is False when the search
    stopped at the first witness.
    """
    R = int(num_replicas)
    NV = len(dom_masks)
    if not 1 <= R <= MAX_REPLICAS:
        raise ValueError(f"replica count must be 1..{MAX_REPLICAS}")
    if not 1 <= NV <= MAX_VALUES:
        raise ValueError(f"domain size must be 1..{MAX_VALUES}")
    if not 0 <= max_steps <= MAX_STEPS:
        raise ValueError(f"max_steps must be 0..{MAX_STEPS}")
    dom = tuple(int(m) for m in dom_masks)
    action_count = R * NV + R * R
    perms = list(permutations(range(R))) if (symmetry and R > 1) else [tuple(range(R))]

    zero_vv = (0,) * R
    start = ((), (zero_vv,) * R, ((),) * R)
    visited = {_pack(start, perms[0], R)}
    frontier = [(start, b"")]

    for depth in range(1, max_steps + 1):
        next_frontier = []
        last = depth == max_steps
        for state, history in frontier:
            for code in range(action_count):
                ns = _apply(state, code, NV, dom, lazy_variant, gc_events, R)
                if ns is None:
                    continue
                best = None
                best_perm = None
                for perm in perms:
                    cand = _pack(ns, perm, R)
                    if best is None or cand < best:
                        best = cand
                        best_perm = perm
                if best in visited:
                    continue
                visited.add(best)
                nh = history + bytes((code,))
                if best_perm != perms[0]:
                    nh = _permute_history(nh, best_perm, R, NV)
                div = _check(ns, dom, lazy_variant, R)
                if div is not None:
                    replica, impl, oracle = div
                    if best_perm != perms[0]:
                        replica = best_perm[replica]
                    actions = decode_actions(nh, R, NV)
                    return (actions, replica, impl, oracle, depth), len(visited), False
                if not last:
                    next_frontier.append((_canonical_state(ns, best_perm, R), nh))
        frontier = next_frontier
        if progress is not None:
            progress(depth, len(visited), len(frontier))
        if not frontier:
            break
    return None, len(visited), True


def decode_actions(history, R, NV):
    """Expand packed action codes to ("w", replica, value) / ("s", src, dst)."""
    actions = []
    for code in history:
        if code < R * NV:
            actions.append(("w", code // NV, code % NV))
        else:
            code -= R * NV
            actions.append(("s", code // R, code % R))
    return actions


def _apply(state, code, NV, dom, lazy, gc_events, R):
    events, vvs, entries = state
    if code < R * NV:
        p, v = code // NV, code % NV
        vvp = vvs[p]
        n = vvp[p] + 1
        new_events = tuple(sorted(events + ((p, n, v, vvp),)))
        new_vvs = vvs[:p] + (vvp[:p] + (n,) + vvp[p + 1:],) + vvs[p + 1:]
        new_entries = entries[:p] + (((p, n, v),),) + entries[p + 1:]
    else:
        code -= R * NV
        a, b = code // R, code % R
        if a == b:
            return None
        sa, sb = entries[a], entries[b]
        ca, cb = vvs[a], vvs[b]
        sa_set = set(sa)
        sb_set = set(sb)
        kept = {d for d in sb if d in sa_set or d[1] > ca[d[0]]}
        kept |= {d for d in sa if d in sb_set or d[1] > cb[d[0]]}
        if not lazy:
            present = 0
            for item in kept:
                present |= 1 << item[2]
            kept = {item for item in kept if not (dom[item[2]] & present)}
        new_vv = tuple(x if x >= y else y for x, y in zip(cb, ca))
        new_events = events
        new_vvs = vvs[:b] + (new_vv,) + vvs[b + 1:]
        new_entries = entries[:b] + (tuple(sorted(kept)),) + entries[b + 1:]
    if gc_events and new_events:
        new_events = _collect_dead_events(new_events, new_vvs, R)
    return new_events, new_vvs, new_entries


def _collect_dead_events(events, vvs, R):
    keep = []
    for ev in events:
        r, n, _, _ = ev
        for vvp in vvs:
            for r2, n2, _, c2 in events:
                if n2 <= vvp[r2] and c2[r] >= n:
                    break
            else:
                keep.append(ev)
                break
    if len(keep) == len(events):
        return events
    return tuple(keep)


def _check(state, dom, lazy, R):
    events, vvs, entries = state
    for p in range(R):
        impl = 0
        for item in entries[p]:
            impl |= 1 << item[2]
        if lazy:
            impl = _resolve_mask(impl, dom)
        vvp = vvs[p]
        fmvr = 0
        for r, n, v, _ in events:
            if n > vvp[r]:
                continue
            for r2, n2, _, c2 in events:
                if n2 <= vvp[r2] and c2[r] >= n:
                    break
            else:
                fmvr |= 1 << v
        oracle = _resolve_mask(fmvr, dom)
        if impl != oracle:
            return p, impl, oracle
    return None


def _resolve_mask(mask, dom):
    out = 0
    rest = mask
    v = 0
    while rest:
        if rest & 1 and not (dom[v] & mask):
            out |= 1 << v
        rest >>= 1
        v += 1
    return out


def _pack(state, perm, R):
    """Canonical bytes for the state under one replica relabeling."""
    events, vvs, entries = state
    buf = bytearray()
    buf.append(len(events))
    chunks = []
    for r, n, v, ctx in events:
        chunk = bytearray((perm[r], n, v))
        chunk += _permute_vv_bytes(ctx, perm, R)
        chunks.append(bytes(chunk))
    for chunk in sorted(chunks):
        buf += chunk
    rows = [b""] * R
    ents = [b""] * R
    for old in range(R):
        rows[perm[old]] = _permute_vv_bytes(vvs[old], perm, R)
        items = sorted(bytes((perm[r], n, v)) for r, n, v in entries[old])
        ents[perm[old]] = bytes((len(items),)) + b"".join(items)
    for row in rows:
        buf += row
    for ent in ents:
        buf += ent
    return bytes(buf)


def _canonical_state(state, perm, R):
    """The structured state relabeled by perm (identity returns it unchanged)."""
    if perm == tuple(range(R)):
        return state
    events, vvs, entries = state
    new_events = tuple(
        sorted((perm[r], n, v, _permute_vv(ctx, perm, R)) for r, n, v, ctx in events)
    )
    new_vvs = [None] * R
    new_entries = [None] * R
    for old in range(R):
        new_vvs[perm[old]] = _permute_vv(vvs[old], perm, R)
        new_entries[perm[old]] = tuple(sorted((perm[r], n, v) for r, n, v in entries[old]))
    return new_events, tuple(new_vvs), tuple(new_entries)


def _permute_vv(vv, perm, R):
    out = [0] * R
    for old in range(R):
        out[perm[old]] = vv[old]
    return tuple(out)


def _permute_vv_bytes(vv, perm, R):
    out = bytearray(R)
    for old in range(R):
        out[perm[old]] = vv[old]
    return bytes(out)


def _permute_history(history, perm, R, NV):
    out = bytearray()
    for code in history:
        if code < R * NV:
            out.append(perm[code // NV] * NV + code % NV)
        else:
            code -= R * NV
            out.append(R * NV + perm[code // R] * R + perm[code % R])
    return bytes(out)
