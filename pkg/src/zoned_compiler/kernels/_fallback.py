"""Pure-Python kernels. Semantics here are normative; ``_core.pyx`` mirrors them."""

from __future__ import annotations

import math

import numpy as np

STAGE_MOVE_P = 0.7  # share of stage-point proposals that relocate/swap a gate site


class RoutingError(RuntimeError):
    pass


def _ints(a) -> list[int]:
    return np.asarray(a, dtype=np.int64).tolist()


def _floats(a) -> list[float]:
    return np.asarray(a, dtype=np.float64).tolist()


def _sign(v: float) -> int:
    return (v > 0) - (v < 0)


def _compatible(sx, ex, sy, ey, i, j) -> bool:
    return _sign(sx[i] - sx[j]) == _sign(ex[i] - ex[j]) and _sign(sy[i] - sy[j]) == _sign(ey[i] - ey[j])


def _plan(src, dst, xs, ys):
    """Moves for one transition plus their batch indices.

    Returns ``(qubit, start, end, batch, n_batches)`` as Python lists.
    """
    n = len(src)
    n_sites = len(xs)
    occ_src = [-1] * n_sites
    occ_dst = [-1] * n_sites
    for q in range(n):
        occ_src[src[q]] = q
        occ_dst[dst[q]] = q

    mq: list[int] = []
    ms: list[int] = []
    me: list[int] = []
    pa: list[int] = []
    pb: list[int] = []
    move_of = [-1] * n
    for q in range(n):
        if src[q] != dst[q]:
            move_of[q] = len(mq)
            mq.append(q)
            ms.append(int(src[q]))
            me.append(int(dst[q]))
            pa.append(-1)
            pb.append(-1)
    m0 = len(mq)
    for i in range(m0):
        p = occ_src[me[i]]
        if p >= 0:
            pa[i] = move_of[p]

    # each move has one vacating predecessor and at most one dependant, so
    # components are chains or simple cycles; break cycles through a free site
    state = [0] * m0
    parked = [False] * n_sites
    for i in range(m0):
        if state[i]:
            continue
        path = []
        k = i
        while k != -1 and state[k] == 0:
            state[k] = 1
            path.append(k)
            k = pa[k]
        if k != -1 and state[k] == 1:
            cyc = path[path.index(k):]
            c = min(cyc)
            q = mq[c]
            sx0, sy0 = xs[ms[c]], ys[ms[c]]
            best, best_d = -1, math.inf
            for s in range(n_sites):
                if occ_src[s] < 0 and occ_dst[s] < 0 and not parked[s]:
                    dx, dy = xs[s] - sx0, ys[s] - sy0
                    d = dx * dx + dy * dy
                    if d < best_d:
                        best, best_d = s, d
            if best < 0:
                raise RoutingError(f"no free site to break a move cycle through q{q}")
            parked[best] = True
            mq.append(q)
            ms.append(best)
            me.append(me[c])
            pa.append(c)
            pb.append(pa[c])
            me[c] = best
            pa[c] = -1
        for k in path:
            state[k] = 2

    m = len(mq)
    sx = [xs[s] for s in ms]
    sy = [ys[s] for s in ms]
    ex = [xs[e] for e in me]
    ey = [ys[e] for e in me]
    order = sorted(range(m), key=lambda i: (sy[i], sx[i], mq[i], i))
    batch = [-1] * m
    b = 0
    done = 0
    while done < m:
        members: list[int] = []
        for i in order:
            if batch[i] != -1:
                continue
            if pa[i] != -1 and (batch[pa[i]] == -1 or batch[pa[i]] == b):
                continue
            if pb[i] != -1 and (batch[pb[i]] == -1 or batch[pb[i]] == b):
                continue
            if all(_compatible(sx, ex, sy, ey, i, j) for j in members):
                batch[i] = b
                members.append(i)
                done += 1
        b += 1
    return mq, ms, me, batch, b


def route_transition(src, dst, xs, ys):
    """Arrays ``(qubit, start_site, end_site, batch)`` and the batch count."""
    mq, ms, me, batch, nb = _plan(_ints(src), _ints(dst), _floats(xs), _floats(ys))
    return (
        np.array(mq, dtype=np.int64),
        np.array(ms, dtype=np.int64),
        np.array(me, dtype=np.int64),
        np.array(batch, dtype=np.int64),
        nb,
    )


def _cost(src, dst, xs, ys, t0, d0):
    mq, ms, me, batch, nb = _plan(src, dst, xs, ys)
    total = 0.0
    worst = [0.0] * nb
    for i in range(len(mq)):
        dx, dy = xs[me[i]] - xs[ms[i]], ys[me[i]] - ys[ms[i]]
        d = math.sqrt(dx * dx + dy * dy)
        t = t0 * math.sqrt(d / d0)
        total += t
        if t > worst[batch[i]]:
            worst[batch[i]] = t
    return total, nb, sum(worst)


def transition_cost(src, dst, xs, ys, t0, d0):
    """``(movement_time_sum, n_batches, sum_of_batch_times)`` for one transition."""
    return _cost(_ints(src), _ints(dst), _floats(xs), _floats(ys), float(t0), float(d0))


class _Sweep:
    """Mutable SA state shared by the sweep helpers (lists for speed)."""

    def __init__(self, sites, occ, kinds, gstart, ga, gb, xs, ys, n_storage, n_pairs, tcost, tbatch):
        self.sites = [list(map(int, row)) for row in sites]
        self.occ = [list(map(int, row)) for row in occ]
        self.kinds = list(map(int, kinds))
        self.gstart = list(map(int, gstart))
        self.ga = list(map(int, ga))
        self.gb = list(map(int, gb))
        self.xs = list(map(float, xs))
        self.ys = list(map(float, ys))
        self.n_storage = int(n_storage)
        self.n_pairs = int(n_pairs)
        self.tcost = list(map(float, tcost))
        self.tbatch = list(map(int, tbatch))


def _propose(st: _Sweep, j: int, u1: float, u2: float) -> list[tuple[int, int, int, int]]:
    """Return a change list ``[(point, qubit, old, new)]``; empty means no proposal."""
    P = len(st.sites)
    n = len(st.sites[0])
    row = st.sites[j]
    changes: list[tuple[int, int, int, int]] = []
    kind = st.kinds[j]
    ns = st.n_storage
    if kind == 1:
        g0, g1 = st.gstart[j], st.gstart[j + 1]
        ng = g1 - g0
        if ng == 0:
            return changes
        g = g0 + min(int(u1 * ng), ng - 1)
        a, b = st.ga[g], st.gb[g]
        sa, sb = row[a], row[b]
        if u2 < STAGE_MOVE_P:
            B = min(int(u2 / STAGE_MOVE_P * st.n_pairs), st.n_pairs - 1)
            A = (sa - ns) // 2
            if B == A:
                return changes
            na = ns + 2 * B + (sa - ns) % 2
            nb = ns + 2 * B + (sb - ns) % 2
            changes.append((j, a, sa, na))
            changes.append((j, b, sb, nb))
            for slot in (0, 1):
                c = st.occ[j][ns + 2 * B + slot]
                if c >= 0:
                    changes.append((j, c, ns + 2 * B + slot, ns + 2 * A + slot))
        else:
            changes.append((j, a, sa, sb))
            changes.append((j, b, sb, sa))
        if j + 1 < P and st.kinds[j + 1] == 2:
            nxt = st.sites[j + 1]
            for (_, q, old, new) in list(changes):
                if nxt[q] == old:
                    changes.append((j + 1, q, old, new))
    elif kind == 2:
        if u1 < 0.5:
            prev = st.sites[j - 1]
            cnt = sum(1 for q in range(n) if row[q] < ns and prev[q] >= ns)
            if cnt == 0:
                return changes
            pick = min(int(u1 / 0.5 * cnt), cnt - 1)
            q = -1
            for qq in range(n):
                if row[qq] < ns and prev[qq] >= ns:
                    if pick == 0:
                        q = qq
                        break
                    pick -= 1
            new = min(int(u2 * ns), ns - 1)
            old = row[q]
            if new == old:
                return changes
            i = j
            while i < P and st.sites[i][q] == old:
                changes.append((i, q, old, new))
                i += 1
        else:
            cnt = sum(1 for q in range(n) if row[q] >= ns)
            if cnt == 0:
                return changes
            pick = min(int((u1 - 0.5) / 0.5 * cnt), cnt - 1)
            q = -1
            for qq in range(n):
                if row[qq] >= ns:
                    if pick == 0:
                        q = qq
                        break
                    pick -= 1
            n_slots = 2 * st.n_pairs
            new = ns + min(int(u2 * n_slots), n_slots - 1)
            old = row[q]
            if new == old:
                return changes
            changes.append((j, q, old, new))
            r = st.occ[j][new]
            if r >= 0:
                changes.append((j, r, new, old))
    return changes


def _apply(st: _Sweep, changes, forward: bool) -> bool:
    """Apply (or undo) a change list. Returns False, leaving state untouched, on a collision."""
    if not forward:
        changes = [(p, q, new, old) for (p, q, old, new) in changes]
    for p, q, old, new in changes:
        if st.occ[p][old] == q:
            st.occ[p][old] = -1
    for k, (p, q, old, new) in enumerate(changes):
        if st.occ[p][new] != -1:
            # collision: roll back what was written so far
            for p2, q2, old2, new2 in changes[:k]:
                st.occ[p2][new2] = -1
                st.sites[p2][q2] = old2
            for p2, q2, old2, new2 in changes:
                st.occ[p2][old2] = q2
            return False
        st.occ[p][new] = q
        st.sites[p][q] = new
    return True


def anneal_sweep(state, temperature, uniforms, lam, slack, t0, d0, totals, best_sites, best, log_delta, log_prob, log_acc):
    """Run ``len(uniforms)`` annealing iterations at one temperature.

    ``state`` is the tuple ``(sites, occ, kinds, gstart, ga, gb, xs, ys,
    n_storage, n_pairs, tcost, tbatch)``; array members are updated in place,
    as are ``totals = [move_time, batches]``, ``best_sites`` and ``best[0]``.
    Metropolis decisions are appended to the ``log_*`` arrays.  Returns
    ``(n_accepted, n_logged)``.
    """
    sites, occ, kinds, gstart, ga, gb, xs, ys, n_storage, n_pairs, tcost, tbatch = state
    st = _Sweep(sites, occ, kinds, gstart, ga, gb, xs, ys, n_storage, n_pairs, tcost, tbatch)
    P = len(st.sites)
    move_total, batch_total = float(totals[0]), int(totals[1])
    best_cost = float(best[0])
    accepted = 0
    logged = 0
    for it in range(len(uniforms)):
        u0, u1, u2, u3 = (float(v) for v in uniforms[it])
        if P < 2:
            break
        j = 1 + min(int(u0 * (P - 1)), P - 2)
        changes = _propose(st, j, u1, u2)
        if not changes or not _apply(st, changes, True):
            continue
        touched = sorted({t for (p, _, _, _) in changes for t in (p - 1, p) if 0 <= t < P - 1})
        new_cost = []
        new_move, new_batch = move_total, batch_total
        try:
            for t in touched:
                c, nb, _ = _cost(st.sites[t], st.sites[t + 1], st.xs, st.ys, t0, d0)
                new_cost.append((c, nb))
                new_move += c - st.tcost[t]
                new_batch += nb - st.tbatch[t]
        except RoutingError:
            # unroutable proposal: treat as rejected
            _apply(st, changes, False)
            continue
        cur = move_total + lam * batch_total
        new = new_move + lam * new_batch
        if new < cur and new_batch <= batch_total:
            take = True
        elif new_batch <= batch_total + slack:
            delta = new - cur
            prob = math.exp(-delta / temperature) if delta > 0 else 1.0
            take = u3 < prob
            log_delta[logged] = delta
            log_prob[logged] = prob
            log_acc[logged] = 1 if take else 0
            logged += 1
        else:
            take = False
        if take:
            accepted += 1
            for t, (c, nb) in zip(touched, new_cost):
                st.tcost[t] = c
                st.tbatch[t] = nb
            move_total, batch_total = new_move, new_batch
            if new < best_cost:
                best_cost = new
                for p in range(P):
                    best_sites[p][:] = st.sites[p]
        else:
            _apply(st, changes, False)

    sites[:] = st.sites
    occ[:] = st.occ
    tcost[:] = st.tcost
    tbatch[:] = st.tbatch
    totals[0] = move_total
    totals[1] = batch_total
    best[0] = best_cost
    return accepted, logged
