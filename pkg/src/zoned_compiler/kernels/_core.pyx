# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: transition batching/cost and the annealing sweep.

Mirrors ``_fallback.py`` operation for operation so that both backends give
bit-identical results for the same inputs.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, exp, INFINITY
from libc.stdlib cimport malloc, free

from ._fallback import RoutingError

ctypedef long long i64

cdef double STAGE_MOVE_P = 0.7

cnp.import_array()


cdef struct Work:
    i64 n
    i64 n_sites
    i64 *occ_src
    i64 *occ_dst
    char *parked
    i64 *mq
    i64 *ms
    i64 *me
    i64 *pa
    i64 *pb
    i64 *move_of
    i64 *state
    i64 *path
    i64 *order
    i64 *batch
    i64 *members
    double *sx
    double *sy
    double *ex
    double *ey
    double *worst


cdef int work_init(Work *w, i64 n, i64 n_sites) except -1:
    cdef i64 m = 2 * n + 2
    w.n = n
    w.n_sites = n_sites
    w.occ_src = <i64 *> malloc(n_sites * sizeof(i64))
    w.occ_dst = <i64 *> malloc(n_sites * sizeof(i64))
    w.parked = <char *> malloc(n_sites * sizeof(char))
    w.mq = <i64 *> malloc(m * sizeof(i64))
    w.ms = <i64 *> malloc(m * sizeof(i64))
    w.me = <i64 *> malloc(m * sizeof(i64))
    w.pa = <i64 *> malloc(m * sizeof(i64))
    w.pb = <i64 *> malloc(m * sizeof(i64))
    w.move_of = <i64 *> malloc((n + 1) * sizeof(i64))
    w.state = <i64 *> malloc(m * sizeof(i64))
    w.path = <i64 *> malloc(m * sizeof(i64))
    w.order = <i64 *> malloc(m * sizeof(i64))
    w.batch = <i64 *> malloc(m * sizeof(i64))
    w.members = <i64 *> malloc(m * sizeof(i64))
    w.sx = <double *> malloc(m * sizeof(double))
    w.sy = <double *> malloc(m * sizeof(double))
    w.ex = <double *> malloc(m * sizeof(double))
    w.ey = <double *> malloc(m * sizeof(double))
    w.worst = <double *> malloc(m * sizeof(double))
    if (w.occ_src == NULL or w.occ_dst == NULL or w.parked == NULL or w.mq == NULL
            or w.ms == NULL or w.me == NULL or w.pa == NULL or w.pb == NULL
            or w.move_of == NULL or w.state == NULL or w.path == NULL or w.order == NULL
            or w.batch == NULL or w.members == NULL or w.sx == NULL or w.sy == NULL
            or w.ex == NULL or w.ey == NULL or w.worst == NULL):
        work_free(w)
        raise MemoryError()
    return 0


cdef void work_free(Work *w) noexcept:
    free(w.occ_src); free(w.occ_dst); free(w.parked)
    free(w.mq); free(w.ms); free(w.me); free(w.pa); free(w.pb)
    free(w.move_of); free(w.state); free(w.path); free(w.order)
    free(w.batch); free(w.members)
    free(w.sx); free(w.sy); free(w.ex); free(w.ey); free(w.worst)
    w.occ_src = NULL


cdef inline int sgn(double v) noexcept nogil:
    return (v > 0) - (v < 0)


cdef inline bint key_less(Work *w, i64 i, i64 j) noexcept nogil:
    # (sy, sx, qubit, index)
    if w.sy[i] != w.sy[j]:
        return w.sy[i] < w.sy[j]
    if w.sx[i] != w.sx[j]:
        return w.sx[i] < w.sx[j]
    if w.mq[i] != w.mq[j]:
        return w.mq[i] < w.mq[j]
    return i < j


cdef i64 plan(Work *w, const i64 *src, const i64 *dst, const double *xs, const double *ys,
              i64 *n_moves) noexcept nogil:
    """Fill the workspace move list and batches; returns n_batches or -1 if unroutable."""
    cdef i64 n = w.n, n_sites = w.n_sites
    cdef i64 q, s, i, k, m0, m, c, p, best, plen, idx, b, done, nmem, t, jj
    cdef double d, best_d, sx0, sy0
    cdef bint ok
    for s in range(n_sites):
        w.occ_src[s] = -1
        w.occ_dst[s] = -1
        w.parked[s] = 0
    for q in range(n):
        w.occ_src[src[q]] = q
        w.occ_dst[dst[q]] = q
    m = 0
    for q in range(n):
        w.move_of[q] = -1
        if src[q] != dst[q]:
            w.move_of[q] = m
            w.mq[m] = q
            w.ms[m] = src[q]
            w.me[m] = dst[q]
            w.pa[m] = -1
            w.pb[m] = -1
            m += 1
    m0 = m
    for i in range(m0):
        p = w.occ_src[w.me[i]]
        if p >= 0:
            w.pa[i] = w.move_of[p]
        w.state[i] = 0

    for i in range(m0):
        if w.state[i] != 0:
            continue
        plen = 0
        k = i
        while k != -1 and w.state[k] == 0:
            w.state[k] = 1
            w.path[plen] = k
            plen += 1
            k = w.pa[k]
        if k != -1 and w.state[k] == 1:
            idx = 0
            while w.path[idx] != k:
                idx += 1
            c = w.path[idx]
            for t in range(idx, plen):
                if w.path[t] < c:
                    c = w.path[t]
            sx0 = xs[w.ms[c]]
            sy0 = ys[w.ms[c]]
            best = -1
            best_d = INFINITY
            for s in range(n_sites):
                if w.occ_src[s] < 0 and w.occ_dst[s] < 0 and w.parked[s] == 0:
                    d = (xs[s] - sx0) * (xs[s] - sx0) + (ys[s] - sy0) * (ys[s] - sy0)
                    if d < best_d:
                        best = s
                        best_d = d
            if best < 0:
                return -1
            w.parked[best] = 1
            w.mq[m] = w.mq[c]
            w.ms[m] = best
            w.me[m] = w.me[c]
            w.pa[m] = c
            w.pb[m] = w.pa[c]
            w.state[m] = 2
            m += 1
            w.me[c] = best
            w.pa[c] = -1
        for t in range(plen):
            w.state[w.path[t]] = 2

    for i in range(m):
        w.sx[i] = xs[w.ms[i]]
        w.sy[i] = ys[w.ms[i]]
        w.ex[i] = xs[w.me[i]]
        w.ey[i] = ys[w.me[i]]
        w.batch[i] = -1
    # insertion sort by key
    for i in range(m):
        k = i
        w.order[i] = i
        while k > 0 and key_less(w, w.order[k], w.order[k - 1]):
            t = w.order[k]
            w.order[k] = w.order[k - 1]
            w.order[k - 1] = t
            k -= 1

    b = 0
    done = 0
    while done < m:
        nmem = 0
        for t in range(m):
            i = w.order[t]
            if w.batch[i] != -1:
                continue
            if w.pa[i] != -1 and (w.batch[w.pa[i]] == -1 or w.batch[w.pa[i]] == b):
                continue
            if w.pb[i] != -1 and (w.batch[w.pb[i]] == -1 or w.batch[w.pb[i]] == b):
                continue
            ok = True
            for jj in range(nmem):
                k = w.members[jj]
                if (sgn(w.sx[i] - w.sx[k]) != sgn(w.ex[i] - w.ex[k])
                        or sgn(w.sy[i] - w.sy[k]) != sgn(w.ey[i] - w.ey[k])):
                    ok = False
                    break
            if ok:
                w.batch[i] = b
                w.members[nmem] = i
                nmem += 1
                done += 1
        b += 1
    n_moves[0] = m
    return b


cdef i64 cost(Work *w, const i64 *src, const i64 *dst, const double *xs, const double *ys,
              double t0, double d0, double *move_time, double *batch_time) noexcept nogil:
    cdef i64 m = 0, i, nb
    cdef double d, t, total = 0.0, bt = 0.0
    nb = plan(w, src, dst, xs, ys, &m)
    if nb < 0:
        return -1
    for i in range(nb):
        w.worst[i] = 0.0
    for i in range(m):
        d = sqrt((xs[w.me[i]] - xs[w.ms[i]]) * (xs[w.me[i]] - xs[w.ms[i]])
                 + (ys[w.me[i]] - ys[w.ms[i]]) * (ys[w.me[i]] - ys[w.ms[i]]))
        t = t0 * sqrt(d / d0)
        total += t
        if t > w.worst[w.batch[i]]:
            w.worst[w.batch[i]] = t
    for i in range(nb):
        bt += w.worst[i]
    move_time[0] = total
    batch_time[0] = bt
    return nb


def route_transition(src, dst, xs, ys):
    """Arrays ``(qubit, start_site, end_site, batch)`` and the batch count."""
    cdef i64[::1] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef i64[::1] e = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Work w
    cdef i64 m = 0, nb, i
    work_init(&w, s.shape[0], x.shape[0])
    try:
        nb = plan(&w, &s[0] if s.shape[0] else NULL, &e[0] if e.shape[0] else NULL,
                  &x[0], &y[0], &m)
        if nb < 0:
            raise RoutingError("no free site to break a move cycle")
        mq = np.empty(m, dtype=np.int64)
        ms = np.empty(m, dtype=np.int64)
        me = np.empty(m, dtype=np.int64)
        bt = np.empty(m, dtype=np.int64)
        for i in range(m):
            mq[i] = w.mq[i]
            ms[i] = w.ms[i]
            me[i] = w.me[i]
            bt[i] = w.batch[i]
        return mq, ms, me, bt, int(nb)
    finally:
        work_free(&w)


def transition_cost(src, dst, xs, ys, double t0, double d0):
    """``(movement_time_sum, n_batches, sum_of_batch_times)`` for one transition."""
    cdef i64[::1] s = np.ascontiguousarray(src, dtype=np.int64)
    cdef i64[::1] e = np.ascontiguousarray(dst, dtype=np.int64)
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef Work w
    cdef double mt = 0.0, bt = 0.0
    cdef i64 nb
    work_init(&w, s.shape[0], x.shape[0])
    try:
        nb = cost(&w, &s[0] if s.shape[0] else NULL, &e[0] if e.shape[0] else NULL,
                  &x[0], &y[0], t0, d0, &mt, &bt)
        if nb < 0:
            raise RoutingError("no free site to break a move cycle")
        return mt, int(nb), bt
    finally:
        work_free(&w)


# --- annealing sweep -------------------------------------------------------

cdef struct Change:
    i64 p
    i64 q
    i64 old
    i64 new


cdef i64 propose(i64[:, ::1] sites, i64[:, ::1] occ, const i64[::1] kinds, const i64[::1] gstart,
                 const i64[::1] ga, const i64[::1] gb, i64 ns, i64 n_pairs, i64 j,
                 double u1, double u2, Change *ch) noexcept nogil:
    cdef i64 P = sites.shape[0], n = sites.shape[1]
    cdef i64 nc = 0, kind = kinds[j], g0, ng, g, a, b, sa, sb, B, A, slot, c, k, base
    cdef i64 cnt, pick, q, qq, new, old, i, r, n_slots
    if kind == 1:
        g0 = gstart[j]
        ng = gstart[j + 1] - g0
        if ng == 0:
            return 0
        g = <i64> (u1 * ng)
        if g > ng - 1:
            g = ng - 1
        g = g0 + g
        a = ga[g]
        b = gb[g]
        sa = sites[j, a]
        sb = sites[j, b]
        if u2 < STAGE_MOVE_P:
            B = <i64> (u2 / STAGE_MOVE_P * n_pairs)
            if B > n_pairs - 1:
                B = n_pairs - 1
            A = (sa - ns) // 2
            if B == A:
                return 0
            ch[nc].p = j; ch[nc].q = a; ch[nc].old = sa; ch[nc].new = ns + 2 * B + (sa - ns) % 2
            nc += 1
            ch[nc].p = j; ch[nc].q = b; ch[nc].old = sb; ch[nc].new = ns + 2 * B + (sb - ns) % 2
            nc += 1
            for slot in range(2):
                c = occ[j, ns + 2 * B + slot]
                if c >= 0:
                    ch[nc].p = j; ch[nc].q = c; ch[nc].old = ns + 2 * B + slot; ch[nc].new = ns + 2 * A + slot
                    nc += 1
        else:
            ch[nc].p = j; ch[nc].q = a; ch[nc].old = sa; ch[nc].new = sb
            nc += 1
            ch[nc].p = j; ch[nc].q = b; ch[nc].old = sb; ch[nc].new = sa
            nc += 1
        if j + 1 < P and kinds[j + 1] == 2:
            base = nc
            for k in range(base):
                if sites[j + 1, ch[k].q] == ch[k].old:
                    ch[nc].p = j + 1; ch[nc].q = ch[k].q; ch[nc].old = ch[k].old; ch[nc].new = ch[k].new
                    nc += 1
    elif kind == 2:
        if u1 < 0.5:
            cnt = 0
            for qq in range(n):
                if sites[j, qq] < ns and sites[j - 1, qq] >= ns:
                    cnt += 1
            if cnt == 0:
                return 0
            pick = <i64> (u1 / 0.5 * cnt)
            if pick > cnt - 1:
                pick = cnt - 1
            q = -1
            for qq in range(n):
                if sites[j, qq] < ns and sites[j - 1, qq] >= ns:
                    if pick == 0:
                        q = qq
                        break
                    pick -= 1
            new = <i64> (u2 * ns)
            if new > ns - 1:
                new = ns - 1
            old = sites[j, q]
            if new == old:
                return 0
            i = j
            while i < P and sites[i, q] == old:
                ch[nc].p = i; ch[nc].q = q; ch[nc].old = old; ch[nc].new = new
                nc += 1
                i += 1
        else:
            cnt = 0
            for qq in range(n):
                if sites[j, qq] >= ns:
                    cnt += 1
            if cnt == 0:
                return 0
            pick = <i64> ((u1 - 0.5) / 0.5 * cnt)
            if pick > cnt - 1:
                pick = cnt - 1
            q = -1
            for qq in range(n):
                if sites[j, qq] >= ns:
                    if pick == 0:
                        q = qq
                        break
                    pick -= 1
            n_slots = 2 * n_pairs
            new = <i64> (u2 * n_slots)
            if new > n_slots - 1:
                new = n_slots - 1
            new = ns + new
            old = sites[j, q]
            if new == old:
                return 0
            ch[nc].p = j; ch[nc].q = q; ch[nc].old = old; ch[nc].new = new
            nc += 1
            r = occ[j, new]
            if r >= 0:
                ch[nc].p = j; ch[nc].q = r; ch[nc].old = new; ch[nc].new = old
                nc += 1
    return nc


cdef bint apply_changes(i64[:, ::1] sites, i64[:, ::1] occ, Change *ch, i64 nc, bint forward) noexcept nogil:
    cdef i64 k, k2, p, q, old, new
    for k in range(nc):
        p = ch[k].p; q = ch[k].q
        old = ch[k].old if forward else ch[k].new
        if occ[p, old] == q:
            occ[p, old] = -1
    for k in range(nc):
        p = ch[k].p; q = ch[k].q
        old = ch[k].old if forward else ch[k].new
        new = ch[k].new if forward else ch[k].old
        if occ[p, new] != -1:
            for k2 in range(k):
                occ[ch[k2].p, ch[k2].new if forward else ch[k2].old] = -1
                sites[ch[k2].p, ch[k2].q] = ch[k2].old if forward else ch[k2].new
            for k2 in range(nc):
                occ[ch[k2].p, ch[k2].old if forward else ch[k2].new] = ch[k2].q
            return False
        occ[p, new] = q
        sites[p, q] = new
    return True


def anneal_sweep(state, double temperature, uniforms, double lam, long long slack, double t0, double d0,
                 totals, best_sites, best, log_delta, log_prob, log_acc):
    """Run ``len(uniforms)`` annealing iterations at one temperature (see ``_fallback``)."""
    cdef i64[:, ::1] sites = state[0]
    cdef i64[:, ::1] occ = state[1]
    cdef const i64[::1] kinds = state[2]
    cdef const i64[::1] gstart = state[3]
    cdef const i64[::1] ga = state[4]
    cdef const i64[::1] gb = state[5]
    cdef const double[::1] xs = state[6]
    cdef const double[::1] ys = state[7]
    cdef i64 ns = state[8]
    cdef i64 n_pairs = state[9]
    cdef double[::1] tcost = state[10]
    cdef i64[::1] tbatch = state[11]
    cdef const double[:, ::1] u = uniforms
    cdef double[::1] tot = totals
    cdef i64[:, ::1] bsites = best_sites
    cdef double[::1] bst = best
    cdef double[::1] ldelta = log_delta
    cdef double[::1] lprob = log_prob
    cdef signed char[::1] lacc = log_acc

    cdef i64 P = sites.shape[0], n = sites.shape[1], n_it = u.shape[0]
    cdef i64 it, j, nc, k, t, ntouched, accepted = 0, logged = 0, nb, p, qq
    cdef double move_total = tot[0], new_move, cur, new, delta, prob, mt, bt
    cdef i64 batch_total = <i64> tot[1], new_batch
    cdef double best_cost = bst[0]
    cdef bint take
    cdef Work w
    cdef Change *ch = <Change *> malloc((6 * n + 16 + P) * sizeof(Change))
    cdef i64 *touched = <i64 *> malloc((2 * P + 2) * sizeof(i64))
    cdef char *mark = <char *> malloc((P + 1) * sizeof(char))
    cdef double *ncost = <double *> malloc((P + 1) * sizeof(double))
    cdef i64 *nbat = <i64 *> malloc((P + 1) * sizeof(i64))
    if ch == NULL or touched == NULL or mark == NULL or ncost == NULL or nbat == NULL:
        free(ch); free(touched); free(mark); free(ncost); free(nbat)
        raise MemoryError()
    work_init(&w, n, xs.shape[0])
    try:
        with nogil:
            for it in range(n_it):
                if P < 2:
                    break
                j = 1 + <i64> (u[it, 0] * (P - 1))
                if j > P - 1:
                    j = P - 1
                nc = propose(sites, occ, kinds, gstart, ga, gb, ns, n_pairs, j, u[it, 1], u[it, 2], ch)
                if nc == 0:
                    continue
                if not apply_changes(sites, occ, ch, nc, True):
                    continue
                for t in range(P):
                    mark[t] = 0
                for k in range(nc):
                    p = ch[k].p
                    if p - 1 >= 0 and p - 1 < P - 1:
                        mark[p - 1] = 1
                    if p < P - 1:
                        mark[p] = 1
                ntouched = 0
                for t in range(P - 1):
                    if mark[t]:
                        touched[ntouched] = t
                        ntouched += 1
                new_move = move_total
                new_batch = batch_total
                nb = 0
                for k in range(ntouched):
                    t = touched[k]
                    nb = cost(&w, &sites[t, 0], &sites[t + 1, 0], &xs[0], &ys[0], t0, d0, &mt, &bt)
                    if nb < 0:
                        break
                    ncost[k] = mt
                    nbat[k] = nb
                    new_move += mt - tcost[t]
                    new_batch += nb - tbatch[t]
                if nb < 0:
                    apply_changes(sites, occ, ch, nc, False)
                    continue
                cur = move_total + lam * batch_total
                new = new_move + lam * new_batch
                if new < cur and new_batch <= batch_total:
                    take = True
                elif new_batch <= batch_total + slack:
                    delta = new - cur
                    if delta > 0:
                        prob = exp(-delta / temperature)
                    else:
                        prob = 1.0
                    take = u[it, 3] < prob
                    ldelta[logged] = delta
                    lprob[logged] = prob
                    lacc[logged] = 1 if take else 0
                    logged += 1
                else:
                    take = False
                if take:
                    accepted += 1
                    for k in range(ntouched):
                        t = touched[k]
                        tcost[t] = ncost[k]
                        tbatch[t] = nbat[k]
                    move_total = new_move
                    batch_total = new_batch
                    if new < best_cost:
                        best_cost = new
                        for p in range(P):
                            for qq in range(n):
                                bsites[p, qq] = sites[p, qq]
                else:
                    apply_changes(sites, occ, ch, nc, False)
    finally:
        work_free(&w)
        free(ch); free(touched); free(mark); free(ncost); free(nbat)
    tot[0] = move_total
    tot[1] = batch_total
    bst[0] = best_cost
    return accepted, logged
