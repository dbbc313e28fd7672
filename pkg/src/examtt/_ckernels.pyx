# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors ``_pykernels`` draw for draw."""

import numpy as np

from libc.stdint cimport int32_t, int64_t, uint64_t

cdef int64_t[6] PROX = [0, 16, 8, 4, 2, 1]

LLH4_REINSERT = 0
LLH4_MERGE = 1


cdef class Rng:
    """splitmix64 generator with unbiased bounded draws."""

    cdef public uint64_t state

    def __init__(self, seed=0):
        self.state = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)

    cdef inline uint64_t _next(self) noexcept:
        cdef uint64_t z
        self.state += 0x9E3779B97F4A7C15ULL
        z = self.state
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
        return z ^ (z >> 31)

    cdef inline int64_t _below(self, int64_t n) noexcept:
        cdef uint64_t un = <uint64_t>n
        cdef uint64_t r = (0 - un) % un
        cdef uint64_t x
        while True:
            x = self._next()
            if r == 0 or x < <uint64_t>(0 - r):
                return <int64_t>(x % un)

    def next_u64(self):
        return self._next()

    def randbelow(self, n):
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        return self._below(n)

    def random(self):
        return (self._next() >> 11) * (1.0 / 9007199254740992.0)

    def getstate(self):
        return self.state

    def setstate(self, state):
        self.state = <uint64_t>(int(state) & 0xFFFFFFFFFFFFFFFF)

    def __reduce__(self):
        return (Rng, (self.state,))

    def __repr__(self):
        return f"Rng(state={self.state:#x})"


cdef inline void _move(int32_t[::1] slots, const int64_t[::1] ptr, const int32_t[::1] idx,
                       const int64_t[::1] w, int k, int64_t[::1] prox, int64_t[::1] conf,
                       int e, int t, int64_t* dprox, int64_t* dconf) noexcept nogil:
    cdef int s = slots[e]
    cdef int64_t base, nb, wt, c
    cdef int64_t p
    cdef int d
    if s == t:
        dprox[0] = 0
        dconf[0] = 0
        return
    base = <int64_t>e * k
    dprox[0] = prox[base + t] - prox[base + s]
    dconf[0] = conf[base + t] - conf[base + s]
    for p in range(ptr[e], ptr[e + 1]):
        nb = <int64_t>idx[p] * k
        wt = w[p]
        conf[nb + s] -= wt
        conf[nb + t] += wt
        for d in range(1, 6):
            c = wt * PROX[d]
            if s - d >= 0:
                prox[nb + s - d] -= c
            if s + d < k:
                prox[nb + s + d] -= c
            if t - d >= 0:
                prox[nb + t - d] += c
            if t + d < k:
                prox[nb + t + d] += c
    slots[e] = t


def init_tables(int32_t[::1] slots, const int64_t[::1] ptr, const int32_t[::1] idx,
                const int64_t[::1] w, int m, int k, int64_t[::1] prox, int64_t[::1] conf):
    cdef int64_t tp = 0, tc = 0, base, wt
    cdef int64_t p
    cdef int e, s, n, sn, d, gap
    with nogil:
        prox[:] = 0
        conf[:] = 0
        for e in range(m):
            base = <int64_t>e * k
            s = slots[e]
            for p in range(ptr[e], ptr[e + 1]):
                n = idx[p]
                wt = w[p]
                sn = slots[n]
                conf[base + sn] += wt
                for d in range(1, 6):
                    if sn - d >= 0:
                        prox[base + sn - d] += wt * PROX[d]
                    if sn + d < k:
                        prox[base + sn + d] += wt * PROX[d]
                if n > e:
                    gap = s - sn if s > sn else sn - s
                    if gap == 0:
                        tc += wt
                    elif gap <= 5:
                        tp += wt * PROX[gap]
    return tp, tc


def apply_move(int32_t[::1] slots, const int64_t[::1] ptr, const int32_t[::1] idx,
               const int64_t[::1] w, int k, int64_t[::1] prox, int64_t[::1] conf, int e, int t):
    cdef int64_t dp, dc
    _move(slots, ptr, idx, w, k, prox, conf, e, t, &dp, &dc)
    return dp, dc


def vdls(int32_t[::1] slots, const int64_t[::1] ptr, const int32_t[::1] idx,
         const int64_t[::1] w, int m, int k, int64_t[::1] prox, int64_t[::1] conf, int64_t W):
    cdef int64_t dp = 0, dc = 0, moves = 0, sweeps = 0, work = 0
    cdef int64_t base, best_c, c, a, b
    cdef int e, s, t, best_t
    cdef bint moved
    with nogil:
        while True:
            sweeps += 1
            moved = False
            for e in range(m):
                base = <int64_t>e * k
                s = slots[e]
                best_t = s
                best_c = prox[base + s] + W * conf[base + s]
                for t in range(k):
                    c = prox[base + t] + W * conf[base + t]
                    if c < best_c:
                        best_c = c
                        best_t = t
                work += k
                if best_t != s:
                    _move(slots, ptr, idx, w, k, prox, conf, e, best_t, &a, &b)
                    dp += a
                    dc += b
                    moves += 1
                    moved = True
                    work += 1 + ptr[e + 1] - ptr[e]
            if not moved:
                break
    return dp, dc, moves, sweeps, work


cdef inline bint _has_alt(const int64_t[::1] conf, int e, int s, int k) noexcept nogil:
    cdef int64_t base = <int64_t>e * k
    cdef int t
    for t in range(k):
        if t != s and conf[base + t] == 0:
            return True
    return False


def hhls(int32_t[::1] slots, const int64_t[::1] ptr, const int32_t[::1] idx,
         const int64_t[::1] w, int m, int k, int64_t[::1] prox, int64_t[::1] conf,
         int64_t W, int64_t iteration_limit, int64_t stall_limit, Rng rng, int llh4_mode,
         int32_t[::1] trace_op, int32_t[::1] trace_acc, int64_t[::1] trace_cost, int64_t cost0,
         int only_op=-1, bint accept_all=False):
    cdef bint tracing = trace_op.shape[0] >= iteration_limit
    cdef int32_t[::1] undo_e = np.zeros(m, dtype=np.int32)
    cdef int32_t[::1] undo_s = np.zeros(m, dtype=np.int32)
    cdef int64_t[::1] stamp = np.zeros(m, dtype=np.int64)
    cdef int64_t[::1] wrow = np.zeros(m, dtype=np.int64)
    cdef int32_t[::1] queue = np.zeros(m, dtype=np.int32)
    cdef int64_t stamp_id = 0
    cdef int64_t[5] op_counts = [0, 0, 0, 0, 0]
    cdef int64_t cur = cost0, dp_tot = 0, dc_tot = 0, accepted = 0, improved = 0
    cdef int64_t stall = 0, work = 0, it = 0
    cdef int64_t dp, dc, x64, y64, delta, best_d, d, wab, pp, base, abase, bbase, cnt, pick
    cdef int64_t p
    cdef int op, nu, e, s, t, a, b, sa, sb, best_b, a_ex, gap, s1, s2, head, tail, x, n, q
    cdef int t1, t2, ns, acc, tries
    cdef bint ok
    while it < iteration_limit:
        op = <int>rng._below(5) if only_op < 0 else only_op
        op_counts[op] += 1
        nu = 0
        dp = 0
        dc = 0
        work += 1
        if op == 0:
            e = <int>rng._below(m)
            s = slots[e]
            base = <int64_t>e * k
            cnt = 0
            for t in range(k):
                if t != s and conf[base + t] == 0:
                    cnt += 1
            work += k
            if cnt > 0:
                pick = rng._below(cnt)
                for t in range(k):
                    if t != s and conf[base + t] == 0:
                        if pick == 0:
                            break
                        pick -= 1
                undo_e[nu] = e
                undo_s[nu] = s
                nu += 1
                _move(slots, ptr, idx, w, k, prox, conf, e, t, &x64, &y64)
                dp += x64
                dc += y64
                work += 1 + ptr[e + 1] - ptr[e]
        elif op == 1:
            a_ex = -1
            for tries in range(m):
                e = <int>rng._below(m)
                work += k
                if _has_alt(conf, e, slots[e], k):
                    a_ex = e
                    break
            if a_ex < 0:
                cnt = 0
                for e in range(m):
                    if _has_alt(conf, e, slots[e], k):
                        cnt += 1
                work += <int64_t>m * k
                if cnt > 0:
                    pick = rng._below(cnt)
                    for e in range(m):
                        if _has_alt(conf, e, slots[e], k):
                            if pick == 0:
                                a_ex = e
                                break
                            pick -= 1
            if a_ex >= 0:
                a = a_ex
                sa = slots[a]
                abase = <int64_t>a * k
                for p in range(ptr[a], ptr[a + 1]):
                    wrow[idx[p]] = w[p]
                best_b = -1
                best_d = 0
                for b in range(m):
                    sb = slots[b]
                    if sb == sa:
                        continue
                    bbase = <int64_t>b * k
                    wab = wrow[b]
                    if conf[abase + sb] - wab != 0 or conf[bbase + sa] - wab != 0:
                        continue
                    gap = sa - sb if sa > sb else sb - sa
                    pp = PROX[gap] if gap <= 5 else 0
                    d = (prox[abase + sb] - prox[abase + sa] + prox[bbase + sa] - prox[bbase + sb]
                         + 2 * wab * pp
                         + W * (conf[abase + sb] - conf[abase + sa] + conf[bbase + sa]
                                - conf[bbase + sb] - 2 * wab))
                    if best_b < 0 or d < best_d:
                        best_b = b
                        best_d = d
                work += m + ptr[a + 1] - ptr[a]
                for p in range(ptr[a], ptr[a + 1]):
                    wrow[idx[p]] = 0
                if best_b >= 0:
                    b = best_b
                    sb = slots[b]
                    undo_e[0] = a
                    undo_s[0] = sa
                    undo_e[1] = b
                    undo_s[1] = sb
                    nu = 2
                    _move(slots, ptr, idx, w, k, prox, conf, a, sb, &x64, &y64)
                    dp += x64
                    dc += y64
                    _move(slots, ptr, idx, w, k, prox, conf, b, sa, &x64, &y64)
                    dp += x64
                    dc += y64
                    work += 2 + ptr[a + 1] - ptr[a] + ptr[b + 1] - ptr[b]
        elif op == 2:
            if k >= 2:
                e = <int>rng._below(m)
                s1 = slots[e]
                s2 = <int>rng._below(k - 1)
                if s2 >= s1:
                    s2 += 1
                stamp_id += 1
                stamp[e] = stamp_id
                queue[0] = e
                head = 0
                tail = 1
                while head < tail:
                    x = queue[head]
                    head += 1
                    for p in range(ptr[x], ptr[x + 1]):
                        n = idx[p]
                        if stamp[n] != stamp_id and (slots[n] == s1 or slots[n] == s2):
                            stamp[n] = stamp_id
                            queue[tail] = n
                            tail += 1
                    work += 1 + ptr[x + 1] - ptr[x]
                for q in range(tail):
                    x = queue[q]
                    undo_e[q] = x
                    undo_s[q] = slots[x]
                nu = tail
                for q in range(tail):
                    x = queue[q]
                    _move(slots, ptr, idx, w, k, prox, conf, x,
                          s2 if undo_s[q] == s1 else s1, &x64, &y64)
                    dp += x64
                    dc += y64
        else:
            if k >= 2:
                t1 = <int>rng._below(k)
                t2 = <int>rng._below(k - 1)
                if t2 >= t1:
                    t2 += 1
                for e in range(m):
                    s = slots[e]
                    ns = s
                    if op == 4:
                        if s == t1:
                            ns = t2
                        elif s == t2:
                            ns = t1
                    elif llh4_mode == 1:
                        if s == t1:
                            ns = t2
                    elif s == t1:
                        ns = t2
                    elif t1 < t2 and t1 < s <= t2:
                        ns = s - 1
                    elif t2 < t1 and t2 <= s < t1:
                        ns = s + 1
                    if ns != s:
                        undo_e[nu] = e
                        undo_s[nu] = s
                        nu += 1
                        _move(slots, ptr, idx, w, k, prox, conf, e, ns, &x64, &y64)
                        dp += x64
                        dc += y64
                        work += 1 + ptr[e + 1] - ptr[e]
                work += m
        delta = dp + W * dc
        if delta <= 0 or accept_all:
            cur += delta
            dp_tot += dp
            dc_tot += dc
            accepted += 1
            if delta < 0:
                improved += 1
                stall = 0
            else:
                stall += 1
            acc = 1
        else:
            for q in range(nu - 1, -1, -1):
                e = undo_e[q]
                _move(slots, ptr, idx, w, k, prox, conf, e, undo_s[q], &x64, &y64)
                work += 1 + ptr[e + 1] - ptr[e]
            stall += 1
            acc = 0
        if tracing:
            trace_op[it] = op
            trace_acc[it] = acc
            trace_cost[it] = cur
        it += 1
        if stall >= stall_limit:
            break
    return (dp_tot, dc_tot, it, accepted, improved,
            (op_counts[0], op_counts[1], op_counts[2], op_counts[3], op_counts[4]), work)


def construct(const int64_t[::1] ptr, const int32_t[::1] idx, int m, int k, int rule,
              int32_t[::1] slots, Rng rng, int32_t[::1] order):
    cdef int32_t[::1] cnt = np.zeros(<int64_t>m * k, dtype=np.int32)
    cdef int32_t[::1] nfeas = np.zeros(m, dtype=np.int32)
    cdef int64_t p, base, work = <int64_t>m * k
    cdef int e, s, t, u, c, n, best, best_v, ties, v, centre = k // 2, dist, best_dist
    cdef int placed = 0, n_sat
    for e in range(m):
        s = slots[e]
        if s >= 0:
            for p in range(ptr[e], ptr[e + 1]):
                cnt[<int64_t>idx[p] * k + s] += 1
    for e in range(m):
        if slots[e] < 0:
            base = <int64_t>e * k
            c = 0
            for t in range(k):
                if cnt[base + t] == 0:
                    c += 1
            nfeas[e] = c
    while True:
        best = -1
        best_v = k + 1
        ties = 0
        for e in range(m):
            if slots[e] < 0:
                v = nfeas[e]
                if v > 0:
                    if v < best_v:
                        best_v = v
                        best = e
                        ties = 1
                    elif v == best_v:
                        ties += 1
                        if rng._below(ties) == 0:
                            best = e
        work += m
        if best < 0:
            break
        base = <int64_t>best * k
        t = -1
        if rule == 0:
            for u in range(k):
                if cnt[base + u] == 0:
                    t = u
                    break
        else:
            best_dist = -1
            ties = 0
            for u in range(k):
                if cnt[base + u] == 0:
                    dist = u + 1 - centre
                    if dist < 0:
                        dist = -dist
                    if dist > best_dist:
                        best_dist = dist
                        t = u
                        ties = 1
                    elif dist == best_dist:
                        ties += 1
                        if rng._below(ties) == 0:
                            t = u
        slots[best] = t
        order[placed] = best
        placed += 1
        for p in range(ptr[best], ptr[best + 1]):
            n = idx[p]
            if slots[n] < 0:
                if cnt[<int64_t>n * k + t] == 0:
                    nfeas[n] -= 1
                cnt[<int64_t>n * k + t] += 1
        work += 1 + ptr[best + 1] - ptr[best]
    n_sat = placed
    for e in range(m):
        if slots[e] < 0:
            slots[e] = <int32_t>rng._below(k)
            order[placed] = e
            placed += 1
    return placed, n_sat, work


def decode(const int32_t[::1] order, const int64_t[::1] ptr, const int32_t[::1] idx,
           int m, int k, int32_t[::1] slots, Rng rng, bint complete):
    cdef int64_t[::1] blocked = np.zeros(k, dtype=np.int64)
    cdef int64_t q, p, stamp, work = 0
    cdef int e, s, t, unplaced = 0
    cdef bint done
    for q in range(order.shape[0]):
        e = order[q]
        stamp = q + 1
        for p in range(ptr[e], ptr[e + 1]):
            s = slots[idx[p]]
            if s >= 0:
                blocked[s] = stamp
        work += 1 + ptr[e + 1] - ptr[e]
        done = False
        for t in range(k):
            if blocked[t] != stamp:
                slots[e] = t
                done = True
                break
        if not done:
            unplaced += 1
    if complete:
        for e in range(m):
            if slots[e] < 0:
                slots[e] = <int32_t>rng._below(k)
    return unplaced, work
