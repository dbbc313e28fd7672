"""Pure-Python kernels.

Loaded when the compiled extension is missing or ``EXAMTT_BACKEND=python``.
Every function consumes random numbers in exactly the same order as its
compiled twin, so both backends return identical results for a given seed.

Arrays: ``slots`` int32[m], CSR ``ptr`` int64[m+1] / ``idx`` int32 / ``w``
int64, move-cost tables ``prox`` and ``conf`` int64[m*k] (row-major).
``prox[e*k+t]`` is the proximity exam e would pay in slot t;
``conf[e*k+t]`` the number of students clashing with e in slot t.
"""

MASK64 = (1 << 64) - 1
PROX = (0, 16, 8, 4, 2, 1)

LLH4_REINSERT = 0
LLH4_MERGE = 1


class Rng:
    """splitmix64 generator with unbiased bounded draws."""

    __slots__ = ("state",)

    def __init__(self, seed=0):
        self.state = int(seed) & MASK64

    def next_u64(self):
        s = (self.state + 0x9E3779B97F4A7C15) & MASK64
        self.state = s
        z = ((s ^ (s >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def randbelow(self, n):
        if n <= 0:
            raise ValueError("randbelow needs n > 0")
        r = (1 << 64) % n
        while True:
            x = self.next_u64()
            if r == 0 or x < (1 << 64) - r:
                return x % n

    def random(self):
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def getstate(self):
        return self.state

    def setstate(self, state):
        self.state = int(state) & MASK64

    def __reduce__(self):
        return (Rng, (self.state,))

    def __repr__(self):
        return f"Rng(state={self.state:#x})"


def _lists(*arrays):
    return [a.tolist() for a in arrays]


def _move(slots, ptr, idx, w, k, prox, conf, e, t):
    """Move exam e to slot t, updating both tables. Returns (dprox, dconf)."""
    s = slots[e]
    if s == t:
        return 0, 0
    base = e * k
    dprox = prox[base + t] - prox[base + s]
    dconf = conf[base + t] - conf[base + s]
    for p in range(ptr[e], ptr[e + 1]):
        nb = idx[p] * k
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
    return dprox, dconf


def init_tables(slots, ptr, idx, w, m, k, prox, conf):
    """Fill the move-cost tables from scratch. Returns (proximity_raw, conflict_weight)."""
    sl, pt, ix, ww = _lists(slots, ptr, idx, w)
    px = [0] * (m * k)
    cf = [0] * (m * k)
    tp = tc = 0
    for e in range(m):
        base = e * k
        s = sl[e]
        for p in range(pt[e], pt[e + 1]):
            n = ix[p]
            wt = ww[p]
            sn = sl[n]
            cf[base + sn] += wt
            for d in range(1, 6):
                if sn - d >= 0:
                    px[base + sn - d] += wt * PROX[d]
                if sn + d < k:
                    px[base + sn + d] += wt * PROX[d]
            if n > e:
                gap = abs(s - sn)
                if gap == 0:
                    tc += wt
                elif gap <= 5:
                    tp += wt * PROX[gap]
    prox[:] = px
    conf[:] = cf
    return tp, tc


def apply_move(slots, ptr, idx, w, k, prox, conf, e, t):
    dprox, dconf = _move(slots, ptr, idx, w, k, prox, conf, e, t)
    return int(dprox), int(dconf)


def vdls(slots, ptr, idx, w, m, k, prox, conf, W):
    """Sweep exams in index order, moving each to its cheapest slot, until a
    sweep makes no move. Returns (dprox, dconf, moves, sweeps, work)."""
    sl, pt, ix, ww, px, cf = _lists(slots, ptr, idx, w, prox, conf)
    dp = dc = moves = sweeps = work = 0
    while True:
        sweeps += 1
        moved = False
        for e in range(m):
            base = e * k
            s = sl[e]
            best_t = s
            best_c = px[base + s] + W * cf[base + s]
            for t in range(k):
                c = px[base + t] + W * cf[base + t]
                if c < best_c:
                    best_c = c
                    best_t = t
            work += k
            if best_t != s:
                a, b = _move(sl, pt, ix, ww, k, px, cf, e, best_t)
                dp += a
                dc += b
                moves += 1
                moved = True
                work += 1 + pt[e + 1] - pt[e]
        if not moved:
            break
    slots[:] = sl
    prox[:] = px
    conf[:] = cf
    return dp, dc, moves, sweeps, work


def hhls(slots, ptr, idx, w, m, k, prox, conf, W, iteration_limit, stall_limit,
         rng, llh4_mode, trace_op, trace_acc, trace_cost, cost0, only_op=-1, accept_all=False):
    """Random-selection hyper-heuristic with non-worsening acceptance.

    ``trace_*`` arrays of length >= iteration_limit receive per-iteration
    operator, acceptance flag and current raw penalized cost; pass empty
    arrays to disable. Returns (dprox, dconf, iterations, accepted, improved,
    op_counts, work). ``only_op`` in 0..4 fixes the operator instead of
    drawing it; ``accept_all`` keeps every move (single-operator probes).
    """
    sl, pt, ix, ww, px, cf = _lists(slots, ptr, idx, w, prox, conf)
    tracing = len(trace_op) >= iteration_limit
    undo_e = [0] * m
    undo_s = [0] * m
    stamp = [0] * m
    wrow = [0] * m
    queue = [0] * m
    stamp_id = 0
    op_counts = [0] * 5
    cur = cost0
    dp_tot = dc_tot = 0
    accepted = improved = 0
    stall = 0
    work = 0
    it = 0
    while it < iteration_limit:
        op = rng.randbelow(5) if only_op < 0 else only_op
        op_counts[op] += 1
        nu = 0
        dp = dc = 0
        work += 1
        if op == 0:
            e = rng.randbelow(m)
            s = sl[e]
            base = e * k
            cnt = 0
            for t in range(k):
                if t != s and cf[base + t] == 0:
                    cnt += 1
            work += k
            if cnt > 0:
                pick = rng.randbelow(cnt)
                for t in range(k):
                    if t != s and cf[base + t] == 0:
                        if pick == 0:
                            break
                        pick -= 1
                undo_e[nu] = e
                undo_s[nu] = s
                nu += 1
                a, b = _move(sl, pt, ix, ww, k, px, cf, e, t)
                dp += a
                dc += b
                work += 1 + pt[e + 1] - pt[e]
        elif op == 1:
            a_ex = -1
            for _ in range(m):
                e = rng.randbelow(m)
                base = e * k
                s = sl[e]
                work += k
                for t in range(k):
                    if t != s and cf[base + t] == 0:
                        a_ex = e
                        break
                if a_ex >= 0:
                    break
            if a_ex < 0:
                cnt = 0
                for e in range(m):
                    base = e * k
                    s = sl[e]
                    for t in range(k):
                        if t != s and cf[base + t] == 0:
                            cnt += 1
                            break
                work += m * k
                if cnt > 0:
                    pick = rng.randbelow(cnt)
                    for e in range(m):
                        base = e * k
                        s = sl[e]
                        ok = False
                        for t in range(k):
                            if t != s and cf[base + t] == 0:
                                ok = True
                                break
                        if ok:
                            if pick == 0:
                                a_ex = e
                                break
                            pick -= 1
            if a_ex >= 0:
                a = a_ex
                sa = sl[a]
                abase = a * k
                for p in range(pt[a], pt[a + 1]):
                    wrow[ix[p]] = ww[p]
                best_b = -1
                best_d = 0
                for b in range(m):
                    sb = sl[b]
                    if sb == sa:
                        continue
                    bbase = b * k
                    wab = wrow[b]
                    if cf[abase + sb] - wab != 0 or cf[bbase + sa] - wab != 0:
                        continue
                    gap = sa - sb if sa > sb else sb - sa
                    pp = PROX[gap] if gap <= 5 else 0
                    d = (px[abase + sb] - px[abase + sa] + px[bbase + sa] - px[bbase + sb]
                         + 2 * wab * pp
                         + W * (cf[abase + sb] - cf[abase + sa] + cf[bbase + sa] - cf[bbase + sb]
                                - 2 * wab))
                    if best_b < 0 or d < best_d:
                        best_b = b
                        best_d = d
                work += m + pt[a + 1] - pt[a]
                for p in range(pt[a], pt[a + 1]):
                    wrow[ix[p]] = 0
                if best_b >= 0:
                    b = best_b
                    sb = sl[b]
                    undo_e[0] = a
                    undo_s[0] = sa
                    undo_e[1] = b
                    undo_s[1] = sb
                    nu = 2
                    x, y = _move(sl, pt, ix, ww, k, px, cf, a, sb)
                    dp += x
                    dc += y
                    x, y = _move(sl, pt, ix, ww, k, px, cf, b, sa)
                    dp += x
                    dc += y
                    work += 2 + pt[a + 1] - pt[a] + pt[b + 1] - pt[b]
        elif op == 2:
            if k >= 2:
                e = rng.randbelow(m)
                s1 = sl[e]
                s2 = rng.randbelow(k - 1)
                if s2 >= s1:
                    s2 += 1
                stamp_id += 1
                stamp[e] = stamp_id
                queue[0] = e
                head, tail = 0, 1
                while head < tail:
                    x = queue[head]
                    head += 1
                    for p in range(pt[x], pt[x + 1]):
                        n = ix[p]
                        if stamp[n] != stamp_id and (sl[n] == s1 or sl[n] == s2):
                            stamp[n] = stamp_id
                            queue[tail] = n
                            tail += 1
                    work += 1 + pt[x + 1] - pt[x]
                for q in range(tail):
                    x = queue[q]
                    undo_e[q] = x
                    undo_s[q] = sl[x]
                nu = tail
                for q in range(tail):
                    x = queue[q]
                    a, b = _move(sl, pt, ix, ww, k, px, cf, x, s2 if undo_s[q] == s1 else s1)
                    dp += a
                    dc += b
        else:
            if k >= 2:
                t1 = rng.randbelow(k)
                t2 = rng.randbelow(k - 1)
                if t2 >= t1:
                    t2 += 1
                for e in range(m):
                    s = sl[e]
                    ns = s
                    if op == 4:
                        if s == t1:
                            ns = t2
                        elif s == t2:
                            ns = t1
                    elif llh4_mode == LLH4_MERGE:
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
                        a, b = _move(sl, pt, ix, ww, k, px, cf, e, ns)
                        dp += a
                        dc += b
                        work += 1 + pt[e + 1] - pt[e]
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
                _move(sl, pt, ix, ww, k, px, cf, e, undo_s[q])
                work += 1 + pt[e + 1] - pt[e]
            stall += 1
            acc = 0
        if tracing:
            trace_op[it] = op
            trace_acc[it] = acc
            trace_cost[it] = cur
        it += 1
        if stall >= stall_limit:
            break
    slots[:] = sl
    prox[:] = px
    conf[:] = cf
    return dp_tot, dc_tot, it, accepted, improved, tuple(op_counts), work


def construct(ptr, idx, m, k, rule, slots, rng, order):
    """Randomised saturation-degree construction, completing ``slots`` in place.

    rule 0 places each exam in its lowest feasible slot, rule 1 in the
    feasible slot farthest from the centre ``k // 2`` (1-based). Exams left
    without a feasible slot get uniform random slots in index order.
    ``order`` receives the placement sequence. Returns (placed, n_saturation,
    work); ``placed`` counts every newly assigned exam.
    """
    sl, pt, ix = _lists(slots, ptr, idx)
    cnt = [0] * (m * k)
    nfeas = [0] * m
    for e in range(m):
        s = sl[e]
        if s >= 0:
            for p in range(pt[e], pt[e + 1]):
                cnt[ix[p] * k + s] += 1
    for e in range(m):
        if sl[e] < 0:
            base = e * k
            c = 0
            for t in range(k):
                if cnt[base + t] == 0:
                    c += 1
            nfeas[e] = c
    centre = k // 2
    placed = 0
    work = m * k
    while True:
        best = -1
        best_v = k + 1
        ties = 0
        for e in range(m):
            if sl[e] < 0:
                v = nfeas[e]
                if v > 0:
                    if v < best_v:
                        best_v = v
                        best = e
                        ties = 1
                    elif v == best_v:
                        ties += 1
                        if rng.randbelow(ties) == 0:
                            best = e
        work += m
        if best < 0:
            break
        base = best * k
        if rule == 0:
            for t in range(k):
                if cnt[base + t] == 0:
                    break
        else:
            best_dist = -1
            ties = 0
            t = -1
            for u in range(k):
                if cnt[base + u] == 0:
                    dist = abs(u + 1 - centre)
                    if dist > best_dist:
                        best_dist = dist
                        t = u
                        ties = 1
                    elif dist == best_dist:
                        ties += 1
                        if rng.randbelow(ties) == 0:
                            t = u
        sl[best] = t
        order[placed] = best
        placed += 1
        for p in range(pt[best], pt[best + 1]):
            n = ix[p]
            if sl[n] < 0:
                if cnt[n * k + t] == 0:
                    nfeas[n] -= 1
                cnt[n * k + t] += 1
        work += 1 + pt[best + 1] - pt[best]
    n_sat = placed
    for e in range(m):
        if sl[e] < 0:
            sl[e] = rng.randbelow(k)
            order[placed] = e
            placed += 1
    slots[:] = sl
    return placed, n_sat, work


def decode(order, ptr, idx, m, k, slots, rng, complete):
    """Earliest-feasible list assignment in the given exam order.

    Exams in ``order`` are placed into ``slots`` (which must hold -1 for
    them). Exams finding no feasible slot stay unassigned, then, if
    ``complete``, receive uniform random slots in ascending index order.
    Returns (unplaced, work).
    """
    sl, pt, ix = _lists(slots, ptr, idx)
    blocked = [0] * k
    unplaced = 0
    work = 0
    for q in range(len(order)):
        e = int(order[q])
        stamp = q + 1
        for p in range(pt[e], pt[e + 1]):
            s = sl[ix[p]]
            if s >= 0:
                blocked[s] = stamp
        work += 1 + pt[e + 1] - pt[e]
        for t in range(k):
            if blocked[t] != stamp:
                sl[e] = t
                break
        else:
            unplaced += 1
    if complete:
        for e in range(m):
            if sl[e] < 0:
                sl[e] = rng.randbelow(k)
    slots[:] = sl
    return unplaced, work
