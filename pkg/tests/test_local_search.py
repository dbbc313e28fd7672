import itertools
from collections import deque

import numpy as np
import pytest

from examtt.budget import make_rng
from examtt.constructors import SatRule, saturation_construct
from examtt.costs import CostTable
from examtt.instance import evaluate, parse_stu
from examtt.local_search import (
    HhlsParams,
    LocalSearch,
    SearchCounters,
    apply_llh,
    hhls,
    improve,
    vdls,
)

from conftest import make_synth
from oracles import best_swap, naive_vdls


def _clone(rng):
    c = make_rng(0)
    c.setstate(rng.getstate())
    return c


def _has_alt(slots, e, dense, k):
    return any(t != slots[e] and not any(dense[e, n] and slots[n] == t for n in range(len(slots)))
               for t in range(k))


def _feasible(tbl):
    return evaluate(tbl.slots, tbl.inst).feasible


# --------------------------------------------------------------------- vdls

def test_vdls_matches_naive_descent_all_toy_starts(toy):
    for start in itertools.product(range(3), repeat=4):
        tbl = CostTable(toy, start)
        vdls(tbl)
        ref = naive_vdls(start, toy.students, toy.k, tbl.W)
        assert tbl.slots.tolist() == ref
        assert tbl.consistent()


def test_vdls_fixed_point(synth):
    tbl = CostTable(synth, saturation_construct(synth, SatRule.MIN, make_rng(0)))
    vdls(tbl)
    snap = tbl.slots.copy()
    assert vdls(tbl) == 0
    assert np.array_equal(tbl.slots, snap)


def test_vdls_resolves_single_conflict():
    inst = parse_stu("1 2\n", k=8)
    tbl = CostTable(inst, [3, 3])
    vdls(tbl)
    assert tbl.feasible and tbl.proximity_raw == 0


def test_vdls_never_worse(synth):
    for seed in range(10):
        rs = np.random.default_rng(seed)
        tbl = CostTable(synth, rs.integers(0, synth.k, synth.m))
        before = tbl.penalized_raw
        vdls(tbl)
        assert tbl.penalized_raw <= before and tbl.consistent()


# --------------------------------------------------------------- operators

def test_llh1_moves_to_feasible_slot(synth):
    rng = make_rng(1)
    tbl = CostTable(synth, saturation_construct(synth, SatRule.DIST, rng))
    for _ in range(500):
        was_feasible = tbl.feasible
        apply_llh(tbl, "llh1", rng)
        if was_feasible:
            assert tbl.feasible
    assert tbl.consistent()


def test_llh2_matches_exhaustive_swap_toy(toy):
    dense = toy.graph.dense()
    checked = 0
    for start in itertools.product(range(3), repeat=4):
        for seed in range(3):
            rng = make_rng(seed, start)
            tbl = CostTable(toy, start)
            replay = _clone(rng)
            # the operator draws exam a by rejection among exams with a clash-free alternative
            a = None
            for _ in range(toy.m):
                e = replay.randbelow(toy.m)
                if _has_alt(start, e, dense, toy.k):
                    a = e
                    break
            if a is None:
                cands = [e for e in range(toy.m) if _has_alt(start, e, dense, toy.k)]
                if cands:
                    a = cands[replay.randbelow(len(cands))]
            delta = apply_llh(tbl, "llh2", rng)
            if a is None:
                assert delta == 0 and tbl.slots.tolist() == list(start)
                continue
            b, d = best_swap(start, a, toy.students, tbl.W)
            if b is None:
                assert delta == 0 and tbl.slots.tolist() == list(start)
            else:
                assert delta == d
                expect = list(start)
                expect[a], expect[b] = start[b], start[a]
                assert tbl.slots.tolist() == expect
                checked += 1
            assert tbl.consistent()
    assert checked >= 10


def test_llh2_matches_exhaustive_swap_synthetic():
    inst = make_synth(m=30, n_students=200, k=10, seed=7)
    dense = inst.graph.dense()
    rng = make_rng(8)
    tbl = CostTable(inst, saturation_construct(inst, SatRule.DIST, rng))
    for _ in range(40):
        start = tbl.slots.tolist()
        replay = _clone(rng)
        a = None
        for _ in range(inst.m):
            e = replay.randbelow(inst.m)
            if _has_alt(start, e, dense, inst.k):
                a = e
                break
        delta = apply_llh(tbl, "llh2", rng)
        if a is None:
            continue
        b, d = best_swap(start, a, inst.students, tbl.W)
        assert (delta, b is None) == ((0, True) if b is None else (d, False))
    assert tbl.consistent()


def _kempe_oracle(slots, dense, e, s2):
    s1 = slots[e]
    seen = {e}
    q = deque([e])
    while q:
        x = q.popleft()
        for n in range(len(slots)):
            if dense[x, n] and n not in seen and slots[n] in (s1, s2):
                seen.add(n)
                q.append(n)
    out = list(slots)
    for x in seen:
        out[x] = s2 if slots[x] == s1 else s1
    return out


def test_llh3_matches_chain_oracle(synth):
    dense = synth.graph.dense()
    rng = make_rng(2)
    tbl = CostTable(synth, saturation_construct(synth, SatRule.MIN, rng))
    for _ in range(200):
        replay = _clone(rng)
        e = replay.randbelow(synth.m)
        s1 = int(tbl.slots[e])
        s2 = replay.randbelow(synth.k - 1)
        s2 += s2 >= s1
        expect = _kempe_oracle(tbl.slots.tolist(), dense, e, s2)
        apply_llh(tbl, "llh3", rng)
        assert tbl.slots.tolist() == expect
    assert tbl.consistent()


def test_llh3_preserves_pairwise_feasibility(synth):
    rng = make_rng(3)
    i, j, _ = synth.graph.edges
    tbl = CostTable(synth, np.array([rng.randbelow(synth.k) for _ in range(synth.m)], dtype=np.int32))
    for _ in range(2000):
        before = tbl.slots.copy()
        clash_before = set(zip(*np.nonzero(before[i] == before[j])))
        apply_llh(tbl, "llh3", rng)
        moved = np.nonzero(before != tbl.slots)[0]
        if len(moved) == 0:
            continue
        pair = set(before[moved].tolist()) | set(tbl.slots[moved].tolist())
        after_clash = np.nonzero((tbl.slots[i] == tbl.slots[j]) & np.isin(tbl.slots[i], list(pair)))[0]
        before_idx = {c[0] for c in clash_before}
        assert set(after_clash.tolist()) <= before_idx


@pytest.mark.parametrize("mode", ["reinsert", "merge"])
def test_llh4_semantics(synth, mode):
    rng = make_rng(4, mode)
    tbl = CostTable(synth, saturation_construct(synth, SatRule.DIST, rng))
    k = synth.k
    for _ in range(300):
        replay = _clone(rng)
        t1 = replay.randbelow(k)
        t2 = replay.randbelow(k - 1)
        t2 += t2 >= t1
        old = tbl.slots.copy()
        cw = tbl.conflict_weight
        apply_llh(tbl, "llh4", rng, llh4_mode=mode)
        if mode == "merge":
            expect = np.where(old == t1, t2, old)
            assert tbl.conflict_weight >= cw
        else:
            order = [t for t in range(k) if t != t1]
            order.insert(t2, t1)
            new_pos = {s: p for p, s in enumerate(order)}
            expect = np.array([new_pos[s] for s in old.tolist()])
            assert tbl.conflict_weight == cw
        assert tbl.slots.tolist() == expect.tolist()
    assert tbl.consistent()


def test_llh5_swaps_slot_contents(synth):
    rng = make_rng(5)
    tbl = CostTable(synth, np.array([rng.randbelow(synth.k) for _ in range(synth.m)], dtype=np.int32))
    for _ in range(300):
        replay = _clone(rng)
        t1 = replay.randbelow(synth.k)
        t2 = replay.randbelow(synth.k - 1)
        t2 += t2 >= t1
        old = tbl.slots.copy()
        cw = tbl.conflict_weight
        apply_llh(tbl, "llh5", rng)
        expect = np.where(old == t1, t2, np.where(old == t2, t1, old))
        assert tbl.slots.tolist() == expect.tolist()
        assert tbl.conflict_weight == cw
    assert tbl.consistent()


def test_apply_llh_bad_operator(toy):
    tbl = CostTable(toy, [0, 1, 2, 0])
    with pytest.raises(ValueError):
        apply_llh(tbl, 7, make_rng(0))


# --------------------------------------------------------------------- hhls

def test_hhls_single_exam_single_slot():
    inst = parse_stu("1\n", k=1)
    tbl = CostTable(inst, [0])
    st = hhls(tbl, HhlsParams(1, 1), make_rng(0))
    assert tbl.slots.tolist() == [0] and st.iterations == 1


def test_hhls_trace_monotone_and_consistent(synth):
    rng = make_rng(6)
    tbl = CostTable(synth, saturation_construct(synth, SatRule.MIN, rng))
    start = tbl.penalized_raw
    st = hhls(tbl, HhlsParams(5000, 2000), rng, trace=True)
    cost = st.trace.cost_raw
    assert np.all(np.diff(cost) <= 0)
    assert cost[-1] == tbl.penalized_raw <= start
    assert tbl.consistent()
    assert sum(st.op_counts) == st.iterations == len(cost)
    assert st.improved <= st.accepted <= st.iterations


def test_hhls_stall_limit_stops_early():
    inst = parse_stu("1 2\n", k=12)
    tbl = CostTable(inst, [0, 11])
    st = hhls(tbl, HhlsParams(10_000, 50), make_rng(0))
    assert st.iterations == 50


def test_hhls_trace_csv(tmp_path, toy):
    tbl = CostTable(toy, [0, 1, 2, 0])
    st = hhls(tbl, HhlsParams(20, 20), make_rng(1), trace=True)
    path = tmp_path / "hh.csv"
    st.trace.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,operator,accepted,cost"
    assert len(lines) == 21 and lines[1].split(",")[1].startswith("llh")


def test_hhls_improves_sat_min_start(synth):
    wins = 0
    for seed in range(40):
        rng = make_rng(seed, "hh")
        tbl = CostTable(synth, saturation_construct(synth, SatRule.MIN, rng))
        start = tbl.penalized_raw
        hhls(tbl, HhlsParams(), rng)
        wins += tbl.penalized_raw < start
    assert wins >= 38


def test_hhls_params_validation():
    with pytest.raises(ValueError):
        HhlsParams(10, 20)
    with pytest.raises(ValueError):
        HhlsParams(0, 0)
    with pytest.raises(ValueError):
        HhlsParams(llh4_mode="shift")


def test_improve_counters(synth):
    c = SearchCounters()
    tbl = CostTable(synth, saturation_construct(synth, SatRule.MIN, make_rng(0)))
    improve(tbl, LocalSearch.VDLS_ONLY, HhlsParams(), make_rng(0), c)
    assert (c.vdls_calls, c.hhls_calls) == (1, 0)
    improve(tbl, LocalSearch.VDLS_PLUS_HHLS, HhlsParams(200, 200), make_rng(0), c)
    assert (c.vdls_calls, c.hhls_calls) == (3, 1)
    assert LocalSearch.parse("vdls+hhls") is LocalSearch.VDLS_PLUS_HHLS
