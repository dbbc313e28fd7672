import numpy as np
import pytest

from examtt.budget import make_rng
from examtt.constructors import (
    SatRule,
    empty_timetable,
    feasible_slots,
    random_timetable,
    saturation_construct,
)
from examtt.instance import UNASSIGNED, Instance, evaluate, parse_stu

from conftest import make_synth


def free_instance(m, k):
    return Instance("free", m, k, tuple(frozenset({e}) for e in range(m)))


def test_triangle_min_is_permutation():
    inst = parse_stu("1 2\n2 3\n1 3\n", k=3)
    for seed in range(30):
        slots = saturation_construct(inst, SatRule.MIN, make_rng(seed))
        assert sorted(slots.tolist()) == [0, 1, 2]
        assert evaluate(slots, inst).feasible


def test_dist_first_exam_k13():
    # c = 6; slot index 12 (the 13th slot) is uniquely farthest
    inst = parse_stu("1 2\n3 4\n5\n", k=13)
    for seed in range(20):
        _, order = saturation_construct(inst, SatRule.DIST, make_rng(seed), return_order=True)
        slots = saturation_construct(inst, SatRule.DIST, make_rng(seed))
        assert slots[order[0]] == 12


def test_dist_even_k_takes_far_end():
    # k = 4, c = 2 (1-based): |t - c| is 1,0,1,2, so the last slot wins
    inst = free_instance(5, 4)
    assert saturation_construct(inst, SatRule.DIST, make_rng(0)).tolist() == [3] * 5


def test_min_prefix_property():
    inst = free_instance(7, 5)
    assert saturation_construct(inst, SatRule.MIN, make_rng(3)).tolist() == [0] * 7


def test_dist_extremal_property_odd_k():
    inst = free_instance(9, 7)
    out = saturation_construct(inst, SatRule.DIST, make_rng(3))
    assert set(out.tolist()) == {6}


def test_dist_equidistant_tie_is_random():
    # k=4, c=2: once the first exam takes slot 4, slots 1 and 3 tie at distance 1
    inst = parse_stu("1 2\n", k=4)
    seen = set()
    for seed in range(60):
        slots = saturation_construct(inst, SatRule.DIST, make_rng(seed))
        seen.add(tuple(sorted(slots.tolist())))
    assert seen == {(0, 3), (2, 3)}


def test_partial_respected(synth):
    rs = np.random.default_rng(1)
    partial = empty_timetable(synth)
    fixed = rs.choice(synth.m, 20, replace=False)
    partial[fixed] = rs.integers(0, synth.k, 20)
    for rule in SatRule:
        out = saturation_construct(synth, rule, make_rng(4), partial=partial)
        assert np.array_equal(out[fixed], partial[fixed])
        assert np.all(out != UNASSIGNED)


def test_completeness_on_overconstrained():
    # K5 with 3 slots must fall back to random completion
    inst = parse_stu("1 2 3 4 5\n", k=3)
    for seed in range(10):
        out = saturation_construct(inst, SatRule.MIN, make_rng(seed))
        assert np.all((out >= 0) & (out < 3))
        assert not evaluate(out, inst).feasible


def test_order_covers_new_exams(synth):
    partial = empty_timetable(synth)
    partial[:10] = 0
    _, order = saturation_construct(synth, SatRule.MIN, make_rng(2), partial=partial, return_order=True)
    assert sorted(order.tolist()) == list(range(10, synth.m))


def test_saturation_selection_rule(toy):
    # toy conflict graph: 1-2, 2-3, 1-3, 3-4, 2-4 (0-based 0-1, 1-2, 0-2, 2-3, 1-3)
    # with MIN, every run must produce a feasible 3-colouring putting exams 1 and 4 together
    for seed in range(40):
        out = saturation_construct(toy, SatRule.MIN, make_rng(seed))
        assert evaluate(out, toy).feasible
        assert out[0] == out[3]


def test_feasible_slots_oracle(toy):
    g = toy.graph
    dense = g.dense()
    rs = np.random.default_rng(0)
    for _ in range(200):
        slots = rs.integers(-1, toy.k, toy.m).astype(np.int32)
        for e in range(toy.m):
            if slots[e] != UNASSIGNED:
                with pytest.raises(ValueError):
                    feasible_slots(e, slots, g, toy.k)
                continue
            brute = {t for t in range(toy.k)
                     if not any(dense[e, n] and slots[n] == t for n in range(toy.m))}
            assert feasible_slots(e, slots, g, toy.k) == brute


def test_feasible_slots_edges(toy):
    slots = empty_timetable(toy)
    assert feasible_slots(0, slots, toy.graph, toy.k) == {0, 1, 2}
    slots[1], slots[2] = 0, 1
    inst = parse_stu("1 2\n1 3\n1 4\n", k=3)
    s2 = np.array([UNASSIGNED, 0, 1, 2], dtype=np.int32)
    assert feasible_slots(0, s2, inst.graph, 3) == set()


def test_random_timetable_range(synth):
    out = random_timetable(synth, make_rng(0))
    assert out.shape == (synth.m,) and out.min() >= 0 and out.max() < synth.k


def test_rule_parse():
    assert SatRule.parse("min") is SatRule.MIN
    assert SatRule.parse("SAT-DIST") is SatRule.DIST
    with pytest.raises(KeyError):
        SatRule.parse("max")


def test_determinism(synth):
    a = saturation_construct(synth, SatRule.DIST, make_rng(11))
    b = saturation_construct(synth, SatRule.DIST, make_rng(11))
    assert np.array_equal(a, b)


def test_dist_beats_min_on_synthetic():
    inst = make_synth(m=70, n_students=800, k=16, seed=4)
    means = {}
    for rule in SatRule:
        rng = make_rng(0, rule.name)
        costs = [evaluate(saturation_construct(inst, rule, rng), inst) for _ in range(300)]
        means[rule] = np.mean([c.proximity_avg for c in costs if c.feasible])
    assert means[SatRule.DIST] < means[SatRule.MIN]
