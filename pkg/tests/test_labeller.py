import pytest

from gracetree.bitset import iter_bits
from gracetree.intervals import Interval, IntervalSystem
from gracetree.labeller import (
    FAIL_CHOOSE,
    FAIL_CORE,
    FAIL_CORV,
    LabelResult,
    LabelState,
    admissible_labels,
    run_labelling,
)
from gracetree.prepare import prepare_plan
from gracetree.rng import Rng
from gracetree.trees import Tree, path_tree, random_tree


def check_graceful_prefix(tree, psi):
    labels = list(psi.values())
    assert len(set(labels)) == len(labels)
    diffs = [abs(psi[u] - psi[v]) for u, v in tree.edges if u in psi and v in psi]
    assert len(set(diffs)) == len(diffs)
    assert 0 not in diffs


def test_admissible_frozen_example():
    got = admissible_labels(2, Interval(21, 24), {21, 22}, {19})
    assert got == frozenset({21})


def test_admissible_mask_matches_reference():
    sys = IntervalSystem(24, 2, 4)
    rng = Rng(17, key=(0,))
    state = LabelState(sys)
    for b in (3, 7, 8, 15, 21):
        state.remove_label(b)
    for d in (1, 4, 9, 14, 23):
        state.remove_diff(d)
    labels = set(iter_bits(state.a_bits))
    diffs = set(iter_bits(state.c_bits))
    for a in (1, 2, 5, 12, 18, 24):
        for iv in sys.j_intervals:
            ref = admissible_labels(a, iv, labels, diffs)
            mask = state.admissible_mask(a, iv)
            got = {iv.lo + k for k in iter_bits(mask)}
            assert got == ref, (a, tuple(iv))


def test_single_vertex_first_step_sizes():
    sys = IntervalSystem(24, 2, 4)
    t = Tree(1, [])
    for seed in range(6):
        plan = prepare_plan(t, sys, Rng(seed, key=(0,)))
        res = run_labelling(plan, sys, Rng(seed, key=(1,)), collect_trace=True)
        assert res.success
        row = res.trace[0]
        assert row.edge_label == -1
        assert row.size_a in (sys.n_tilde - 1, sys.n_tilde - 2)
        assert row.size_a == sys.n_tilde - 1 - (row.corv_label >= 0)
        iv = plan.interval_of[0]
        assert iv.lo <= res.psi[1] <= iv.hi


def test_size_identities_along_trace():
    sys = IntervalSystem(40, 2, 4)
    tree = random_tree(16, Rng(5, key=(0,)))
    plan = prepare_plan(tree, sys, Rng(5, key=(1,)))
    res = run_labelling(
        plan, sys, Rng(5, key=(2,)), max_retries=400, collect_trace=True
    )
    assert res.success
    corv_so_far = 0
    core_so_far = 0
    for row in res.trace:
        corv_so_far += row.corv_label >= 0
        core_so_far += row.core_diff >= 0
        assert row.size_a == sys.n_tilde - row.t - corv_so_far
        assert row.size_c == sys.n_tilde - 1 - (row.t - 1) - core_so_far


def test_labels_stay_in_intervals_and_prefix_graceful():
    sys = IntervalSystem(40, 2, 4)
    tree = random_tree(16, Rng(5, key=(0,)))
    plan = prepare_plan(tree, sys, Rng(5, key=(1,)))
    res = run_labelling(plan, sys, Rng(5, key=(2,)), max_retries=400)
    assert res.success
    pos = {v: i for i, v in enumerate(plan.order)}
    for v, b in res.psi.items():
        iv = plan.interval_of[pos[v]]
        assert iv.lo <= b <= iv.hi
    check_graceful_prefix(tree, res.psi)


def test_deterministic_repeat():
    sys = IntervalSystem(40, 2, 4)
    tree = random_tree(14, Rng(9, key=(0,)))
    plan = prepare_plan(tree, sys, Rng(9, key=(1,)))
    r1 = run_labelling(plan, sys, Rng(9, key=(2,)), max_retries=200,
                       collect_trace=True)
    r2 = run_labelling(plan, sys, Rng(9, key=(2,)), max_retries=200,
                       collect_trace=True)
    assert r1 == r2
    r3 = run_labelling(plan, sys, Rng(10, key=(2,)), max_retries=200,
                       collect_trace=True)
    assert r1 != r3


def test_retries_and_failure_sites():
    # consumption rate exceeds the supply: every attempt must die
    sys = IntervalSystem(12, 1, 2)
    tree = path_tree(12)
    plan = prepare_plan(tree, sys, Rng(0, key=(0,)))
    res = run_labelling(plan, sys, Rng(0, key=(1,)), max_retries=5)
    assert not res.success
    assert res.psi is None
    assert res.attempts == 6
    assert len(res.failures) == 6
    assert {f.site for f in res.failures} <= {FAIL_CHOOSE, FAIL_CORV, FAIL_CORE}
    assert all(1 <= f.step <= 12 for f in res.failures)
    hist = res.failure_histogram()
    assert sum(hist.values()) == 6


def test_replan_redraws_assignment():
    sys = IntervalSystem(12, 1, 2)
    tree = path_tree(12)
    plan = prepare_plan(tree, sys, Rng(3, key=(0,)))
    calls = []

    def replan(r):
        p = prepare_plan(tree, sys, r)
        calls.append(p)
        return p

    res = run_labelling(
        plan, sys, Rng(3, key=(1,)), max_retries=4, replan=replan
    )
    assert not res.success
    assert len(calls) == 4
    assert res.plan == calls[-1]


def test_checkpoint_callback():
    sys = IntervalSystem(40, 2, 4)
    tree = path_tree(16)
    plan = prepare_plan(tree, sys, Rng(21, key=(0,)))
    seen = []
    res = run_labelling(
        plan,
        sys,
        Rng(21, key=(1,)),
        max_retries=500,
        checkpoint_every=4,
        on_checkpoint=lambda state, t: seen.append((t, state.size_a)),
    )
    assert res.success
    last_attempt_steps = [t for t, _ in seen][-4:]
    assert last_attempt_steps == [4, 8, 12, 16]


def test_moderate_slack_run_succeeds():
    sys = IntervalSystem(84, 14, 28)
    tree = random_tree(48, Rng(42, key=(0,)))
    plan = prepare_plan(tree, sys, Rng(42, key=(1,)))
    res = run_labelling(plan, sys, Rng(42, key=(2,)), max_retries=4000)
    assert res.success
    check_graceful_prefix(tree, res.psi)
    assert set(res.psi) == set(range(1, 49))
    assert all(1 <= b <= 84 for b in res.psi.values())
