"""Action-space structure: legal transitions and exhaustive trajectory count."""

import pytest

from sqlscout.core.actions import enumerate_trajectories, valid_next_actions
from sqlscout.core.types import ActionKind
from sqlscout.errors import ContractViolation

A1 = ActionKind.REPHRASE
A2 = ActionKind.SCHEMA_SELECT
A3 = ActionKind.VALUE_IDENT
A4 = ActionKind.FUNCTION_IDENT
A5 = ActionKind.SQL_GENERATE
A6 = ActionKind.SQL_REVISE
A7 = ActionKind.TERMINATE

# independent statement of the transition rules, for cross-checking
ORACLE_SUCCESSORS = {
    None: {A1, A2, A3, A4, A5},
    A1: {A2, A3, A4, A5},
    A2: {A3, A4, A5},
    A3: {A2, A4, A5},
    A4: {A2, A3, A5},
    A5: {A6, A7},
    A6: {A7},
    A7: set(),
}


def oracle_enumerate():
    """Recursive enumeration straight off the successor table."""
    complete = []

    def walk(prefix):
        last = prefix[-1] if prefix else None
        if last is A7:
            complete.append(tuple(prefix))
            return
        for nxt in ORACLE_SUCCESSORS[last]:
            if nxt not in prefix:
                walk(prefix + [nxt])

    walk([])
    return complete


def test_oracle_counts_64_trajectories():
    assert len(oracle_enumerate()) == 64


def test_enumeration_matches_oracle_exactly():
    produced = {tuple(t) for t in enumerate_trajectories()}
    assert produced == set(oracle_enumerate())
    assert len(list(enumerate_trajectories())) == 64  # no duplicates either


def test_shortest_trajectory_is_generate_then_stop():
    shortest = min(enumerate_trajectories(), key=len)
    assert shortest == [A5, A7]


def test_every_trajectory_ends_with_terminate_and_one_generate():
    for traj in enumerate_trajectories():
        assert traj[-1] is A7
        assert traj.count(A5) == 1
        assert len(set(traj)) == len(traj)  # once-only rule


def test_every_prefix_is_reachable():
    for traj in enumerate_trajectories():
        for cut in range(len(traj)):
            allowed = valid_next_actions(traj[:cut])
            assert traj[cut] in allowed


def test_root_offers_all_but_revise_and_terminate():
    assert set(valid_next_actions([])) == {A1, A2, A3, A4, A5}


def test_rephrase_only_available_first():
    for traj in enumerate_trajectories():
        if A1 in traj:
            assert traj[0] is A1


def test_canonical_order_is_stable():
    assert valid_next_actions([]) == [A1, A2, A3, A4, A5]
    assert valid_next_actions([A1]) == [A2, A3, A4, A5]
    assert valid_next_actions([A5]) == [A6, A7]
    assert valid_next_actions([A5, A6]) == [A7]


@pytest.mark.parametrize(
    "history",
    [
        [A2, A1],        # rephrase after another action
        [A5, A5],        # repeat
        [A6],            # revise before generate
        [A7],            # terminate first is legal... as history it ended
        [A5, A7, A7],    # past the end
        [A3, A3],        # repeat
        [A1, A6],        # revise without generate
    ],
)
def test_illegal_histories_raise(history):
    with pytest.raises(ContractViolation):
        valid_next_actions(history)


def test_terminate_closes_the_trajectory():
    # nothing may follow A7
    assert valid_next_actions([A5, A7]) == []
