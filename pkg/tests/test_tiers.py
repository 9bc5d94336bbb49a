import numpy as np
import pytest

from welfarerank.errors import DataError, DegenerateRankingError
from welfarerank.ranklik import RankingTiers, tiers_from_ranking


def test_groups_equal_values_descending():
    t = tiers_from_ranking({"a": 1, "b": 0, "c": 0})
    assert t.tiers == (frozenset({"a"}), frozenset({"b", "c"}))


def test_binary_flag_gives_two_tiers():
    t = tiers_from_ranking({"a": 1, "b": 0, "c": 1, "d": 0})
    assert len(t.tiers) == 2
    assert t.tiers[0] == frozenset({"a", "c"})


def test_distinct_scores_give_singletons():
    scores = {f"h{i}": float(i) for i in range(6)}
    t = tiers_from_ranking(scores)
    assert all(len(tier) == 1 for tier in t.tiers)
    assert t.tiers[0] == frozenset({"h5"})


def test_single_value_is_degenerate():
    with pytest.raises(DegenerateRankingError):
        tiers_from_ranking({"a": 1, "b": 1})


def test_non_finite_value_rejected():
    with pytest.raises(DataError):
        tiers_from_ranking({"a": float("nan"), "b": 1})


def test_needs_two_tiers():
    with pytest.raises(DegenerateRankingError):
        RankingTiers((frozenset({"a", "b"}),))


def test_overlapping_tiers_rejected():
    with pytest.raises(DataError):
        RankingTiers((frozenset({"a"}), frozenset({"a", "b"})))


def test_layout_orders_and_sizes():
    t = tiers_from_ranking({"a": 2, "b": 1, "c": 1, "d": 0})
    ids = ["d", "c", "b", "a"]
    order, sizes = t.layout(ids)
    assert sizes.tolist() == [1, 2, 1]
    assert [ids[i] for i in order] == ["a", "b", "c", "d"]


def test_layout_rejects_unranked_households():
    t = tiers_from_ranking({"a": 1, "b": 0})
    with pytest.raises(DataError, match="missing from the ranking"):
        t.layout(["a", "b", "c"])
    with pytest.raises(DataError, match="not in the dataset"):
        t.layout(["a"])


def test_n_households():
    t = tiers_from_ranking({"a": 3, "b": 2, "c": 2, "d": 1})
    assert t.n_households == 4
    assert set(t.ids()) == {"a", "b", "c", "d"}
