"""Observed priority orderings with ties, as an ordered sequence of tiers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, DegenerateRankingError


@dataclass(frozen=True)
class RankingTiers:
    """Tier 0 is the highest priority; each tier is a set of household ids.

    Tiers are disjoint and jointly cover the estimation sample; a valid
    ranking has at least two tiers (a single tier carries no information).
    """

    tiers: tuple

    def __post_init__(self):
        if len(self.tiers) < 2:
            raise DegenerateRankingError(
                f"a ranking needs >=2 tiers, got {len(self.tiers)}"
            )
        seen = set()
        for t, members in enumerate(self.tiers):
            if not members:
                raise DataError(f"tier {t} is empty")
            overlap = seen & set(members)
            if overlap:
                raise DataError(f"households in multiple tiers: {sorted(overlap)[:5]}")
            seen |= set(members)

    @property
    def n_households(self) -> int:
        return sum(len(t) for t in self.tiers)

    def ids(self):
        """All ranked ids, tier 0 first (order within a tier unspecified)."""
        out = []
        for members in self.tiers:
            out.extend(sorted(members, key=str))
        return out

    def layout(self, ids) -> tuple[np.ndarray, np.ndarray]:
        """Positions of ``ids`` arranged tier-contiguously, highest tier first.

        Returns (order, tier_sizes): ``order[j]`` is the index into ``ids`` of
        the j-th household in tier ordering; ``tier_sizes`` has one entry per
        tier. Errors if the tier sets and ``ids`` do not cover each other.
        """
        pos = {h: i for i, h in enumerate(ids)}
        if len(pos) != len(ids):
            raise DataError("duplicate household ids")
        order = []
        sizes = []
        for members in self.tiers:
            block = sorted(members, key=str)
            for h in block:
                if h not in pos:
                    raise DataError(f"ranked household {h!r} not in the dataset")
                order.append(pos[h])
            sizes.append(len(block))
        if len(order) != len(ids):
            missing = set(ids) - {h for t in self.tiers for h in t}
            raise DataError(f"households missing from the ranking: {sorted(missing, key=str)[:5]}")
        return np.asarray(order, dtype=np.intp), np.asarray(sizes, dtype=np.int64)


def tiers_from_ranking(raw: dict) -> RankingTiers:
    """Group households by equal score/tier value, higher value = higher priority.

    Accepts anything mapping id -> real (a score vector, an explicit tier
    label, or a binary treated flag, which yields the 2-tier case).
    """
    if not raw:
        raise DataError("empty ranking")
    values = {}
    for h, v in raw.items():
        v = float(v)
        if not np.isfinite(v):
            raise DataError(f"non-finite ranking value for household {h!r}")
        values.setdefault(v, []).append(h)
    if len(values) < 2:
        raise DegenerateRankingError(
            "ranking has a single distinct value; no ordering information"
        )
    tiers = tuple(
        frozenset(values[v]) for v in sorted(values, reverse=True)
    )
    return RankingTiers(tiers)
