"""Seeded randomness and the four-class stochastic voter model.

Draw order contract (what makes traces replayable): a run owns a single
stream seeded once. The roster is sampled first (one block of uniforms for
engagement, then one for informedness, voter-id order). Then, per round:
one draw for the item's polarity, one participation draw per voter in
voter-id order, and finally one vote draw per *eligible* participant in
voter-id order. Vectorized and per-voter consumption produce the same
sequence because both pull uniforms off the same stream in that order.
"""

from __future__ import annotations

import enum
from typing import TYPE_CHECKING

import numpy as np

from .params import SimParams

if TYPE_CHECKING:
    from .protocol import Decision, Item, VoterState


class RngStream:
    """A seeded uniform stream; identical seed gives an identical sequence."""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, n: int | None = None):
        """One uniform draw in [0, 1), or a vector of n draws."""
        if n is None:
            return float(self._gen.random())
        return self._gen.random(n)


class VoterClass(enum.Enum):
    INFORMED_ENGAGED = "IE"
    INFORMED_DISENGAGED = "ID"
    UNINFORMED_ENGAGED = "UE"
    UNINFORMED_DISENGAGED = "UD"

    @classmethod
    def from_flags(cls, is_engaged: bool, is_informed: bool) -> "VoterClass":
        if is_informed:
            return cls.INFORMED_ENGAGED if is_engaged else cls.INFORMED_DISENGAGED
        return cls.UNINFORMED_ENGAGED if is_engaged else cls.UNINFORMED_DISENGAGED


def sample_roster(params: SimParams, rng: RngStream) -> list[tuple[bool, bool]]:
    """Sample (is_engaged, is_informed) per voter from two independent Bernoullis.

    Classes are fixed for the whole run.
    """
    n = params.num_voters
    engaged = rng.uniform(n) < params.p_engaged
    informed = rng.uniform(n) < params.p_informed
    return [(bool(e), bool(i)) for e, i in zip(engaged, informed)]


def decide_participation(voter: "VoterState", params: SimParams, rng: RngStream) -> bool:
    """Fresh per-round participation intent draw for one voter."""
    p = params.p_vote_engaged if voter.is_engaged else params.p_vote_disengaged
    return rng.uniform() < p


def cast_vote(voter: "VoterState", item: "Item", params: SimParams, rng: RngStream) -> "Decision":
    """Draw one vote: correct with the voter's class probability.

    A correct vote adds a good item or rejects a bad one; an incorrect vote
    does the opposite.
    """
    from .protocol import Decision

    p_correct = (
        params.p_correct_informed if voter.is_informed else params.p_correct_uninformed
    )
    correct = rng.uniform() < p_correct
    votes_add = correct == item.is_good
    return Decision.ADD if votes_add else Decision.REJECT
