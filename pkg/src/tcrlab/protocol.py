"""The registry state machine: staking, tally, settlement, inflation.

One round processes one candidate item: compute the required stake, filter
out intents that cannot cover it, tally the votes cast, move the stake pool
to the winning side, inflate the balances of everyone who voted, and record
the decision. Balances live in a numpy array so whole-roster steps stay
cheap; `VoterState` is the per-voter view used by the voter model.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .params import AnalysisSigmaStake, ConfigurationError, ProtocolStake, SimParams
from .voters import VoterClass

REL_TOL = 1e-9


class InvariantViolation(RuntimeError):
    """A protocol invariant (conservation, non-negativity, ...) was broken."""


class ContractViolation(ValueError):
    """A caller passed inputs that violate an operation's precondition."""


class Decision(enum.Enum):
    ADD = "add"
    REJECT = "reject"


@dataclass
class Item:
    item_id: int
    is_good: bool


@dataclass
class VoterState:
    """One voter: immutable class flags plus the current token balance."""

    voter_id: int
    is_engaged: bool
    is_informed: bool
    balance: float

    @property
    def voter_class(self) -> VoterClass:
        return VoterClass.from_flags(self.is_engaged, self.is_informed)


@dataclass
class RoundRecord:
    """Full audit of one voting round."""

    round_index: int
    item: Item
    stake: float
    intended_participants: frozenset[int]
    forced_abstentions: frozenset[int]
    add_voters: frozenset[int]
    reject_voters: frozenset[int]
    decision: Decision
    decision_correct: bool
    per_winner_payout: float
    inflation_applied_to: frozenset[int]


class TcrState:
    """Registry state between rounds.

    Balances, engagement and informedness are parallel arrays indexed by
    voter id. A completed round always yields exactly one decision, so
    ``round_index == v_correct + v_incorrect`` at all times.
    """

    def __init__(self, params: SimParams, balances: np.ndarray,
                 is_engaged: np.ndarray, is_informed: np.ndarray):
        self.params = params
        self.balances = balances
        self.is_engaged = is_engaged
        self.is_informed = is_informed
        self.round_index = 0
        self.v_correct = 0
        self.v_incorrect = 0
        self.registry: list[int] = []
        self.class_masks = {
            VoterClass.INFORMED_ENGAGED: is_informed & is_engaged,
            VoterClass.INFORMED_DISENGAGED: is_informed & ~is_engaged,
            VoterClass.UNINFORMED_ENGAGED: ~is_informed & is_engaged,
            VoterClass.UNINFORMED_DISENGAGED: ~is_informed & ~is_engaged,
        }

    @property
    def num_voters(self) -> int:
        return len(self.balances)

    @property
    def total_tokens(self) -> float:
        return float(self.balances.sum())

    def voter(self, voter_id: int) -> VoterState:
        return VoterState(
            voter_id=voter_id,
            is_engaged=bool(self.is_engaged[voter_id]),
            is_informed=bool(self.is_informed[voter_id]),
            balance=float(self.balances[voter_id]),
        )

    @property
    def voters(self) -> list[VoterState]:
        return [self.voter(j) for j in range(self.num_voters)]


def init_registry(params: SimParams, roster: list[tuple[bool, bool]]) -> TcrState:
    """Create a fresh registry: every voter starts at the initial balance."""
    if len(roster) != params.num_voters:
        raise ConfigurationError(
            f"roster has {len(roster)} voters, params expect {params.num_voters}"
        )
    engaged = np.array([e for e, _ in roster], dtype=bool)
    informed = np.array([i for _, i in roster], dtype=bool)
    balances = np.full(params.num_voters, params.initial_tokens, dtype=np.float64)
    return TcrState(params, balances, engaged, informed)


def required_stake(state: TcrState) -> float:
    """Stake every participant must lock this round."""
    policy = state.params.stake_policy
    if isinstance(policy, ProtocolStake):
        p = state.params
        return (p.initial_stake / p.initial_tokens) * (state.total_tokens / p.num_voters)
    assert isinstance(policy, AnalysisSigmaStake)
    ue = state.class_masks[VoterClass.UNINFORMED_ENGAGED]
    base = state.balances[ue] if ue.any() else state.balances
    return policy.sigma * float(base.mean())


def tally(add_count: int, reject_count: int) -> Decision:
    """Majority among votes actually cast; ties and empty rounds reject."""
    return Decision.ADD if add_count > reject_count else Decision.REJECT


def settle(state: TcrState, stake: float, add_voters: frozenset[int],
           reject_voters: frozenset[int], decision: Decision) -> float:
    """Move the stake pool to the winning side; returns the per-winner payout.

    Ties (equal sides, including the empty round) refund every stake, so the
    payout equals the stake and no balance moves. Transfers are zero-sum.
    """
    winners = add_voters if decision is Decision.ADD else reject_voters
    losers = reject_voters if decision is Decision.ADD else add_voters
    if len(winners) == len(losers):
        return stake
    if not winners:
        # Only possible if losers is also empty, handled above.
        raise InvariantViolation("non-tie round with no winners")
    pool = stake * (len(add_voters) + len(reject_voters))
    payout = pool / len(winners)
    w_idx = np.fromiter(winners, dtype=np.intp, count=len(winners))
    state.balances[w_idx] += payout - stake
    if losers:
        l_idx = np.fromiter(losers, dtype=np.intp, count=len(losers))
        state.balances[l_idx] -= stake
    return payout


def apply_inflation(state: TcrState, participants: frozenset[int], delta: float) -> None:
    """Multiply every participant's post-settlement balance by (1 + delta).

    Losing voters are inflated too; forced abstainers and non-voters are not.
    """
    if not participants or delta == 0.0:
        return
    idx = np.fromiter(participants, dtype=np.intp, count=len(participants))
    state.balances[idx] *= 1.0 + delta


def run_round(state: TcrState, item: Item, participation_intents: frozenset[int],
              votes: dict[int, Decision]) -> RoundRecord:
    """Execute one full round in fixed order; mutates state, returns the audit.

    `votes` must be keyed exactly by the eligible participants: those who
    intend to vote and can cover the stake.
    """
    stake = required_stake(state)
    eligible = frozenset(
        j for j in participation_intents
        if state.balances[j] >= stake * (1.0 - REL_TOL)
    )
    forced = participation_intents - eligible
    if set(votes) != eligible:
        raise ContractViolation(
            f"votes keyed by {sorted(votes)} but eligible voters are {sorted(eligible)}"
        )
    add_voters = frozenset(j for j, v in votes.items() if v is Decision.ADD)
    reject_voters = eligible - add_voters

    pre_settle_total = state.total_tokens
    decision = tally(len(add_voters), len(reject_voters))
    payout = settle(state, stake, add_voters, reject_voters, decision)
    post_settle_total = state.total_tokens
    _check_close(post_settle_total, pre_settle_total, "settlement zero-sum")

    part_idx = np.fromiter(eligible, dtype=np.intp, count=len(eligible))
    participant_tokens = float(state.balances[part_idx].sum()) if len(eligible) else 0.0
    apply_inflation(state, eligible, state.params.inflation_rate)
    _check_close(
        state.total_tokens,
        post_settle_total + state.params.inflation_rate * participant_tokens,
        "inflation bookkeeping",
    )
    if float(state.balances.min()) < -REL_TOL * max(1.0, stake):
        raise InvariantViolation(f"negative balance after round {state.round_index}")

    decision_correct = (decision is Decision.ADD) == item.is_good
    if decision_correct:
        state.v_correct += 1
    else:
        state.v_incorrect += 1
    if decision is Decision.ADD:
        state.registry.append(item.item_id)
    state.round_index += 1
    if state.round_index != state.v_correct + state.v_incorrect:
        raise InvariantViolation("round_index out of sync with decision counts")

    return RoundRecord(
        round_index=state.round_index - 1,
        item=item,
        stake=stake,
        intended_participants=participation_intents,
        forced_abstentions=forced,
        add_voters=add_voters,
        reject_voters=reject_voters,
        decision=decision,
        decision_correct=decision_correct,
        per_winner_payout=payout,
        inflation_applied_to=eligible,
    )


def _check_close(actual: float, expected: float, what: str) -> None:
    scale = max(abs(expected), 1.0)
    if abs(actual - expected) > REL_TOL * scale:
        raise InvariantViolation(f"{what}: {actual!r} != {expected!r}")
