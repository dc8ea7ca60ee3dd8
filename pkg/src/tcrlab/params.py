"""Simulation parameters and stake policies."""

from __future__ import annotations

from dataclasses import dataclass, field


class ConfigurationError(ValueError):
    """Raised when parameters or config files are invalid."""


@dataclass(frozen=True)
class ProtocolStake:
    """Stake schedule tied to the money supply: S(t) = (S(0)/T(0)) * T_total(t)/N."""


@dataclass(frozen=True)
class AnalysisSigmaStake:
    """Stake equal to a fixed fraction of the mean engaged-uninformed balance.

    Matches the idealized setting used by the closed-form model, where every
    participant stakes the same fraction of an uninformed participant's
    holdings. Falls back to the all-voter mean when no engaged-uninformed
    voter exists.
    """

    sigma: float

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma < 1.0:
            raise ConfigurationError(f"sigma must be in (0, 1), got {self.sigma}")


StakePolicy = ProtocolStake | AnalysisSigmaStake

TIE_RULE = "reject_and_refund"

_PROBABILITY_FIELDS = (
    "p_engaged",
    "p_informed",
    "p_vote_engaged",
    "p_vote_disengaged",
    "p_correct_informed",
    "p_correct_uninformed",
    "p_item_good",
)


@dataclass(frozen=True)
class SimParams:
    """All knobs of one simulation run.

    Defaults are the baseline experiment cell: 100 voters voting on 50
    items, initial balance 100 with initial stake 5, 2% inflation, and the
    baseline engagement/informedness probabilities.
    """

    num_voters: int = 100
    num_items: int = 50
    initial_tokens: float = 100.0
    initial_stake: float = 5.0
    inflation_rate: float = 0.02
    p_engaged: float = 0.5
    p_informed: float = 0.5
    p_vote_engaged: float = 0.8
    p_vote_disengaged: float = 0.2
    p_correct_informed: float = 0.85
    p_correct_uninformed: float = 0.15
    p_item_good: float = 0.5
    stake_policy: StakePolicy = field(default_factory=ProtocolStake)
    tie_rule: str = TIE_RULE
    clamp_value: bool = True

    def __post_init__(self) -> None:
        if self.num_voters < 1:
            raise ConfigurationError(f"num_voters must be >= 1, got {self.num_voters}")
        if self.num_items < 0:
            raise ConfigurationError(f"num_items must be >= 0, got {self.num_items}")
        if self.initial_tokens <= 0:
            raise ConfigurationError(
                f"initial_tokens must be > 0, got {self.initial_tokens}"
            )
        if not 0.0 <= self.initial_stake <= self.initial_tokens:
            raise ConfigurationError(
                f"initial_stake must be in [0, initial_tokens], got {self.initial_stake}"
            )
        if self.inflation_rate < 0:
            raise ConfigurationError(
                f"inflation_rate must be >= 0, got {self.inflation_rate}"
            )
        for name in _PROBABILITY_FIELDS:
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1], got {p}")
        if not isinstance(self.stake_policy, (ProtocolStake, AnalysisSigmaStake)):
            raise ConfigurationError(f"unknown stake policy: {self.stake_policy!r}")
        if self.tie_rule != TIE_RULE:
            raise ConfigurationError(
                f"only tie_rule={TIE_RULE!r} is supported, got {self.tie_rule!r}"
            )
