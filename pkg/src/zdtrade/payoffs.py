"""Payoff model of the two-player data-trading game.

The data provider (X) chooses between submitting authentic data (C) or
noise-injected data (D); the data collector (Y) chooses between protecting
the data (C) or reselling it (D).  A joint state is the pair of actions, in
the fixed order CC, CD, DC, DD with the provider's action first.

Payoffs are linear in the trading parameters: the base trading profits
c_p / c_c (scaled by 1 - e1 when the provider defects, because noisy data
is worth less), the resale gain/loss pair c_c1 / c_p1 (scaled by 1 - e1 on
noisy data), and the detection pair c_p2 / c_c2 (scaled by 1 - e2, the
probability that the collector's resale is detected through his identity
mask).
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from enum import IntEnum

import numpy as np

from .errors import InvalidParameterError


class StateIndex(IntEnum):
    """Joint states of one round, provider action first."""

    CC = 0
    CD = 1
    DC = 2
    DD = 3


STATE_NAMES = ("CC", "CD", "DC", "DD")

_CURRENCY_FIELDS = ("c_p", "c_c", "c_p1", "c_c1", "c_p2", "c_c2")
_PARAM_FIELDS = _CURRENCY_FIELDS + ("e1", "e2")


@dataclass(frozen=True)
class GameParams:
    """Trading parameters of the game.

    Attributes:
        c_p, c_c: trading profits of provider / collector (currency, > 0).
        c_p1: provider's privacy-leakage loss when the collector resells.
        c_c1: collector's resale gain.
        c_p2: provider's compensation when the resale is detected.
        c_c2: collector's reputation loss when the resale is detected.
        e1: provider's data-perturbation noise level, in [0, 1].
        e2: collector's identity-masking noise level, in [0, 1].
    """

    c_p: float
    c_c: float
    c_p1: float
    c_c1: float
    c_p2: float
    c_c2: float
    e1: float
    e2: float

    def __post_init__(self):
        for name in _CURRENCY_FIELDS:
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise InvalidParameterError(
                    f"{name} must be a finite positive amount, got {value!r}"
                )
        for name in ("e1", "e2"):
            value = getattr(self, name)
            if not np.isfinite(value) or not 0.0 <= value <= 1.0:
                raise InvalidParameterError(
                    f"{name} must lie in [0, 1], got {value!r}"
                )

    @classmethod
    def from_mapping(cls, mapping) -> "GameParams":
        """Build from a flat key/value mapping, rejecting unknown keys."""
        unknown = set(mapping) - set(_PARAM_FIELDS)
        if unknown:
            raise InvalidParameterError(
                f"unknown game parameter keys: {sorted(unknown)}"
            )
        missing = set(_PARAM_FIELDS) - set(mapping)
        if missing:
            raise InvalidParameterError(
                f"missing game parameter keys: {sorted(missing)}"
            )
        return cls(**{k: float(mapping[k]) for k in _PARAM_FIELDS})

    def as_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def replace_noise(self, e1=None, e2=None) -> "GameParams":
        """Copy with one or both noise levels replaced."""
        return GameParams(
            self.c_p, self.c_c, self.c_p1, self.c_c1, self.c_p2, self.c_c2,
            self.e1 if e1 is None else e1,
            self.e2 if e2 is None else e2,
        )


@dataclass(frozen=True)
class PayoffVectors:
    """Per-state payoff 4-vectors, indexed by StateIndex order.

    u_p[s] / u_c[s] are the provider's / collector's payoffs in joint
    state s.  Carries the originating parameters so downstream analyses
    can recover the noise levels and classify the provider.
    """

    params: GameParams
    u_p: np.ndarray
    u_c: np.ndarray

    def as_dict(self) -> dict:
        return {
            "states": list(STATE_NAMES),
            "u_p": [float(x) for x in self.u_p],
            "u_c": [float(x) for x in self.u_c],
        }


def build_payoffs(params: GameParams) -> PayoffVectors:
    """Evaluate the eight per-state payoff expressions.

    Provider:  u_p(CC) = c_p
               u_p(CD) = c_p - c_p1 + (1-e2) c_p2
               u_p(DC) = (1-e1) c_p
               u_p(DD) = (1-e1) c_p - (1-e1) c_p1 + (1-e2) c_p2
    Collector: u_c(CC) = c_c
               u_c(CD) = c_c + c_c1 - (1-e2) c_c2
               u_c(DC) = (1-e1) c_c
               u_c(DD) = (1-e1) c_c + (1-e1) c_c1 - (1-e2) c_c2
    """
    if not isinstance(params, GameParams):
        params = GameParams(*params)
    e1, e2 = params.e1, params.e2
    u_p = np.array([
        params.c_p,
        params.c_p - params.c_p1 + (1 - e2) * params.c_p2,
        (1 - e1) * params.c_p,
        (1 - e1) * params.c_p - (1 - e1) * params.c_p1 + (1 - e2) * params.c_p2,
    ])
    u_c = np.array([
        params.c_c,
        params.c_c + params.c_c1 - (1 - e2) * params.c_c2,
        (1 - e1) * params.c_c,
        (1 - e1) * params.c_c + (1 - e1) * params.c_c1 - (1 - e2) * params.c_c2,
    ])
    return PayoffVectors(params, u_p, u_c)


@dataclass(frozen=True)
class OrderingReport:
    """Truth values of the four strict payoff-ordering chains.

    Each flag is the exact (tolerance-free) truth value of its chain;
    ties count as violations.  The provider classification compares the
    value of her data against the value of her privacy.
    """

    u_p_cc_gt_cd: bool      # u_p(CC) > u_p(CD)
    u_p_cc_dc_dd: bool      # u_p(CC) > u_p(DC) > u_p(DD)
    u_c_cd_cc_dc: bool      # u_c(CD) > u_c(CC) > u_c(DC)
    u_c_cd_dd_dc: bool      # u_c(CD) > u_c(DD) > u_c(DC)
    data_valued: bool       # c_p > c_p1
    privacy_sensitive: bool  # c_p < c_p1

    @property
    def all_hold(self) -> bool:
        return (self.u_p_cc_gt_cd and self.u_p_cc_dc_dd
                and self.u_c_cd_cc_dc and self.u_c_cd_dd_dc)

    def as_dict(self) -> dict:
        return {
            "u_p_cc_gt_cd": self.u_p_cc_gt_cd,
            "u_p_cc_dc_dd": self.u_p_cc_dc_dd,
            "u_c_cd_cc_dc": self.u_c_cd_cc_dc,
            "u_c_cd_dd_dc": self.u_c_cd_dd_dc,
            "data_valued": self.data_valued,
            "privacy_sensitive": self.privacy_sensitive,
        }


def validate_ordering(payoffs: PayoffVectors) -> OrderingReport:
    """Report which ordering chains the payoff vectors satisfy.

    Lenient by design: violations are reported, never raised, because
    perfectly reasonable noise settings break some chains (e.g. high e2
    making detection unlikely flips the provider's DC/DD ranking).
    """
    u_p, u_c = payoffs.u_p, payoffs.u_c
    cc, cd, dc, dd = StateIndex.CC, StateIndex.CD, StateIndex.DC, StateIndex.DD
    return OrderingReport(
        u_p_cc_gt_cd=bool(u_p[cc] > u_p[cd]),
        u_p_cc_dc_dd=bool(u_p[cc] > u_p[dc] and u_p[dc] > u_p[dd]),
        u_c_cd_cc_dc=bool(u_c[cd] > u_c[cc] and u_c[cc] > u_c[dc]),
        u_c_cd_dd_dc=bool(u_c[cd] > u_c[dd] and u_c[dd] > u_c[dc]),
        data_valued=bool(payoffs.params.c_p > payoffs.params.c_p1),
        privacy_sensitive=bool(payoffs.params.c_p < payoffs.params.c_p1),
    )
