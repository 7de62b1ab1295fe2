"""Why the data collector cannot run the determinant-pinning strategies.

The collector-controlled column of the transformed balance matrix has
zero first and second components (his response never depends on his own
previous action once the provider's move is observed).  Any pinning or
extortionate choice of that column therefore forces two equations whose
only solution needs two provider payoffs (or two baseline-shifted payoff
ratios) to coincide.  These checks turn that argument into per-parameter
certificates instead of taking it on faith.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BaselineDegenerateError
from .payoffs import GameParams, StateIndex, build_payoffs, validate_ordering

DENOM_TOL = 1e-12


@dataclass(frozen=True)
class InfeasibilityCertificate:
    """Machine-checkable verdict that a collector-side strategy cannot exist.

    holds=True means the forced equality fails (the strategy is impossible,
    as claimed); holds=False flags the degenerate payoff configurations
    where the argument's premise breaks down.  ordering_violations lists
    which assumed payoff chains the inputs do not satisfy, since the
    impossibility argument is conditional on them.
    """

    kind: str                       # "pinning" | "extortion"
    conflicting_states: tuple[str, str]
    lhs: float
    rhs: float
    gap: float
    holds: bool
    ordering_violations: tuple[str, ...] = ()
    baselines: tuple[float, float] | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "conflicting_states": list(self.conflicting_states),
            "lhs": self.lhs, "rhs": self.rhs, "gap": self.gap,
            "holds": self.holds,
            "ordering_violations": list(self.ordering_violations),
            "baselines": list(self.baselines) if self.baselines else None,
        }


def check_collector_pinning(params: GameParams) -> InfeasibilityCertificate:
    """Certificate that the collector cannot pin the provider's payoff.

    The two zero components force alpha*u_p(CC) + gamma = 0 and
    alpha*u_p(CD) + gamma = 0 simultaneously, impossible unless
    u_p(CC) = u_p(CD).
    """
    pv = build_payoffs(params)
    lhs = float(pv.u_p[StateIndex.CC])
    rhs = float(pv.u_p[StateIndex.CD])
    report = validate_ordering(pv)
    violations = () if report.u_p_cc_gt_cd else ("u_p_cc_gt_cd",)
    return InfeasibilityCertificate(
        kind="pinning", conflicting_states=("CC", "CD"),
        lhs=lhs, rhs=rhs, gap=lhs - rhs, holds=bool(lhs != rhs),
        ordering_violations=violations,
    )


def check_collector_extortion(params: GameParams, l1: float,
                              l2: float) -> InfeasibilityCertificate:
    """Certificate that the collector cannot enforce an extortionate share.

    His zero components force (u_p(CC) - l1)/(u_c(CC) - l2) and
    (u_p(CD) - l1)/(u_c(CD) - l2) to both equal the extortion factor,
    impossible when the ratios differ - and they always do when the
    provider prefers a cooperative collector, the collector gains from
    resale, and both denominators are positive.
    """
    pv = build_payoffs(params)
    d_cc = float(pv.u_c[StateIndex.CC]) - l2
    d_cd = float(pv.u_c[StateIndex.CD]) - l2
    for name, d in (("u_c(CC)", d_cc), ("u_c(CD)", d_cd)):
        if abs(d) <= DENOM_TOL:
            raise BaselineDegenerateError(
                f"{name} - l2 = {d!r} is degenerate; move the baseline"
            )
    lhs = (float(pv.u_p[StateIndex.CC]) - l1) / d_cc
    rhs = (float(pv.u_p[StateIndex.CD]) - l1) / d_cd
    report = validate_ordering(pv)
    violations = tuple(
        name for name, ok in (("u_p_cc_gt_cd", report.u_p_cc_gt_cd),
                              ("u_c_cd_cc_dc", report.u_c_cd_cc_dc))
        if not ok
    )
    return InfeasibilityCertificate(
        kind="extortion", conflicting_states=("CC", "CD"),
        lhs=lhs, rhs=rhs, gap=lhs - rhs, holds=bool(lhs != rhs),
        ordering_violations=violations, baselines=(float(l1), float(l2)),
    )
