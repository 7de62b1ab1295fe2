"""Pinning strategies: the provider unilaterally fixes the collector's
long-run expected payoff.

Choosing the provider-controlled determinant column proportional to
(u_c, 1) forces the collector's stationary payoff to a constant that only
the free entries p1, p4 (and the payoff/noise parameters) determine:

    s_c = (A (1 - p1) + B p4) / (1 - p1 + p4)

with B = u_c(CC) and A = (u_c(DD) - e2 u_c(DC)) / (1 - e2).  The remaining
strategy entries p2, p3 are then fully determined; the strategy exists
only when both land in [0, 1].
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import math

import numpy as np

from ._text import csv_text
from .errors import DegenerateParameterError, InvalidParameterError
from .markov import ProviderStrategy
from .payoffs import GameParams, build_payoffs

# p2/p3 may overshoot [0, 1] by this much and still count as feasible
# (then clamped); region boundaries are rounding-sensitive.
BOUNDARY_TOL = 1e-9

# Reasons attached to infeasible cells.
REASON_P2_RANGE = "p2_out_of_range"
REASON_P3_RANGE = "p3_out_of_range"
REASON_P2_P3_RANGE = "p2_and_p3_out_of_range"
REASON_CORNER = "pinned_value_undefined_at_p1_1_p4_0"

_REASON_CODES = {
    0: None,
    1: REASON_P2_RANGE,
    2: REASON_P3_RANGE,
    3: REASON_P2_P3_RANGE,
    4: REASON_CORNER,
}


def _pinning_constants(params: GameParams):
    if params.e2 >= 1.0:
        raise DegenerateParameterError(
            "e2 = 1 makes the pinning constants undefined (division by 1 - e2)"
        )
    u_c = build_payoffs(params).u_c
    b = float(u_c[0])
    a = float((u_c[3] - params.e2 * u_c[2]) / (1 - params.e2))
    d1 = float(u_c[0] - u_c[3] - params.e2 * (u_c[0] - u_c[2]))
    return u_c, a, b, d1


@dataclass(frozen=True)
class PinningSolution:
    """A solved pinning strategy candidate.

    p1, p4 are the free entries; p2, p3 are the solved ones (clamped to
    [0, 1] when within BOUNDARY_TOL of it).  `feasible` is False when a
    solved entry falls outside [0, 1], or at the p1 = 1, p4 = 0 corner
    where the pinned value is 0/0.  Infeasible solutions are data, not
    errors: region scans need them.
    """

    p1: float
    p4: float
    p2: float
    p3: float
    a_const: float
    b_const: float
    d1_const: float
    pinned_s_c: float
    feasible: bool
    reason: str | None = None

    @property
    def strategy(self) -> ProviderStrategy:
        if not self.feasible:
            raise InvalidParameterError(
                f"infeasible pinning solution has no strategy ({self.reason})"
            )
        return ProviderStrategy(self.p1, self.p2, self.p3, self.p4)

    def as_dict(self) -> dict:
        return {
            "p1": self.p1, "p2": self.p2, "p3": self.p3, "p4": self.p4,
            "a_const": self.a_const, "b_const": self.b_const,
            "d1_const": self.d1_const, "pinned_s_c": self.pinned_s_c,
            "feasible": self.feasible, "reason": self.reason,
        }


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def solve_pinning(p1: float, p4: float, params: GameParams) -> PinningSolution:
    """Solve the dependent entries p2, p3 for given free entries p1, p4.

    p2 = { [u_c(CD) - u_c(DD) + e2 (u_c(DC) - u_c(CC))] p1
           + [u_c(CC) - u_c(CD)] (1 + p4) } / D1
    p3 = { [u_c(DD) - u_c(DC)] (1 - p1)
           + [u_c(CC) - u_c(DC)] (1 - e2) p4 } / D1
    D1 = u_c(CC) - u_c(DD) - e2 [u_c(CC) - u_c(DC)]

    Raises DegenerateParameterError when e2 = 1 or |D1| <= 1e-12.
    """
    for name, v in (("p1", p1), ("p4", p4)):
        if not np.isfinite(v) or not 0.0 <= v <= 1.0:
            raise InvalidParameterError(f"{name} must lie in [0, 1], got {v!r}")
    u_c, a, b, d1 = _pinning_constants(params)
    if abs(d1) <= 1e-12:
        raise DegenerateParameterError(
            f"pinning denominator D1 = {d1!r} is degenerate for these parameters"
        )
    e2 = params.e2
    p2 = ((u_c[1] - u_c[3] + e2 * (u_c[2] - u_c[0])) * p1
          + (u_c[0] - u_c[1]) * (1 + p4)) / d1
    p3 = ((u_c[3] - u_c[2]) * (1 - p1)
          + (u_c[0] - u_c[2]) * (1 - e2) * p4) / d1

    corner = (p1 == 1.0 and p4 == 0.0)
    p2_ok = bool(-BOUNDARY_TOL <= p2 <= 1 + BOUNDARY_TOL)
    p3_ok = bool(-BOUNDARY_TOL <= p3 <= 1 + BOUNDARY_TOL)
    if corner:
        feasible, code = False, 4
        pinned = math.nan
    else:
        feasible = p2_ok and p3_ok
        code = (0 if feasible else
                1 if not p2_ok and p3_ok else
                2 if p2_ok else 3)
        pinned = (a * (1 - p1) + b * p4) / (1 - p1 + p4)
    if feasible:
        p2, p3 = _clamp01(p2), _clamp01(p3)
    return PinningSolution(
        p1=float(p1), p4=float(p4), p2=float(p2), p3=float(p3),
        a_const=a, b_const=b, d1_const=d1, pinned_s_c=float(pinned),
        feasible=feasible, reason=_REASON_CODES[code],
    )


def pinning_sensitivity_strategy(sol: PinningSolution) -> tuple[float, float]:
    """Partial derivatives of the pinned payoff in the free entries:

    ds/dp1 = (B - A) p4 / (1 - p1 + p4)^2
    ds/dp4 = (B - A) (1 - p1) / (1 - p1 + p4)^2

    Both are nonnegative when A < B, so raising p1 or p4 raises the
    collector's pinned payoff.
    """
    if not sol.feasible:
        raise InvalidParameterError("sensitivities require a feasible solution")
    denom = (1 - sol.p1 + sol.p4) ** 2
    if denom == 0.0:
        raise DegenerateParameterError(
            "pinned payoff is undefined at p1 = 1, p4 = 0"
        )
    diff = sol.b_const - sol.a_const
    return (diff * sol.p4 / denom, diff * (1 - sol.p1) / denom)


def pinning_sensitivity_noise(p1: float, p4: float,
                              params: GameParams) -> tuple[float, float]:
    """Partial derivatives of the pinned payoff in the noise levels:

    ds/de1 = - w ((1-e2) c_c + c_c1) / (1-e2)      <= 0
    ds/de2 =   w (1-e1) c_c1 / (1-e2)^2            >= 0

    with w = (1 - p1) / (1 - p1 + p4).  More data noise always hurts the
    collector; more identity masking always helps him.
    """
    if params.e2 >= 1.0:
        raise DegenerateParameterError("e2 = 1 is degenerate")
    denom = 1 - p1 + p4
    if denom == 0.0:
        raise DegenerateParameterError(
            "pinned payoff is undefined at p1 = 1, p4 = 0"
        )
    w = (1 - p1) / denom
    e1, e2 = params.e1, params.e2
    ds_de1 = -w * ((1 - e2) * params.c_c + params.c_c1) / (1 - e2)
    ds_de2 = w * (1 - e1) * params.c_c1 / (1 - e2) ** 2
    return (ds_de1, ds_de2)


@dataclass(frozen=True)
class PinningGrid:
    """Uniform inclusive grid over (p1, p4) in [0, 1]^2 with the solved
    pinning data per cell.  2-D arrays are indexed [i_p1, i_p4]."""

    p1_axis: np.ndarray
    p4_axis: np.ndarray
    p2: np.ndarray
    p3: np.ndarray
    pinned_s_c: np.ndarray
    feasible: np.ndarray
    reason_code: np.ndarray
    a_const: float
    b_const: float
    d1_const: float

    @property
    def feasible_count(self) -> int:
        return int(self.feasible.sum())

    def reason(self, i: int, j: int) -> str | None:
        return _REASON_CODES[int(self.reason_code[i, j])]

    def rows(self):
        """Row-major cell tuples (p1, p4, feasible, p2, p3, s_c_pinned)."""
        for i, p1 in enumerate(self.p1_axis):
            for j, p4 in enumerate(self.p4_axis):
                yield (float(p1), float(p4), bool(self.feasible[i, j]),
                       float(self.p2[i, j]), float(self.p3[i, j]),
                       float(self.pinned_s_c[i, j]))

    def to_csv(self) -> str:
        return csv_text(["p1", "p4", "feasible", "p2", "p3", "s_c_pinned"],
                        self.rows())

    def summary(self) -> dict:
        feas = self.feasible
        sc = self.pinned_s_c[feas]
        return {
            "cells": int(self.feasible.size),
            "feasible_cells": self.feasible_count,
            "s_c_min": float(sc.min()) if sc.size else None,
            "s_c_max": float(sc.max()) if sc.size else None,
            "a_const": self.a_const,
            "b_const": self.b_const,
        }


def _scan_rows(p1_vals: np.ndarray, p4_axis: np.ndarray, u_c, a, b, d1, e2):
    p1g, p4g = np.meshgrid(p1_vals, p4_axis, indexing="ij")
    p2 = ((u_c[1] - u_c[3] + e2 * (u_c[2] - u_c[0])) * p1g
          + (u_c[0] - u_c[1]) * (1 + p4g)) / d1
    p3 = ((u_c[3] - u_c[2]) * (1 - p1g)
          + (u_c[0] - u_c[2]) * (1 - e2) * p4g) / d1
    p2_ok = (p2 >= -BOUNDARY_TOL) & (p2 <= 1 + BOUNDARY_TOL)
    p3_ok = (p3 >= -BOUNDARY_TOL) & (p3 <= 1 + BOUNDARY_TOL)
    corner = (p1g == 1.0) & (p4g == 0.0)
    feasible = p2_ok & p3_ok & ~corner
    code = np.zeros(p2.shape, dtype=np.int8)
    code[~p2_ok & p3_ok] = 1
    code[p2_ok & ~p3_ok] = 2
    code[~p2_ok & ~p3_ok] = 3
    code[corner] = 4
    with np.errstate(invalid="ignore", divide="ignore"):
        pinned = (a * (1 - p1g) + b * p4g) / (1 - p1g + p4g)
    pinned[corner] = np.nan
    p2 = np.where(feasible, np.clip(p2, 0.0, 1.0), p2)
    p3 = np.where(feasible, np.clip(p3, 0.0, 1.0), p3)
    return p2, p3, pinned, feasible, code


def scan_pinning_region(params: GameParams, resolution: int = 101,
                        jobs: int = 1) -> PinningGrid:
    """Evaluate solve_pinning over an inclusive uniform grid.

    Cells the solver would reject (the 0/0 corner) are marked infeasible
    with a reason code instead of raising.  `jobs` > 1 splits the p1 axis
    across a thread pool; output is identical regardless of job count.
    """
    if resolution < 2:
        raise InvalidParameterError("resolution must be at least 2")
    u_c, a, b, d1 = _pinning_constants(params)
    if abs(d1) <= 1e-12:
        raise DegenerateParameterError(
            f"pinning denominator D1 = {d1!r} is degenerate for these parameters"
        )
    axis = np.linspace(0.0, 1.0, resolution)
    chunks = np.array_split(np.arange(resolution), max(1, min(jobs, resolution)))
    work = [axis[idx] for idx in chunks if idx.size]

    def run(p1_vals):
        return _scan_rows(p1_vals, axis, u_c, a, b, d1, params.e2)

    if len(work) > 1:
        with ThreadPoolExecutor(max_workers=len(work)) as pool:
            parts = list(pool.map(run, work))
    else:
        parts = [run(w) for w in work]
    p2, p3, pinned, feasible, code = (
        np.concatenate([part[k] for part in parts], axis=0) for k in range(5)
    )
    return PinningGrid(
        p1_axis=axis, p4_axis=axis.copy(), p2=p2, p3=p3, pinned_s_c=pinned,
        feasible=feasible, reason_code=code, a_const=a, b_const=b, d1_const=d1,
    )
