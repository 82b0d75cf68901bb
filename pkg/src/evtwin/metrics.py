"""Evaluation metrics and the scalar objective used by the optimizers.

Zero-denominator conventions are vacuous successes (satisfaction 1.0 when
nothing was requested, self-consumption 1.0 when nothing was generated) so
the objective stays defined on degenerate configurations that search
algorithms are free to visit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .energy import EnergyConfig, EnergyLedger, financial_summary

DEFAULT_PAYBACK_THRESHOLD_MONTHS = 60.0
DEFAULT_SELF_SUFFICIENCY_WEIGHT = 0.8


@dataclass(frozen=True)
class MetricSet:
    satisfaction: float
    self_sufficiency: float
    self_consumption: float
    payback_months: float
    normalized_payback: float
    objective: float
    payback_threshold_months: float = DEFAULT_PAYBACK_THRESHOLD_MONTHS

    def as_dict(self) -> dict:
        return {
            "satisfaction": self.satisfaction,
            "self_sufficiency": self.self_sufficiency,
            "self_consumption": self.self_consumption,
            "payback_months": self.payback_months if math.isfinite(self.payback_months) else None,
            "normalized_payback": self.normalized_payback,
            "objective": self.objective,
            "payback_threshold_months": self.payback_threshold_months,
        }


def satisfaction(day_reports) -> float:
    """Fraction of charge-requesting EVs that got a charging session;
    1.0 when nothing was requested."""
    requested = sum(r.ev_requested for r in day_reports)
    satisfied = sum(r.ev_satisfied for r in day_reports)
    if requested == 0:
        return 1.0
    return satisfied / requested


def self_sufficiency(ledger: EnergyLedger) -> float:
    """Share of charging demand served by on-site renewables (incl. BESS)."""
    if ledger.demand_kwh == 0.0:
        return 1.0
    return ledger.renewable_served_kwh / ledger.demand_kwh


def self_consumption(ledger: EnergyLedger) -> float:
    """Share of generated renewable energy that was actually consumed."""
    generated = ledger.solar_generated_kwh + ledger.wind_generated_kwh
    if generated == 0.0:
        return 1.0
    return ledger.renewable_served_kwh / generated


def normalize_payback(
    payback_months: float,
    threshold_months: float = DEFAULT_PAYBACK_THRESHOLD_MONTHS,
    prefer_short: bool = False,
) -> float:
    """Map a payback period onto (0, 1].

    The published form is ``x/threshold`` up to the threshold and
    ``exp((threshold - x)/threshold)`` beyond it; both branches meet at
    1.0 exactly at the threshold. Note the linear branch *rewards longer*
    paybacks below the threshold; ``prefer_short=True`` switches to a
    decreasing alternative (1 at x=0, linear to 0 at the threshold, then
    the same exponential tail rebased) for sensitivity studies. The
    default is the published form.
    """
    if threshold_months <= 0:
        raise ValueError(f"threshold must be > 0, got {threshold_months}")
    if math.isinf(payback_months):
        return 0.0
    if payback_months < 0:
        raise ValueError(f"payback must be >= 0, got {payback_months}")
    x, t = payback_months, threshold_months
    if prefer_short:
        return max(0.0, 1.0 - x / t)
    if x <= t:
        return x / t
    return math.exp((t - x) / t)


def objective(
    m: "MetricSet | None" = None,
    *,
    satisfaction_score: float | None = None,
    normalized_payback_score: float | None = None,
    self_sufficiency_score: float | None = None,
    self_sufficiency_weight: float = DEFAULT_SELF_SUFFICIENCY_WEIGHT,
) -> float:
    """Weighted sum: satisfaction + normalized payback + w * self-sufficiency."""
    if m is not None:
        return m.satisfaction + m.normalized_payback + self_sufficiency_weight * m.self_sufficiency
    return (
        satisfaction_score
        + normalized_payback_score
        + self_sufficiency_weight * self_sufficiency_score
    )


def compute_metrics(
    day_reports,
    cfg_energy: EnergyConfig,
    payback_threshold_months: float = DEFAULT_PAYBACK_THRESHOLD_MONTHS,
    self_sufficiency_weight: float = DEFAULT_SELF_SUFFICIENCY_WEIGHT,
) -> MetricSet:
    """Assemble the full metric record from a run's day reports."""
    if not day_reports:
        raise ValueError("need at least one day report")
    ledger = day_reports[-1].ledger_total
    fin = financial_summary(ledger, cfg_energy)
    sat = satisfaction(day_reports)
    ssuf = self_sufficiency(ledger)
    scon = self_consumption(ledger)
    npb = normalize_payback(fin["payback_months"], payback_threshold_months)
    obj = sat + npb + self_sufficiency_weight * ssuf
    return MetricSet(
        satisfaction=sat,
        self_sufficiency=ssuf,
        self_consumption=scon,
        payback_months=fin["payback_months"],
        normalized_payback=npb,
        objective=obj,
        payback_threshold_months=payback_threshold_months,
    )
