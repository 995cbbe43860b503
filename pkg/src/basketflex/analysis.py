"""End-to-end scenarios: official vs. adjusted series, core variants, bias.

A scenario wires the whole pipeline together for one country/dataset: the
expenditure panel is compared to its base period through the crosswalk, the
official basket is reweighted month by month, both baskets are priced with
the same item price relatives, annual rates are chained, and the bias series
is the official-minus-adjusted gap. Negative bias therefore means official
inflation understates what the expenditure-adjusted basket measures; this
sign convention is fixed across the package and in all emitted files.

Lockdown windows are annotations only: they are carried into the plot data
(an ``in_lockdown`` column and result metadata) and never change any number.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace
from typing import Iterable, Mapping

from . import crosswalk as cw
from . import ingest
from .core import (
    BiasPoint,
    InflationPoint,
    ItemId,
    PriceRelativeSeries,
    WeightVector,
    adjusted_weights,
    chain_annual,
    exclude_items,
    fixed_base_annual,
    monthly_inflation,
    weighting_bias,
)
from .errors import (
    FixedMonthOutOfRangeError,
    MissingPriceRelativeError,
    NoOverlappingPeriodsError,
    PeriodNotCoveredError,
    SpecInvalidError,
)
from .periods import Month, month_range

ANNUAL_METHODS = ("chained", "fixed_base")

SERIES_NAMES = ("official", "adjusted", "core_official", "core_adjusted")


@dataclass(frozen=True)
class ScenarioConfig:
    """Knobs for one scenario run.

    ``annual_method`` selects how 12-month rates are built: ``chained``
    compounds the monthly rates (the default; the only construction fully
    consistent with weights that change every month) or ``fixed_base``,
    which reprices each item's compounded 12-month change with the current
    basket, kept as a comparison variant.
    """

    base_months: tuple[Month, ...]
    core_exclusions: frozenset[ItemId] = frozenset()
    fixed_weight_month: Month | None = None
    lockdown_windows: tuple[tuple[dt.date, dt.date], ...] = ()
    country_label: str = ""
    annual_method: str = "chained"
    per_day_base: bool = False

    def __post_init__(self) -> None:
        if not self.base_months:
            raise ValueError("at least one base month is required")
        if self.annual_method not in ANNUAL_METHODS:
            raise ValueError(f"annual_method must be one of {ANNUAL_METHODS}")
        last_end = None
        for start, end in self.lockdown_windows:
            if end < start:
                raise ValueError(f"lockdown window {start}..{end} is inverted")
            if last_end is not None and start <= last_end:
                raise ValueError("lockdown windows must be ordered and non-overlapping")
            last_end = end

    @property
    def variant(self) -> str:
        if self.fixed_weight_month is not None:
            return f"fixed-weight-{self.fixed_weight_month}"
        return "dynamic"

    def in_lockdown(self, month: Month) -> bool:
        first, last = month.first_day(), month.last_day()
        return any(start <= last and end >= first for start, end in self.lockdown_windows)


@dataclass(frozen=True)
class ScenarioResult:
    """Aligned monthly output of one scenario.

    All series share ``periods`` as their axis; weight paths carry one
    vector per period for each basket.
    """

    config: ScenarioConfig
    periods: tuple[Month, ...]
    official_weights: tuple[WeightVector, ...]
    adjusted_weights: tuple[WeightVector, ...]
    official: tuple[InflationPoint, ...]
    adjusted: tuple[InflationPoint, ...]
    core_official: tuple[InflationPoint, ...]
    core_adjusted: tuple[InflationPoint, ...]
    bias: tuple[BiasPoint, ...]
    core_bias: tuple[BiasPoint, ...]

    @property
    def country_label(self) -> str:
        return self.config.country_label

    def series(self, name: str) -> tuple[InflationPoint, ...]:
        if name not in SERIES_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def bias_at(self, period: Month) -> BiasPoint:
        for b in self.bias:
            if b.period == period:
                return b
        raise PeriodNotCoveredError(self.config.country_label, period)


def _annualized(
    points: list[InflationPoint],
    weights_per_point: list[WeightVector],
    prices: Mapping[ItemId, PriceRelativeSeries],
    method: str,
) -> list[InflationPoint]:
    if method == "chained":
        return chain_annual(points)
    out = []
    for i, p in enumerate(points):
        if i < 11:
            out.append(replace(p, annual_pct=None))
        else:
            out.append(
                replace(
                    p,
                    annual_pct=fixed_base_annual(weights_per_point[i], prices, p.period),
                )
            )
    return out


def run_scenario(
    config: ScenarioConfig,
    weights: WeightVector,
    prices: Mapping[ItemId, PriceRelativeSeries],
    panel: ingest.ExpenditurePanel,
    spec: cw.CrosswalkSpec,
) -> ScenarioResult:
    """Run the full pipeline over the overlap of panel and price coverage.

    Per month: expenditure relatives via the crosswalk, adjusted weights,
    official and adjusted inflation with contributions, core variants on the
    renormalized exclusion set (official core weights are renormalized the
    same way, otherwise the asymmetry would fabricate bias), annual rates,
    and the bias series. When ``config.fixed_weight_month`` is set, adjusted
    weights are frozen at that month's values for every period.
    """
    findings = cw.validate(spec, set(weights.shares), panel.categories)
    if findings:
        raise SpecInvalidError(findings)
    base = ingest.base_period(panel, config.base_months, per_day=config.per_day_base)
    rel_by_month = cw.apply(spec, panel, base, per_day=config.per_day_base)

    basket_prices: dict[ItemId, PriceRelativeSeries] = {}
    for item in weights.shares:
        series = prices.get(item)
        if series is None:
            raise MissingPriceRelativeError(item)
        basket_prices[item] = series
    start = max(s.start for s in basket_prices.values())
    end = min(s.end for s in basket_prices.values())
    if end < start:
        raise NoOverlappingPeriodsError("price series share no common months")
    axis = [m for m in month_range(start, end) if m in rel_by_month]
    if not axis:
        raise NoOverlappingPeriodsError(
            "expenditure panel and price series share no months"
        )

    if config.fixed_weight_month is not None:
        if config.fixed_weight_month not in axis:
            raise FixedMonthOutOfRangeError(config.fixed_weight_month)
        frozen = adjusted_weights(weights, rel_by_month[config.fixed_weight_month])
        adj_vectors = [replace(frozen, period=m) for m in axis]
    else:
        adj_vectors = [adjusted_weights(weights, rel_by_month[m]) for m in axis]
    off_vectors = [replace(weights, period=m) for m in axis]

    core_off = exclude_items(weights, config.core_exclusions)
    core_adj_vectors = [exclude_items(v, config.core_exclusions) for v in adj_vectors]
    core_prices = {i: s for i, s in basket_prices.items() if i in core_off.shares}

    official_pts = [monthly_inflation(weights, basket_prices, m) for m in axis]
    adjusted_pts = [
        monthly_inflation(v, basket_prices, m) for v, m in zip(adj_vectors, axis)
    ]
    core_off_pts = [monthly_inflation(core_off, core_prices, m) for m in axis]
    core_adj_pts = [
        monthly_inflation(v, core_prices, m) for v, m in zip(core_adj_vectors, axis)
    ]

    method = config.annual_method
    official_pts = _annualized(official_pts, off_vectors, basket_prices, method)
    adjusted_pts = _annualized(adjusted_pts, adj_vectors, basket_prices, method)
    core_off_pts = _annualized(
        core_off_pts, [core_off] * len(axis), core_prices, method
    )
    core_adj_pts = _annualized(core_adj_pts, core_adj_vectors, core_prices, method)

    return ScenarioResult(
        config=config,
        periods=tuple(axis),
        official_weights=tuple(off_vectors),
        adjusted_weights=tuple(adj_vectors),
        official=tuple(official_pts),
        adjusted=tuple(adjusted_pts),
        core_official=tuple(core_off_pts),
        core_adjusted=tuple(core_adj_pts),
        bias=tuple(weighting_bias(official_pts, adjusted_pts)),
        core_bias=tuple(weighting_bias(core_off_pts, core_adj_pts)),
    )


def run_fixed_weight(
    config: ScenarioConfig,
    weights: WeightVector,
    prices: Mapping[ItemId, PriceRelativeSeries],
    panel: ingest.ExpenditurePanel,
    spec: cw.CrosswalkSpec,
) -> ScenarioResult:
    """Robustness variant with adjusted weights frozen at one month."""
    if config.fixed_weight_month is None:
        raise ValueError("config.fixed_weight_month must be set for a fixed-weight run")
    return run_scenario(config, weights, prices, panel, spec)


@dataclass(frozen=True)
class CountryBias:
    """One comparison-table row: the weighting bias of one scenario."""

    country: str
    monthly_pp: float
    annual_pp: float | None
    sign: str


def compare_countries(
    results: Iterable[ScenarioResult], period: Month
) -> list[CountryBias]:
    """Bias of each scenario at one month, sorted most negative first.

    Both the monthly and (when twelve months are available) the annualized
    difference are reported; the sign column follows the monthly figure.
    """
    rows = []
    for r in results:
        b = r.bias_at(period)
        if b.monthly_pp < 0:
            sign = "negative"
        elif b.monthly_pp > 0:
            sign = "positive"
        else:
            sign = "zero"
        rows.append(
            CountryBias(
                country=r.config.country_label,
                monthly_pp=b.monthly_pp,
                annual_pp=b.annual_pp,
                sign=sign,
            )
        )
    rows.sort(key=lambda row: (row.monthly_pp, row.country))
    return rows


# --- serialization ----------------------------------------------------------


def _point_dict(p: InflationPoint) -> dict:
    return {
        "period": str(p.period),
        "monthly_pct": p.monthly_pct,
        "annual_pct": p.annual_pct,
        "contributions": {i: p.contributions[i] for i in sorted(p.contributions)},
    }


def _bias_dict(b: BiasPoint) -> dict:
    return {"period": str(b.period), "monthly_pp": b.monthly_pp, "annual_pp": b.annual_pp}


def _weights_dicts(vectors: Iterable[WeightVector]) -> list[dict]:
    return [
        {
            "period": str(v.period),
            "raw_sum": v.raw_sum,
            "shares": {i: v.shares[i] for i in sorted(v.shares)},
        }
        for v in vectors
    ]


def result_to_dict(result: ScenarioResult) -> dict:
    """JSON-ready form of a scenario result; see ``result_from_dict``."""
    cfg = result.config
    return {
        "schema": "basketflex.scenario_result/1",
        "country": cfg.country_label,
        "variant": cfg.variant,
        "config": {
            "base_months": [str(m) for m in cfg.base_months],
            "core_exclusions": sorted(cfg.core_exclusions),
            "fixed_weight_month": (
                str(cfg.fixed_weight_month) if cfg.fixed_weight_month else None
            ),
            "lockdown_windows": [
                [start.isoformat(), end.isoformat()]
                for start, end in cfg.lockdown_windows
            ],
            "annual_method": cfg.annual_method,
            "per_day_base": cfg.per_day_base,
        },
        "periods": [str(m) for m in result.periods],
        "in_lockdown": [cfg.in_lockdown(m) for m in result.periods],
        "weights": {
            "official": _weights_dicts(result.official_weights),
            "adjusted": _weights_dicts(result.adjusted_weights),
        },
        "series": {name: [_point_dict(p) for p in result.series(name)] for name in SERIES_NAMES},
        "bias": [_bias_dict(b) for b in result.bias],
        "core_bias": [_bias_dict(b) for b in result.core_bias],
    }


def result_from_dict(doc: Mapping) -> ScenarioResult:
    """Rebuild a scenario result from its JSON form."""
    cfg_doc = doc["config"]
    config = ScenarioConfig(
        base_months=tuple(Month.parse(m) for m in cfg_doc["base_months"]),
        core_exclusions=frozenset(cfg_doc.get("core_exclusions", ())),
        fixed_weight_month=(
            Month.parse(cfg_doc["fixed_weight_month"])
            if cfg_doc.get("fixed_weight_month")
            else None
        ),
        lockdown_windows=tuple(
            (dt.date.fromisoformat(a), dt.date.fromisoformat(b))
            for a, b in cfg_doc.get("lockdown_windows", ())
        ),
        country_label=doc.get("country", ""),
        annual_method=cfg_doc.get("annual_method", "chained"),
        per_day_base=cfg_doc.get("per_day_base", False),
    )

    def points(entries) -> tuple[InflationPoint, ...]:
        return tuple(
            InflationPoint(
                period=Month.parse(e["period"]),
                monthly_pct=e["monthly_pct"],
                contributions=dict(e.get("contributions", {})),
                annual_pct=e.get("annual_pct"),
            )
            for e in entries
        )

    def biases(entries) -> tuple[BiasPoint, ...]:
        return tuple(
            BiasPoint(
                period=Month.parse(e["period"]),
                monthly_pp=e["monthly_pp"],
                annual_pp=e.get("annual_pp"),
            )
            for e in entries
        )

    def vectors(entries) -> tuple[WeightVector, ...]:
        return tuple(
            WeightVector(
                shares=dict(e["shares"]),
                period=Month.parse(e["period"]),
                raw_sum=e.get("raw_sum", 1.0),
            )
            for e in entries
        )

    return ScenarioResult(
        config=config,
        periods=tuple(Month.parse(m) for m in doc["periods"]),
        official_weights=vectors(doc["weights"]["official"]),
        adjusted_weights=vectors(doc["weights"]["adjusted"]),
        official=points(doc["series"]["official"]),
        adjusted=points(doc["series"]["adjusted"]),
        core_official=points(doc["series"]["core_official"]),
        core_adjusted=points(doc["series"]["core_adjusted"]),
        bias=biases(doc["bias"]),
        core_bias=biases(doc["core_bias"]),
    )


def _fmt(x: float | None) -> str:
    return "" if x is None else repr(x)


def inflation_rows(result: ScenarioResult) -> list[list[str]]:
    """Tidy rows: one per period and series, for plotting the rate panels."""
    rows = [["period", "series", "monthly_pct", "annual_pct", "in_lockdown"]]
    for name in SERIES_NAMES:
        for p in result.series(name):
            rows.append(
                [
                    str(p.period),
                    name,
                    _fmt(p.monthly_pct),
                    _fmt(p.annual_pct),
                    str(int(result.config.in_lockdown(p.period))),
                ]
            )
    return rows


def weight_rows(result: ScenarioResult) -> list[list[str]]:
    """Tidy rows: one per period, basket and item, for weight-path plots."""
    rows = [["period", "basket", "item", "weight", "in_lockdown"]]
    for basket, vectors in (
        ("official", result.official_weights),
        ("adjusted", result.adjusted_weights),
    ):
        for v in vectors:
            flag = str(int(result.config.in_lockdown(v.period)))
            for item in sorted(v.shares):
                rows.append([str(v.period), basket, item, _fmt(v.shares[item]), flag])
    return rows


def contribution_rows(result: ScenarioResult) -> list[list[str]]:
    """Tidy rows: one per period, series and item, in percentage points."""
    rows = [["period", "series", "item", "contribution_pp"]]
    for name in SERIES_NAMES:
        for p in result.series(name):
            for item in sorted(p.contributions):
                rows.append([str(p.period), name, item, _fmt(p.contributions[item])])
    return rows


def bias_rows(result: ScenarioResult) -> list[list[str]]:
    """Tidy rows: headline and core bias per period."""
    rows = [["period", "scope", "monthly_pp", "annual_pp"]]
    for scope, series in (("headline", result.bias), ("core", result.core_bias)):
        for b in series:
            rows.append([str(b.period), scope, _fmt(b.monthly_pp), _fmt(b.annual_pp)])
    return rows


def comparison_rows(rows: Iterable[CountryBias]) -> list[list[str]]:
    out = [["country", "monthly_bias_pp", "annual_bias_pp", "sign"]]
    for r in rows:
        out.append([r.country, _fmt(r.monthly_pp), _fmt(r.annual_pp), r.sign])
    return out
