"""Loading, validation and monthly aggregation of the three input files.

File schemas (UTF-8, header row required, ``#`` comment lines permitted):

* ``expenditures.csv`` — ``date (ISO-8601), category, amount (decimal)``
* ``weights.csv``      — ``item, weight``
* ``prices.csv``       — ``item, period (YYYY-MM), relative (decimal factor)``

Monetary amounts are parsed as exact decimal strings and accumulated in a
high-precision decimal context, so aggregation is permutation-invariant;
they are converted to binary floating point only when a ratio is taken.
A monthly panel can also be written back out (``month, category, amount``)
and re-loaded bit-exactly.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import math
import warnings
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation, localcontext
from typing import Iterable, Iterator

from .core import ItemId, PriceRelativeSeries, WeightVector, normalize_weights
from .crosswalk import CategoryId
from .errors import (
    BaseMonthMissingError,
    EmptyInputError,
    GapWarning,
    MalformedRecordError,
    MissingCellWarning,
    NegativeTotalError,
    NonFiniteAmountError,
    NonPositivePriceError,
    SchemaError,
    WeightSumOutOfRangeError,
    WeightSumWarning,
)
from .periods import Month, is_consecutive, month_range

# Loaded weights must sum to one; deviations up to the warn gate pass
# silently, deviations up to the error gate renormalize with a warning,
# anything beyond is rejected.
WEIGHT_SUM_WARN = 1e-6
WEIGHT_SUM_ERROR = 1e-2

_PREC = 50


@dataclass(frozen=True)
class DailyExpenditureRecord:
    date: dt.date
    category: CategoryId
    amount: Decimal

    def __post_init__(self) -> None:
        if not self.amount.is_finite():
            raise NonFiniteAmountError(
                f"amount for {self.category!r} on {self.date} is not finite"
            )


class ExpenditurePanel:
    """Per-category monthly expenditure totals over a gapless month span."""

    def __init__(self, months: Iterable[Month], totals: dict[tuple[CategoryId, Month], Decimal]):
        self.months: tuple[Month, ...] = tuple(months)
        if not self.months:
            raise EmptyInputError("panel covers no months")
        if not is_consecutive(self.months):
            raise ValueError("panel months must be consecutive")
        self.categories: tuple[CategoryId, ...] = tuple(
            sorted({c for c, _ in totals})
        )
        if not self.categories:
            raise EmptyInputError("panel has no categories")
        self._totals: dict[tuple[CategoryId, Month], Decimal] = {}
        missing = 0
        for c in self.categories:
            for m in self.months:
                v = totals.get((c, m))
                if v is None:
                    missing += 1
                    v = Decimal(0)
                if v < 0:
                    raise NegativeTotalError(c, m)
                self._totals[(c, m)] = v
        if missing:
            warnings.warn(
                f"{missing} category-month cells had no records and were set to 0",
                MissingCellWarning,
                stacklevel=2,
            )

    def total(self, category: CategoryId, month: Month) -> Decimal:
        return self._totals[(category, month)]

    def month_total(self, month: Month) -> Decimal:
        with localcontext() as ctx:
            ctx.prec = _PREC
            return sum(
                (self._totals[(c, month)] for c in self.categories), Decimal(0)
            )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ExpenditurePanel)
            and self.months == other.months
            and self.categories == other.categories
            and self._totals == other._totals
        )


def aggregate_daily(
    records: Iterable[DailyExpenditureRecord], allow_negative: bool = False
) -> ExpenditurePanel:
    """Sum daily records into calendar-month totals.

    The panel spans min..max record date; months inside the span with no
    records at all raise a GapWarning and are filled with zeros. Negative
    amounts (refunds, chargebacks) are rejected unless ``allow_negative``;
    even then each monthly total must come out non-negative.
    """
    sums: dict[tuple[CategoryId, Month], Decimal] = {}
    months_seen: set[Month] = set()
    first: dt.date | None = None
    last: dt.date | None = None
    with localcontext() as ctx:
        ctx.prec = _PREC
        for rec in records:
            if rec.amount < 0 and not allow_negative:
                raise MalformedRecordError(
                    0, f"negative amount {rec.amount} for {rec.category!r} on {rec.date}"
                )
            m = Month.of_date(rec.date)
            key = (rec.category, m)
            sums[key] = sums.get(key, Decimal(0)) + rec.amount
            months_seen.add(m)
            first = rec.date if first is None or rec.date < first else first
            last = rec.date if last is None or rec.date > last else last
    if first is None:
        raise EmptyInputError("no expenditure records")
    months = month_range(Month.of_date(first), Month.of_date(last))
    empty = [m for m in months if m not in months_seen]
    if empty:
        warnings.warn(
            f"no records in {', '.join(str(m) for m in empty)}; totals set to 0",
            GapWarning,
            stacklevel=2,
        )
    return ExpenditurePanel(months, sums)


def base_period(
    panel: ExpenditurePanel, base_months: Iterable[Month], per_day: bool = False
) -> dict[CategoryId, Decimal]:
    """Average expenditure per category over the listed base months.

    The base is the mean of calendar-month totals; ``per_day=True`` divides
    each month by its day count first (and must then be paired with
    ``per_day=True`` in crosswalk application). Categories with zero base
    spending are returned as zero and rejected downstream where a ratio
    would be taken.
    """
    base_months = list(base_months)
    if not base_months:
        raise EmptyInputError("no base months given")
    for m in base_months:
        if m not in panel.months:
            raise BaseMonthMissingError(m)
    out: dict[CategoryId, Decimal] = {}
    with localcontext() as ctx:
        ctx.prec = _PREC
        n = Decimal(len(base_months))
        for c in panel.categories:
            if per_day:
                total = sum(
                    (panel.total(c, m) / Decimal(m.days()) for m in base_months),
                    Decimal(0),
                )
            else:
                total = sum((panel.total(c, m) for m in base_months), Decimal(0))
            out[c] = total / n
    return out


# --- CSV plumbing ----------------------------------------------------------


def _csv_rows(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        yield lineno, next(csv.reader([raw]))


def _check_header(row: list[str], expected: tuple[str, ...], line: int) -> None:
    got = [c.strip().lower() for c in row]
    if got != list(expected):
        missing = [c for c in expected if c not in got]
        col = missing[0] if missing else ",".join(got)
        raise SchemaError(col, line, f"expected header {','.join(expected)}")


def _read(path_or_text) -> str:
    if hasattr(path_or_text, "read"):
        return path_or_text.read()
    with open(path_or_text, encoding="utf-8") as fh:
        return fh.read()


def load_expenditures(path, allow_negative: bool = False) -> list[DailyExpenditureRecord]:
    """Read daily expenditure records from ``expenditures.csv``."""
    text = _read(path)
    rows = _csv_rows(text)
    try:
        line, header = next(rows)
    except StopIteration:
        raise SchemaError("date", 0, "file is empty")
    _check_header(header, ("date", "category", "amount"), line)
    records = []
    for line, row in rows:
        if len(row) != 3:
            raise MalformedRecordError(line, f"expected 3 fields, got {len(row)}")
        raw_date, category, raw_amount = (f.strip() for f in row)
        try:
            date = dt.date.fromisoformat(raw_date)
        except ValueError:
            raise MalformedRecordError(line, f"bad date {raw_date!r}")
        if not category:
            raise MalformedRecordError(line, "empty category")
        try:
            amount = Decimal(raw_amount)
        except InvalidOperation:
            raise MalformedRecordError(line, f"bad amount {raw_amount!r}")
        if not amount.is_finite():
            raise NonFiniteAmountError(f"line {line}: non-finite amount {raw_amount!r}")
        if amount < 0 and not allow_negative:
            raise MalformedRecordError(line, f"negative amount {raw_amount!r}")
        records.append(DailyExpenditureRecord(date, category, amount))
    return records


def load_weights(path) -> WeightVector:
    """Read official basket weights from ``weights.csv``.

    The column sum is gated: within 1e-6 of one it is accepted silently,
    within 1e-2 it is renormalized with a warning, beyond that it is
    rejected as WeightSumOutOfRangeError.
    """
    text = _read(path)
    rows = _csv_rows(text)
    try:
        line, header = next(rows)
    except StopIteration:
        raise SchemaError("item", 0, "file is empty")
    _check_header(header, ("item", "weight"), line)
    raw: dict[ItemId, float] = {}
    for line, row in rows:
        if len(row) != 2:
            raise SchemaError("weight", line, f"expected 2 fields, got {len(row)}")
        item, value = (f.strip() for f in row)
        if not item:
            raise SchemaError("item", line, "empty item id")
        if item in raw:
            raise SchemaError("item", line, f"duplicate item {item!r}")
        try:
            raw[item] = float(value)
        except ValueError:
            raise SchemaError("weight", line, f"bad weight {value!r}")
        if not math.isfinite(raw[item]):
            raise SchemaError("weight", line, f"non-finite weight {value!r}")
    if not raw:
        raise EmptyInputError("weights file has no rows")
    total = sum(raw.values())
    dev = abs(total - 1.0)
    if dev >= WEIGHT_SUM_ERROR:
        raise WeightSumOutOfRangeError(total)
    if dev > WEIGHT_SUM_WARN:
        warnings.warn(
            f"weights sum to {total:.6f}; renormalizing", WeightSumWarning, stacklevel=2
        )
    return normalize_weights(raw)


def load_prices(path) -> dict[ItemId, PriceRelativeSeries]:
    """Read per-item month-over-month price factors from ``prices.csv``."""
    text = _read(path)
    rows = _csv_rows(text)
    try:
        line, header = next(rows)
    except StopIteration:
        raise SchemaError("item", 0, "file is empty")
    _check_header(header, ("item", "period", "relative"), line)
    by_item: dict[ItemId, dict[Month, float]] = {}
    for line, row in rows:
        if len(row) != 3:
            raise SchemaError("relative", line, f"expected 3 fields, got {len(row)}")
        item, raw_period, raw_rel = (f.strip() for f in row)
        if not item:
            raise SchemaError("item", line, "empty item id")
        try:
            period = Month.parse(raw_period)
        except ValueError:
            raise SchemaError("period", line, f"bad period {raw_period!r}")
        try:
            rel = float(raw_rel)
        except ValueError:
            raise SchemaError("relative", line, f"bad relative {raw_rel!r}")
        if rel <= 0:
            raise NonPositivePriceError(item, period)
        series = by_item.setdefault(item, {})
        if period in series:
            raise SchemaError("period", line, f"duplicate period {period} for {item!r}")
        series[period] = rel
    if not by_item:
        raise EmptyInputError("prices file has no rows")
    return {
        item: PriceRelativeSeries.from_mapping(item, pts)
        for item, pts in by_item.items()
    }


def panel_to_csv(panel: ExpenditurePanel) -> str:
    """Serialize a panel as ``month, category, amount`` rows.

    Amounts keep their exact decimal string, so a write/load round trip
    reproduces the panel bit-exactly.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["month", "category", "amount"])
    for m in panel.months:
        for c in panel.categories:
            w.writerow([str(m), c, str(panel.total(c, m))])
    return buf.getvalue()


def load_panel(path) -> ExpenditurePanel:
    """Read a monthly panel written by :func:`panel_to_csv`."""
    text = _read(path)
    rows = _csv_rows(text)
    try:
        line, header = next(rows)
    except StopIteration:
        raise SchemaError("month", 0, "file is empty")
    _check_header(header, ("month", "category", "amount"), line)
    totals: dict[tuple[CategoryId, Month], Decimal] = {}
    months: set[Month] = set()
    for line, row in rows:
        if len(row) != 3:
            raise MalformedRecordError(line, f"expected 3 fields, got {len(row)}")
        raw_month, category, raw_amount = (f.strip() for f in row)
        try:
            month = Month.parse(raw_month)
        except ValueError:
            raise MalformedRecordError(line, f"bad month {raw_month!r}")
        try:
            amount = Decimal(raw_amount)
        except InvalidOperation:
            raise MalformedRecordError(line, f"bad amount {raw_amount!r}")
        key = (category, month)
        if key in totals:
            raise MalformedRecordError(line, f"duplicate cell {category!r} {month}")
        totals[key] = amount
        months.add(month)
    if not totals:
        raise EmptyInputError("panel file has no rows")
    return ExpenditurePanel(month_range(min(months), max(months)), totals)
