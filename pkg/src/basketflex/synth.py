"""Synthetic price/quantity economies for desk-scale verification.

Real transaction data is proprietary, so correctness is argued on generated
economies where the true prices and quantities are known. The generator
emits exactly the three CSV inputs the ingestion layer reads, and
:func:`oracle_adjusted_weights` computes basket weights directly as spending
shares from the known paths, never touching the reweighting formula or the
ingestion pipeline. Agreement between that definitional oracle and the
production path is the central correctness check of the test suite.

All path arithmetic is exact decimal: monthly spending splits into category
parts and daily records that sum back to the month's figure to the last
digit. Randomness (which days carry spending, how a month splits across
records) comes from one documented PRNG, Python's Mersenne Twister seeded
from the spec, so generated files are byte-stable across platforms.
"""

from __future__ import annotations

import datetime as dt
import io
import json
import os
import random
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation, localcontext
from typing import Mapping

from .core import WeightVector, normalize_weights
from .errors import InvalidEconomySpecError, MonthOutOfRangeError
from .periods import Month, month_range

_PREC = 50
_CENT = Decimal("0.01")
_ONE = Decimal(1)


@dataclass(frozen=True)
class SyntheticItem:
    """One basket item with its base price/quantity and card-data footprint.

    ``categories`` maps transaction-category ids to the share of this item's
    spending they carry (shares sum to one exactly). An empty mapping means
    the item is unobserved in card data, like rent paid by bank transfer;
    its expenditure relative must then come from a non-provider crosswalk
    rule. By default the item is observed under its own id.
    """

    id: str
    base_price: Decimal
    base_quantity: Decimal
    label: str = ""
    categories: tuple[tuple[str, Decimal], ...] | None = None

    def category_shares(self) -> tuple[tuple[str, Decimal], ...]:
        if self.categories is None:
            return ((self.id, _ONE),)
        return self.categories


@dataclass(frozen=True)
class ShockWindow:
    """A span of months with scaled quantities and drifting prices.

    Quantity multipliers apply to the base quantity for every month inside
    the window; price drifts are month-over-month factors that compound
    while the window lasts. Items not listed keep their defaults.
    """

    start: Month
    end: Month
    quantity_multipliers: Mapping[str, Decimal] = field(default_factory=dict)
    price_drifts: Mapping[str, Decimal] = field(default_factory=dict)

    def covers(self, month: Month) -> bool:
        return self.start <= month <= self.end


@dataclass(frozen=True)
class SyntheticEconomySpec:
    """Parameters of a generated economy.

    The horizon starts at ``start`` and runs for ``months`` calendar months;
    the first ``base_months`` months form the base period and official
    weights are the spending shares over it. Price relatives are emitted
    from the second month onward (a factor needs two price levels), so an
    annual series needs a horizon of at least 13 months.
    """

    items: tuple[SyntheticItem, ...]
    months: int
    start: Month = Month(2020, 1)
    base_months: int = 2
    shock_windows: tuple[ShockWindow, ...] = ()
    base_drifts: Mapping[str, Decimal] = field(default_factory=dict)
    seed: int = 0
    max_records_per_month: int = 5

    def horizon(self) -> list[Month]:
        return month_range(self.start, self.start.plus(self.months - 1))

    def validate(self) -> None:
        if not self.items:
            raise InvalidEconomySpecError("economy needs at least one item")
        if self.months < 2:
            raise InvalidEconomySpecError("horizon must be at least two months")
        if not 1 <= self.base_months <= self.months:
            raise InvalidEconomySpecError(
                f"base_months must lie in 1..{self.months}, got {self.base_months}"
            )
        ids = [it.id for it in self.items]
        if len(set(ids)) != len(ids):
            raise InvalidEconomySpecError("duplicate item ids")
        for it in self.items:
            if it.base_price <= 0 or it.base_quantity <= 0:
                raise InvalidEconomySpecError(
                    f"base price and quantity for {it.id!r} must be > 0"
                )
            shares = it.category_shares()
            if shares:
                with localcontext() as ctx:
                    ctx.prec = _PREC
                    total = sum((s for _, s in shares), Decimal(0))
                if total != 1:
                    raise InvalidEconomySpecError(
                        f"category shares for {it.id!r} sum to {total}, not 1"
                    )
                if any(s <= 0 for _, s in shares):
                    raise InvalidEconomySpecError(
                        f"category shares for {it.id!r} must be > 0"
                    )
        cats = [c for it in self.items for c, _ in it.category_shares()]
        if len(set(cats)) != len(cats):
            raise InvalidEconomySpecError("a category is emitted by two items")
        last_end = None
        for w in self.shock_windows:
            if w.end < w.start:
                raise InvalidEconomySpecError(f"shock window {w.start}..{w.end} is inverted")
            if last_end is not None and w.start <= last_end:
                raise InvalidEconomySpecError("shock windows overlap or are unordered")
            last_end = w.end
            for name, mults in (("multiplier", w.quantity_multipliers), ("drift", w.price_drifts)):
                for item, v in mults.items():
                    if item not in set(i.id for i in self.items):
                        raise InvalidEconomySpecError(f"shock names unknown item {item!r}")
                    if v <= 0:
                        raise InvalidEconomySpecError(
                            f"{name} for {item!r} must be > 0, got {v}"
                        )
        for item, v in self.base_drifts.items():
            if v <= 0:
                raise InvalidEconomySpecError(f"base drift for {item!r} must be > 0")

    def _window_at(self, month: Month) -> ShockWindow | None:
        for w in self.shock_windows:
            if w.covers(month):
                return w
        return None

    def price_factor(self, item: str, month: Month) -> Decimal:
        """Month-over-month price factor applied entering ``month``."""
        w = self._window_at(month)
        if w is not None and item in w.price_drifts:
            return Decimal(w.price_drifts[item])
        return Decimal(self.base_drifts.get(item, _ONE))

    def quantity_multiplier(self, item: str, month: Month) -> Decimal:
        w = self._window_at(month)
        if w is not None:
            return Decimal(w.quantity_multipliers.get(item, _ONE))
        return _ONE


def monthly_spend(spec: SyntheticEconomySpec) -> dict[str, dict[Month, Decimal]]:
    """Exact nominal spending per item and month implied by the spec."""
    spec.validate()
    out: dict[str, dict[Month, Decimal]] = {}
    with localcontext() as ctx:
        ctx.prec = _PREC
        for it in spec.items:
            price = Decimal(it.base_price)
            path: dict[Month, Decimal] = {}
            for i, m in enumerate(spec.horizon()):
                if i > 0:
                    price *= spec.price_factor(it.id, m)
                qty = Decimal(it.base_quantity) * spec.quantity_multiplier(it.id, m)
                path[m] = price * qty
            out[it.id] = path
    return out


def base_spend(spec: SyntheticEconomySpec) -> dict[str, Decimal]:
    """Mean spending per item over the spec's base months."""
    spend = monthly_spend(spec)
    base = spec.horizon()[: spec.base_months]
    with localcontext() as ctx:
        ctx.prec = _PREC
        n = Decimal(spec.base_months)
        return {
            item: sum((path[m] for m in base), Decimal(0)) / n
            for item, path in spend.items()
        }


def oracle_adjusted_weights(spec: SyntheticEconomySpec, month: Month) -> WeightVector:
    """Basket weights computed directly as spending shares P*Q / sum(P*Q).

    This is the definitional left-hand side; it never touches the
    reweighting formula or the ingestion pipeline, which is what makes it
    usable as an independent oracle in tests.
    """
    spec.validate()
    if month not in spec.horizon():
        raise MonthOutOfRangeError(month)
    spend = monthly_spend(spec)
    return normalize_weights(
        {item: float(path[month]) for item, path in spend.items()}, period=month
    )


def official_weights(spec: SyntheticEconomySpec) -> WeightVector:
    """Official weights: spending shares over the base period."""
    return normalize_weights(
        {item: float(v) for item, v in base_spend(spec).items()}
    )


@dataclass(frozen=True)
class GeneratedFiles:
    weights_csv: str
    prices_csv: str
    expenditures_csv: str

    def write_to(self, directory) -> list[str]:
        os.makedirs(directory, exist_ok=True)
        written = []
        for name, content in (
            ("weights.csv", self.weights_csv),
            ("prices.csv", self.prices_csv),
            ("expenditures.csv", self.expenditures_csv),
        ):
            path = os.path.join(str(directory), name)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(content)
            written.append(path)
        return written


def _split_exact(total: Decimal, shares: list[Decimal]) -> list[Decimal]:
    """Split a decimal into cent-quantized parts that sum back exactly."""
    parts = []
    with localcontext() as ctx:
        ctx.prec = _PREC
        running = Decimal(0)
        for s in shares[:-1]:
            p = (total * s).quantize(_CENT)
            parts.append(p)
            running += p
        parts.append(total - running)
        if parts[-1] < 0 and len(parts) > 1:
            # rounding pushed the remainder negative; shift it onto the
            # largest earlier part so the sum stays exact
            i = max(range(len(parts) - 1), key=lambda j: parts[j])
            parts[i] += parts[-1]
            parts[-1] = Decimal(0)
    return parts


def generate(spec: SyntheticEconomySpec) -> GeneratedFiles:
    """Emit weights.csv, prices.csv and expenditures.csv for an economy.

    Official weights are base-period spending shares; price relatives are
    the exact drift factors of the price paths (from the second month on);
    expenditures spread each category's monthly figure across a few random
    days, with the split chosen so the records sum back exactly.
    """
    spec.validate()
    rng = random.Random(spec.seed)
    horizon = spec.horizon()
    spend = monthly_spend(spec)

    wbuf = io.StringIO()
    wbuf.write("item,weight\n")
    for item, share in official_weights(spec).shares.items():
        wbuf.write(f"{item},{share!r}\n")

    pbuf = io.StringIO()
    pbuf.write("item,period,relative\n")
    for it in spec.items:
        for m in horizon[1:]:
            pbuf.write(f"{it.id},{m},{spec.price_factor(it.id, m)}\n")

    records: list[tuple[dt.date, str, Decimal]] = []
    for it in spec.items:
        for m in horizon:
            cat_parts = _split_exact(
                spend[it.id][m], [s for _, s in it.category_shares()]
            )
            for (cat, _), part in zip(it.category_shares(), cat_parts):
                k = rng.randint(1, min(spec.max_records_per_month, m.days()))
                if part < 1:  # too small to split into cent-quantized pieces
                    k = 1
                days = sorted(rng.sample(range(1, m.days() + 1), k))
                cuts = [Decimal(rng.randint(1, 1000)) for _ in range(k)]
                with localcontext() as ctx:
                    ctx.prec = _PREC
                    total_cut = sum(cuts, Decimal(0))
                    day_parts = _split_exact(part, [c / total_cut for c in cuts])
                for day, amount in zip(days, day_parts):
                    records.append((dt.date(m.year, m.month, day), cat, amount))
    records.sort(key=lambda r: (r[0], r[1]))
    ebuf = io.StringIO()
    ebuf.write("date,category,amount\n")
    for date, cat, amount in records:
        ebuf.write(f"{date.isoformat()},{cat},{amount}\n")

    return GeneratedFiles(
        weights_csv=wbuf.getvalue(),
        prices_csv=pbuf.getvalue(),
        expenditures_csv=ebuf.getvalue(),
    )


# --- JSON form used by the CLI ---------------------------------------------
#
# {
#   "start": "2020-01", "months": 18, "base_months": 2, "seed": 7,
#   "items": [{"id": "food", "label": "...", "base_price": "1",
#              "base_quantity": "140", "categories": {"food-stores": "1"}}],
#   "base_drifts": {"food": "1.001"},
#   "shock_windows": [{"start": "2020-03", "end": "2020-05",
#                      "quantity_multipliers": {"food": "1.15"},
#                      "price_drifts": {"food": "1.002"}}]
# }
#
# Numeric values are strings so they stay exact decimals.


def _dec(value, what: str) -> Decimal:
    try:
        return Decimal(str(value))
    except InvalidOperation:
        raise InvalidEconomySpecError(f"bad decimal for {what}: {value!r}")


def parse_economy(text: str) -> SyntheticEconomySpec:
    """Parse the JSON description of a synthetic economy."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidEconomySpecError(f"not valid JSON: {exc}")
    if not isinstance(doc, dict) or "items" not in doc or "months" not in doc:
        raise InvalidEconomySpecError("economy needs at least `items` and `months`")
    try:
        items = []
        for entry in doc["items"]:
            cats = None
            if "categories" in entry:
                cats = tuple(
                    (str(c), _dec(s, f"category share {c}"))
                    for c, s in entry["categories"].items()
                )
            items.append(
                SyntheticItem(
                    id=str(entry["id"]),
                    base_price=_dec(entry.get("base_price", "1"), "base_price"),
                    base_quantity=_dec(entry.get("base_quantity", "1"), "base_quantity"),
                    label=str(entry.get("label", "")),
                    categories=cats,
                )
            )
        windows = []
        for w in doc.get("shock_windows", []):
            windows.append(
                ShockWindow(
                    start=Month.parse(w["start"]),
                    end=Month.parse(w["end"]),
                    quantity_multipliers={
                        str(i): _dec(v, f"multiplier {i}")
                        for i, v in w.get("quantity_multipliers", {}).items()
                    },
                    price_drifts={
                        str(i): _dec(v, f"drift {i}")
                        for i, v in w.get("price_drifts", {}).items()
                    },
                )
            )
        spec = SyntheticEconomySpec(
            items=tuple(items),
            months=int(doc["months"]),
            start=Month.parse(doc.get("start", "2020-01")),
            base_months=int(doc.get("base_months", 2)),
            shock_windows=tuple(windows),
            base_drifts={
                str(i): _dec(v, f"base drift {i}")
                for i, v in doc.get("base_drifts", {}).items()
            },
            seed=int(doc.get("seed", 0)),
            max_records_per_month=int(doc.get("max_records_per_month", 5)),
        )
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        raise InvalidEconomySpecError(f"malformed economy description: {exc}")
    spec.validate()
    return spec


def load_economy(path) -> SyntheticEconomySpec:
    with open(path, encoding="utf-8") as fh:
        return parse_economy(fh.read())
