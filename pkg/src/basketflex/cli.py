"""Command-line front end composing the pipeline.

Batch-oriented: every command reads files, writes files and exits. Exit
codes are 0 on success, 2 on input or validation problems (with a
machine-readable JSON error report on stderr) and 3 on internal errors.
Output files are written atomically (temp file, then rename) and are
byte-identical across runs for identical inputs. Set ``BASKETFLEX_LOG`` to
``debug``/``info``/``warning`` to control verbosity.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path

import click

from . import analysis, crosswalk, ingest, synth
from .analysis import ScenarioConfig
from .errors import BasketflexError
from .periods import Month

log = logging.getLogger("basketflex")

RESULT_JSON = "scenario_result.json"


def _write_atomic(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _csv_text(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerows(rows)
    return buf.getvalue()


def _load(loader, path: Path):
    """Run a loader, tagging raised errors with the originating file."""
    try:
        return loader(path)
    except BasketflexError as exc:
        exc.path = str(path)
        raise


def _parse_month(text: str) -> Month:
    try:
        return Month.parse(text)
    except ValueError as exc:
        raise BasketflexError(str(exc))


def _parse_months(text: str) -> tuple[Month, ...]:
    return tuple(_parse_month(part) for part in text.split(",") if part.strip())


def _parse_date(text: str) -> dt.date:
    try:
        return dt.date.fromisoformat(str(text).strip())
    except ValueError:
        raise BasketflexError(f"bad date {text!r}; expected YYYY-MM-DD")


def _parse_lockdowns(value) -> tuple[tuple[dt.date, dt.date], ...]:
    """Accept 'start:end,start:end' strings or [[start, end], ...] lists."""
    if not value:
        return ()
    windows = []
    if isinstance(value, str):
        for chunk in value.split(","):
            if not chunk.strip():
                continue
            try:
                a, b = chunk.split(":")
            except ValueError:
                raise BasketflexError(
                    f"bad lockdown window {chunk!r}; expected START:END dates"
                )
            windows.append((_parse_date(a), _parse_date(b)))
    else:
        for a, b in value:
            windows.append((_parse_date(a), _parse_date(b)))
    return tuple(windows)


@dataclass
class RunManifest:
    """Resolved inputs for one scenario run.

    Built from a manifest JSON file, command-line flags, or both; flags win.
    Relative paths inside a manifest resolve against the manifest's
    directory.
    """

    weights: Path
    prices: Path
    expenditures: Path
    crosswalk: Path
    out: Path
    base_months: tuple[Month, ...]
    core_exclude: frozenset[str] = frozenset()
    fixed_weight_month: Month | None = None
    lockdowns: tuple[tuple[dt.date, dt.date], ...] = ()
    country_label: str = ""
    annual_method: str = "chained"
    per_day_base: bool = False
    allow_negative_amounts: bool = False
    formats: tuple[str, ...] = ("csv", "json")

    def check(self, for_run: bool = True) -> None:
        for name in ("weights", "prices", "expenditures", "crosswalk"):
            p = getattr(self, name)
            if p is None:
                raise BasketflexError(f"no {name} file given (flag or manifest)")
            if not Path(p).is_file():
                raise BasketflexError(f"{name} file not found: {p}")
        if not for_run:
            return
        if not self.base_months:
            raise BasketflexError("no base months given (flag or manifest)")
        if not self.formats:
            raise BasketflexError("no output formats selected")
        bad = set(self.formats) - {"csv", "json"}
        if bad:
            raise BasketflexError(f"unknown output format: {', '.join(sorted(bad))}")
        try:
            self.out.mkdir(parents=True, exist_ok=True)
            probe = self.out / ".write-probe"
            probe.touch()
            probe.unlink()
        except OSError as exc:
            raise BasketflexError(f"output directory not writable: {self.out} ({exc})")

    def config(self) -> ScenarioConfig:
        return ScenarioConfig(
            base_months=self.base_months,
            core_exclusions=self.core_exclude,
            fixed_weight_month=self.fixed_weight_month,
            lockdown_windows=self.lockdowns,
            country_label=self.country_label,
            annual_method=self.annual_method,
            per_day_base=self.per_day_base,
        )


def _manifest_from(manifest_path: Path | None, **flags) -> RunManifest:
    doc: dict = {}
    root = Path.cwd()
    if manifest_path is not None:
        with open(manifest_path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise BasketflexError(f"manifest is not valid JSON: {exc}")
        root = Path(manifest_path).resolve().parent

    def path_of(key):
        if flags.get(key) is not None:
            return Path(flags[key])
        if doc.get(key):
            return root / doc[key]
        return None

    months = flags.get("base_months")
    if months is not None:
        base_months = _parse_months(months)
    else:
        base_months = tuple(_parse_month(m) for m in doc.get("base_months", ()))

    core = flags.get("core_exclude")
    if core is not None:
        core_exclude = frozenset(s.strip() for s in core.split(",") if s.strip())
    else:
        core_exclude = frozenset(doc.get("core_exclude", ()))

    fixed = flags.get("fixed_weight_month") or doc.get("fixed_weight_month")
    lockdowns = (
        _parse_lockdowns(flags.get("lockdowns"))
        if flags.get("lockdowns")
        else _parse_lockdowns(doc.get("lockdowns"))
    )

    fmt = flags.get("formats")
    if fmt:
        formats = tuple(s.strip() for s in fmt.split(",") if s.strip())
    else:
        formats = tuple(doc.get("formats", ("csv", "json")))

    out = flags.get("out") or doc.get("out")
    if out is None:
        raise BasketflexError("no output directory given (flag or manifest)")

    return RunManifest(
        weights=path_of("weights"),
        prices=path_of("prices"),
        expenditures=path_of("expenditures"),
        crosswalk=path_of("crosswalk"),
        out=(Path(flags["out"]) if flags.get("out") else root / doc["out"]),
        base_months=base_months,
        core_exclude=core_exclude,
        fixed_weight_month=_parse_month(fixed) if fixed else None,
        lockdowns=lockdowns,
        country_label=flags.get("country") or doc.get("country_label", ""),
        annual_method=flags.get("annual_method") or doc.get("annual_method", "chained"),
        per_day_base=bool(flags.get("per_day_base") or doc.get("per_day_base", False)),
        allow_negative_amounts=bool(
            flags.get("allow_negative_amounts") or doc.get("allow_negative_amounts", False)
        ),
        formats=formats,
    )


def _load_inputs(m: RunManifest):
    weights = _load(ingest.load_weights, m.weights)
    prices = _load(ingest.load_prices, m.prices)
    records = _load(
        lambda p: ingest.load_expenditures(p, allow_negative=m.allow_negative_amounts),
        m.expenditures,
    )
    panel = ingest.aggregate_daily(records, allow_negative=m.allow_negative_amounts)
    spec = _load(crosswalk.load_spec, m.crosswalk)
    return weights, prices, panel, spec


_SHARED_RUN_OPTIONS = [
    click.option("--manifest", type=click.Path(exists=True, dir_okay=False), default=None,
                 help="JSON manifest carrying any of the other options."),
    click.option("--weights", type=click.Path(), default=None, help="weights.csv path."),
    click.option("--prices", type=click.Path(), default=None, help="prices.csv path."),
    click.option("--expenditures", type=click.Path(), default=None,
                 help="expenditures.csv path (daily records)."),
    click.option("--crosswalk", type=click.Path(), default=None,
                 help="Crosswalk spec YAML path."),
    click.option("--base-months", default=None,
                 help="Comma-separated base months, e.g. 2020-01,2020-02."),
    click.option("--allow-negative-amounts", is_flag=True, default=False,
                 help="Accept negative daily amounts (refunds/chargebacks)."),
]


def _with_options(options):
    def wrap(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return wrap


@click.group()
def cli() -> None:
    """Inflation under expenditure-adjusted basket weights."""


@cli.command("run")
@_with_options(_SHARED_RUN_OPTIONS)
@click.option("--core-exclude", default=None,
              help="Comma-separated items excluded from the core index.")
@click.option("--fixed-weight-month", default=None,
              help="Freeze adjusted weights at this month (robustness variant).")
@click.option("--lockdowns", default=None,
              help="Lockdown windows as START:END dates, comma separated (annotation only).")
@click.option("--country", default=None, help="Label used in comparisons and outputs.")
@click.option("--annual-method", type=click.Choice(analysis.ANNUAL_METHODS), default=None,
              help="How 12-month rates are built (default: chained).")
@click.option("--per-day-base", is_flag=True, default=False,
              help="Normalize month totals by day count before ratios.")
@click.option("--out", type=click.Path(), default=None, help="Output directory.")
@click.option("--format", "formats", default=None,
              help="Comma-separated outputs to write: csv, json (default both).")
def cmd_run(manifest, **flags) -> None:
    """Run a scenario and write result files into --out."""
    m = _manifest_from(Path(manifest) if manifest else None, **flags)
    m.check()
    weights, prices, panel, spec = _load_inputs(m)
    result = analysis.run_scenario(m.config(), weights, prices, panel, spec)

    written = []
    if "json" in m.formats:
        doc = analysis.result_to_dict(result)
        _write_atomic(m.out / RESULT_JSON, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        written.append(RESULT_JSON)
    if "csv" in m.formats:
        for name, rows in (
            ("inflation.csv", analysis.inflation_rows(result)),
            ("weights.csv", analysis.weight_rows(result)),
            ("contributions.csv", analysis.contribution_rows(result)),
            ("bias.csv", analysis.bias_rows(result)),
        ):
            _write_atomic(m.out / name, _csv_text(rows))
            written.append(name)

    click.echo(f"scenario {result.config.variant}: {result.periods[0]}..{result.periods[-1]}")
    for name in written:
        click.echo(f"wrote {m.out / name}")


@cli.command("validate")
@_with_options(_SHARED_RUN_OPTIONS)
def cmd_validate(manifest, **flags) -> None:
    """Check inputs and crosswalk coverage without running anything."""
    flags.setdefault("out", ".")  # not used; satisfies the manifest builder
    m = _manifest_from(Path(manifest) if manifest else None, out=flags.pop("out"), **flags)
    m.check(for_run=False)
    weights, prices, panel, spec = _load_inputs(m)
    findings = crosswalk.validate(spec, set(weights.shares), panel.categories)
    if findings:
        for f in findings:
            click.echo(str(f))
        print(json.dumps({"error": "SpecInvalidError",
                          "findings": [str(f) for f in findings]}), file=sys.stderr)
        raise SystemExit(2)
    click.echo(
        f"ok: {len(weights.shares)} items, {len(panel.categories)} categories, "
        f"{len(panel.months)} panel months, {len(prices)} price series"
    )


@cli.command("generate")
@click.option("--economy", required=True, type=click.Path(exists=True, dir_okay=False),
              help="Synthetic economy spec (JSON).")
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
def cmd_generate(economy, out) -> None:
    """Generate synthetic weights/prices/expenditures CSV files."""
    spec = _load(synth.load_economy, Path(economy))
    files = synth.generate(spec)
    outdir = Path(out)
    for name, content in (
        ("weights.csv", files.weights_csv),
        ("prices.csv", files.prices_csv),
        ("expenditures.csv", files.expenditures_csv),
    ):
        _write_atomic(outdir / name, content)
        click.echo(f"wrote {outdir / name}")


@cli.command("compare")
@click.argument("results", nargs=-1, required=False,
                type=click.Path(exists=True, dir_okay=False))
@click.option("--period", required=True, help="Month to compare, e.g. 2020-05.")
@click.option("--out", type=click.Path(), default=None,
              help="Write the comparison table as CSV here.")
def cmd_compare(results, period, out) -> None:
    """Compare the weighting bias of several scenario_result.json files."""
    month = _parse_month(period)
    loaded = []
    for path in results:
        with open(path, encoding="utf-8") as fh:
            try:
                doc = json.load(fh)
            except json.JSONDecodeError as exc:
                raise BasketflexError(f"{path}: not valid JSON: {exc}")
        try:
            loaded.append(analysis.result_from_dict(doc))
        except (KeyError, TypeError, ValueError) as exc:
            raise BasketflexError(f"{path}: not a scenario result file ({exc})")
    table = analysis.compare_countries(loaded, month)
    rows = analysis.comparison_rows(table)
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    for r in rows:
        click.echo("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    if out:
        _write_atomic(Path(out), _csv_text(rows))
        click.echo(f"wrote {out}")


def _emit_error(exc: BaseException, internal: bool = False) -> None:
    report = {
        "error": type(exc).__name__,
        "message": str(exc),
    }
    for attr in ("path", "line", "column", "item", "category", "period", "month"):
        value = getattr(exc, attr, None)
        if value is not None:
            report[attr] = str(value)
    if internal:
        report["internal"] = True
    print(json.dumps(report, sort_keys=True), file=sys.stderr)


def main() -> None:
    level = os.environ.get("BASKETFLEX_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(2)
    except SystemExit:
        raise
    except BasketflexError as exc:
        _emit_error(exc)
        sys.exit(2)
    except Exception as exc:  # pragma: no cover - defensive
        _emit_error(exc, internal=True)
        sys.exit(3)


if __name__ == "__main__":
    main()
