"""Operator command line: serve, ingest, assess, olap, simulate, replay.

Exit codes: 0 success, 1 domain error (single line on stderr), 2 usage
error (flag parsing, handled by click).
"""

import json
import os
import sys
from pathlib import Path

import click

from .ingest import (
    LineError,
    load_historical_catalog,
    load_reference_data,
    parse_warning_feed,
    save_historical_catalog,
    save_reference_data,
)
from .model import warning_record
from .service import DuplicateWarning, Engine, ServiceError
from .simulate import run_scenario

DOMAIN_ERRORS = (ValueError, ServiceError, OSError)

DATA_ENV = "QUAKEDESK_DATA"
LISTEN_ENV = "QUAKEDESK_LISTEN"
TOKEN_ENV = "QUAKEDESK_TOKEN"


def _fail(exc: BaseException):
    click.echo(f"ERROR {type(exc).__name__}: {exc}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Decision-support tools for earthquake disaster response."""


@main.command()
@click.option("--data", "data_dir", envvar=DATA_ENV, default="data", show_default=True)
@click.option(
    "--listen", envvar=LISTEN_ENV, default="127.0.0.1:8800", show_default=True
)
def serve(data_dir, listen):
    """Run the HTTP service over an initialised data directory."""
    import uvicorn

    from .api import create_app

    try:
        engine = Engine.open(data_dir)
    except DOMAIN_ERRORS as exc:
        _fail(exc)
    host, _, port = listen.partition(":")
    if not port or not port.isdigit():
        raise click.UsageError(f"--listen must be HOST:PORT, got {listen!r}")
    app = create_app(engine, write_token=os.environ.get(TOKEN_ENV))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="warning")


@main.command()
@click.option("--regions", "regions_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--catalog", "catalog_file", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--warnings", "warnings_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--data", "data_dir", envvar=DATA_ENV, default="data", show_default=True)
def ingest(regions_dir, catalog_file, warnings_file, data_dir):
    """Load reference data and the quake catalog; optionally a warning feed.

    Copies the inputs into the data directory's reference folder, runs
    the catalog through the warehouse ETL, and prints counts.
    """
    try:
        regions = Path(regions_dir)
        config_path = regions / "config.json"
        ref = load_reference_data(
            regions / "provinces.csv",
            regions / "regencies.csv",
            config_path if config_path.exists() else None,
        )
        catalog, rejected = load_historical_catalog(catalog_file)

        ref_dir = Path(data_dir) / Engine.REFERENCE_SUBDIR
        ref_dir.mkdir(parents=True, exist_ok=True)
        save_reference_data(
            ref,
            ref_dir / "provinces.csv",
            ref_dir / "regencies.csv",
            ref_dir / "config.json",
        )
        save_historical_catalog(catalog, ref_dir / "historical_quakes.csv")

        engine = Engine(data_dir, ref, catalog)
        stats = engine.load_catalog_facts()

        click.echo(f"provinces: {len(ref.provinces)}")
        click.echo(f"regencies: {len(ref.regencies)}")
        click.echo(f"catalog: {len(catalog)} accepted, {len(rejected)} rejected")
        for problem in rejected:
            click.echo(f"  row {problem.line}: {problem.reason}", err=True)
        click.echo(
            f"warehouse: {stats.inserted} facts inserted,"
            f" {stats.updated} updated, {stats.dimensions} dimension rows"
        )

        if warnings_file:
            with open(warnings_file, encoding="utf-8") as fh:
                parsed, errors = parse_warning_feed(fh)
            accepted = 0
            for warning in parsed:
                try:
                    engine.ingest_warning(warning_record(warning))
                    accepted += 1
                except DuplicateWarning as exc:
                    errors.append(LineError(0, str(exc)))
            click.echo(f"warnings: {accepted} accepted, {len(errors)} rejected")
            for problem in errors:
                click.echo(f"  line {problem.line}: {problem.reason}", err=True)
    except DOMAIN_ERRORS as exc:
        _fail(exc)


_CHECKLIST_UNITS = [
    ("medics_required", "medics"),
    ("medic_shortage", "medics"),
    ("medics_international", "medics"),
    ("volunteers_national", "volunteers"),
    ("volunteers_international", "volunteers"),
    ("tents", "tents"),
    ("shelter_sites", "sites"),
    ("sanitation_units", "units"),
    ("kitchens", "kitchens"),
    ("rice_kg", "kg"),
    ("baby_food_kg", "kg"),
    ("blankets", "blankets"),
    ("total_cost", "cost units"),
    ("buildings_at_risk", "buildings"),
    ("damage_cost", "cost units"),
]


@main.command()
@click.argument("warning_id")
@click.option("--data", "data_dir", envvar=DATA_ENV, default="data", show_default=True)
@click.option("--jsonl", is_flag=True, help="machine-readable single-line output")
def assess(warning_id, data_dir, jsonl):
    """Print the stored assessment and checklist for one warning."""
    try:
        engine = Engine.open(data_dir)
        assessment = engine.get_assessment(warning_id)
    except DOMAIN_ERRORS as exc:
        _fail(exc)
    if jsonl:
        click.echo(json.dumps(assessment, sort_keys=True))
        return
    click.echo(f"warning: {assessment['warning_id']}")
    click.echo(f"magnitude band: {assessment['magnitude_band']}")
    click.echo(f"affected population: {assessment['affected_population']}")
    click.echo(f"persons per medic: {assessment['persons_per_medic']}")
    click.echo(f"medics required: {assessment['medics_required']}")
    click.echo(f"medics available: {assessment['medics_available']}")
    click.echo(f"medic shortage: {assessment['medic_shortage']}")
    if assessment["low_confidence"]:
        click.echo("note: affected area estimated by radius fallback (low confidence)")
    casualties = assessment["casualties"]
    click.echo(
        f"predicted deaths: {casualties['predicted_deaths']}"
        f"  injured: {casualties['predicted_injured']}"
    )
    click.echo("checklist:")
    checklist = assessment["checklist"]
    for key, unit in _CHECKLIST_UNITS:
        value = checklist[key]
        if isinstance(value, float):
            value = f"{value:.1f}"
        click.echo(f"  {key.replace('_', ' ')}: {value} {unit}")
    for name, value in sorted(checklist.get("extras", {}).items()):
        click.echo(f"  {name}: {value:.1f}")


@main.command()
@click.option("--group-by", "group_by", required=True, help="comma-joined level names")
@click.option("--filter", "filters", multiple=True, help="level=member, repeatable")
@click.option("--data", "data_dir", envvar=DATA_ENV, default="data", show_default=True)
@click.option("--jsonl", is_flag=True, help="machine-readable single-line rows")
def olap(group_by, filters, data_dir, jsonl):
    """Aggregate warehouse facts grouped by dimension levels."""
    try:
        engine = Engine.open(data_dir)
        names = [part.strip() for part in group_by.split(",") if part.strip()]
        result = engine.olap_query(names, list(filters))
    except DOMAIN_ERRORS as exc:
        _fail(exc)
    if jsonl:
        for row in result["rows"]:
            click.echo(json.dumps(row, sort_keys=True))
        return
    columns = result["columns"]
    rows = [[str(row[c]) for c in columns] for row in result["rows"]]
    widths = [
        max(len(c), *(len(r[i]) for r in rows)) if rows else len(c)
        for i, c in enumerate(columns)
    ]
    click.echo("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for r in rows:
        click.echo("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    totals = result["totals"]
    click.echo(
        f"totals: deaths={totals['deaths']} injured={totals['injured']}"
        f" buildings_destroyed={totals['buildings_destroyed']}"
        f" event_count={totals['event_count']}"
    )


@main.command()
@click.option("--seed", required=True, type=int)
@click.option("--regencies", default=12, show_default=True, type=int)
@click.option("--magnitude", default=7.6, show_default=True, type=float)
def simulate(seed, regencies, magnitude):
    """Generate a seeded synthetic scenario and run it end to end."""
    try:
        click.echo(run_scenario(seed, regencies, magnitude))
    except DOMAIN_ERRORS as exc:
        _fail(exc)


@main.command()
@click.option("--data", "data_dir", envvar=DATA_ENV, required=True)
def replay(data_dir):
    """Rebuild state from the event log and print its hash."""
    try:
        engine = Engine.open(data_dir)
    except DOMAIN_ERRORS as exc:
        _fail(exc)
    click.echo(f"events: {engine.log_seq}")
    click.echo(f"state hash: {engine.state_hash()}")


if __name__ == "__main__":
    main()
