#!/usr/bin/env python3
"""
Command-line front end: verification suites, single experiments and report summaries
"""
import json
import logging
import os
import sys
import time
from typing import Any, Dict, Optional

import click
from pydantic import ValidationError

from errors import ConfigError, ExitCode, RhoLabError
from reporting import histogram_csv, load_reports, render_reports, render_summary
from schemas import ExperimentSpec, format_validation_errors
from suite_runner import ReportFormat, Suite, SuiteConfig, SuiteRunner, load_config_file
from utils import dump_json, format_execution_time, setup_logging

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), "config", "verify.yaml")
LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR"]

logger = logging.getLogger(__name__)


def _fail(message: str, code: ExitCode):
    click.echo(f"Error: {message}", err=True)
    sys.exit(int(code))


def _write_output(text: str, path: Optional[str]):
    if path is None:
        click.echo(text, nl=False)
        return
    try:
        with open(path, 'w') as f:
            f.write(text)
    except OSError as e:
        _fail(f"cannot write {path}: {e}", ExitCode.USAGE)


def _resolve_config(config_path: Optional[str], flags: Dict[str, Any]) -> SuiteConfig:
    """Explicit flags override the config file, which overrides the built-in defaults"""
    values: Dict[str, Any] = {}
    if config_path is not None:
        values.update(load_config_file(config_path))
    elif os.path.exists(DEFAULT_CONFIG):
        values.update(load_config_file(DEFAULT_CONFIG))
    values.update({k: v for k, v in flags.items() if v is not None})
    try:
        return SuiteConfig(**values)
    except TypeError as e:
        raise ConfigError(str(e)) from e


@click.group()
@click.option("--log-level", default="INFO", type=click.Choice(LOG_LEVELS, case_sensitive=False),
              help="Logging level (logs go to standard error).")
@click.option("--log-file", default=None, type=click.Path(dir_okay=False), help="Also write logs to this file.")
def cli(log_level: str, log_file: Optional[str]):
    """rho-lab: quantum states, black-box apparatuses and the linearity of expected readings."""
    setup_logging(log_level, log_file)


@cli.command()
@click.option("--suite", default=None, type=click.Choice([s.value for s in Suite]), help="Suite to run.")
@click.option("--seed", default=None, type=int, help="Root seed of every trial.")
@click.option("--trials", default=None, type=int, help="Trials per suite.")
@click.option("--tol", default=None, type=float, help="Tolerance override for exact checks.")
@click.option("--dim-system", default=None, type=int, help="Largest system dimension drawn.")
@click.option("--dim-ancilla", default=None, type=int, help="Largest ancilla dimension drawn.")
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Report file (default stdout).")
@click.option("--format", "fmt", default=None, type=click.Choice([f.value for f in ReportFormat]))
@click.option("--workers", default=None, type=int, help="Concurrent trials.")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True, dir_okay=False),
              help="YAML file with suite defaults.")
def verify(suite, seed, trials, tol, dim_system, dim_ancilla, output, fmt, workers, config_path):
    """Run a verification suite; exit 0 iff every check passes."""
    flags = {
        "suite": suite, "seed": seed, "trials": trials, "tol": tol, "dim_system": dim_system,
        "dim_ancilla": dim_ancilla, "output": output, "format": fmt, "workers": workers,
    }
    try:
        config = _resolve_config(config_path, flags)
    except ConfigError as e:
        _fail(str(e), ExitCode.USAGE)

    start = time.perf_counter()
    runner = SuiteRunner(config)
    try:
        reports = runner.run()
    except RhoLabError as e:
        logger.error(f"Suite {config.suite.value} aborted: {e}")
        _fail(str(e), ExitCode.CHECK_FAILED)
    logger.info(f"Ran {len(reports)} checks in {format_execution_time(time.perf_counter() - start)}")

    _write_output(render_reports(reports, config.format.value), config.output)
    failures = sum(1 for r in reports if not r["pass"])
    sys.exit(int(ExitCode.CHECK_FAILED if failures else ExitCode.OK))


@cli.command()
@click.argument("experiment_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="json", type=click.Choice([f.value for f in ReportFormat]))
@click.option("--output", default=None, type=click.Path(dir_okay=False), help="Report file (default stdout).")
@click.option("--histogram", default=None, type=click.Path(dir_okay=False),
              help="CSV of outcome counts (sampled experiments only).")
def run(experiment_file, fmt, output, histogram):
    """Run the single experiment described by EXPERIMENT_FILE."""
    try:
        with open(experiment_file, 'r') as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        _fail(f"cannot parse {experiment_file}: {e}", ExitCode.USAGE)

    try:
        spec = ExperimentSpec.model_validate(data)
    except ValidationError as e:
        for line in format_validation_errors(e):
            click.echo(line, err=True)
        _fail(f"{experiment_file} does not match the experiment schema", ExitCode.USAGE)

    try:
        report = spec.run().to_dict()
        counts = spec.histogram() if histogram is not None else None
    except RhoLabError as e:
        _fail(str(e), ExitCode.USAGE)

    text = dump_json(report) if fmt == "json" else render_reports([report], fmt)
    _write_output(text, output)
    if counts is not None:
        _write_output(histogram_csv(counts), histogram)
    sys.exit(int(ExitCode.OK if report["pass"] else ExitCode.CHECK_FAILED))


@cli.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", default="text", type=click.Choice([f.value for f in ReportFormat]))
def report(input_path, fmt):
    """Summarize reports from verify or run; exit 1 if any check failed."""
    try:
        reports = load_reports(input_path)
    except ConfigError as e:
        _fail(str(e), ExitCode.USAGE)
    click.echo(render_summary(reports, fmt), nl=False)
    failures = [r["label"] for r in reports if not r["pass"]]
    if fmt == "csv":
        for label in failures:
            click.echo(f"FAILED {label}", err=True)
    sys.exit(int(ExitCode.CHECK_FAILED if failures else ExitCode.OK))


if __name__ == "__main__":
    cli()
