"""Command-line front end: ``loset check|eval|translate|topos FILE``.

Exit codes: 0 every record passed, 1 a verdict failed, 2 input error,
3 budget exceeded.
"""
import json
import logging
import os
import sys

import click
from dotenv import load_dotenv

from config import Config
from models import EXIT_INPUT_ERROR, Command
from services.deduction import CheckMode
from services.errors import KernelError
from services.workspace import RunFlags, execute, parse, print_workspace

logger = logging.getLogger(__name__)


def _flags(mode, budget, threads, seed) -> RunFlags:
    return RunFlags(
        mode=CheckMode(mode or Config.LOSET_MODE),
        budget=budget or Config.LOSET_MAX_ROWS,
        threads=threads or Config.LOSET_THREADS,
        seed=Config.LOSET_SEED if seed is None else seed,
        max_carrier=Config.LOSET_MAX_CARRIER,
    )


def _record_line(record: dict) -> str:
    mark = 'ok  ' if record.get('passed', record.get('equivalent')) else 'FAIL'
    label = record.get('name') or f"{record.get('check')} {record.get('subject')}"
    if 'sequent' in record and 'verdict' in record:
        detail = record['sequent']
    elif 'verdict' in record:
        detail = f"rejected at {record['path']}: {record['reason']}"
        if record.get('proviso'):
            detail += f" [{record['proviso']}]"
    elif 'counterexample' in record:
        pairs = ' '.join(f"{k}={v}" for k, v in record['counterexample'].items())
        detail = f"{record['sequent']} fails at {pairs}"
    elif 'lemma_form' in record:
        detail = f"{record['lemma_form']} ~ {record['definitional_form']}"
    elif 'value' in record:
        detail = f"{record['term']} = {record['value']}" if record['value'] is not None else record['term']
    else:
        detail = record.get('detail') or record.get('sequent', '')
    return f"{mark} {label}  {detail}"


def _read_source(path: str) -> str:
    try:
        with open(path, encoding='utf-8') as fh:
            return fh.read()
    except UnicodeDecodeError as e:
        click.echo(f"error: {path} is not UTF-8 text ({e.reason} at byte {e.start})", err=True)
        sys.exit(EXIT_INPUT_ERROR)


def _run(command: Command, path: str, mode, budget, threads, seed, as_json: bool):
    source = _read_source(path)
    outcome = execute(command, source, _flags(mode, budget, threads, seed))
    if as_json:
        click.echo(json.dumps(outcome.to_dict(), indent=2))
    elif outcome.error is not None:
        click.echo(f"error: {outcome.error['message']}", err=True)
    else:
        report = outcome.report
        for record in report['records']:
            click.echo(_record_line(record))
        click.echo(f"{command.value}: {report['total'] - report['failures']}/{report['total']} passed")
    sys.exit(outcome.exit_code)


def _common(fn):
    fn = click.option('--json', 'as_json', is_flag=True, help='Print the report as JSON.')(fn)
    fn = click.option('--seed', type=int, default=None, help='Seed for randomized checks (LOSET_SEED).')(fn)
    fn = click.option('--threads', type=int, default=None, help='Threads for validity sweeps.')(fn)
    fn = click.option('--budget', type=int, default=None, help='Maximum environment rows per sweep.')(fn)
    fn = click.option('--mode', type=click.Choice([m.value for m in CheckMode]), default=None,
                      help='kernel rejects derived nodes; extended re-derives them.')(fn)
    fn = click.argument('path', type=click.Path(exists=True, dir_okay=False))(fn)
    return fn


@click.group()
@click.option('--verbose', is_flag=True, help='Log kernel progress.')
def cli(verbose):
    """Symbolic kernel for local set theories."""
    load_dotenv()
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)


@cli.command()
@_common
def check(path, mode, budget, threads, seed, as_json):
    """Check every proof in the workspace."""
    _run(Command.CHECK, path, mode, budget, threads, seed, as_json)


@cli.command(name='eval')
@_common
def eval_(path, mode, budget, threads, seed, as_json):
    """Decide the named sequents in the workspace interpretation."""
    _run(Command.EVAL, path, mode, budget, threads, seed, as_json)


@cli.command()
@_common
def translate(path, mode, budget, threads, seed, as_json):
    """Compare both preimage translation forms for every translate entry."""
    _run(Command.TRANSLATE, path, mode, budget, threads, seed, as_json)


@cli.command()
@_common
def topos(path, mode, budget, threads, seed, as_json):
    """Build the internal language of the loaded model and run the check battery."""
    _run(Command.TOPOS, path, mode, budget, threads, seed, as_json)


@cli.command()
@click.argument('path', type=click.Path(exists=True, dir_okay=False))
def fmt(path):
    """Print the workspace in canonical form."""
    source = _read_source(path)
    try:
        click.echo(print_workspace(parse(source)), nl=False)
    except KernelError as e:
        click.echo(f"error: {e.message}", err=True)
        sys.exit(EXIT_INPUT_ERROR)


@cli.command()
@click.option('--port', type=int, default=lambda: int(os.getenv('PORT', 5000)))
def serve(port):
    """Run the HTTP API with the development server."""
    from app import create_app
    create_app().run(host='0.0.0.0', port=port)


if __name__ == '__main__':
    cli()
