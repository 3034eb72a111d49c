"""Command-line interface for batch experiments.

Every command is registered on ``app.cli`` (``flask <command>``) and on the
standalone ``manage.py``. Options can also be given through ``MEGA_*``
environment variables. Exit status: 0 success, 1 unsolvable, 2 input error,
3 resource cap.
"""

import csv
import functools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import click
from flask import current_app
from flask.cli import with_appcontext

from app.services.errors import InputError, PlanningError, UnsolvableError
from app.services.mega import (
    SearchSettings, check_solution, explanation_baseline, explicable_plan, mce_search, mega_search,
    parse_alpha, sweep_alpha, write_ledger_csv,
)
from app.services.model_space import edits_toward
from app.services.pddl_io import (
    load_bundle, read_plan, serialize_explanation, write_overlay, write_plan,
)
from app.services.scenarios import ScenarioSpec, generate
from app.services.strips import plan_cost
from app.utils.numbers import INFINITY, format_rational
from app.utils.records import plan_result_to_dict, solution_to_dict, sweep_row_to_dict

FORMATS = ['text', 'csv', 'record']
SWEEP_COLUMNS = ['alpha', 'explanation_size', 'plan_cost_in_robot', 'objective', 'nodes', 'time']


def handle_errors(f):
    """Report engine errors on stderr and exit with their exit code."""
    @functools.wraps(f)
    def decorated(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except PlanningError as e:
            current_app.logger.debug(f"{f.__name__} failed: {e}")
            click.echo(f"Error: {e}", err=True)
            click.get_current_context().exit(e.exit_code)
    return decorated


def search_settings(node_cap=None, allow_cost_edits=False):
    """Settings from the app config, overridden by command-line options."""
    settings = SearchSettings.from_config(current_app.config)
    if node_cap is not None:
        settings = replace(settings, node_cap=node_cap)
    if allow_cost_edits:
        settings = replace(settings, allow_cost_edits=True)
    return settings


def parse_alphas(text):
    alphas = [a.strip() for a in text.split(',') if a.strip()]
    if not alphas:
        raise InputError("--alphas needs at least one value")
    return [parse_alpha(a) for a in alphas]


def emit_records(stream, records):
    for record in records:
        stream.write(json.dumps(record, sort_keys=True) + '\n')


bundle_option = click.option(
    '--bundle', 'bundle_path', envvar='MEGA_BUNDLE', required=True,
    type=click.Path(exists=True, file_okay=False), help='Bundle directory.')
format_option = click.option(
    '--format', 'output_format', envvar='MEGA_FORMAT', default='text',
    type=click.Choice(FORMATS), show_default=True, help='Output format.')
out_option = click.option(
    '--out', envvar='MEGA_OUT', default='-', type=click.Path(dir_okay=False, allow_dash=True),
    help='Output file (default: stdout).')
node_cap_option = click.option(
    '--node-cap', envvar='MEGA_NODE_CAP', type=click.IntRange(min=1), default=None,
    help='Planner expansions per call.')
cost_edits_option = click.option(
    '--allow-cost-edits', envvar='MEGA_ALLOW_COST_EDITS', is_flag=True,
    help='Let explanations change action costs.')
side_option = click.option(
    '--side', envvar='MEGA_SIDE', default='robot', type=click.Choice(['robot', 'human']),
    show_default=True, help='Which model to use.')


@click.command('plan')
@bundle_option
@side_option
@format_option
@out_option
@node_cap_option
@with_appcontext
@handle_errors
def plan_command(bundle_path, side, output_format, out, node_cap):
    """Print an optimal plan for the robot or the human model."""
    problem = load_bundle(bundle_path)
    planner = search_settings(node_cap).planner()
    model = problem.robot_model if side == 'robot' else problem.human_model
    result = planner.optimal_plan(model)
    if not result.solved:
        raise UnsolvableError(f"No plan for the {side} model")

    cost_in_robot = robot_cost = None
    if side == 'human':
        expected = explicable_plan(problem, planner)
        cost_in_robot, robot_cost = expected.cost_in_robot, expected.robot_optimal_cost

    with click.open_file(out, 'w') as stream:
        if output_format == 'record':
            emit_records(stream, [plan_result_to_dict(result, side, cost_in_robot, robot_cost)])
        elif output_format == 'csv':
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(['step', 'action'])
            for i, step in enumerate(result.plan, start=1):
                writer.writerow([i, step])
        else:
            stream.write(write_plan(result.plan, result.cost))
            if cost_in_robot is not None:
                stream.write(f"; cost in robot model = {format_rational(cost_in_robot)}"
                             f" (optimal {format_rational(robot_cost)})\n")


@click.command('mega')
@bundle_option
@click.option('--alpha', envvar='MEGA_ALPHA', default='0', show_default=True,
              help='Weight of the explicability penalty (rational, e.g. 1/3).')
@format_option
@out_option
@click.option('--ledger-out', type=click.Path(dir_okay=False), default=None,
              help='Write every visited node as CSV.')
@click.option('--check', is_flag=True, help='Verify the solution conditions before printing.')
@node_cap_option
@cost_edits_option
@with_appcontext
@handle_errors
def mega_command(bundle_path, alpha, output_format, out, ledger_out, check, node_cap, allow_cost_edits):
    """Balance explicability against explanation size for one alpha."""
    problem = load_bundle(bundle_path)
    settings = search_settings(node_cap, allow_cost_edits)
    planner = settings.planner()
    solution, ledger = mega_search(problem, parse_alpha(alpha), settings, planner)

    if check:
        violations = check_solution(problem, solution, planner=planner)
        if violations:
            raise PlanningError('; '.join(violations))
    if ledger_out:
        with open(ledger_out, 'w', newline='') as f:
            write_ledger_csv(ledger, f)

    with click.open_file(out, 'w') as stream:
        if output_format == 'record':
            emit_records(stream, [solution_to_dict(solution, ledger)])
        elif output_format == 'csv':
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(SWEEP_COLUMNS)
            writer.writerow(_sweep_csv_row(solution_to_dict(solution), ledger))
        else:
            stream.write(''.join(f"{line}\n" for line in solution.plan.lines()))
            stream.write(serialize_explanation(solution.explanation))
            stream.write(
                f"; alpha = {format_rational(solution.alpha)}\n"
                f"; explanation size = {solution.explanation_size}\n"
                f"; plan cost in robot model = {format_rational(solution.cost_in_robot)}"
                f" (optimal {format_rational(ledger.robot_optimal_cost)})\n"
                f"; objective = {format_rational(solution.objective)}\n"
            )


def _sweep_csv_row(record, ledger):
    return [
        record['alpha'], record['explanation_size'],
        record.get('plan_cost_in_robot', record.get('cost_in_robot')),
        record['objective'], len(ledger), f"{ledger.wall_time:.3f}",
    ]


def _sweep_bundle(bundle_path, alphas, settings):
    rows, ledger = sweep_alpha(load_bundle(bundle_path), alphas, settings)
    return rows, ledger


@click.command('sweep')
@click.option('--bundle', 'bundle_paths', envvar='MEGA_BUNDLE', required=True, multiple=True,
              type=click.Path(exists=True, file_okay=False), help='Bundle directory (repeatable).')
@click.option('--alphas', envvar='MEGA_ALPHAS', default='0,0.5,1,2', show_default=True,
              help='Comma-separated alphas.')
@format_option
@out_option
@click.option('--ledger-out', type=click.Path(dir_okay=False), default=None,
              help='Write the ledger of the first bundle as CSV.')
@click.option('--processes', type=click.IntRange(min=1), default=None,
              help='Processes used when sweeping several bundles.')
@node_cap_option
@cost_edits_option
@with_appcontext
@handle_errors
def sweep_command(bundle_paths, alphas, output_format, out, ledger_out, processes, node_cap, allow_cost_edits):
    """Search once per bundle and re-score the result for every alpha."""
    alphas = parse_alphas(alphas)
    settings = search_settings(node_cap, allow_cost_edits)
    jobs = [(path, alphas, settings) for path in bundle_paths]

    processes = processes or current_app.config.get('MEGA_SWEEP_PROCESSES', 1)
    if processes > 1 and len(jobs) > 1:
        current_app.logger.info(f"Sweeping {len(jobs)} bundles on {processes} processes")
        with ProcessPoolExecutor(max_workers=processes) as executor:
            results = list(executor.map(_sweep_bundle, *zip(*jobs)))
    else:
        results = [_sweep_bundle(*job) for job in jobs]

    if ledger_out:
        with open(ledger_out, 'w', newline='') as f:
            write_ledger_csv(results[0][1], f)

    several = len(bundle_paths) > 1
    with click.open_file(out, 'w') as stream:
        if output_format == 'record':
            for path, (rows, ledger) in zip(bundle_paths, results):
                records = [sweep_row_to_dict(row, ledger) for row in rows]
                if several:
                    for record in records:
                        record['bundle'] = path
                emit_records(stream, records)
            return

        if output_format == 'csv':
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow((['bundle'] if several else []) + SWEEP_COLUMNS)
            for path, (rows, ledger) in zip(bundle_paths, results):
                for row in rows:
                    cells = _sweep_csv_row(sweep_row_to_dict(row), ledger)
                    writer.writerow(([path] if several else []) + cells)
            return

        for path, (rows, ledger) in zip(bundle_paths, results):
            if several:
                stream.write(f"; bundle {path}\n")
            for row in rows:
                stream.write(
                    f"alpha={format_rational(row.alpha)} |E|={row.explanation_size} "
                    f"cost={format_rational(row.plan_cost_in_robot)} "
                    f"objective={format_rational(row.objective)}\n"
                )


@click.command('mce')
@bundle_option
@click.option('--plan', 'plan_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='Plan to explain (default: the robot-optimal plan).')
@click.option('--with-plan', is_flag=True, help='Print the robot-optimal plan above its explanation.')
@out_option
@node_cap_option
@cost_edits_option
@with_appcontext
@handle_errors
def mce_command(bundle_path, plan_path, with_plan, out, node_cap, allow_cost_edits):
    """Print the smallest explanation making a robot-optimal plan optimal for the human."""
    problem = load_bundle(bundle_path)
    settings = search_settings(node_cap, allow_cost_edits)
    if with_plan and plan_path:
        raise InputError("--with-plan explains the robot-optimal plan and cannot take --plan")

    with click.open_file(out, 'w') as stream:
        if with_plan:
            baseline = explanation_baseline(problem, settings)
            stream.write(write_plan(baseline.plan, baseline.cost_in_robot))
            stream.write(serialize_explanation(baseline.explanation))
            return
        plan = read_plan(Path(plan_path).read_text()) if plan_path else None
        stream.write(serialize_explanation(mce_search(problem, plan, settings)))


@click.command('diff')
@bundle_option
@out_option
@with_appcontext
@handle_errors
def diff_command(bundle_path, out):
    """Print the edits that turn the human model into the robot model."""
    problem = load_bundle(bundle_path)
    edits = edits_toward(problem.human_model, problem.robot_model, allow_cost_edits=True)
    with click.open_file(out, 'w') as stream:
        stream.write(write_overlay(edits))


@click.command('validate')
@bundle_option
@click.option('--plan', 'plan_path', required=True, type=click.Path(exists=True, dir_okay=False),
              help='Plan file, one (action args) per line.')
@side_option
@format_option
@node_cap_option
@with_appcontext
@handle_errors
def validate_command(bundle_path, plan_path, side, output_format, node_cap):
    """Check whether a plan is executable and optimal in one of the models."""
    problem = load_bundle(bundle_path)
    plan = read_plan(Path(plan_path).read_text())
    model = problem.robot_model if side == 'robot' else problem.human_model
    cost = plan_cost(plan, model)
    optimal = search_settings(node_cap).planner().optimal_cost(model)
    report = {
        'side': side,
        'steps': len(plan),
        'executable': cost != INFINITY,
        'cost': format_rational(cost),
        'optimal_cost': format_rational(optimal),
        'optimal': cost != INFINITY and cost == optimal,
    }

    if output_format == 'record':
        emit_records(click.get_text_stream('stdout'), [report])
    elif output_format == 'csv':
        writer = csv.writer(click.get_text_stream('stdout'), lineterminator='\n')
        writer.writerow(list(report))
        writer.writerow(list(report.values()))
    elif report['executable']:
        verdict = 'optimal' if report['optimal'] else 'satisficing, not optimal'
        click.echo(f"{side}: {verdict}; cost {report['cost']} (optimal {report['optimal_cost']})")
    else:
        click.echo(f"{side}: plan is not executable or does not reach the goal")

    if not report['executable']:
        click.get_current_context().exit(1)


@click.command('generate')
@click.option('--family', type=click.Choice(['usar-grid', 'rover-martian', 'barman-bar', 'random']),
              default=None, help='Scenario family (or give --config).')
@click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False), default=None,
              help='key = value scenario file.')
@click.option('--delta-size', type=click.IntRange(min=0), default=None, help='Target model difference.')
@click.option('--seed', envvar='MEGA_SEED', type=int, default=None, help='Random seed.')
@click.option('--param', 'params', multiple=True, help='Family parameter as key=value (repeatable).')
@click.option('--out', envvar='MEGA_OUT', required=True, type=click.Path(file_okay=False),
              help='Bundle directory to write.')
@with_appcontext
@handle_errors
def generate_command(family, config_path, delta_size, seed, params, out):
    """Write a generated robot/human bundle directory."""
    values = {}
    if config_path:
        base = ScenarioSpec.from_config(Path(config_path).read_text())
        values = dict(base.params, family=base.family, delta_size=base.delta_size, seed=base.seed)
    for param in params:
        key, sep, value = param.partition('=')
        if not sep:
            raise InputError(f"--param expects key=value, got {param!r}")
        values[key.strip()] = value.strip()
    for key, value in (('family', family), ('delta_size', delta_size), ('seed', seed)):
        if value is not None:
            values[key] = value

    bundle = generate(ScenarioSpec.from_mapping(values))
    directory = bundle.write(out)
    click.echo(f"Wrote {directory} (|delta| = {len(bundle.overlay)})")


COMMANDS = [
    plan_command, mega_command, sweep_command, mce_command,
    diff_command, validate_command, generate_command,
]


def register_commands(app):
    """Register engine commands on the application's CLI group."""
    for command in COMMANDS:
        app.cli.add_command(command)
