"""Engine endpoints: plan, explain and validate posted bundles."""

from flask import current_app, jsonify, request

from app.blueprints.api.v1 import api_v1_bp
from app.extensions import db
from app.models.run import Run, RunCommand
from app.services.errors import InputError, UnsolvableError
from app.services.mega import (
    SearchSettings, explanation_baseline, explicable_plan, mce_search, mega_search, parse_alpha,
    sweep_alpha,
)
from app.services.model_space import edits_toward
from app.services.pddl_io import ProblemBundle, load_bundle, read_plan
from app.services.strips import plan_cost
from app.utils.numbers import INFINITY, format_rational, rational_to_json
from app.utils.records import plan_result_to_dict, solution_to_dict, sweep_row_to_dict

SIDES = ('robot', 'human')


def read_request():
    """Return the JSON body and the HapProblem built from its bundle."""
    data = request.get_json(silent=True)
    if not isinstance(data, dict):
        raise InputError('Request body must be a JSON object')
    bundle = ProblemBundle.from_json(data.get('bundle'))
    return data, load_bundle(bundle)


def read_side(data):
    side = data.get('side', 'robot')
    if side not in SIDES:
        raise InputError(f'side must be "robot" or "human", got {side!r}')
    return side


def engine_settings():
    return SearchSettings.from_config(current_app.config)


@api_v1_bp.route('/plan', methods=['POST'])
def plan():
    """Optimal plan for one side of a bundle.

    Request (JSON):
        bundle: Bundle object (required)
        side: 'robot' or 'human' (optional, default: robot)
    """
    data, problem = read_request()
    side = read_side(data)
    planner = engine_settings().planner()
    model = problem.robot_model if side == 'robot' else problem.human_model

    result = planner.optimal_plan(model)
    if not result.solved:
        raise UnsolvableError(f'No plan for the {side} model')

    if side == 'human':
        expected = explicable_plan(problem, planner)
        return jsonify(plan_result_to_dict(
            result, side, expected.cost_in_robot, expected.robot_optimal_cost))
    return jsonify(plan_result_to_dict(result, side))


@api_v1_bp.route('/mega', methods=['POST'])
def mega():
    """Search for the plan and explanation that minimize the weighted objective.

    Request (JSON):
        bundle: Bundle object (required)
        alpha: Explicability weight, number or rational string (optional, default: 0)

    Returns:
        The solution, with the run slug it was stored under.
    """
    data, problem = read_request()
    alpha = parse_alpha(data.get('alpha', 0))
    solution, ledger = mega_search(problem, alpha, engine_settings())

    result = solution_to_dict(solution, ledger)
    run = Run(
        command=RunCommand.MEGA,
        alpha=format_rational(alpha),
        explanation_size=solution.explanation_size,
        objective=format_rational(solution.objective),
        delta_size=ledger.delta_size,
        result=result,
    )
    db.session.add(run)
    db.session.commit()
    current_app.logger.info(f'Stored run {run.slug}: |E|={solution.explanation_size}')

    return jsonify(dict(result, run=run.slug)), 201


@api_v1_bp.route('/sweep', methods=['POST'])
def sweep():
    """Search once and report the chosen solution for several alphas.

    Request (JSON):
        bundle: Bundle object (required)
        alphas: List of explicability weights (required)
    """
    data, problem = read_request()
    alphas = data.get('alphas')
    if not isinstance(alphas, list) or not alphas:
        raise InputError('alphas must be a non-empty list')
    rows, ledger = sweep_alpha(problem, [parse_alpha(a) for a in alphas], engine_settings())

    result = {
        'rows': [sweep_row_to_dict(row) for row in rows],
        'robot_optimal_cost': rational_to_json(ledger.robot_optimal_cost),
        'mce_size': ledger.mce_size,
        'delta_size': ledger.delta_size,
        'nodes': len(ledger),
    }
    run = Run(command=RunCommand.SWEEP, delta_size=ledger.delta_size, result=result)
    db.session.add(run)
    db.session.commit()

    return jsonify(dict(result, run=run.slug)), 201


@api_v1_bp.route('/mce', methods=['POST'])
def mce():
    """Smallest explanation making the robot-optimal plan optimal for the human.

    Request (JSON):
        bundle: Bundle object (required)
        with_plan: Return the full solution record, plan included (optional, default: false)
    """
    data, problem = read_request()
    if data.get('with_plan'):
        return jsonify(solution_to_dict(explanation_baseline(problem, engine_settings())))
    explanation = mce_search(problem, settings=engine_settings())
    return jsonify({
        'explanation': list(explanation.lines()),
        'explanation_size': len(explanation),
    })


@api_v1_bp.route('/diff', methods=['POST'])
def diff():
    """Edits that turn the human model into the robot model."""
    _, problem = read_request()
    edits = edits_toward(problem.human_model, problem.robot_model, allow_cost_edits=True)
    return jsonify({
        'edits': [str(edit) for edit in edits],
        'delta_size': problem.delta_size,
    })


@api_v1_bp.route('/validate', methods=['POST'])
def validate():
    """Check a plan against one side of a bundle.

    Request (JSON):
        bundle: Bundle object (required)
        plan: Plan text, or a list of "(action args)" steps (required)
        side: 'robot' or 'human' (optional, default: robot)
    """
    data, problem = read_request()
    side = read_side(data)
    steps = data.get('plan')
    if isinstance(steps, list):
        steps = '\n'.join(str(step) for step in steps)
    if not isinstance(steps, str):
        raise InputError('plan must be text or a list of steps')
    candidate = read_plan(steps)

    model = problem.robot_model if side == 'robot' else problem.human_model
    cost = plan_cost(candidate, model)
    optimal = engine_settings().planner().optimal_cost(model)
    executable = cost != INFINITY
    return jsonify({
        'side': side,
        'steps': len(candidate),
        'executable': executable,
        'cost': rational_to_json(cost),
        'optimal_cost': rational_to_json(optimal),
        'optimal': executable and cost == optimal,
    })
