"""JSON-ready dictionaries for engine results, shared by the API and the CLI."""

from app.utils.numbers import rational_to_json


def plan_to_list(plan):
    """Convert a Plan to its printed steps, or None when there is no plan."""
    if plan is None:
        return None
    return list(plan.lines())


def plan_result_to_dict(result, side, cost_in_robot=None, robot_optimal_cost=None):
    data = {
        'side': side,
        'plan': plan_to_list(result.plan),
        'cost': rational_to_json(result.cost),
        'nodes_expanded': result.nodes_expanded,
    }
    if cost_in_robot is not None:
        data['cost_in_robot'] = rational_to_json(cost_in_robot)
        data['robot_optimal_cost'] = rational_to_json(robot_optimal_cost)
    return data


def solution_to_dict(solution, ledger=None):
    """Convert a Solution (and optionally its search ledger) to a dictionary."""
    data = {
        'alpha': rational_to_json(solution.alpha),
        'plan': plan_to_list(solution.plan),
        'explanation': list(solution.explanation.lines()),
        'explanation_size': solution.explanation_size,
        'cost_in_robot': rational_to_json(solution.cost_in_robot),
        'explicability_penalty': rational_to_json(solution.explicability_penalty),
        'objective': rational_to_json(solution.objective),
    }
    if ledger is not None:
        data.update({
            'robot_optimal_cost': rational_to_json(ledger.robot_optimal_cost),
            'mce_size': ledger.mce_size,
            'delta_size': ledger.delta_size,
            'nodes': len(ledger),
        })
    return data


def sweep_row_to_dict(row, ledger=None):
    data = {
        'alpha': rational_to_json(row.alpha),
        'explanation_size': row.explanation_size,
        'plan_cost_in_robot': rational_to_json(row.plan_cost_in_robot),
        'objective': rational_to_json(row.objective),
        'explicability_penalty': rational_to_json(row.explicability_penalty),
    }
    if ledger is not None:
        data['nodes'] = len(ledger)
        data['time'] = round(ledger.wall_time, 3)
    return data
