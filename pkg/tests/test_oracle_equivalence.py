"""Model-space search against exhaustive enumeration on seeded random bundles."""

from fractions import Fraction

import pytest

from app.services.mega import brute_force_solution, mega_search, reevaluate
from app.services.pddl_io import load_bundle
from app.services.planner import Planner
from tests.conftest import FIXTURES, scenario

SEEDS = range(50)
ALPHA_GRID = [Fraction(i, 4) for i in range(20)]


def random_problem(seed, delta_size):
    return load_bundle(scenario('random', seed=seed, delta_size=delta_size))


@pytest.mark.parametrize('seed', SEEDS)
@pytest.mark.parametrize('delta_size', [2, 5, 8])
def test_search_agrees_with_enumeration(seed, delta_size):
    problem = random_problem(seed, delta_size)
    assert problem.delta_size == delta_size

    planner = Planner()
    _, ledger = mega_search(problem, alpha=0, planner=planner)
    for alpha in (0, '1/4', '1/2', 1, 2, delta_size):
        expected = brute_force_solution(problem, alpha=alpha, planner=planner)
        assert reevaluate(ledger, alpha) == expected


@pytest.mark.parametrize('seed', SEEDS)
def test_trade_off_properties(seed):
    problem = random_problem(seed, 6)
    planner = Planner()
    _, ledger = mega_search(problem, alpha=0, planner=planner)
    solutions = [reevaluate(ledger, alpha) for alpha in ALPHA_GRID]

    for solution in solutions:
        assert solution.explanation_size <= ledger.mce_size
    sizes = [s.explanation_size for s in solutions]
    penalties = [s.explicability_penalty for s in solutions]
    assert sizes == sorted(sizes)
    assert penalties == sorted(penalties, reverse=True)

    at_delta = reevaluate(ledger, problem.delta_size)
    assert at_delta.explicability_penalty == 0
    assert at_delta.explanation_size == ledger.mce_size


@pytest.mark.parametrize('seed', range(5))
def test_fresh_search_matches_reevaluation(seed):
    problem = random_problem(seed, 5)
    planner = Planner()
    _, ledger = mega_search(problem, alpha=0, planner=planner)
    for alpha in ALPHA_GRID:
        fresh, _ = mega_search(problem, alpha=alpha, planner=planner)
        assert reevaluate(ledger, alpha).objective == fresh.objective


@pytest.mark.parametrize('name', ['corridor', 'corridor_human', 'hallway', 'hallway_overlay'])
def test_fixture_bundles(name):
    problem = load_bundle(FIXTURES / name)
    _, ledger = mega_search(problem)
    for alpha in (0, '1/4', '1/2', 1, 2, problem.delta_size):
        assert reevaluate(ledger, alpha) == brute_force_solution(problem, alpha=alpha)
