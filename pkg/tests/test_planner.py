from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.errors import PlannerLimitError
from app.services.pddl_io import load_bundle, parse_domain_problem
from app.services.planner import Planner, blind_optimal_plan, h_max, optimal_cost, optimal_plan
from app.services.strips import Action, Fluent, Model, apply, plan_cost
from app.utils.numbers import INFINITY
from tests.conftest import FIXTURES, SCENARIOS, scenario_problem

FLUENTS = [Fluent(f"p{i}") for i in range(4)]


@st.composite
def models(draw):
    """Small propositional models with costs in 1..3."""
    actions = []
    for i in range(draw(st.integers(1, 5))):
        pre = draw(st.sets(st.sampled_from(FLUENTS), max_size=2))
        add = draw(st.sets(st.sampled_from(FLUENTS), min_size=1, max_size=2))
        delete = draw(st.sets(st.sampled_from([x for x in FLUENTS if x not in add]), max_size=1))
        cost = draw(st.integers(1, 3))
        actions.append(Action(f"a{i}", pre, add, delete, cost))
    init = draw(st.sets(st.sampled_from(FLUENTS), max_size=2))
    goal = draw(st.sets(st.sampled_from(FLUENTS), min_size=1, max_size=2))
    return Model(frozenset(FLUENTS), tuple(actions), frozenset(init), frozenset(goal))


def chain(n, cost=1):
    steps = [Fluent('at', (f"r{i}",)) for i in range(n + 1)]
    actions = [
        Action(f"move r{i} r{i + 1}", {steps[i]}, {steps[i + 1]}, {steps[i]}, cost)
        for i in range(n)
    ]
    return Model.build(actions, init={steps[0]}, goal={steps[-1]})


def test_optimal_plan_on_chain():
    result = optimal_plan(chain(3))
    assert result.solved
    assert result.cost == 3
    assert result.plan.steps == ('move r0 r1', 'move r1 r2', 'move r2 r3')


def test_goal_already_true():
    model = chain(2)
    model = model.with_goal(model.init)
    result = optimal_plan(model)
    assert result.solved
    assert len(result.plan) == 0
    assert result.cost == 0


def test_unsolvable_model_has_infinite_cost():
    model = chain(2).with_init(set())
    result = optimal_plan(model)
    assert not result.solved
    assert result.cost == INFINITY


def test_prefers_cheaper_detour():
    a, b, c = Fluent('a'), Fluent('b'), Fluent('c')
    model = Model.build(
        [
            Action('direct', {a}, {c}, {a}, cost=5),
            Action('first', {a}, {b}, {a}, cost=1),
            Action('second', {b}, {c}, {b}, cost=1),
        ],
        init={a}, goal={c},
    )
    assert optimal_plan(model).plan.steps == ('first', 'second')


def test_ties_break_on_action_names():
    a, b = Fluent('a'), Fluent('b')
    model = Model.build([Action('zeta', {a}, {b}), Action('alpha', {a}, {b})], init={a}, goal={b})
    assert optimal_plan(model).plan.steps == ('alpha',)


def test_h_max_values():
    model = chain(3, cost=2)
    assert h_max(model, model.init) == 6
    assert h_max(model, model.goal) == 0
    assert h_max(model.with_init(set()), frozenset()) == INFINITY


def test_fractional_costs():
    result = optimal_plan(chain(2, cost=Fraction(1, 2)))
    assert result.cost == 1


def test_node_cap():
    with pytest.raises(PlannerLimitError) as excinfo:
        Planner(node_cap=1).optimal_plan(chain(4))
    assert excinfo.value.nodes_expanded == 2


def test_memo_returns_same_result():
    planner = Planner()
    model = chain(3)
    first = planner.optimal_plan(model)
    second = planner.optimal_plan(chain(3))
    assert first is second
    assert planner.calls == 1
    assert planner.cache_size == 1


def test_blind_search_is_not_memoized():
    planner = Planner()
    planner.blind_optimal_plan(chain(2))
    assert planner.cache_size == 0


@given(models())
@settings(max_examples=150, deadline=None)
def test_astar_matches_blind_search(model):
    heuristic = optimal_plan(model)
    blind = blind_optimal_plan(model)
    assert heuristic.cost == blind.cost
    if heuristic.solved:
        assert plan_cost(heuristic.plan, model) == heuristic.cost


@given(models())
@settings(max_examples=150, deadline=None)
def test_h_max_is_admissible(model):
    assert h_max(model, model.init) <= optimal_cost(model)


@given(models())
@settings(max_examples=50, deadline=None)
def test_equal_models_get_identical_plans(model):
    again = Model(model.fluents, tuple(reversed(model.actions)), model.init, model.goal)
    first, second = optimal_plan(model), optimal_plan(again)
    assert (first.plan, first.cost) == (second.plan, second.cost)


@given(models(), st.lists(st.integers(0, 4), max_size=6))
@settings(max_examples=150, deadline=None)
def test_h_max_is_admissible_on_reachable_states(model, choices):
    state = model.init
    for choice in choices:
        applicable = [a for a in model.actions if a.pre <= state]
        if not applicable:
            break
        state = apply(state, applicable[choice % len(applicable)], model)
    assert h_max(model, state) <= blind_optimal_plan(model.with_init(state)).cost


def test_corridor_optimal_plan(corridor):
    result = optimal_plan(corridor)
    assert result.plan.steps == ('clear_rubble p1 p2', 'move p1 p2', 'move p2 p3')
    assert result.cost == 5
    assert optimal_cost(corridor) == 5
    assert blind_optimal_plan(corridor).cost == 5


def test_corridor_goal_out_of_reach():
    domain = (FIXTURES / 'corridor' / 'domain.pddl').read_text()
    problem = (FIXTURES / 'corridor' / 'problem.pddl').read_text()
    problem = problem.replace('p1 p2 p3 - place', 'p1 p2 p3 p4 - place')
    problem = problem.replace('(:goal (at p3))', '(:goal (at p4))')
    result = optimal_plan(parse_domain_problem(domain, problem))
    assert not result.solved
    assert result.cost == INFINITY


FIXTURE_BUNDLES = ['corridor', 'corridor_human', 'hallway', 'shortcut']


def bundle_problem(name):
    return load_bundle(FIXTURES / name) if name in FIXTURE_BUNDLES else scenario_problem(name)


@pytest.mark.parametrize('name', sorted(SCENARIOS) + FIXTURE_BUNDLES)
def test_astar_matches_blind_search_on_bundles(name):
    problem = bundle_problem(name)
    for model in (problem.robot_model, problem.human_model):
        heuristic, blind = optimal_plan(model), blind_optimal_plan(model)
        assert heuristic.cost == blind.cost
        if heuristic.solved:
            assert plan_cost(heuristic.plan, model) == heuristic.cost
