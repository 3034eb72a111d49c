from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.errors import ModelError
from app.services.pddl_io import load_bundle
from app.services.strips import (
    Action, Fluent, Model, Plan, apply, is_satisficing, plan_cost, progress,
)
from app.utils.numbers import INFINITY
from tests.conftest import FIXTURES


def f(text):
    return Fluent.parse(text)


@pytest.fixture
def rooms():
    actions = [
        Action('move r1 r2', {f('at r1')}, {f('at r2')}, {f('at r1')}),
        Action('move r2 r3', {f('at r2')}, {f('at r3')}, {f('at r2')}),
        Action('jump r1 r3', {f('at r1')}, {f('at r3')}, {f('at r1')}, cost=5),
    ]
    return Model.build(actions, init={f('at r1')}, goal={f('at r3')})


def test_fluent_parse_and_str():
    fluent = Fluent.parse('(clear_path p1 p8)')
    assert fluent == Fluent('clear_path', ('p1', 'p8'))
    assert str(fluent) == 'clear_path p1 p8'


def test_action_rejects_add_delete_overlap():
    with pytest.raises(ModelError):
        Action('bad', add={f('x')}, delete={f('x')})


def test_action_rejects_negative_cost():
    with pytest.raises(ModelError):
        Action('bad', cost=-1)


def test_model_rejects_fluents_outside_vocabulary():
    action = Action('a', pre={f('p')})
    with pytest.raises(ModelError):
        Model(frozenset({f('q')}), (action,))


def test_model_rejects_duplicate_action_names():
    with pytest.raises(ModelError):
        Model.build([Action('a'), Action('a')])


def test_models_compare_by_value(rooms):
    shuffled = Model.build(reversed(rooms.actions), rooms.init, rooms.goal)
    assert shuffled == rooms
    assert hash(shuffled) == hash(rooms)


def test_apply(rooms):
    state = frozenset({f('at r1')})
    assert apply(state, 'move r1 r2', rooms) == {f('at r2')}
    assert apply(state, 'move r2 r3', rooms) is None
    assert apply(state, 'fly r1 r3', rooms) is None


def test_progress_is_absorbing_on_failure(rooms):
    plan = Plan(('move r2 r3', 'move r1 r2'))
    assert progress(rooms.init, plan, rooms) is None


def test_plan_cost(rooms):
    assert plan_cost(Plan(('move r1 r2', 'move r2 r3')), rooms) == 2
    assert plan_cost(Plan(('jump r1 r3',)), rooms) == 5
    assert plan_cost(Plan(('move r1 r2',)), rooms) == INFINITY
    assert plan_cost(Plan(('move r2 r3',)), rooms) == INFINITY


def test_empty_plan_cost_depends_on_goal(rooms):
    assert plan_cost(Plan(), rooms) == INFINITY
    assert plan_cost(Plan(), rooms.with_goal(rooms.init)) == 0


def test_is_satisficing(rooms):
    assert is_satisficing(Plan(('jump r1 r3',)), rooms)
    assert not is_satisficing(Plan(('move r1 r2',)), rooms)


def test_costs_are_exact(rooms):
    cheap = rooms.with_action(Action('jump r1 r3', {f('at r1')}, {f('at r3')}, {f('at r1')}, cost='1/3'))
    assert plan_cost(Plan(('jump r1 r3',)), cheap) == Fraction(1, 3)


def test_plan_lines():
    assert Plan(('move r1 r2',)).lines() == ('(move r1 r2)',)


CORRIDOR = load_bundle(FIXTURES / 'corridor').robot_model
CORRIDOR_PLAN = Plan(('clear_rubble p1 p2', 'move p1 p2', 'move p2 p3'))


def test_apply_on_the_corridor(corridor):
    state = frozenset({f('clear p1 p2'), f('at p1')})
    assert apply(state, 'move p1 p2', corridor) == {f('clear p1 p2'), f('at p2')}
    assert apply(frozenset(), 'move p1 p2', corridor) is None
    assert apply(corridor.init, 'move p1 p2', corridor) is None


def test_apply_without_effects_keeps_the_state():
    wait = Action('wait', {f('at r1')})
    model = Model.build([wait], init={f('at r1')})
    assert apply(model.init, wait, model) == model.init


def test_progress_on_the_corridor(corridor):
    assert progress(corridor.init, Plan(), corridor) == corridor.init
    opened = corridor.init | {f('clear p1 p2')}
    final = progress(opened, Plan(('move p1 p2', 'move p2 p3')), corridor)
    assert f('at p3') in final
    assert progress(corridor.init, Plan(('move p2 p3',)), corridor) is None


def test_corridor_plan_cost(corridor):
    assert plan_cost(CORRIDOR_PLAN, corridor) == 5
    assert is_satisficing(CORRIDOR_PLAN, corridor)
    assert plan_cost(Plan(('move p1 p2', 'move p2 p3')), corridor) == INFINITY


plans = st.lists(st.sampled_from(CORRIDOR.action_names), max_size=6).map(Plan)
states = st.frozensets(st.sampled_from(sorted(CORRIDOR.fluents)), max_size=6)


@given(plans, st.data())
@settings(max_examples=200, deadline=None)
def test_progress_folds_over_any_split(plan, data):
    cut = data.draw(st.integers(0, len(plan)))
    head, tail = Plan(plan.steps[:cut]), Plan(plan.steps[cut:])
    middle = progress(CORRIDOR.init, head, CORRIDOR)
    whole = progress(CORRIDOR.init, plan, CORRIDOR)
    if middle is None:
        assert whole is None
    else:
        assert whole == progress(middle, tail, CORRIDOR)


@given(plans)
@settings(max_examples=200, deadline=None)
def test_cost_is_the_sum_of_step_costs(plan):
    final = progress(CORRIDOR.init, plan, CORRIDOR)
    if final is None:
        assert plan_cost(plan, CORRIDOR) == INFINITY
    else:
        reached = CORRIDOR.with_goal(final)
        assert plan_cost(plan, reached) == sum(CORRIDOR.action(step).cost for step in plan)


@given(states, st.sampled_from(CORRIDOR.actions))
@settings(max_examples=200, deadline=None)
def test_apply_only_touches_effects(state, action):
    result = apply(state, action, CORRIDOR)
    if result is not None:
        assert state ^ result <= action.add | action.delete
