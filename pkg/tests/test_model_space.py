from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.services.errors import EditError, EncodingError, ModelError
from app.services.model_space import (
    Direction, Edit, Explanation, Kind, ModelFluent, Signature, apply_edit, apply_explanation,
    delta_size, edits_toward, gamma, model_delta, ungamma,
)
from app.services.pddl_io import load_bundle
from app.services.strips import Action, Fluent, Model
from tests.conftest import FIXTURES


def f(text):
    return Fluent.parse(text)


@pytest.fixture
def robot():
    return Model.build(
        [
            Action('move p1 p2', {f('at p1'), f('clear_path p1 p2')}, {f('at p2')}, {f('at p1')}),
            Action('clear p1 p2', {f('at p1')}, {f('clear_path p1 p2')}, set(), cost=5),
        ],
        init={f('at p1')},
        goal={f('at p2')},
    )


def test_edit_serialization_examples():
    init_edit = Edit(Direction.REMOVE, ModelFluent(Kind.INIT, None, f('clear_path p1 p8')))
    assert str(init_edit) == 'remove-has-initial-state-clear_path p1 p8'

    pre_edit = Edit.parse('add-has-precondition-sample_rock store0 w3 | empty store0')
    assert pre_edit.direction is Direction.ADD
    assert pre_edit.fluent == ModelFluent(Kind.PRECONDITION, 'sample_rock store0 w3', f('empty store0'))

    cost_edit = Edit.parse('add-has-cost-move p1 p2 | 3/2')
    assert cost_edit.fluent.payload == Fraction(3, 2)
    assert str(cost_edit) == 'add-has-cost-move p1 p2 | 3/2'


def test_add_effect_is_not_read_as_another_kind():
    edit = Edit.parse('remove-has-add-effect-fill-shot shot1 | contains shot1 i1')
    assert edit.fluent.kind is Kind.ADD_EFFECT
    assert edit.fluent.action == 'fill-shot shot1'


@pytest.mark.parametrize('text', [
    'toggle-has-goal-state-at p5',
    'add-is-goal-state-at p5',
    'add-has-weight-at p5',
    'add-has-precondition-move p1 p2',
])
def test_malformed_edits(text):
    with pytest.raises(EditError):
        Edit.parse(text)


def test_model_fluent_validation():
    with pytest.raises(EncodingError):
        ModelFluent(Kind.PRECONDITION, None, f('at p1'))
    with pytest.raises(EncodingError):
        ModelFluent(Kind.GOAL, 'move p1 p2', f('at p1'))
    with pytest.raises(EncodingError):
        ModelFluent(Kind.COST, 'move p1 p2', 'free')


def test_gamma_encodes_every_condition(robot):
    encoded = gamma(robot)
    assert ModelFluent(Kind.INIT, None, f('at p1')) in encoded
    assert ModelFluent(Kind.GOAL, None, f('at p2')) in encoded
    assert ModelFluent(Kind.DELETE_EFFECT, 'move p1 p2', f('at p1')) in encoded
    assert ModelFluent(Kind.COST, 'clear p1 p2', 5) in encoded
    # 1 init + 1 goal + move (2 pre, 1 add, 1 delete, cost) + clear (1 pre, 1 add, cost)
    assert len(encoded) == 10


def test_ungamma_inverts_gamma(robot):
    assert ungamma(gamma(robot), Signature.of(robot)) == robot


def test_ungamma_defaults_missing_costs(robot):
    without_costs = {mf for mf in gamma(robot) if mf.kind is not Kind.COST}
    decoded = ungamma(without_costs, Signature.of(robot))
    assert decoded.action('clear p1 p2').cost == 1


def test_ungamma_rejects_unknown_actions_and_double_costs(robot):
    signature = Signature.of(robot)
    with pytest.raises(EncodingError):
        ungamma(gamma(robot) | {ModelFluent(Kind.PRECONDITION, 'fly', f('at p1'))}, signature)
    with pytest.raises(EncodingError):
        ungamma(gamma(robot) | {ModelFluent(Kind.COST, 'clear p1 p2', 7)}, signature)


def test_apply_edit(robot):
    edit = Edit.parse('remove-has-precondition-move p1 p2 | clear_path p1 p2')
    edited = apply_edit(robot, edit)
    assert edited.action('move p1 p2').pre == {f('at p1')}
    assert delta_size(robot, edited) == 1


def test_apply_edit_rejects_no_ops(robot):
    with pytest.raises(EditError):
        apply_edit(robot, Edit.parse('add-has-initial-state-at p1'))
    with pytest.raises(EditError):
        apply_edit(robot, Edit.parse('remove-has-goal-state-at p1'))


def test_apply_edit_rejects_unknown_action(robot):
    with pytest.raises(EditError):
        apply_edit(robot, Edit.parse('add-has-precondition-fly p1 p2 | at p1'))


def test_apply_edit_rejects_invalid_result(robot):
    with pytest.raises(ModelError):
        apply_edit(robot, Edit.parse('add-has-add-effect-move p1 p2 | at p1'))


def test_cost_edits_replace_the_value(robot):
    edited = apply_edit(robot, Edit.parse('add-has-cost-clear p1 p2 | 2'))
    assert edited.action('clear p1 p2').cost == 2
    with pytest.raises(EditError):
        apply_edit(robot, Edit.parse('remove-has-cost-clear p1 p2 | 5'))
    with pytest.raises(EditError):
        apply_edit(robot, Edit.parse('add-has-cost-clear p1 p2 | 5'))


def test_explanation_is_a_set():
    a = Edit.parse('remove-has-initial-state-clear_path p1 p8')
    b = Edit.parse('add-has-goal-state-at p5')
    assert Explanation((a, b)) == Explanation((b, a))
    assert Explanation((a, b)).lines() == (str(b), str(a))
    with pytest.raises(EditError):
        Explanation((a, Edit(Direction.ADD, a.fluent)))


def test_edits_toward_reaches_target(robot):
    human = apply_explanation(robot, [
        Edit.parse('add-has-initial-state-clear_path p1 p2'),
        Edit.parse('remove-has-precondition-clear p1 p2 | at p1'),
    ])
    edits = edits_toward(human, robot)
    assert [str(e) for e in edits] == [
        'add-has-precondition-clear p1 p2 | at p1',
        'remove-has-initial-state-clear_path p1 p2',
    ]
    assert apply_explanation(human, edits) == robot


def test_cost_differences_need_cost_edits(robot):
    human = apply_edit(robot, Edit.parse('add-has-cost-clear p1 p2 | 1'))
    assert delta_size(human, robot) == 2
    assert edits_toward(human, robot) == []
    assert [str(e) for e in edits_toward(human, robot, allow_cost_edits=True)] == [
        'add-has-cost-clear p1 p2 | 5',
    ]


def test_removals_apply_before_additions():
    x = f('x')
    start = Model.build([Action('a', delete={x})], fluents={x})
    swap = [
        Edit.parse('add-has-add-effect-a | x'),
        Edit.parse('remove-has-delete-effect-a | x'),
    ]
    assert apply_explanation(start, swap).action('a').add == {x}


def test_model_delta_is_symmetric(robot):
    human = apply_edit(robot, Edit.parse('remove-has-goal-state-at p2'))
    only_robot, only_human = model_delta(robot, human)
    assert only_robot == {ModelFluent(Kind.GOAL, None, f('at p2'))}
    assert only_human == frozenset()


SIMPLE_FLUENTS = [Fluent(f"q{i}") for i in range(4)]
BASE = Model.build(
    [Action('a0', {SIMPLE_FLUENTS[0]}, {SIMPLE_FLUENTS[1]}), Action('a1', set(), {SIMPLE_FLUENTS[2]})],
    init={SIMPLE_FLUENTS[0]},
    goal={SIMPLE_FLUENTS[2]},
    fluents=SIMPLE_FLUENTS,
)
TARGET = Model.build(
    [Action('a0', {SIMPLE_FLUENTS[3]}, {SIMPLE_FLUENTS[1]}), Action('a1', {SIMPLE_FLUENTS[1]}, {SIMPLE_FLUENTS[2]})],
    init={SIMPLE_FLUENTS[3]},
    goal={SIMPLE_FLUENTS[1], SIMPLE_FLUENTS[2]},
    fluents=SIMPLE_FLUENTS,
)
SIMPLE_EDITS = edits_toward(BASE, TARGET)


@given(st.permutations(SIMPLE_EDITS))
@settings(deadline=None)
def test_edit_order_does_not_matter(edits):
    model = BASE
    for edit in edits:
        model = apply_edit(model, edit)
    assert model == TARGET


@given(st.sets(st.sampled_from(SIMPLE_EDITS)))
@settings(deadline=None)
def test_each_edit_closes_one_difference(subset):
    model = apply_explanation(BASE, subset)
    assert delta_size(model, TARGET) == len(SIMPLE_EDITS) - len(subset)
    assert delta_size(BASE, model) == len(subset)


@given(st.sets(st.sampled_from(SIMPLE_EDITS)))
@settings(deadline=None)
def test_serialized_edits_parse_back(subset):
    explanation = Explanation(tuple(subset))
    assert Explanation(tuple(Edit.parse(line) for line in explanation.lines())) == explanation


def test_corridor_encoding(corridor):
    encoded = gamma(corridor)
    assert ModelFluent(Kind.INIT, None, f('clear p2 p3')) in encoded
    assert ModelFluent(Kind.PRECONDITION, 'move p1 p2', f('clear p1 p2')) in encoded
    assert ModelFluent(Kind.COST, 'clear_rubble p1 p2', 3) in encoded
    assert ungamma(encoded, Signature.of(corridor)) == corridor


def test_extra_precondition_is_one_difference():
    problem = load_bundle(FIXTURES / 'corridor_human')
    assert delta_size(problem.robot_model, problem.human_model) == 1
    only_robot, only_human = model_delta(problem.robot_model, problem.human_model)
    assert only_robot == set()
    assert only_human == {ModelFluent(Kind.PRECONDITION, 'clear_rubble p1 p2', f('clear p2 p3'))}
