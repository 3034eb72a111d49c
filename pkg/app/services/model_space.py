"""Models as sets of model-fluents, unit edits between them, and explanations.

A model is encoded as one model-fluent per condition it holds: every initial
and goal fact, every precondition and effect of every action, and one cost
value per action. An edit adds or removes a single model-fluent; an
explanation is a set of edits over distinct model-fluents.

Serialized edits follow the form ``<direction>-has-<kind>-<payload>``::

    remove-has-initial-state-clear_path p1 p8
    add-has-precondition-sample_rock store w3 | empty store
    add-has-cost-move p1 p2 | 3/2
"""

import enum
import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import FrozenSet, Iterable, List, Optional, Tuple, Union

from app.services.errors import EditError, EncodingError
from app.services.strips import DEFAULT_ACTION_COST, Action, Fluent, Model
from app.utils.numbers import parse_rational

logger = logging.getLogger(__name__)

ACTION_SEPARATOR = ' | '


class Kind(str, enum.Enum):
    INIT = 'initial-state'
    GOAL = 'goal-state'
    PRECONDITION = 'precondition'
    ADD_EFFECT = 'add-effect'
    DELETE_EFFECT = 'delete-effect'
    COST = 'cost'

    @property
    def per_action(self) -> bool:
        return self not in (Kind.INIT, Kind.GOAL)


# longest labels first so 'add-effect' is never mistaken for a shorter prefix
_KINDS_BY_LABEL = sorted(Kind, key=lambda k: len(k.value), reverse=True)

_ACTION_FIELDS = {
    Kind.PRECONDITION: 'pre',
    Kind.ADD_EFFECT: 'add',
    Kind.DELETE_EFFECT: 'delete',
}


class Direction(str, enum.Enum):
    ADD = 'add'
    REMOVE = 'remove'


@dataclass(frozen=True)
class ModelFluent:
    """One condition of a model: a fact of I or G, a condition of an action, or an action cost."""
    kind: Kind
    action: Optional[str] = None
    payload: Union[Fluent, Fraction, None] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', Kind(self.kind))
        if self.kind.per_action and not self.action:
            raise EncodingError(f"Model-fluent of kind {self.kind.value!r} needs an action")
        if not self.kind.per_action and self.action is not None:
            raise EncodingError(f"Model-fluent of kind {self.kind.value!r} takes no action")
        if self.kind is Kind.COST:
            try:
                object.__setattr__(self, 'payload', parse_rational(self.payload))
            except ValueError as e:
                raise EncodingError(f"Invalid cost for {self.action!r}: {e}")
        elif not isinstance(self.payload, Fluent):
            raise EncodingError(f"Model-fluent of kind {self.kind.value!r} needs a fluent")

    def __str__(self):
        payload = str(self.payload)
        if self.kind.per_action:
            payload = f"{self.action}{ACTION_SEPARATOR}{payload}"
        return f"has-{self.kind.value}-{payload}"

    @classmethod
    def parse(cls, text: str) -> 'ModelFluent':
        """Inverse of ``str()``, e.g. ``has-goal-state-at p5``."""
        text = text.strip()
        if not text.startswith('has-'):
            raise EditError(f"Not a model-fluent: {text!r}")
        rest = text[len('has-'):]
        for kind in _KINDS_BY_LABEL:
            prefix = f"{kind.value}-"
            if rest.startswith(prefix):
                body = rest[len(prefix):]
                break
        else:
            raise EditError(f"Unknown model-fluent kind in {text!r}")

        if not kind.per_action:
            return cls(kind, None, Fluent.parse(body))

        action, sep, payload = body.partition(ACTION_SEPARATOR)
        if not sep or not action.strip() or not payload.strip():
            raise EditError(f"Expected '<action>{ACTION_SEPARATOR}<value>' in {text!r}")
        action = ' '.join(action.split())
        if kind is Kind.COST:
            return cls(kind, action, payload.strip())
        return cls(kind, action, Fluent.parse(payload))


@dataclass(frozen=True)
class Edit:
    """A unit model change: add or remove one model-fluent."""
    direction: Direction
    fluent: ModelFluent

    def __post_init__(self):
        object.__setattr__(self, 'direction', Direction(self.direction))

    def __str__(self):
        return f"{self.direction.value}-{self.fluent}"

    @classmethod
    def parse(cls, text: str) -> 'Edit':
        text = text.strip()
        for direction in Direction:
            prefix = f"{direction.value}-"
            if text.startswith(prefix):
                return cls(direction, ModelFluent.parse(text[len(prefix):]))
        raise EditError(f"Edit must start with 'add-' or 'remove-': {text!r}")


@dataclass(frozen=True)
class Explanation:
    """A set of edits over distinct model-fluents, kept in serialized order."""
    edits: Tuple[Edit, ...] = ()

    def __post_init__(self):
        edits = tuple(sorted(self.edits, key=str))
        touched = set()
        for edit in edits:
            if edit.fluent in touched:
                raise EditError(f"Explanation touches {edit.fluent} more than once")
            touched.add(edit.fluent)
        object.__setattr__(self, 'edits', edits)

    def __len__(self):
        return len(self.edits)

    def __iter__(self):
        return iter(self.edits)

    def __contains__(self, edit):
        return edit in self.edits

    def with_edit(self, edit: Edit) -> 'Explanation':
        return Explanation(self.edits + (edit,))

    def lines(self) -> Tuple[str, ...]:
        return tuple(str(edit) for edit in self.edits)

    @property
    def key(self) -> Tuple[str, ...]:
        return self.lines()


@dataclass(frozen=True)
class Signature:
    """The fluent universe and action-name universe shared by related models."""
    fluents: FrozenSet[Fluent]
    action_names: Tuple[str, ...]

    @classmethod
    def of(cls, model: Model) -> 'Signature':
        return cls(model.fluents, model.action_names)


def gamma(model: Model) -> FrozenSet[ModelFluent]:
    """Encode a model as its set of model-fluents."""
    encoded = set()
    encoded.update(ModelFluent(Kind.INIT, None, f) for f in model.init)
    encoded.update(ModelFluent(Kind.GOAL, None, f) for f in model.goal)
    for action in model.actions:
        for kind, attr in _ACTION_FIELDS.items():
            encoded.update(ModelFluent(kind, action.name, f) for f in getattr(action, attr))
        encoded.add(ModelFluent(Kind.COST, action.name, action.cost))
    return frozenset(encoded)


def ungamma(fluents: Iterable[ModelFluent], signature: Signature) -> Model:
    """Decode a model-fluent set back into a model over ``signature``.

    Actions without a cost model-fluent get the default cost of 1.

    Raises:
        EncodingError: If an action is outside the signature or has two costs.
    """
    known = set(signature.action_names)
    init, goal = set(), set()
    conditions = {name: {'pre': set(), 'add': set(), 'delete': set()} for name in known}
    costs = {}

    for mf in fluents:
        if mf.kind is Kind.INIT:
            init.add(mf.payload)
            continue
        if mf.kind is Kind.GOAL:
            goal.add(mf.payload)
            continue
        if mf.action not in known:
            raise EncodingError(f"Action {mf.action!r} is not part of the signature")
        if mf.kind is Kind.COST:
            if mf.action in costs:
                raise EncodingError(f"Action {mf.action!r} has more than one cost")
            costs[mf.action] = mf.payload
        else:
            conditions[mf.action][_ACTION_FIELDS[mf.kind]].add(mf.payload)

    actions = [
        Action(name, cost=costs.get(name, DEFAULT_ACTION_COST), **conditions[name])
        for name in signature.action_names
    ]
    return Model(signature.fluents, tuple(actions), frozenset(init), frozenset(goal))


def model_delta(m1: Model, m2: Model) -> Tuple[FrozenSet[ModelFluent], FrozenSet[ModelFluent]]:
    """Model-fluents only in ``m1`` and only in ``m2``."""
    g1, g2 = gamma(m1), gamma(m2)
    return g1 - g2, g2 - g1


def delta_size(m1: Model, m2: Model) -> int:
    only_first, only_second = model_delta(m1, m2)
    return len(only_first) + len(only_second)


def apply_edit(model: Model, edit: Edit) -> Model:
    """Apply one edit to a model.

    Cost edits replace the action's cost with the edit's value; they can only
    be added.

    Raises:
        EditError: If the edit is a no-op or names an unknown action.
        ModelError: If the edited model violates a model invariant.
    """
    mf = edit.fluent
    adding = edit.direction is Direction.ADD

    if mf.kind in (Kind.INIT, Kind.GOAL):
        current = model.init if mf.kind is Kind.INIT else model.goal
        if (mf.payload in current) == adding:
            raise EditError(f"No-op edit: {edit}")
        updated = current | {mf.payload} if adding else current - {mf.payload}
        return model.with_init(updated) if mf.kind is Kind.INIT else model.with_goal(updated)

    action = model.action(mf.action)
    if action is None:
        raise EditError(f"Edit {edit} names unknown action {mf.action!r}")

    if mf.kind is Kind.COST:
        if not adding:
            raise EditError(f"Cost edits replace a value and cannot be removed: {edit}")
        if action.cost == mf.payload:
            raise EditError(f"No-op edit: {edit}")
        return model.with_action(replace(action, cost=mf.payload))

    attr = _ACTION_FIELDS[mf.kind]
    current = getattr(action, attr)
    if (mf.payload in current) == adding:
        raise EditError(f"No-op edit: {edit}")
    updated = current | {mf.payload} if adding else current - {mf.payload}
    return model.with_action(replace(action, **{attr: updated}))


def apply_explanation(model: Model, explanation: Iterable[Edit]) -> Model:
    """Apply a set of edits, removals first; intermediate models stay valid whenever the result is."""
    edits = sorted(explanation, key=lambda e: (e.direction is Direction.ADD, str(e)))
    for edit in edits:
        model = apply_edit(model, edit)
    return model


def edits_toward(current: Model, target: Model, allow_cost_edits: bool = False) -> List[Edit]:
    """Every unit edit that moves ``current`` one step closer to ``target``.

    Cost differences are only bridged when ``allow_cost_edits`` is set; each
    is a single value-replacing edit.
    """
    only_current, only_target = model_delta(current, target)
    edits = [Edit(Direction.REMOVE, mf) for mf in only_current if mf.kind is not Kind.COST]
    for mf in only_target:
        if mf.kind is not Kind.COST or allow_cost_edits:
            edits.append(Edit(Direction.ADD, mf))
    return sorted(edits, key=str)
