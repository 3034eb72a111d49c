"""Grounded STRIPS representation: fluents, actions, models, plans and their semantics.

Everything here is immutable and every operation is pure. States are frozensets
of fluents; the undefined outcome of applying an action whose precondition does
not hold is ``None``; the cost of an inexecutable plan is ``INFINITY``.
"""

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import FrozenSet, Iterable, Optional, Tuple, Union

from app.services.errors import ModelError
from app.utils.numbers import INFINITY, parse_rational

logger = logging.getLogger(__name__)

DEFAULT_ACTION_COST = Fraction(1)


@dataclass(frozen=True, order=True)
class Fluent:
    """A fully grounded atom such as ``clear_path p1 p8``."""
    name: str
    args: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'args', tuple(self.args))

    @classmethod
    def parse(cls, text: str) -> 'Fluent':
        """Build a fluent from ``"name arg1 arg2"`` or ``"(name arg1 arg2)"``."""
        tokens = text.strip().strip('()').split()
        if not tokens:
            raise ModelError(f"Empty fluent: {text!r}")
        return cls(tokens[0], tuple(tokens[1:]))

    def __str__(self):
        return ' '.join((self.name,) + self.args)


State = FrozenSet[Fluent]


@dataclass(frozen=True)
class Action:
    """A grounded action ``<cost, pre, add, delete>``."""
    name: str
    pre: FrozenSet[Fluent] = frozenset()
    add: FrozenSet[Fluent] = frozenset()
    delete: FrozenSet[Fluent] = frozenset()
    cost: Fraction = DEFAULT_ACTION_COST

    def __post_init__(self):
        object.__setattr__(self, 'pre', frozenset(self.pre))
        object.__setattr__(self, 'add', frozenset(self.add))
        object.__setattr__(self, 'delete', frozenset(self.delete))
        try:
            object.__setattr__(self, 'cost', parse_rational(self.cost))
        except ValueError as e:
            raise ModelError(f"Action {self.name!r}: {e}")
        overlap = self.add & self.delete
        if overlap:
            raise ModelError(
                f"Action {self.name!r} both adds and deletes "
                f"{', '.join(sorted(str(f) for f in overlap))}"
            )

    @property
    def fluents(self) -> FrozenSet[Fluent]:
        return self.pre | self.add | self.delete


@dataclass(frozen=True)
class Model:
    """A grounded planning problem ``<F, A, I, G>``.

    ``actions`` is kept as a tuple sorted by name so that equal models are equal
    values and hash alike; use :meth:`action` for lookups.
    """
    fluents: FrozenSet[Fluent]
    actions: Tuple[Action, ...]
    init: FrozenSet[Fluent] = frozenset()
    goal: FrozenSet[Fluent] = frozenset()
    _index: dict = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, 'fluents', frozenset(self.fluents))
        object.__setattr__(self, 'init', frozenset(self.init))
        object.__setattr__(self, 'goal', frozenset(self.goal))
        actions = tuple(sorted(self.actions, key=lambda a: a.name))
        object.__setattr__(self, 'actions', actions)

        index = {}
        for action in actions:
            if action.name in index:
                raise ModelError(f"Duplicate action name {action.name!r}")
            index[action.name] = action
        object.__setattr__(self, '_index', index)

        self._check_vocabulary()

    def _check_vocabulary(self):
        unknown = (self.init | self.goal) - self.fluents
        for action in self.actions:
            unknown |= action.fluents - self.fluents
        if unknown:
            raise ModelError(
                f"Fluents outside the model vocabulary: "
                f"{', '.join(sorted(str(f) for f in unknown))}"
            )

    @classmethod
    def build(cls, actions: Iterable[Action], init: Iterable[Fluent] = (),
              goal: Iterable[Fluent] = (), fluents: Iterable[Fluent] = ()) -> 'Model':
        """Create a model whose vocabulary is everything mentioned plus ``fluents``."""
        actions = tuple(actions)
        vocabulary = set(fluents) | set(init) | set(goal)
        for action in actions:
            vocabulary |= action.fluents
        return cls(frozenset(vocabulary), actions, frozenset(init), frozenset(goal))

    def action(self, name: str) -> Optional[Action]:
        return self._index.get(name)

    @cached_property
    def action_names(self) -> Tuple[str, ...]:
        return tuple(a.name for a in self.actions)

    def with_init(self, init: Iterable[Fluent]) -> 'Model':
        return replace(self, init=frozenset(init))

    def with_goal(self, goal: Iterable[Fluent]) -> 'Model':
        return replace(self, goal=frozenset(goal))

    def with_fluents(self, fluents: Iterable[Fluent]) -> 'Model':
        return replace(self, fluents=frozenset(fluents))

    def with_action(self, action: Action) -> 'Model':
        """Replace the action of the same name."""
        if action.name not in self._index:
            raise ModelError(f"Unknown action {action.name!r}")
        actions = tuple(action if a.name == action.name else a for a in self.actions)
        return replace(self, actions=actions)


@dataclass(frozen=True)
class Plan:
    """An action sequence, evaluable against any model."""
    steps: Tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    def __len__(self):
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def lines(self) -> Tuple[str, ...]:
        return tuple(f"({step})" for step in self.steps)

    def __str__(self):
        return '\n'.join(self.lines())


def _resolve(action: Union[Action, str], model: Model) -> Optional[Action]:
    name = action if isinstance(action, str) else action.name
    resolved = model.action(name)
    if resolved is None:
        logger.debug(f"Action {name!r} is not part of the model; treating as inexecutable")
    return resolved


def apply(state: State, action: Union[Action, str], model: Model) -> Optional[State]:
    """One transition. Returns ``None`` when the action is inapplicable or unknown."""
    resolved = _resolve(action, model)
    if resolved is None or not resolved.pre <= state:
        return None
    return (state | resolved.add) - resolved.delete


def progress(init: State, plan: Plan, model: Model) -> Optional[State]:
    """Left fold of :func:`apply` over the plan; ``None`` is absorbing."""
    state = frozenset(init)
    for step in plan:
        state = apply(state, step, model)
        if state is None:
            return None
    return state


def plan_cost(plan: Plan, model: Model):
    """Sum of step costs if the plan reaches the goal, ``INFINITY`` otherwise."""
    final = progress(model.init, plan, model)
    if final is None or not model.goal <= final:
        return INFINITY
    return sum((model.action(step).cost for step in plan), Fraction(0))


def is_satisficing(plan: Plan, model: Model) -> bool:
    return plan_cost(plan, model) != INFINITY
