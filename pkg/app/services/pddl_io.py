"""Reading and writing planning text: domains, problems, bundles, overlays and plans.

The accepted language is the STRIPS fragment of PDDL with typing and
non-negative action costs (``(increase (total-cost) n)``). Anything else is
reported as an :class:`UnsupportedConstructError` naming the construct.
"""

import itertools
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from pyparsing import (
    CharsNotIn, Empty, Forward, Group, ParseBaseException, StringEnd, Suppress, ZeroOrMore,
    col, lineno, rest_of_line,
)

from app.services.errors import (
    InputError, ModelError, ParseError, UnsupportedConstructError, VocabularyError,
)
from app.services.mega import HapProblem
from app.services.model_space import Edit, Explanation, apply_explanation
from app.services.strips import DEFAULT_ACTION_COST, Action, Fluent, Model, Plan
from app.utils.numbers import format_rational, parse_rational

logger = logging.getLogger(__name__)

EXPLANATION_PREFIX = 'Explanation >> '
ROOT_TYPE = 'object'
TOTAL_COST = 'total-cost'

DOMAIN_FILE = 'domain.pddl'
PROBLEM_FILE = 'problem.pddl'
HUMAN_DOMAIN_FILE = 'human-domain.pddl'
HUMAN_PROBLEM_FILE = 'human-problem.pddl'
OVERLAY_FILE = 'human.overlay'

SUPPORTED_REQUIREMENTS = {':strips', ':typing', ':action-costs'}
UNSUPPORTED_FORMULAS = {
    'not': 'negative preconditions',
    'or': 'disjunctive conditions',
    'imply': 'implications',
    'exists': 'existential quantification',
    'forall': 'universal quantification',
    'when': 'conditional effects',
    '=': 'equality',
    'either': 'either types',
}


class Atom:
    """A located symbol."""
    __slots__ = ('text', 'line', 'column')

    def __init__(self, text: str, line: int, column: int):
        self.text = text.lower()
        self.line = line
        self.column = column

    def __repr__(self):
        return f"Atom({self.text!r})"


class SExpr:
    """A located parenthesised list."""
    __slots__ = ('items', 'line', 'column')

    def __init__(self, items, line: int, column: int):
        self.items = list(items)
        self.line = line
        self.column = column

    @property
    def head(self) -> Optional[str]:
        if self.items and isinstance(self.items[0], Atom):
            return self.items[0].text
        return None

    def __len__(self):
        return len(self.items)

    def __repr__(self):
        return f"SExpr({self.items!r})"


def _grammar():
    symbol = Empty() + CharsNotIn("() \n\t\r;")
    symbol.set_parse_action(lambda s, loc, toks: Atom(toks[0], lineno(loc, s), col(loc, s)))
    nested = Forward()
    nested <<= Group(Suppress("(") + ZeroOrMore(symbol | nested) + Suppress(")"))
    nested.set_parse_action(lambda s, loc, toks: SExpr(toks[0], lineno(loc, s), col(loc, s)))
    document = nested + StringEnd()
    document.ignore(";" + rest_of_line)
    return document


_DOCUMENT = _grammar()


def read_sexpr(text: str) -> SExpr:
    """Parse one parenthesised document.

    Raises:
        ParseError: On unbalanced parentheses or trailing text.
    """
    try:
        return _DOCUMENT.parse_string(text, parse_all=True)[0]
    except ParseBaseException as e:
        raise ParseError(f"Syntax error: {e.msg}", e.lineno, e.col)


def _error(message: str, node, cls=ParseError):
    return cls(message, getattr(node, 'line', None), getattr(node, 'column', None))


def _symbol(node, what: str) -> str:
    if not isinstance(node, Atom):
        raise _error(f"Expected {what}", node)
    return node.text


def _list(node, what: str) -> SExpr:
    if not isinstance(node, SExpr):
        raise _error(f"Expected {what}", node)
    return node


def _typed_list(items: Sequence, what: str) -> List[Tuple[str, str, Atom]]:
    """Split ``a b - t c`` into ``[(a, t), (b, t), (c, object)]`` keeping locations."""
    result, pending = [], []
    i = 0
    while i < len(items):
        item = items[i]
        if isinstance(item, SExpr):
            if item.head == 'either':
                raise _error("Unsupported construct: either types", item, UnsupportedConstructError)
            raise _error(f"Expected a {what} name", item)
        if item.text == '-':
            if i + 1 >= len(items):
                raise _error(f"Missing type after '-' in {what} list", item)
            type_node = items[i + 1]
            if isinstance(type_node, SExpr) and type_node.head == 'either':
                raise _error("Unsupported construct: either types", type_node, UnsupportedConstructError)
            type_name = _symbol(type_node, 'a type name')
            if not pending:
                raise _error(f"Type {type_name!r} does not follow any {what}", item)
            result.extend((name, type_name, node) for name, node in pending)
            pending = []
            i += 2
            continue
        pending.append((item.text, item))
        i += 1
    result.extend((name, ROOT_TYPE, node) for name, node in pending)
    return result


@dataclass(frozen=True)
class Literal:
    """A predicate applied to variables (``?x``) or constants."""
    predicate: str
    args: Tuple[str, ...]

    def ground(self, binding: Dict[str, str]) -> Fluent:
        return Fluent(self.predicate, tuple(binding.get(a, a) for a in self.args))


@dataclass(frozen=True)
class ActionSchema:
    name: str
    parameters: Tuple[Tuple[str, str], ...]
    pre: Tuple[Literal, ...] = ()
    add: Tuple[Literal, ...] = ()
    delete: Tuple[Literal, ...] = ()
    cost: Fraction = DEFAULT_ACTION_COST


@dataclass(frozen=True)
class Domain:
    name: str
    requirements: Tuple[str, ...]
    types: Dict[str, str]
    constants: Tuple[Tuple[str, str], ...]
    predicates: Dict[str, Tuple[str, ...]]
    schemas: Tuple[ActionSchema, ...]

    def schema(self, name: str) -> Optional[ActionSchema]:
        for schema in self.schemas:
            if schema.name == name:
                return schema
        return None

    def is_subtype(self, child: str, parent: str) -> bool:
        seen = set()
        while child not in seen:
            if child == parent:
                return True
            seen.add(child)
            if child == ROOT_TYPE:
                return parent == ROOT_TYPE
            child = self.types.get(child, ROOT_TYPE)
        return False

    @property
    def static_predicates(self) -> frozenset:
        changed = {lit.predicate for s in self.schemas for lit in s.add + s.delete}
        return frozenset(self.predicates) - changed


@dataclass(frozen=True)
class Problem:
    name: str
    domain_name: str
    objects: Tuple[Tuple[str, str], ...]
    init: frozenset
    goal: frozenset


def _sections(root: SExpr, kind: str) -> Tuple[str, List[SExpr]]:
    if root.head != 'define' or len(root) < 2:
        raise _error(f"Expected (define ({kind} <name>) ...)", root)
    header = _list(root.items[1], f"({kind} <name>)")
    if header.head != kind or len(header) != 2:
        raise _error(f"Expected ({kind} <name>)", header)
    name = _symbol(header.items[1], f"a {kind} name")
    return name, [_list(item, 'a section') for item in root.items[2:]]


def _literal(node, predicates: Dict[str, Tuple[str, ...]], variables: Dict[str, str],
             constants: Dict[str, str], what: str) -> Literal:
    node = _list(node, f"an atom in {what}")
    head = node.head
    if head in UNSUPPORTED_FORMULAS:
        raise _error(f"Unsupported construct: {UNSUPPORTED_FORMULAS[head]} in {what}",
                     node, UnsupportedConstructError)
    if head is None:
        raise _error(f"Expected an atom in {what}", node)
    if head not in predicates:
        raise _error(f"Undeclared predicate {head!r} in {what}", node)
    args = tuple(_symbol(arg, 'a term') for arg in node.items[1:])
    if len(args) != len(predicates[head]):
        raise _error(f"Predicate {head!r} takes {len(predicates[head])} argument(s), got {len(args)}", node)
    for arg, item in zip(args, node.items[1:]):
        if arg.startswith('?'):
            if arg not in variables:
                raise _error(f"Unbound variable {arg!r} in {what}", item)
        elif arg not in constants:
            raise _error(f"Undeclared object {arg!r} in {what}", item)
    return Literal(head, args)


def _conjuncts(node) -> List:
    """Flatten ``(and ...)``; the empty list ``()`` is the empty conjunction."""
    node = _list(node, 'a formula')
    if not node.items:
        return []
    if node.head == 'and':
        result = []
        for item in node.items[1:]:
            result.extend(_conjuncts(item))
        return result
    return [node]


def _action_cost(node: SExpr, what: str) -> Fraction:
    if len(node) != 3:
        raise _error(f"Malformed increase in {what}", node)
    target = _list(node.items[1], 'a function term')
    if target.head != TOTAL_COST or len(target) != 1:
        raise _error(f"Unsupported construct: numeric fluents in {what}", target, UnsupportedConstructError)
    amount = node.items[2]
    if isinstance(amount, SExpr):
        raise _error(f"Unsupported construct: non-constant action costs in {what}",
                     amount, UnsupportedConstructError)
    try:
        return parse_rational(amount.text)
    except ValueError as e:
        raise _error(f"Invalid action cost in {what}: {e}", amount)


def _action_schema(node: SExpr, predicates, constants, uses_costs: bool, types: Dict[str, str]) -> ActionSchema:
    if len(node) < 2:
        raise _error("Expected an action name", node)
    name = _symbol(node.items[1], 'an action name')
    what = f"action {name!r}"
    fields: Dict[str, object] = {}
    rest = node.items[2:]
    if len(rest) % 2:
        raise _error(f"Unbalanced keywords in {what}", node)
    for key_node, value in zip(rest[::2], rest[1::2]):
        key = _symbol(key_node, 'a keyword')
        if key not in (':parameters', ':precondition', ':effect'):
            raise _error(f"Unsupported construct: {key} in {what}", key_node, UnsupportedConstructError)
        fields[key] = value

    parameters = []
    variables = {}
    declared = _list(fields[':parameters'], 'a parameter list').items if ':parameters' in fields else []
    for var, type_name, var_node in _typed_list(declared, 'parameter'):
        if not var.startswith('?'):
            raise _error(f"Parameter {var!r} of {what} must start with '?'", var_node)
        if type_name != ROOT_TYPE and type_name not in types:
            raise _error(f"Undeclared type {type_name!r} in {what}", var_node)
        if var in variables:
            raise _error(f"Duplicate parameter {var!r} in {what}", var_node)
        variables[var] = type_name
        parameters.append((var, type_name))

    pre = []
    if ':precondition' in fields:
        for item in _conjuncts(fields[':precondition']):
            pre.append(_literal(item, predicates, variables, constants, what))

    add, delete = [], []
    cost = Fraction(0) if uses_costs else DEFAULT_ACTION_COST
    if ':effect' in fields:
        increases = Fraction(0)
        seen_increase = False
        for item in _conjuncts(fields[':effect']):
            if item.head == 'not':
                if len(item) != 2:
                    raise _error(f"Malformed delete effect in {what}", item)
                delete.append(_literal(item.items[1], predicates, variables, constants, what))
            elif item.head == 'increase':
                increases += _action_cost(item, what)
                seen_increase = True
            elif item.head in ('decrease', 'assign', 'scale-up', 'scale-down'):
                raise _error(f"Unsupported construct: numeric effects in {what}", item, UnsupportedConstructError)
            else:
                add.append(_literal(item, predicates, variables, constants, what))
        if seen_increase:
            cost = increases

    return ActionSchema(name, tuple(parameters), tuple(pre), tuple(add), tuple(delete), cost)


def parse_domain(text: str) -> Domain:
    """Parse a domain definition.

    Raises:
        ParseError: On syntax errors or undeclared names (with line and column).
        UnsupportedConstructError: On constructs outside the STRIPS subset.
    """
    name, sections = _sections(read_sexpr(text), 'domain')
    requirements: List[str] = []
    types: Dict[str, str] = {}
    constants: Dict[str, str] = {}
    predicates: Dict[str, Tuple[str, ...]] = {}
    action_nodes = []

    for section in sections:
        head = section.head
        if head == ':requirements':
            for item in section.items[1:]:
                requirement = _symbol(item, 'a requirement')
                if requirement not in SUPPORTED_REQUIREMENTS:
                    raise _error(f"Unsupported construct: requirement {requirement}",
                                 item, UnsupportedConstructError)
                requirements.append(requirement)
        elif head == ':types':
            for type_name, parent, _ in _typed_list(section.items[1:], 'type'):
                types[type_name] = parent
        elif head == ':constants':
            for obj, type_name, _ in _typed_list(section.items[1:], 'constant'):
                constants[obj] = type_name
        elif head == ':predicates':
            for item in section.items[1:]:
                item = _list(item, 'a predicate declaration')
                pred = _symbol(item.items[0], 'a predicate name') if item.items else None
                if pred is None:
                    raise _error("Empty predicate declaration", item)
                predicates[pred] = tuple(t for _, t, _ in _typed_list(item.items[1:], 'parameter'))
        elif head == ':functions':
            for item in section.items[1:]:
                if isinstance(item, Atom) and item.text in ('-', 'number'):
                    continue
                item = _list(item, 'a function declaration')
                if item.head != TOTAL_COST or len(item) != 1:
                    raise _error("Unsupported construct: numeric fluents", item, UnsupportedConstructError)
        elif head == ':action':
            action_nodes.append(section)
        else:
            raise _error(f"Unsupported construct: {head or 'unnamed section'}", section, UnsupportedConstructError)

    for parent in set(types.values()) - set(types) - {ROOT_TYPE}:
        types[parent] = ROOT_TYPE
    for obj, type_name in constants.items():
        if type_name != ROOT_TYPE and type_name not in types:
            raise ParseError(f"Undeclared type {type_name!r} of constant {obj!r}")

    uses_costs = ':action-costs' in requirements
    schemas = []
    for node in action_nodes:
        schema = _action_schema(node, predicates, constants, uses_costs, types)
        if any(s.name == schema.name for s in schemas):
            raise _error(f"Duplicate action {schema.name!r}", node)
        schemas.append(schema)

    return Domain(
        name=name,
        requirements=tuple(requirements),
        types=types,
        constants=tuple(sorted(constants.items())),
        predicates=predicates,
        schemas=tuple(schemas),
    )


def _ground_atom(node, domain: Domain, objects: Dict[str, str], what: str) -> Fluent:
    literal = _literal(node, domain.predicates, {}, objects, what)
    for arg, expected in zip(literal.args, domain.predicates[literal.predicate]):
        if not domain.is_subtype(objects[arg], expected):
            raise _error(f"Object {arg!r} is not of type {expected!r} in {what}", node)
    return Fluent(literal.predicate, literal.args)


def parse_problem(text: str, domain: Domain) -> Problem:
    """Parse a problem definition against its domain.

    Raises:
        ParseError: On syntax errors or undeclared names (with line and column).
        UnsupportedConstructError: On constructs outside the STRIPS subset.
    """
    name, sections = _sections(read_sexpr(text), 'problem')
    domain_name = domain.name
    objects: Dict[str, str] = dict(domain.constants)
    init, goal = set(), set()
    init_nodes, goal_node = [], None

    for section in sections:
        head = section.head
        if head == ':domain':
            domain_name = _symbol(section.items[1], 'a domain name') if len(section) == 2 else None
            if domain_name != domain.name:
                raise _error(f"Problem is for domain {domain_name!r}, not {domain.name!r}", section)
        elif head == ':objects':
            for obj, type_name, node in _typed_list(section.items[1:], 'object'):
                if type_name != ROOT_TYPE and type_name not in domain.types:
                    raise _error(f"Undeclared type {type_name!r} of object {obj!r}", node)
                objects[obj] = type_name
        elif head == ':init':
            init_nodes = section.items[1:]
        elif head == ':goal':
            if len(section) != 2:
                raise _error("Expected a single goal formula", section)
            goal_node = section.items[1]
        elif head == ':metric':
            words = [getattr(i, 'text', None) for i in section.items[1:2]]
            term = section.items[2] if len(section) == 3 else None
            if words != ['minimize'] or not isinstance(term, SExpr) or term.head != TOTAL_COST:
                raise _error("Unsupported construct: metrics other than (minimize (total-cost))",
                             section, UnsupportedConstructError)
        else:
            raise _error(f"Unsupported construct: {head or 'unnamed section'}", section, UnsupportedConstructError)

    for node in init_nodes:
        node = _list(node, 'an initial fact')
        if node.head == '=':
            target = node.items[1] if len(node) == 3 else None
            if isinstance(target, SExpr) and target.head == TOTAL_COST:
                continue
            raise _error("Unsupported construct: numeric fluents in the initial state",
                         node, UnsupportedConstructError)
        init.add(_ground_atom(node, domain, objects, 'the initial state'))

    if goal_node is not None:
        for node in _conjuncts(goal_node):
            goal.add(_ground_atom(node, domain, objects, 'the goal'))

    return Problem(name, domain_name, tuple(sorted(objects.items())), frozenset(init), frozenset(goal))


def _objects_of(domain: Domain, problem: Problem, type_name: str) -> List[str]:
    return sorted(obj for obj, t in problem.objects if domain.is_subtype(t, type_name))


def _vocabulary(domain: Domain, problem: Problem) -> set:
    fluents = set()
    for pred, arg_types in domain.predicates.items():
        pools = [_objects_of(domain, problem, t) for t in arg_types]
        fluents.update(Fluent(pred, args) for args in itertools.product(*pools))
    return fluents


def _instantiate(schema: ActionSchema, args: Tuple[str, ...]) -> Action:
    binding = dict(zip((var for var, _ in schema.parameters), args))
    return Action(
        name=' '.join((schema.name,) + tuple(args)),
        pre=frozenset(lit.ground(binding) for lit in schema.pre),
        add=frozenset(lit.ground(binding) for lit in schema.add),
        delete=frozenset(lit.ground(binding) for lit in schema.delete),
        cost=schema.cost,
    )


def _bindings(schema: ActionSchema, domain: Domain, problem: Problem, prune_static: bool = True):
    """Parameter tuples in lexicographic order, pruned by static preconditions."""
    static = domain.static_predicates if prune_static else frozenset()
    static_pre = [lit for lit in schema.pre if lit.predicate in static]
    variables = [var for var, _ in schema.parameters]
    pools = [_objects_of(domain, problem, t) for _, t in schema.parameters]

    def consistent(binding):
        for lit in static_pre:
            if all(not a.startswith('?') or a in binding for a in lit.args):
                if lit.ground(binding) not in problem.init:
                    return False
        return True

    def extend(i, binding):
        if i == len(variables):
            yield tuple(binding[v] for v in variables)
            return
        for obj in pools[i]:
            binding[variables[i]] = obj
            if consistent(binding):
                yield from extend(i + 1, binding)
            del binding[variables[i]]

    yield from extend(0, {})


def ground(domain: Domain, problem: Problem, names: Optional[Iterable[str]] = None,
           prune_static: bool = True) -> Model:
    """Ground a lifted domain and problem into a :class:`Model`.

    Without ``names`` every schema is instantiated over its typed objects,
    dropping instances whose static preconditions fail in the initial state
    unless ``prune_static`` is off. With ``names`` exactly those action
    instances are built.

    Raises:
        VocabularyError: If a requested action name cannot be built.
    """
    actions = []
    if names is None:
        for schema in domain.schemas:
            for args in _bindings(schema, domain, problem, prune_static):
                try:
                    actions.append(_instantiate(schema, args))
                except ModelError as e:
                    logger.debug(f"Dropping self-conflicting grounding: {e}")
    else:
        objects = dict(problem.objects)
        for name in sorted(set(names)):
            schema_name, *args = name.split()
            schema = domain.schema(schema_name)
            if schema is None or len(args) != len(schema.parameters):
                raise VocabularyError(f"Action {name!r} does not exist in domain {domain.name!r}")
            for arg, (_, type_name) in zip(args, schema.parameters):
                if arg not in objects or not domain.is_subtype(objects[arg], type_name):
                    raise VocabularyError(f"Action {name!r} has an ill-typed argument {arg!r}")
            try:
                actions.append(_instantiate(schema, tuple(args)))
            except ModelError as e:
                raise VocabularyError(f"Action {name!r} cannot be built: {e}")

    fluents = _vocabulary(domain, problem) | problem.init | problem.goal
    for action in actions:
        fluents |= action.fluents
    return Model(frozenset(fluents), tuple(actions), problem.init, problem.goal)


def parse_domain_problem(domain_text: str, problem_text: str) -> Model:
    domain = parse_domain(domain_text)
    return ground(domain, parse_problem(problem_text, domain))


def _read(path: Path) -> Optional[str]:
    return path.read_text(encoding='utf-8') if path.exists() else None


@dataclass(frozen=True)
class ProblemBundle:
    """Robot domain/problem text plus the human side as full text, an overlay, or both."""
    domain: str
    problem: str
    human_domain: Optional[str] = None
    human_problem: Optional[str] = None
    overlay: Tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'overlay', tuple(self.overlay))

    @classmethod
    def from_json(cls, data: dict) -> 'ProblemBundle':
        """Build a bundle from ``{domain, problem, human_domain?, human_problem?, overlay?}``."""
        if not isinstance(data, dict) or not data.get('domain') or not data.get('problem'):
            raise InputError("A bundle needs 'domain' and 'problem' text")
        overlay = data.get('overlay') or ()
        if isinstance(overlay, str):
            overlay = tuple(str(edit) for edit in parse_overlay(overlay))
        return cls(
            domain=data['domain'],
            problem=data['problem'],
            human_domain=data.get('human_domain'),
            human_problem=data.get('human_problem'),
            overlay=tuple(overlay),
        )

    def to_json(self) -> dict:
        data = {'domain': self.domain, 'problem': self.problem}
        if self.human_domain is not None:
            data['human_domain'] = self.human_domain
        if self.human_problem is not None:
            data['human_problem'] = self.human_problem
        if self.overlay:
            data['overlay'] = list(self.overlay)
        return data

    @classmethod
    def load(cls, directory: Union[str, os.PathLike]) -> 'ProblemBundle':
        """Read a bundle directory; missing human files fall back to the robot's."""
        directory = Path(directory)
        domain = _read(directory / DOMAIN_FILE)
        problem = _read(directory / PROBLEM_FILE)
        if domain is None or problem is None:
            raise InputError(f"Bundle {directory} needs {DOMAIN_FILE} and {PROBLEM_FILE}")
        overlay_text = _read(directory / OVERLAY_FILE)
        overlay = tuple(str(e) for e in parse_overlay(overlay_text)) if overlay_text else ()
        return cls(
            domain=domain,
            problem=problem,
            human_domain=_read(directory / HUMAN_DOMAIN_FILE),
            human_problem=_read(directory / HUMAN_PROBLEM_FILE),
            overlay=overlay,
        )

    def write(self, directory: Union[str, os.PathLike]) -> Path:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        (directory / DOMAIN_FILE).write_text(self.domain, encoding='utf-8')
        (directory / PROBLEM_FILE).write_text(self.problem, encoding='utf-8')
        if self.human_domain is not None:
            (directory / HUMAN_DOMAIN_FILE).write_text(self.human_domain, encoding='utf-8')
        if self.human_problem is not None:
            (directory / HUMAN_PROBLEM_FILE).write_text(self.human_problem, encoding='utf-8')
        if self.overlay:
            (directory / OVERLAY_FILE).write_text(write_overlay(self.overlay), encoding='utf-8')
        return directory


def load_bundle(source: Union[ProblemBundle, str, os.PathLike]) -> HapProblem:
    """Parse both sides of a bundle into a :class:`HapProblem`.

    Both sides are grounded over the union of the action instances either
    side admits, so they share one action-name universe. The overlay, if any,
    is applied on top of the human side.

    Raises:
        VocabularyError: If the two sides cannot share a signature.
        EditError: If an overlay edit is a no-op.
    """
    bundle = source if isinstance(source, ProblemBundle) else ProblemBundle.load(source)

    robot_domain = parse_domain(bundle.domain)
    robot_problem = parse_problem(bundle.problem, robot_domain)
    human_domain = parse_domain(bundle.human_domain) if bundle.human_domain else robot_domain
    human_problem = (
        parse_problem(bundle.human_problem or bundle.problem, human_domain)
        if bundle.human_domain or bundle.human_problem else robot_problem
    )

    # an overlay may edit facts the static pruning relies on
    prune = not bundle.overlay
    robot = ground(robot_domain, robot_problem, prune_static=prune)
    if human_domain is robot_domain and human_problem is robot_problem:
        human = robot
    else:
        human = ground(human_domain, human_problem, prune_static=prune)
        names = set(robot.action_names) | set(human.action_names)
        robot = ground(robot_domain, robot_problem, names)
        human = ground(human_domain, human_problem, names)
        fluents = robot.fluents | human.fluents
        robot, human = robot.with_fluents(fluents), human.with_fluents(fluents)

    if bundle.overlay:
        human = apply_explanation(human, [Edit.parse(line) for line in bundle.overlay])
    return HapProblem(robot, human)


def parse_overlay(text: str) -> List[Edit]:
    """Read newline-separated edits; ``#`` starts a comment and the
    ``Explanation >>`` prefix is accepted so explanations can be fed back in."""
    edits = []
    for raw in text.splitlines():
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if line.startswith(EXPLANATION_PREFIX.strip()):
            line = line[len(EXPLANATION_PREFIX.strip()):].strip()
        edits.append(Edit.parse(line))
    return edits


def write_overlay(edits: Iterable) -> str:
    lines = sorted(str(edit) for edit in edits)
    return ''.join(f"{line}\n" for line in lines)


def serialize_explanation(explanation: Explanation) -> str:
    return ''.join(f"{EXPLANATION_PREFIX}{line}\n" for line in explanation.lines())


def read_plan(text: str) -> Plan:
    """One ``(action arg ...)`` per line; ``;`` starts a comment."""
    steps = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split(';', 1)[0].strip()
        if not line:
            continue
        if not (line.startswith('(') and line.endswith(')')):
            raise ParseError("Expected '(action args...)'", number, 1)
        step = ' '.join(line[1:-1].lower().split())
        if not step:
            raise ParseError("Empty plan step", number, 1)
        steps.append(step)
    return Plan(tuple(steps))


def write_plan(plan: Plan, cost=None) -> str:
    text = ''.join(f"{line}\n" for line in plan.lines())
    if cost is not None:
        text += f"; cost = {format_rational(cost)}\n"
    return text
