"""Generators for robot/human problem bundles.

Each family writes the robot's domain and problem as planning text and the
human's model as an overlay: the edits that turn the robot model into the
human's belief. ``delta_size`` edits are taken, in order, from the family's
candidate list, so the model difference is exactly that size.

Families:

* ``usar-grid``: a search-and-rescue map. ``layout = demo`` rebuilds the
  eight-waypoint map (rubble on p2-p3, the human believing p1-p8 is passable
  and not knowing that p6-p7 and p7-p5 have opened up); ``layout = grid`` is a
  seeded width x height grid whose differences are passage facts.
* ``rover-martian``: a rover that can sample without emptying its store and
  image without reporting first, which the human does not know.
* ``barman-bar``: a two-handed barman the human believes needs a free hand.
* ``random``: small propositional models for property tests.
"""

import logging
import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from app.services.errors import ModelError, ScenarioError
from app.services.model_space import Direction, Edit, Kind, ModelFluent, apply_edit
from app.services.pddl_io import ProblemBundle, parse_domain_problem
from app.services.planner import Planner
from app.services.strips import Action, Fluent, Model

logger = logging.getLogger(__name__)

RANDOM_MAX_DELTA = 12
RANDOM_RETRIES = 100

DEFAULT_DELTAS = {
    'usar-grid': 3,
    'rover-martian': 4,
    'barman-bar': 3,
    'random': 3,
}


@dataclass(frozen=True)
class ScenarioSpec:
    """Which family to generate, its size parameters, the target |delta| and a seed."""
    family: str
    params: Dict[str, str] = field(default_factory=dict)
    delta_size: Optional[int] = None
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ScenarioError(
                f"Unknown scenario family {self.family!r}; expected one of {', '.join(sorted(FAMILIES))}"
            )
        if self.delta_size is not None and self.delta_size < 0:
            raise ScenarioError("delta_size must be non-negative")

    @property
    def delta(self) -> int:
        return DEFAULT_DELTAS[self.family] if self.delta_size is None else self.delta_size

    def get_int(self, key: str, default: int) -> int:
        value = self.params.get(key, default)
        try:
            return int(value)
        except (TypeError, ValueError):
            raise ScenarioError(f"Parameter {key!r} must be an integer, got {value!r}")

    def get(self, key: str, default: str) -> str:
        return str(self.params.get(key, default))

    @classmethod
    def from_mapping(cls, values: Dict[str, object]) -> 'ScenarioSpec':
        values = {str(k).strip().replace('-', '_'): v for k, v in values.items() if v is not None}
        family = values.pop('family', None)
        if not family:
            raise ScenarioError("A scenario needs a 'family'")
        delta = values.pop('delta_size', None)
        seed = values.pop('seed', 0)
        try:
            delta = None if delta in (None, '') else int(delta)
            seed = int(seed)
        except (TypeError, ValueError):
            raise ScenarioError("delta_size and seed must be integers")
        params = {k: str(v) for k, v in values.items()}
        return cls(str(family).strip(), params, delta, seed)

    @classmethod
    def from_config(cls, text: str) -> 'ScenarioSpec':
        """Parse ``key = value`` lines; ``#`` starts a comment."""
        values = {}
        for number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition('=')
            if not sep or not key.strip():
                raise ScenarioError(f"Line {number}: expected 'key = value'")
            values[key.strip()] = value.strip()
        return cls.from_mapping(values)


def _atoms(facts: Sequence[str], indent: str = '    ') -> str:
    return '\n'.join(f"{indent}({fact})" for fact in facts)


def _problem_text(name: str, domain: str, objects: Dict[str, Sequence[str]],
                  init: Sequence[str], goal: Sequence[str]) -> str:
    object_lines = '\n'.join(
        f"    {' '.join(names)} - {type_name}" for type_name, names in objects.items() if names
    )
    return (
        f"(define (problem {name})\n"
        f"  (:domain {domain})\n"
        f"  (:objects\n{object_lines})\n"
        f"  (:init\n{_atoms(sorted(init))}\n    (= (total-cost) 0))\n"
        f"  (:goal (and\n{_atoms(sorted(goal))}))\n"
        f"  (:metric minimize (total-cost)))\n"
    )


def _take(candidates: Sequence[Edit], spec: ScenarioSpec) -> Tuple[str, ...]:
    if spec.delta > len(candidates):
        raise ScenarioError(
            f"{spec.family} offers {len(candidates)} model differences, {spec.delta} requested"
        )
    return tuple(sorted(str(edit) for edit in candidates[:spec.delta]))


def _init_edit(direction: Direction, fact: str) -> Edit:
    return Edit(direction, ModelFluent(Kind.INIT, None, Fluent.parse(fact)))


def _precondition_edit(action: str, fact: str) -> Edit:
    return Edit(Direction.ADD, ModelFluent(Kind.PRECONDITION, action, Fluent.parse(fact)))


USAR_DOMAIN = """\
(define (domain usar)
  (:requirements :strips :typing :action-costs)
  (:types waypoint)
  (:predicates
    (at ?w - waypoint)
    (clear_path ?from - waypoint ?to - waypoint)
    (rubble ?from - waypoint ?to - waypoint))
  (:functions (total-cost) - number)

  (:action move
    :parameters (?from - waypoint ?to - waypoint)
    :precondition (and (at ?from) (clear_path ?from ?to))
    :effect (and (at ?to) (not (at ?from)) (increase (total-cost) 1)))

  (:action move_back
    :parameters (?from - waypoint ?to - waypoint)
    :precondition (and (at ?from) (clear_path ?to ?from))
    :effect (and (at ?to) (not (at ?from)) (increase (total-cost) 1)))

  (:action clear_passage
    :parameters (?from - waypoint ?to - waypoint)
    :precondition (and (at ?from) (rubble ?from ?to))
    :effect (and (clear_path ?from ?to) (not (rubble ?from ?to)) (increase (total-cost) 5))))
"""

# passages the robot and the human agree on
USAR_DEMO_PASSAGES = ['p1 p2', 'p3 p4', 'p4 p5', 'p8 p5', 'p1 p6']
USAR_DEMO_RUBBLE = ['p2 p3']


def _usar_demo(spec: ScenarioSpec) -> ProblemBundle:
    init = ['at p1'] + [f"clear_path {p}" for p in USAR_DEMO_PASSAGES]
    init += [f"rubble {p}" for p in USAR_DEMO_RUBBLE]
    # the walls on p6-p7 and p7-p5 collapsed, the p1-p8 corridor did not survive
    init += ['clear_path p6 p7', 'clear_path p7 p5']
    candidates = [
        _init_edit(Direction.ADD, 'clear_path p1 p8'),
        _init_edit(Direction.REMOVE, 'clear_path p6 p7'),
        _init_edit(Direction.REMOVE, 'clear_path p7 p5'),
    ]
    waypoints = [f"p{i}" for i in range(1, 9)]
    problem = _problem_text('usar-demo', 'usar', {'waypoint': waypoints}, init, ['at p5'])
    return ProblemBundle(USAR_DOMAIN, problem, overlay=_take(candidates, spec))


def _usar_grid(spec: ScenarioSpec) -> ProblemBundle:
    if spec.get('layout', 'demo') == 'demo':
        return _usar_demo(spec)
    if spec.get('layout', 'demo') != 'grid':
        raise ScenarioError("usar-grid layout must be 'demo' or 'grid'")

    width, height = spec.get_int('width', 3), spec.get_int('height', 3)
    if width < 1 or height < 1 or width * height < 2:
        raise ScenarioError("usar-grid needs at least two waypoints")
    rng = random.Random(spec.seed)

    def name(x, y):
        return f"w{x}_{y}"

    passages = []
    for x in range(width):
        for y in range(height):
            if x + 1 < width:
                passages.append((name(x, y), name(x + 1, y)))
            if y + 1 < height:
                passages.append((name(x, y), name(x, y + 1)))
    rubble_count = spec.get_int('rubble', 1)
    if not 0 <= rubble_count <= len(passages):
        raise ScenarioError(f"usar-grid has {len(passages)} passages, rubble={rubble_count} requested")
    rubble = set(rng.sample(passages, rubble_count))

    init = [f"at {name(0, 0)}"]
    candidates = []
    for a, b in passages:
        for pair in (f"{a} {b}", f"{b} {a}"):
            if (a, b) in rubble:
                init.append(f"rubble {pair}")
                candidates.append(_init_edit(Direction.ADD, f"clear_path {pair}"))
            else:
                init.append(f"clear_path {pair}")
                candidates.append(_init_edit(Direction.REMOVE, f"clear_path {pair}"))
    rng.shuffle(candidates)

    waypoints = [name(x, y) for x in range(width) for y in range(height)]
    goal = [f"at {name(width - 1, height - 1)}"]
    problem = _problem_text(f"usar-grid-{width}x{height}", 'usar', {'waypoint': waypoints}, init, goal)
    return ProblemBundle(USAR_DOMAIN, problem, overlay=_take(candidates, spec))


ROVER_DOMAIN = """\
(define (domain rover)
  (:requirements :strips :typing :action-costs)
  (:types waypoint store objective camera mode lander)
  (:predicates
    (at ?w - waypoint)
    (at_lander ?l - lander ?w - waypoint)
    (can_traverse ?from - waypoint ?to - waypoint)
    (visible ?from - waypoint ?to - waypoint)
    (visible_from ?o - objective ?w - waypoint)
    (supports ?c - camera ?m - mode)
    (at_soil_sample ?w - waypoint)
    (at_rock_sample ?w - waypoint)
    (empty ?s - store)
    (full ?s - store)
    (have_soil_analysis ?w - waypoint)
    (have_rock_analysis ?w - waypoint)
    (communicated_soil_data ?w - waypoint)
    (communicated_rock_data ?w - waypoint)
    (have_image ?o - objective ?m - mode))
  (:functions (total-cost) - number)

  (:action navigate
    :parameters (?from - waypoint ?to - waypoint)
    :precondition (and (at ?from) (can_traverse ?from ?to))
    :effect (and (at ?to) (not (at ?from)) (increase (total-cost) 1)))

  (:action sample_soil
    :parameters (?s - store ?w - waypoint)
    :precondition (and (at ?w) (at_soil_sample ?w))
    :effect (and (full ?s) (have_soil_analysis ?w)
                 (not (empty ?s)) (not (at_soil_sample ?w)) (increase (total-cost) 1)))

  (:action sample_rock
    :parameters (?s - store ?w - waypoint)
    :precondition (and (at ?w) (at_rock_sample ?w))
    :effect (and (full ?s) (have_rock_analysis ?w)
                 (not (empty ?s)) (not (at_rock_sample ?w)) (increase (total-cost) 1)))

  (:action drop_off
    :parameters (?s - store)
    :precondition (full ?s)
    :effect (and (empty ?s) (not (full ?s)) (increase (total-cost) 1)))

  (:action communicate_soil_data
    :parameters (?l - lander ?p - waypoint ?x - waypoint ?y - waypoint)
    :precondition (and (at ?x) (at_lander ?l ?y) (have_soil_analysis ?p) (visible ?x ?y))
    :effect (and (communicated_soil_data ?p) (increase (total-cost) 1)))

  (:action communicate_rock_data
    :parameters (?l - lander ?p - waypoint ?x - waypoint ?y - waypoint)
    :precondition (and (at ?x) (at_lander ?l ?y) (have_rock_analysis ?p) (visible ?x ?y))
    :effect (and (communicated_rock_data ?p) (increase (total-cost) 1)))

  (:action take_image
    :parameters (?w - waypoint ?o - objective ?c - camera ?m - mode)
    :precondition (and (at ?w) (visible_from ?o ?w) (supports ?c ?m))
    :effect (and (have_image ?o ?m) (increase (total-cost) 1))))
"""


def _rover(spec: ScenarioSpec) -> ProblemBundle:
    n = spec.get_int('waypoints', 4)
    objectives = spec.get_int('objectives', 1)
    if n < 2 or not 1 <= objectives < n:
        raise ScenarioError("rover-martian needs waypoints >= 2 and 1 <= objectives < waypoints")

    waypoints = [f"w{i}" for i in range(n)]
    init = [f"at {waypoints[-1]}", 'at_lander general w0', 'empty store0', 'supports cam0 high_res']
    for i in range(n - 1):
        init += [f"can_traverse w{i} w{i + 1}", f"can_traverse w{i + 1} w{i}"]
    for w in waypoints:
        init += [f"visible {w} w0", f"at_soil_sample {w}", f"at_rock_sample {w}"]

    goal, candidates = [], []
    for i in range(1, objectives + 1):
        obj, w = f"o{i}", waypoints[n - i]
        init.append(f"visible_from {obj} {w}")
        goal.append(f"have_image {obj} high_res")
        image = f"take_image {w} {obj} cam0 high_res"
        candidates += [
            _precondition_edit(image, f"communicated_soil_data {w}"),
            _precondition_edit(image, f"communicated_rock_data {w}"),
            _precondition_edit(f"sample_rock store0 {w}", 'empty store0'),
            _precondition_edit(f"sample_rock store0 {w}", f"communicated_soil_data {w}"),
            _precondition_edit(f"sample_soil store0 {w}", 'empty store0'),
        ]

    objects = {
        'waypoint': waypoints,
        'store': ['store0'],
        'objective': [f"o{i}" for i in range(1, objectives + 1)],
        'camera': ['cam0'],
        'mode': ['high_res'],
        'lander': ['general'],
    }
    problem = _problem_text(f"rover-martian-{n}", 'rover', objects, init, goal)
    return ProblemBundle(ROVER_DOMAIN, problem, overlay=_take(candidates, spec))


BARMAN_DOMAIN = """\
(define (domain barman)
  (:requirements :strips :typing :action-costs)
  (:types shot shaker - container
          container hand level ingredient dispenser - object)
  (:predicates
    (ontable ?c - container)
    (holding ?h - hand ?c - container)
    (handempty ?h - hand)
    (other ?h1 - hand ?h2 - hand)
    (empty ?c - container)
    (clean ?c - container)
    (used ?c - container ?i - ingredient)
    (contains ?c - container ?i - ingredient)
    (dispenses ?d - dispenser ?i - ingredient)
    (unshaked ?s - shaker)
    (shaked ?s - shaker)
    (shaker-level ?s - shaker ?l - level)
    (next ?l1 - level ?l2 - level)
    (cocktail-level ?l - level))
  (:functions (total-cost) - number)

  (:action grasp
    :parameters (?h - hand ?c - container)
    :precondition (and (ontable ?c) (handempty ?h))
    :effect (and (holding ?h ?c) (not (ontable ?c)) (not (handempty ?h)) (increase (total-cost) 1)))

  (:action leave
    :parameters (?h - hand ?c - container)
    :precondition (holding ?h ?c)
    :effect (and (ontable ?c) (handempty ?h) (not (holding ?h ?c)) (increase (total-cost) 2)))

  (:action fill-shot
    :parameters (?s - shot ?i - ingredient ?h1 - hand ?h2 - hand ?d - dispenser)
    :precondition (and (holding ?h1 ?s) (other ?h1 ?h2) (dispenses ?d ?i) (empty ?s) (clean ?s))
    :effect (and (contains ?s ?i) (not (empty ?s)) (not (clean ?s)) (increase (total-cost) 1)))

  (:action refill-shot
    :parameters (?s - shot ?i - ingredient ?h1 - hand ?h2 - hand ?d - dispenser)
    :precondition (and (holding ?h1 ?s) (other ?h1 ?h2) (dispenses ?d ?i) (empty ?s) (used ?s ?i))
    :effect (and (contains ?s ?i) (not (empty ?s)) (increase (total-cost) 1)))

  (:action pour-shot-to-used-shaker
    :parameters (?s - shot ?i - ingredient ?sh - shaker ?h - hand ?l1 - level ?l2 - level)
    :precondition (and (holding ?h ?s) (contains ?s ?i) (unshaked ?sh)
                       (shaker-level ?sh ?l1) (next ?l1 ?l2))
    :effect (and (contains ?sh ?i) (empty ?s) (used ?s ?i) (shaker-level ?sh ?l2)
                 (not (contains ?s ?i)) (not (shaker-level ?sh ?l1)) (increase (total-cost) 1)))

  (:action shake
    :parameters (?sh - shaker ?h1 - hand ?h2 - hand ?l - level)
    :precondition (and (holding ?h1 ?sh) (other ?h1 ?h2) (unshaked ?sh)
                       (shaker-level ?sh ?l) (cocktail-level ?l))
    :effect (and (shaked ?sh) (not (unshaked ?sh)) (increase (total-cost) 1))))
"""


def _barman(spec: ScenarioSpec) -> ProblemBundle:
    shots = spec.get_int('shots', 2)
    ingredients = spec.get_int('ingredients', 1)
    if shots < 1 or ingredients < 1:
        raise ScenarioError("barman-bar needs at least one shot and one ingredient")

    shot_names = [f"shot{i}" for i in range(1, shots + 1)]
    held = shot_names[-1]
    ingredient_names = [f"i{i}" for i in range(1, ingredients + 1)]
    dispensers = [f"d{i}" for i in range(1, ingredients + 1)]

    init = [
        'other left right', 'other right left',
        f"holding left {held}", 'holding right shaker1',
        'unshaked shaker1', 'shaker-level shaker1 l0',
        'next l0 l1', 'next l1 l2', 'cocktail-level l2',
    ]
    init += [f"dispenses {d} {i}" for d, i in zip(dispensers, ingredient_names)]
    for shot in shot_names:
        init += [f"clean {shot}", f"empty {shot}"]
        if shot != held:
            init.append(f"ontable {shot}")

    first = ingredient_names[0]
    fill = f"fill-shot {held} {first} {{}} {{}} d1"
    refill = f"refill-shot {held} {first} {{}} {{}} d1"
    shake = 'shake shaker1 {} {} l2'
    candidates = [
        _precondition_edit(fill.format('left', 'right'), 'handempty right'),
        _precondition_edit(refill.format('left', 'right'), 'handempty right'),
        _precondition_edit(shake.format('right', 'left'), 'handempty left'),
        _precondition_edit(shake.format('left', 'right'), 'handempty right'),
        _precondition_edit(fill.format('right', 'left'), 'handempty left'),
        _precondition_edit(refill.format('right', 'left'), 'handempty left'),
    ]

    objects = {
        'hand': ['left', 'right'],
        'level': ['l0', 'l1', 'l2'],
        'ingredient': ingredient_names,
        'dispenser': dispensers,
        'shot': shot_names,
        'shaker': ['shaker1'],
    }
    problem = _problem_text(f"barman-bar-{shots}", 'barman', objects, init, ['shaked shaker1'])
    return ProblemBundle(BARMAN_DOMAIN, problem, overlay=_take(candidates, spec))


def _random_model(rng: random.Random, n_fluents: int, n_actions: int) -> Optional[Model]:
    fluents = [Fluent(f"p{i}") for i in range(n_fluents)]
    actions = []
    for i in range(n_actions):
        pre = rng.sample(fluents, rng.randint(0, min(2, n_fluents)))
        add = rng.sample(fluents, rng.randint(1, min(2, n_fluents)))
        rest = [f for f in fluents if f not in add]
        delete = rng.sample(rest, rng.randint(0, min(1, len(rest))))
        actions.append(Action(f"a{i}", pre, add, delete, rng.randint(1, 3)))
    init = frozenset(rng.sample(fluents, rng.randint(1, max(1, n_fluents // 2))))

    model = Model(frozenset(fluents), tuple(actions), init, frozenset())
    state = init
    for _ in range(rng.randint(1, 4)):
        applicable = [a for a in model.actions if a.pre <= state]
        if not applicable:
            break
        action = rng.choice(applicable)
        state = (state | action.add) - action.delete
    reached = sorted(state - init)
    if not reached:
        return None
    goal = frozenset(rng.sample(reached, rng.randint(1, len(reached))))
    return model.with_goal(goal)


def _random_candidates(model: Model) -> List[Edit]:
    candidates = []
    for fluent in sorted(model.fluents):
        for kind, current in ((Kind.INIT, model.init), (Kind.GOAL, model.goal)):
            direction = Direction.REMOVE if fluent in current else Direction.ADD
            candidates.append(Edit(direction, ModelFluent(kind, None, fluent)))
        for action in model.actions:
            for kind, current in ((Kind.PRECONDITION, action.pre), (Kind.ADD_EFFECT, action.add),
                                  (Kind.DELETE_EFFECT, action.delete)):
                direction = Direction.REMOVE if fluent in current else Direction.ADD
                candidates.append(Edit(direction, ModelFluent(kind, action.name, fluent)))
    return candidates


def _random_domain_text(model: Model) -> str:
    predicates = '\n'.join(f"    ({f})" for f in sorted(model.fluents))
    blocks = []
    for action in model.actions:
        effects = [f"({f})" for f in sorted(action.add)] + [f"(not ({f}))" for f in sorted(action.delete)]
        effects.append(f"(increase (total-cost) {action.cost})")
        pre = ' '.join(f"({f})" for f in sorted(action.pre))
        blocks.append(
            f"  (:action {action.name}\n"
            f"    :parameters ()\n"
            f"    :precondition (and {pre})\n"
            f"    :effect (and {' '.join(effects)}))"
        )
    return (
        "(define (domain random)\n"
        "  (:requirements :strips :action-costs)\n"
        f"  (:predicates\n{predicates})\n"
        "  (:functions (total-cost) - number)\n\n"
        + '\n\n'.join(blocks) + ")\n"
    )


def _random_problem_text(model: Model) -> str:
    return (
        "(define (problem random)\n"
        "  (:domain random)\n"
        f"  (:init\n{_atoms([str(f) for f in sorted(model.init)])}\n    (= (total-cost) 0))\n"
        f"  (:goal (and\n{_atoms([str(f) for f in sorted(model.goal)])}))\n"
        "  (:metric minimize (total-cost)))\n"
    )


def generate_random(spec: ScenarioSpec) -> ProblemBundle:
    """A seeded random model with a goal reachable by construction and a random perturbation.

    Raises:
        ScenarioError: If delta_size exceeds the enumeration limit or no instance
            is found within the retry budget.
    """
    if spec.delta > RANDOM_MAX_DELTA:
        raise ScenarioError(f"random bundles are limited to delta_size <= {RANDOM_MAX_DELTA}")
    n_fluents = spec.get_int('fluents', 5)
    n_actions = spec.get_int('actions', 4)
    if n_fluents < 1 or n_actions < 1:
        raise ScenarioError("random needs at least one fluent and one action")
    rng = random.Random(spec.seed)

    for attempt in range(RANDOM_RETRIES):
        model = _random_model(rng, n_fluents, n_actions)
        if model is None:
            continue

        candidates = _random_candidates(model)
        rng.shuffle(candidates)
        chosen, human = [], model
        for edit in candidates:
            if len(chosen) == spec.delta:
                break
            try:
                human = apply_edit(human, edit)
            except ModelError:
                continue
            chosen.append(edit)
        if len(chosen) < spec.delta:
            continue

        logger.debug(f"Random scenario found after {attempt + 1} attempt(s)")
        return ProblemBundle(
            _random_domain_text(model),
            _random_problem_text(model),
            overlay=tuple(sorted(str(e) for e in chosen)),
        )

    raise ScenarioError(f"No random instance found within {RANDOM_RETRIES} attempts")


FAMILIES: Dict[str, Callable[[ScenarioSpec], ProblemBundle]] = {
    'usar-grid': _usar_grid,
    'rover-martian': _rover,
    'barman-bar': _barman,
    'random': generate_random,
}


def generate(spec: ScenarioSpec) -> ProblemBundle:
    """Build the bundle for a spec. The robot side is checked to be solvable.

    Raises:
        ScenarioError: If the spec cannot be realised.
    """
    bundle = FAMILIES[spec.family](spec)
    robot = parse_domain_problem(bundle.domain, bundle.problem)
    if not Planner().optimal_plan(robot).solved:
        raise ScenarioError(f"{spec.family} produced an unsolvable robot model")
    logger.info(f"Generated {spec.family} scenario with |delta|={len(bundle.overlay)}")
    return bundle
