"""Model-space search balancing plan explicability against explanation size.

The search starts at the human's model and walks toward the robot's model one
edit at a time, in order of explanation size. Every visited model is planned
optimally; a model whose optimal plan is executable in the robot's model is
eligible, and its objective is ``|E| + alpha * |C(plan, robot) - C*_robot|``.
The search stops at the first model whose optimal plan is also optimal for
the robot. Since the objective never drops below ``|E|``, no unvisited model
can beat the ledger, so any alpha can be re-scored from it afterwards.
"""

import csv
import heapq
import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, List, Mapping, Optional, Sequence, Tuple

from app.services.errors import (
    DeltaTooLargeError, EditError, InputError, ModelError, UnsolvableError, VocabularyError,
)
from app.services.model_space import (
    Edit, Explanation, Signature, apply_edit, apply_explanation, delta_size, edits_toward,
)
from app.services.planner import DEFAULT_NODE_CAP, Planner
from app.services.strips import Model, Plan, plan_cost
from app.utils.numbers import INFINITY, format_rational, parse_rational

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_DELTA = 12
LEDGER_COLUMNS = ['explanation_size', 'edits', 'cost_in_model', 'cost_in_robot', 'eligible']


@dataclass(frozen=True)
class SearchSettings:
    """Resource and behaviour knobs for the model-space search."""
    node_cap: int = DEFAULT_NODE_CAP
    time_cap: Optional[float] = None
    allow_cost_edits: bool = False
    literal_ties: bool = False
    workers: int = 1
    brute_force_max_delta: int = BRUTE_FORCE_MAX_DELTA

    @classmethod
    def from_config(cls, config: Mapping) -> 'SearchSettings':
        """Build settings from a Flask config mapping (``MEGA_*`` keys)."""
        return cls(
            node_cap=int(config.get('MEGA_NODE_CAP', DEFAULT_NODE_CAP)),
            time_cap=config.get('MEGA_TIME_CAP'),
            allow_cost_edits=bool(config.get('MEGA_ALLOW_COST_EDITS', False)),
            literal_ties=bool(config.get('MEGA_LITERAL_TIES', False)),
            workers=max(1, int(config.get('MEGA_WORKERS', 1))),
            brute_force_max_delta=int(config.get('MEGA_BRUTE_FORCE_MAX_DELTA', BRUTE_FORCE_MAX_DELTA)),
        )

    def planner(self) -> Planner:
        return Planner(self.node_cap, self.time_cap)


@dataclass(frozen=True)
class HapProblem:
    """A robot model paired with the human's belief about it."""
    robot_model: Model
    human_model: Model

    def __post_init__(self):
        robot, human = self.robot_model, self.human_model
        if robot.action_names != human.action_names:
            missing = sorted(set(robot.action_names) ^ set(human.action_names))
            raise VocabularyError(
                f"Robot and human models disagree on {len(missing)} action(s), e.g. {missing[0]!r}"
            )
        if robot.fluents != human.fluents:
            missing = sorted(str(f) for f in robot.fluents ^ human.fluents)
            raise VocabularyError(
                f"Robot and human models disagree on {len(missing)} fluent(s), e.g. {missing[0]!r}"
            )

    @property
    def signature(self) -> Signature:
        return Signature.of(self.robot_model)

    @property
    def delta_size(self) -> int:
        return delta_size(self.robot_model, self.human_model)


@dataclass(frozen=True)
class SearchNode:
    """A visited model with its explanation and optimal plan."""
    model: Model
    explanation: Explanation
    optimal_plan: Optional[Plan]
    cost_in_model: object
    cost_in_robot: object

    @property
    def eligible(self) -> bool:
        return self.optimal_plan is not None and self.cost_in_robot != INFINITY

    @property
    def size(self) -> int:
        return len(self.explanation)


@dataclass(frozen=True)
class Ledger:
    """Every node visited by one search, in visiting order."""
    nodes: Tuple[SearchNode, ...]
    mce_size: Optional[int]
    robot_optimal_cost: Fraction
    delta_size: int = 0
    wall_time: float = 0.0

    def __len__(self):
        return len(self.nodes)


@dataclass(frozen=True)
class Solution:
    """A plan, the explanation that makes it optimal to the human, and its score."""
    plan: Plan
    explanation: Explanation
    reconciled_model: Model
    objective: Fraction
    explanation_size: int
    explicability_penalty: Fraction
    cost_in_robot: Fraction
    alpha: Fraction = Fraction(0)


@dataclass(frozen=True)
class SweepRow:
    alpha: Fraction
    explanation_size: int
    plan_cost_in_robot: Fraction
    objective: Fraction
    explicability_penalty: Fraction


@dataclass(frozen=True)
class ExplicablePlan:
    """The plan the human expects, judged in the robot's model."""
    plan: Optional[Plan]
    cost_in_human: object
    cost_in_robot: object
    robot_optimal_cost: object

    @property
    def executable(self) -> bool:
        return self.cost_in_robot != INFINITY


def parse_alpha(value) -> Fraction:
    try:
        return parse_rational(value)
    except ValueError as e:
        raise InputError(f"Invalid alpha: {e}")


def obj_val(node: SearchNode, alpha, robot_optimal_cost):
    """Objective of a node; infinite when its plan cannot run on the robot."""
    if not node.eligible:
        return INFINITY
    return node.size + parse_alpha(alpha) * penalty(node, robot_optimal_cost)


def penalty(node: SearchNode, robot_optimal_cost) -> Fraction:
    return abs(node.cost_in_robot - robot_optimal_cost)


def _selection_key(node: SearchNode, alpha: Fraction, robot_optimal_cost):
    return (
        obj_val(node, alpha, robot_optimal_cost),
        penalty(node, robot_optimal_cost),
        node.size,
        node.explanation.key,
    )


def _select(nodes: Iterable[SearchNode], alpha: Fraction, robot_optimal_cost,
            literal_ties: bool = False) -> Optional[SearchNode]:
    best, best_key = None, None
    for node in nodes:
        if not node.eligible:
            continue
        key = _selection_key(node, alpha, robot_optimal_cost)
        if literal_ties:
            if best is None or key[0] <= best_key[0]:
                best, best_key = node, key
        elif best is None or key < best_key:
            best, best_key = node, key
    return best


def _solution(node: SearchNode, alpha: Fraction, robot_optimal_cost) -> Solution:
    return Solution(
        plan=node.optimal_plan,
        explanation=node.explanation,
        reconciled_model=node.model,
        objective=obj_val(node, alpha, robot_optimal_cost),
        explanation_size=node.size,
        explicability_penalty=penalty(node, robot_optimal_cost),
        cost_in_robot=node.cost_in_robot,
        alpha=alpha,
    )


def _evaluate(model: Model, explanation: Explanation, robot: Model, planner: Planner) -> SearchNode:
    result = planner.optimal_plan(model)
    cost_in_robot = plan_cost(result.plan, robot) if result.solved else INFINITY
    return SearchNode(model, explanation, result.plan, result.cost, cost_in_robot)


def _robot_optimal_cost(problem: HapProblem, planner: Planner):
    result = planner.optimal_plan(problem.robot_model)
    if not result.solved:
        raise UnsolvableError("The robot model has no plan")
    return result.cost


def mega_search(problem: HapProblem, alpha=0, settings: Optional[SearchSettings] = None,
                planner: Optional[Planner] = None) -> Tuple[Solution, Ledger]:
    """Find the plan and explanation minimising ``|E| + alpha * penalty``.

    Args:
        problem: Robot and human models.
        alpha: Non-negative weight of the explicability penalty.
        settings: Search settings; defaults apply when omitted.
        planner: Planner to reuse (its memo is shared across calls).

    Returns:
        The chosen solution and the ledger of every visited node.

    Raises:
        UnsolvableError: If the robot model has no plan or no node is eligible.
        PlannerLimitError: If a planner call exceeds its cap.
    """
    settings = settings or SearchSettings()
    planner = planner or settings.planner()
    alpha = parse_alpha(alpha)
    started = time.monotonic()

    robot = problem.robot_model
    robot_cost = _robot_optimal_cost(problem, planner)
    size = problem.delta_size
    logger.info(f"Model-space search started: |delta|={size} alpha={format_rational(alpha)}")

    start = Explanation()
    fringe = [(0, start.key, 0, problem.human_model, start)]
    queued = {problem.human_model}
    closed = set()
    visited: List[SearchNode] = []
    mce_size = None
    counter = itertools.count(1)
    executor = ThreadPoolExecutor(settings.workers) if settings.workers > 1 else None

    try:
        while fringe:
            _, _, _, model, explanation = heapq.heappop(fringe)
            if model in closed:
                continue
            closed.add(model)

            node = _evaluate(model, explanation, robot, planner)
            visited.append(node)
            if node.cost_in_robot == robot_cost:
                mce_size = node.size
                break

            children = []
            for edit in edits_toward(model, robot, settings.allow_cost_edits):
                try:
                    child = apply_edit(model, edit)
                except ModelError as e:
                    logger.debug(f"Skipping unrepresentable model after {edit}: {e}")
                    continue
                if child in queued:
                    continue
                queued.add(child)
                children.append((child, explanation.with_edit(edit)))

            if executor is not None and children:
                list(executor.map(planner.optimal_plan, [child for child, _ in children]))

            for child, child_explanation in children:
                heapq.heappush(
                    fringe,
                    (len(child_explanation), child_explanation.key, next(counter), child, child_explanation),
                )
    finally:
        if executor is not None:
            executor.shutdown()

    ledger = Ledger(
        nodes=tuple(visited),
        mce_size=mce_size,
        robot_optimal_cost=robot_cost,
        delta_size=size,
        wall_time=time.monotonic() - started,
    )
    solution = reevaluate(ledger, alpha, settings.literal_ties)
    logger.info(
        f"Model-space search finished: nodes={len(visited)} |E|={solution.explanation_size} "
        f"objective={format_rational(solution.objective)}"
    )
    return solution, ledger


def reevaluate(ledger: Ledger, alpha, literal_ties: bool = False) -> Solution:
    """Re-score a finished search for a different alpha without searching again.

    Raises:
        UnsolvableError: If the ledger holds no eligible node.
    """
    alpha = parse_alpha(alpha)
    best = _select(ledger.nodes, alpha, ledger.robot_optimal_cost, literal_ties)
    if best is None:
        raise UnsolvableError("No visited model has a plan executable by the robot")
    return _solution(best, alpha, ledger.robot_optimal_cost)


def sweep_alpha(problem: HapProblem, alphas: Sequence, settings: Optional[SearchSettings] = None,
                planner: Optional[Planner] = None) -> Tuple[List[SweepRow], Ledger]:
    """One search, re-scored for each alpha."""
    if not alphas:
        raise InputError("At least one alpha is required")
    alphas = [parse_alpha(a) for a in alphas]
    settings = settings or SearchSettings()
    _, ledger = mega_search(problem, alphas[0], settings, planner)

    rows = []
    for alpha in alphas:
        solution = reevaluate(ledger, alpha, settings.literal_ties)
        rows.append(SweepRow(
            alpha=alpha,
            explanation_size=solution.explanation_size,
            plan_cost_in_robot=solution.cost_in_robot,
            objective=solution.objective,
            explicability_penalty=solution.explicability_penalty,
        ))
    return rows, ledger


def _subsets(edits: Sequence[Edit]):
    for r in range(len(edits) + 1):
        for combo in itertools.combinations(edits, r):
            yield combo


def brute_force_solution(problem: HapProblem, alpha=0, settings: Optional[SearchSettings] = None,
                         planner: Optional[Planner] = None) -> Solution:
    """Score every subset of the model difference and return the best one.

    Raises:
        DeltaTooLargeError: If there are more edits than the enumeration limit.
        UnsolvableError: If the robot model has no plan or no subset is eligible.
    """
    settings = settings or SearchSettings()
    planner = planner or settings.planner()
    alpha = parse_alpha(alpha)
    human, robot = problem.human_model, problem.robot_model

    edits = edits_toward(human, robot, settings.allow_cost_edits)
    if len(edits) > settings.brute_force_max_delta:
        raise DeltaTooLargeError(
            f"{len(edits)} edits exceed the enumeration limit of {settings.brute_force_max_delta}"
        )
    robot_cost = _robot_optimal_cost(problem, planner)

    nodes = []
    for subset in _subsets(edits):
        try:
            model = apply_explanation(human, subset)
        except ModelError:
            continue
        nodes.append(_evaluate(model, Explanation(subset), robot, planner))

    best = _select(nodes, alpha, robot_cost, settings.literal_ties)
    if best is None:
        raise UnsolvableError("No model in the difference has a plan executable by the robot")
    return _solution(best, alpha, robot_cost)


def mce_search(problem: HapProblem, plan: Optional[Plan] = None,
               settings: Optional[SearchSettings] = None,
               planner: Optional[Planner] = None) -> Explanation:
    """Smallest explanation that makes ``plan`` optimal in the human's model.

    Subsets are tried by size, then in serialized order. When ``plan`` is
    omitted the robot's optimal plan is explained.

    Raises:
        InputError: If the plan is not optimal in the robot model.
        UnsolvableError: If no subset of the difference makes the plan optimal.
    """
    settings = settings or SearchSettings()
    planner = planner or settings.planner()
    human, robot = problem.human_model, problem.robot_model

    robot_cost = _robot_optimal_cost(problem, planner)
    if plan is None:
        plan = planner.optimal_plan(robot).plan
    if plan_cost(plan, robot) != robot_cost:
        raise InputError("The plan to explain is not optimal in the robot model")

    edits = edits_toward(human, robot, settings.allow_cost_edits)
    for subset in _subsets(edits):
        try:
            model = apply_explanation(human, subset)
        except ModelError:
            continue
        cost = plan_cost(plan, model)
        if cost != INFINITY and cost == planner.optimal_cost(model):
            return Explanation(subset)
    raise UnsolvableError("No explanation makes the plan optimal in the human model")


def explicable_plan(problem: HapProblem, planner: Optional[Planner] = None) -> ExplicablePlan:
    """The plan the human expects, with its cost and executability for the robot."""
    planner = planner or Planner()
    expected = planner.optimal_plan(problem.human_model)
    robot_cost = planner.optimal_cost(problem.robot_model)
    cost_in_robot = plan_cost(expected.plan, problem.robot_model) if expected.solved else INFINITY
    return ExplicablePlan(expected.plan, expected.cost, cost_in_robot, robot_cost)


def explanation_baseline(problem: HapProblem, settings: Optional[SearchSettings] = None,
                         planner: Optional[Planner] = None) -> Solution:
    """The robot's optimal plan together with its minimal complete explanation."""
    settings = settings or SearchSettings()
    planner = planner or settings.planner()
    robot_plan = planner.optimal_plan(problem.robot_model)
    if not robot_plan.solved:
        raise UnsolvableError("The robot model has no plan")
    explanation = mce_search(problem, robot_plan.plan, settings, planner)
    return Solution(
        plan=robot_plan.plan,
        explanation=explanation,
        reconciled_model=apply_explanation(problem.human_model, explanation),
        objective=Fraction(len(explanation)),
        explanation_size=len(explanation),
        explicability_penalty=Fraction(0),
        cost_in_robot=robot_plan.cost,
    )


def check_solution(problem: HapProblem, solution: Solution, alpha=None,
                   planner: Optional[Planner] = None) -> List[str]:
    """List the balancing conditions a solution violates; empty when it is sound."""
    planner = planner or Planner()
    alpha = solution.alpha if alpha is None else parse_alpha(alpha)
    robot = problem.robot_model
    violations = []

    cost_in_robot = plan_cost(solution.plan, robot)
    if cost_in_robot == INFINITY:
        violations.append("plan is not executable in the robot model")

    try:
        reconciled = apply_explanation(problem.human_model, solution.explanation)
    except (EditError, ModelError) as e:
        reconciled = None
        violations.append(f"explanation cannot be applied to the human model: {e}")
    if reconciled is not None and reconciled != solution.reconciled_model:
        violations.append("reconciled model is not the human model updated by the explanation")

    if reconciled is not None:
        cost = plan_cost(solution.plan, reconciled)
        if cost == INFINITY or cost != planner.optimal_cost(reconciled):
            violations.append("plan is not optimal in the reconciled model")

    if cost_in_robot != INFINITY:
        expected_penalty = abs(cost_in_robot - planner.optimal_cost(robot))
        if solution.explicability_penalty != expected_penalty:
            violations.append("explicability penalty does not match the robot's optimal cost")
        if solution.objective != len(solution.explanation) + alpha * expected_penalty:
            violations.append("objective does not match |E| + alpha * penalty")
    return violations


def write_ledger_csv(ledger: Ledger, stream: IO[str]) -> None:
    """Write one row per visited node."""
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(LEDGER_COLUMNS)
    for node in ledger.nodes:
        writer.writerow([
            node.size,
            '; '.join(node.explanation.lines()),
            format_rational(node.cost_in_model),
            format_rational(node.cost_in_robot),
            'true' if node.eligible else 'false',
        ])
