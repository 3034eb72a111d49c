"""Cost-optimal planning over grounded models.

A* with the admissible h_max delete-relaxation heuristic, plus a blind
uniform-cost variant used as a certification oracle. Ties among equal f are
broken by lower h, then by the lexicographically smallest action sequence, so
equal models always yield the identical plan.
"""

import heapq
import logging
import threading
import time
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Optional

from app.services.errors import PlannerLimitError
from app.services.strips import Model, Plan, State
from app.utils.numbers import INFINITY

logger = logging.getLogger(__name__)

DEFAULT_NODE_CAP = 10 ** 6
ZERO = Fraction(0)


@dataclass(frozen=True)
class PlanResult:
    """Outcome of a planner call. ``plan`` is None exactly when cost is infinite."""
    plan: Optional[Plan]
    cost: object
    nodes_expanded: int = 0
    wall_time: float = 0.0

    @property
    def solved(self) -> bool:
        return self.plan is not None


class RelaxedIndex:
    """Precondition index of a model for the h_max fixpoint."""

    def __init__(self, model: Model):
        self.model = model
        self.actions = model.actions
        self.pre_counts = [len(a.pre) for a in self.actions]
        self.by_pre = defaultdict(list)
        for i, action in enumerate(self.actions):
            for fluent in action.pre:
                self.by_pre[fluent].append(i)
        self.unconditional = [i for i, n in enumerate(self.pre_counts) if n == 0]

    def h_max(self, state: State):
        """Cost of the most expensive goal fluent under the delete relaxation."""
        goal = self.model.goal
        if goal <= state:
            return ZERO

        cost: Dict = {fluent: ZERO for fluent in state}
        heap = [(ZERO, fluent) for fluent in state]
        heapq.heapify(heap)
        remaining = list(self.pre_counts)
        settled = set()
        goals_left = len(goal)

        def fire(i, base):
            action = self.actions[i]
            reached = base + action.cost
            for fluent in action.add:
                if reached < cost.get(fluent, INFINITY):
                    cost[fluent] = reached
                    heapq.heappush(heap, (reached, fluent))

        for i in self.unconditional:
            fire(i, ZERO)

        while heap:
            value, fluent = heapq.heappop(heap)
            if fluent in settled or value > cost[fluent]:
                continue
            settled.add(fluent)
            if fluent in goal:
                goals_left -= 1
                if goals_left == 0:
                    return value
            for i in self.by_pre.get(fluent, ()):
                remaining[i] -= 1
                if remaining[i] == 0:
                    fire(i, value)

        return INFINITY


def h_max(model: Model, state: State):
    return RelaxedIndex(model).h_max(frozenset(state))


def _search(model: Model, heuristic: Callable[[State], object],
            node_cap: int, time_cap: Optional[float]) -> PlanResult:
    started = time.monotonic()
    init = model.init
    h0 = heuristic(init)
    if h0 == INFINITY:
        return PlanResult(None, INFINITY, 0, time.monotonic() - started)

    # (f, h, steps, g, state): steps is the lexicographic tie-breaker
    heap = [(h0, h0, (), ZERO, init)]
    best_g = {init: ZERO}
    closed = set()
    expanded = 0

    while heap:
        _, _, steps, g, state = heapq.heappop(heap)
        if state in closed:
            continue
        if model.goal <= state:
            return PlanResult(Plan(steps), g, expanded, time.monotonic() - started)

        closed.add(state)
        expanded += 1
        if expanded > node_cap:
            logger.warning(f"Planner node cap of {node_cap} exceeded")
            raise PlannerLimitError(f"Node cap of {node_cap} expansions exceeded", expanded)
        if time_cap is not None and time.monotonic() - started > time_cap:
            logger.warning(f"Planner time cap of {time_cap}s exceeded")
            raise PlannerLimitError(f"Time cap of {time_cap}s exceeded", expanded)

        for action in model.actions:
            if not action.pre <= state:
                continue
            successor = (state | action.add) - action.delete
            if successor in closed:
                continue
            g2 = g + action.cost
            if g2 > best_g.get(successor, INFINITY):
                continue
            h = heuristic(successor)
            if h == INFINITY:
                continue
            best_g[successor] = g2
            heapq.heappush(heap, (g2 + h, h, steps + (action.name,), g2, successor))

    return PlanResult(None, INFINITY, expanded, time.monotonic() - started)


class Planner:
    """Optimal planner with a thread-safe per-model memo.

    Args:
        node_cap: Maximum expansions per call before PlannerLimitError.
        time_cap: Optional wall-clock limit per call, in seconds.
    """

    def __init__(self, node_cap: int = DEFAULT_NODE_CAP, time_cap: Optional[float] = None):
        self.node_cap = node_cap
        self.time_cap = time_cap
        self.calls = 0
        self._cache: Dict[Model, PlanResult] = {}
        self._lock = threading.Lock()

    def optimal_plan(self, model: Model) -> PlanResult:
        """Return a provably cost-minimal plan for the model (memoized).

        Raises:
            PlannerLimitError: If the node or time cap is exceeded.
        """
        with self._lock:
            cached = self._cache.get(model)
        if cached is not None:
            return cached

        index = RelaxedIndex(model)
        result = _search(model, index.h_max, self.node_cap, self.time_cap)
        logger.debug(
            f"Planned model: cost={result.cost} nodes={result.nodes_expanded} "
            f"time={result.wall_time:.4f}s"
        )
        with self._lock:
            self.calls += 1
            self._cache[model] = result
        return result

    def optimal_cost(self, model: Model):
        return self.optimal_plan(model).cost

    def blind_optimal_plan(self, model: Model) -> PlanResult:
        """Uniform-cost search without a heuristic; never memoized."""
        return _search(model, lambda state: ZERO, self.node_cap, self.time_cap)

    @property
    def cache_size(self) -> int:
        with self._lock:
            return len(self._cache)


def optimal_plan(model: Model, node_cap: int = DEFAULT_NODE_CAP,
                 time_cap: Optional[float] = None) -> PlanResult:
    return Planner(node_cap, time_cap).optimal_plan(model)


def optimal_cost(model: Model, node_cap: int = DEFAULT_NODE_CAP,
                 time_cap: Optional[float] = None):
    return optimal_plan(model, node_cap, time_cap).cost


def blind_optimal_plan(model: Model, node_cap: int = DEFAULT_NODE_CAP,
                       time_cap: Optional[float] = None) -> PlanResult:
    return Planner(node_cap, time_cap).blind_optimal_plan(model)
