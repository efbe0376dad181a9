"""Ground-truth evaluators for small models.

Three independent routes to the same semantics:

- :func:`enumerate_uniform` lists every uniform memoryless strategy of a
  coalition (one action per agent per observation class), capped because the
  count is exponential.
- :func:`strategy_sat_u` decides a reach-through objective under one fixed
  strategy with a plain least fixpoint over the pruned transition relation.
- :func:`oracle_eval` combines the two into a direct reading of the
  semantics: a state satisfies a strategic formula iff some uniform strategy
  wins from every state any coalition member confuses with it.
- :func:`perfect_info_eval` evaluates the same formulas as if every agent
  observed the exact state (plain alternating fixpoints); uniform results
  are always a subset of these.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import EnumerationCapExceeded, IncompleteStrategy, UnsupportedOperator
from .formula import Atom, CanNext, CanUntil, Not, Or, TrueConst, normalize
from .icgs import GroupAction, Icgs, Move, MoveSet, StateSet, bits

DEFAULT_CAP = 10 ** 6


@dataclass(frozen=True)
class UniformStrategy:
    """One action per agent per observation class, as nested sorted tuples.

    ``assignment[i]`` belongs to ``coalition[i]`` and maps every observation
    token of that agent to the chosen action.
    """

    coalition: tuple
    assignment: tuple  # per agent: tuple of (token, action), sorted by token

    def action_table(self):
        return tuple(dict(per_agent) for per_agent in self.assignment)

    def group_action(self, model: Icgs, state) -> GroupAction:
        tables = self.action_table()
        picks = []
        for ag, table in zip(self.coalition, tables):
            token = model.observation[ag].get(state)
            if token not in table:
                raise IncompleteStrategy(
                    "strategy has no choice for agent %r in state %r" % (ag, state))
            picks.append(table[token])
        return GroupAction(self.coalition, tuple(picks))

    def move_set(self, model: Icgs) -> MoveSet:
        return MoveSet.of(model, self.coalition,
                          (Move(q, self.group_action(model, q)) for q in model.states))


def count_uniform(model: Icgs, coalition) -> int:
    """The number of uniform strategies of the coalition."""
    gamma = model.coalition(coalition)
    total = 1
    for ag in gamma:
        for _, acts in _classes(model, ag):
            total *= len(acts)
    return total


def _classes(model, agent):
    """(token, enabled actions) per observation class, sorted by token."""
    obs = model.observation[agent]
    reps = {}
    for q in model.states:
        reps.setdefault(obs[q], q)
    return [(tok, model.protocol[agent][reps[tok]]) for tok in sorted(reps)]


def enumerate_uniform(model: Icgs, coalition, cap: int = DEFAULT_CAP):
    """Iterate every uniform strategy exactly once, in deterministic order.

    Raises :class:`EnumerationCapExceeded` before yielding anything when the
    strategy count exceeds ``cap``.
    """
    gamma = model.coalition(coalition)
    per_agent = [_classes(model, ag) for ag in gamma]
    total = 1
    for classes in per_agent:
        for _, acts in classes:
            total *= len(acts)
    if total > cap:
        raise EnumerationCapExceeded(
            "%d uniform strategies exceed the cap of %d" % (total, cap))

    def generate():
        slots = [(a, tok, acts)
                 for a, classes in enumerate(per_agent)
                 for tok, acts in classes]
        for combo in itertools.product(*(acts for _, _, acts in slots)):
            assignment = [[] for _ in gamma]
            for (a, tok, _), act in zip(slots, combo):
                assignment[a].append((tok, act))
            yield UniformStrategy(gamma, tuple(tuple(per) for per in assignment))

    return generate()


def _strategy_succ(model, strategy: UniformStrategy):
    """Per state, the successor mask over all completions of the strategy."""
    idx = model.index(strategy.coalition)
    tables = strategy.action_table()
    succ = []
    for q in model.states:
        picks = []
        for ag, table in zip(strategy.coalition, tables):
            token = model.observation[ag].get(q)
            if token not in table:
                raise IncompleteStrategy(
                    "strategy has no choice for agent %r in state %r" % (ag, q))
            picks.append(table[token])
        succ.append(idx.succ_mask[idx.move_id(q, tuple(picks))])
    return succ


def strategy_sat_u(model: Icgs, strategy: UniformStrategy,
                   q1: StateSet, q2: StateSet) -> StateSet:
    """States from which every outcome of the strategy reaches ``q2``
    through ``q1``: the until objective under a fixed memoryless strategy is
    the least fixpoint of ``Z -> q2 | (q1 & all-successors-in-Z)``."""
    succ = _strategy_succ(model, strategy)
    q1mask, q2mask = q1.mask, q2.mask
    z = q2mask
    while True:
        nz = q2mask
        candidates = q1mask & ~nz
        for i in bits(candidates):
            if succ[i] & ~z == 0:
                nz |= 1 << i
        if nz == z:
            break
        z = nz
    return StateSet(model, z)


def oracle_eval(model: Icgs, f, cap: int = DEFAULT_CAP) -> StateSet:
    """Exhaustive-enumeration semantics of a formula over all states."""
    nf = normalize(f)
    full = model._all_mask
    return StateSet(model, _oracle(model, nf, full, cap))


def _oracle(model, f, full, cap):
    if isinstance(f, TrueConst):
        return full
    if isinstance(f, Atom):
        return model.label_mask(f.name)
    if isinstance(f, Not):
        return full & ~_oracle(model, f.sub, full, cap)
    if isinstance(f, Or):
        return _oracle(model, f.left, full, cap) | _oracle(model, f.right, full, cap)
    if isinstance(f, CanNext):
        idx = model.index(f.coalition)
        target = _oracle(model, f.sub, full, cap)
        sat = 0
        for strategy in enumerate_uniform(model, f.coalition, cap):
            succ = _strategy_succ(model, strategy)
            good = 0
            for i in range(idx.n_states):
                if succ[i] & ~target == 0:
                    good |= 1 << i
            sat |= idx.closed_within(full & ~sat, good)
            if sat == full:
                break
        return sat
    if isinstance(f, CanUntil):
        idx = model.index(f.coalition)
        q1 = StateSet(model, _oracle(model, f.lhs, full, cap))
        q2 = StateSet(model, _oracle(model, f.rhs, full, cap))
        sat = 0
        for strategy in enumerate_uniform(model, f.coalition, cap):
            winning = strategy_sat_u(model, strategy, q1, q2)
            sat |= idx.closed_within(full & ~sat, winning.mask)
            if sat == full:
                break
        return sat
    raise UnsupportedOperator("the oracle cannot handle %r" % (f,))


def perfect_info_eval(model: Icgs, f) -> StateSet:
    """Perfect-information semantics: one-step controllability for next,
    the reach-through fixpoint for until."""
    nf = normalize(f)
    full = model._all_mask
    return StateSet(model, _perfect(model, nf, full))


def _perfect(model, f, full):
    if isinstance(f, TrueConst):
        return full
    if isinstance(f, Atom):
        return model.label_mask(f.name)
    if isinstance(f, Not):
        return full & ~_perfect(model, f.sub, full)
    if isinstance(f, Or):
        return _perfect(model, f.left, full) | _perfect(model, f.right, full)
    if isinstance(f, CanNext):
        idx = model.index(f.coalition)
        return idx.pre_ce(_perfect(model, f.sub, full))
    if isinstance(f, CanUntil):
        idx = model.index(f.coalition)
        return idx.filter_ceu(_perfect(model, f.lhs, full),
                              _perfect(model, f.rhs, full))
    raise UnsupportedOperator("the evaluator cannot handle %r" % (f,))
