"""Backward model checking of coalition reachability objectives.

The evaluator handles the core fragment produced by
:func:`atlir.formula.normalize`.  Boolean connectives are evaluated
structurally; negation complements the sub-formula's full satisfying set
within the query, because strategic sub-formulas quantify over
indistinguishable states that may fall outside the query.

Strategic operators are solved backwards from the target states.  For
coalition-next, the moves that surely enter the target in one step are split
into maximal conflict-free subsets; a state is satisfied when one subset
covers everything the coalition confuses with it.  For coalition-until, each
maximal conflict-free seed over the target states is grown backwards: at
every step the moves that surely re-enter the current fragment and are
compatible with it are split into conflict-free extensions, and the search
backtracks over the alternatives while excluding moves it already set aside.
A state is abandoned as soon as some indistinguishable state loses even under
perfect information (no general strategy reaches the target), and won as soon
as the fragment covers its whole indistinguishability class.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CoalitionMismatch, PreconditionViolation, UnsupportedOperator
from .formula import (
    Atom,
    CanNext,
    CanUntil,
    Formula,
    Not,
    Or,
    TrueConst,
    normalize,
    parse,
)
from .icgs import Icgs, MoveSet, StateSet


@dataclass
class CheckStats:
    """Best-effort search diagnostics; no semantic contract."""

    strategies_explored: int = 0
    split_calls: int = 0
    fixpoint_iterations: int = 0
    max_depth: int = 0


@dataclass
class CheckResult:
    formula: Formula
    sat: StateSet
    holds: bool
    stats: CheckStats


class EvalCache:
    """Memo from a normalized sub-formula to its satisfying set over all states."""

    def __init__(self):
        self._table = {}

    def get(self, f: Formula):
        return self._table.get(f)

    def put(self, f: Formula, sat: StateSet):
        self._table[f] = sat

    def __len__(self):
        return len(self._table)


def check(model: Icgs, f, cache: EvalCache = None,
          query: StateSet = None) -> CheckResult:
    """Evaluate a formula (text or AST); the model satisfies it iff every
    initial state does.

    ``query`` bounds the reported satisfying set (default: all states).  The
    verdict is the same for any query containing the initial states, since
    evaluation restricted to a query agrees with full evaluation intersected
    with it; passing the initial states alone lets the strategy search stop
    as soon as they are decided, which is dramatically cheaper on models
    whose other states have broad indistinguishability classes.
    """
    if isinstance(f, str):
        f = parse(f, model)
    nf = normalize(f)
    stats = CheckStats()
    cache = cache if cache is not None else EvalCache()
    initial = 0
    for q in model.initial:
        initial |= 1 << model._state_pos[q]
    qmask = model._all_mask if query is None else query.mask
    if initial & ~qmask:
        raise PreconditionViolation("the query must contain the initial states")
    sat = _eval(model, qmask, nf, cache, stats)
    return CheckResult(nf, StateSet(model, sat), initial & ~sat == 0, stats)


def evaluate(model: Icgs, query: StateSet, f: Formula,
             cache: EvalCache = None) -> StateSet:
    """The states of ``query`` satisfying ``f`` (normalized internally)."""
    if query.model is not model:
        from .errors import ModelError
        raise ModelError("query belongs to a different model")
    nf = normalize(f)
    cache = cache if cache is not None else EvalCache()
    stats = CheckStats()
    return StateSet(model, _eval(model, query.mask, nf, cache, stats))


def eval_ceu(model: Icgs, interest: StateSet, strategy: MoveSet,
             q1: StateSet, q2: StateSet, exclude: MoveSet) -> StateSet:
    """States of ``interest`` winnable by growing the ``strategy`` fragment,
    for the (q1 until q2) objective.

    Every reported state is winnable from its whole indistinguishability
    class by some total uniform strategy extending ``strategy``, and every
    state winnable by such an extension that also avoids ``exclude`` is
    reported.  The two readings coincide for an empty ``exclude``, which is
    how the evaluator seeds the search; excluded moves are never added to a
    fragment, but wins already covered without them are still reported even
    when no total extension can dodge ``exclude`` elsewhere.

    ``interest`` must be closed under coalition indistinguishability,
    ``strategy`` conflict-free and disjoint from ``exclude``; violations
    raise :class:`PreconditionViolation` since they indicate a caller bug.
    """
    if exclude.coalition != strategy.coalition:
        raise CoalitionMismatch("strategy and exclude disagree on the coalition")
    idx = model.index(strategy.coalition)
    if idx.is_conflicting(strategy.mask):
        raise PreconditionViolation("strategy is conflicting")
    if strategy.mask & exclude.mask:
        raise PreconditionViolation("exclude overlaps the strategy")
    if idx.closure(interest.mask) != interest.mask:
        raise PreconditionViolation(
            "interest is not closed under coalition indistinguishability")
    stats = CheckStats()
    won = _ceu_search(idx, interest.mask, strategy.mask, q1.mask, q2.mask,
                      exclude.mask, stats)
    return StateSet(model, won)


# ---------------------------------------------------------------------------
# Internal mask-level evaluator
# ---------------------------------------------------------------------------

def _eval(model, qmask, f, cache, stats):
    if isinstance(f, TrueConst):
        return qmask
    if isinstance(f, Atom):
        return qmask & model.label_mask(f.name)
    if isinstance(f, Not):
        return qmask & ~_eval_full(model, f.sub, cache, stats)
    if isinstance(f, Or):
        return (_eval(model, qmask, f.left, cache, stats)
                | _eval(model, qmask, f.right, cache, stats))
    if isinstance(f, CanNext):
        return _eval_can_next(model, qmask, f, cache, stats)
    if isinstance(f, CanUntil):
        return _eval_can_until(model, qmask, f, cache, stats)
    raise UnsupportedOperator("the evaluator cannot handle %r" % (f,))


def _eval_full(model, f, cache, stats):
    hit = cache.get(f)
    if hit is not None:
        return hit.mask
    sat = _eval(model, model._all_mask, f, cache, stats)
    cache.put(f, StateSet(model, sat))
    return sat


def _eval_sub(model, qmask, f, cache, stats):
    # Restricted evaluation; reuses a cached full set when available.
    hit = cache.get(f)
    if hit is not None:
        return hit.mask & qmask
    return _eval(model, qmask, f, cache, stats)


def _eval_can_next(model, qmask, f, cache, stats):
    idx = model.index(f.coalition)
    interest = idx.closure(qmask)
    # Evaluate the operand on the successors of everything any coalition
    # member confuses with the states of interest.
    target = _eval_sub(model, idx.post(idx.closure(interest)), f.sub, cache, stats)
    good_moves = idx.pre_move(target)
    sat = 0
    remaining = interest
    stats.split_calls += 1
    for mmask in idx.split_all(good_moves, True):
        stats.strategies_explored += 1
        cov = idx.cover(mmask)
        sat |= idx.closed_within(remaining, cov)
        remaining = interest & ~sat
        if remaining == 0:
            break
    return sat & qmask


def _eval_can_until(model, qmask, f, cache, stats):
    idx = model.index(f.coalition)
    q1 = _eval_full(model, f.lhs, cache, stats)
    q2 = _eval_full(model, f.rhs, cache, stats)
    interest = idx.closure(qmask)
    # States whose whole indistinguishability class already satisfies the
    # target need no strategy at all.
    sat = idx.closed_within(interest, q2)
    if sat == interest:
        return sat & qmask
    remaining = interest & ~sat
    stats.split_calls += 1
    for seed in idx.split_all(idx.moves_of(q2), True):
        stats.strategies_explored += 1
        sat |= _ceu_search(idx, remaining, seed, q1, q2, 0, stats)
        remaining = interest & ~sat
        if remaining == 0:
            break
    return sat & qmask


class _Frame:
    __slots__ = ("interest", "strategy", "exclude", "iterator", "new_moves",
                 "notlose")

    def __init__(self, interest, strategy, exclude, notlose_floor=0):
        self.interest = interest
        self.strategy = strategy
        self.exclude = exclude
        self.iterator = None
        self.new_moves = 0
        self.notlose = notlose_floor


def _ceu_search(idx, interest, strategy, q1mask, q2mask, exclude, stats):
    """Backtracking growth of one conflict-free strategy fragment.

    Implements the recursive search with an explicit stack: the recursion
    depth is bounded by the number of coalition moves, which can exceed the
    interpreter's limit.  ``won`` accumulates across the whole tree; every
    resumed frame drops the states its descendants already won.  A child's
    fragment covers more than its parent's, so the parent's not-lose set
    seeds the child's fixpoint.
    """
    moves_q1 = idx.moves_of(q1mask)
    won = 0
    stack = [_Frame(interest, strategy, exclude)]
    while stack:
        if len(stack) > stats.max_depth:
            stats.max_depth = len(stack)
        fr = stack[-1]
        if fr.iterator is None:
            fr.interest &= ~won
            cov = idx.cover(fr.strategy)
            notlose = idx.filter_ceu(q1mask, cov, stats, floor=fr.notlose)
            fr.notlose = notlose
            # Won: the whole class is covered by the fragment.  Lost: some
            # indistinguishable state cannot reach the fragment even with a
            # general strategy.  Neither: keep extending.
            win_local = idx.closed_within(fr.interest, cov)
            won |= win_local
            rest = idx.closed_within(fr.interest & ~win_local, notlose)
            if rest == 0:
                stack.pop()
                continue
            fr.interest = rest
            new_moves = (idx.pre_move(cov) & moves_q1) & ~fr.strategy & ~fr.exclude
            comp = idx.compatible(new_moves, fr.strategy)
            if comp == 0:
                stack.pop()
                continue
            fr.new_moves = new_moves
            stats.split_calls += 1
            fr.iterator = idx.split_all(comp, False)
        else:
            fr.interest &= ~won
            if fr.interest == 0:
                stack.pop()
                continue
            sub = next(fr.iterator, None)
            while sub == 0:  # only the non-empty subsets extend the fragment
                sub = next(fr.iterator, None)
            if sub is None:
                stack.pop()
                continue
            stats.strategies_explored += 1
            stack.append(_Frame(fr.interest, fr.strategy | sub,
                                fr.exclude | (fr.new_moves & ~sub),
                                notlose_floor=fr.notlose))
    return won
