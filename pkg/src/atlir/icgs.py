"""Imperfect-information concurrent game structures and their basic queries.

An :class:`Icgs` couples a finite multi-agent transition system with one
observation partition per agent.  Agents pick actions simultaneously; the
joint action determines the successor state deterministically.  Each agent
must behave identically in states it cannot distinguish, which is enforced
structurally: observations are stored as token functions, so the induced
indistinguishability relations are equivalence relations by construction.

All set-valued results use :class:`StateSet` and :class:`MoveSet`, thin
wrappers over bit masks with a canonical iteration order (model state order,
then lexicographic action order).  Determinism of every downstream algorithm
rests on that order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import (
    CoalitionMismatch,
    DisabledJointAction,
    ModelError,
    UnknownAgent,
    UnknownState,
)

# Validation issue kinds.
EMPTY_PROTOCOL = "EmptyProtocol"
MISSING_TRANSITION = "MissingTransition"
NONDETERMINISTIC_TRANSITION = "NondeterministicTransition"
OBSERVATION_PROTOCOL_MISMATCH = "ObservationProtocolMismatch"
DANGLING_REFERENCE = "DanglingReference"


@dataclass(frozen=True)
class ValidationIssue:
    kind: str
    message: str

    def __str__(self):
        return "%s: %s" % (self.kind, self.message)


class Icgs:
    """An imperfect-information concurrent game structure.

    Parameters mirror the mathematical components: ``agents`` and ``states``
    are ordered identifier lists, ``initial`` a subset of states, ``actions``
    a per-agent alphabet, ``protocol`` a per-agent map from state to enabled
    actions, ``transition`` a map from (state, joint action tuple in agent
    order) to successor state, ``observation`` a per-agent map from state to
    an observation token, and ``labels`` a map from state to atomic
    propositions.

    The constructor only normalises its inputs; semantic well-formedness is
    checked by :func:`validate`.  Instances are immutable once built and may
    be shared freely across threads.
    """

    def __init__(self, agents, states, initial, actions, protocol,
                 transition, observation, labels, extra_issues=()):
        self.agents = tuple(agents)
        self.states = tuple(states)
        if len(set(self.agents)) != len(self.agents):
            raise ModelError("duplicate agent identifier")
        if len(set(self.states)) != len(self.states):
            raise ModelError("duplicate state identifier")
        self._state_pos = {q: i for i, q in enumerate(self.states)}
        self._agent_pos = {ag: i for i, ag in enumerate(self.agents)}
        self.initial = tuple(q for q in self.states if q in set(initial))
        self._initial_raw = tuple(initial)
        self.actions = {ag: tuple(acts) for ag, acts in dict(actions).items()}
        self.protocol = {
            ag: {q: tuple(sorted(acts)) for q, acts in per_state.items()}
            for ag, per_state in dict(protocol).items()
        }
        self.transition = {
            (q, tuple(joint)): target
            for (q, joint), target in dict(transition).items()
        }
        self.observation = {
            ag: dict(per_state) for ag, per_state in dict(observation).items()
        }
        self.labels = {q: frozenset(labels.get(q, ())) for q in self.states}
        self.atoms = frozenset().union(*self.labels.values()) if self.labels else frozenset()
        self._extra_issues = tuple(extra_issues)
        self._indexes = {}
        self._label_masks = None
        self._all_mask = (1 << len(self.states)) - 1

    # -- identity -----------------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, Icgs):
            return NotImplemented
        return (self.agents == other.agents
                and self.states == other.states
                and self.initial == other.initial
                and self.actions == other.actions
                and self.protocol == other.protocol
                and self.transition == other.transition
                and self.observation == other.observation
                and self.labels == other.labels)

    __hash__ = None

    def __repr__(self):
        return "Icgs(%d agents, %d states, %d transitions)" % (
            len(self.agents), len(self.states), len(self.transition))

    # -- lookups ------------------------------------------------------------

    def state_position(self, state):
        try:
            return self._state_pos[state]
        except KeyError:
            raise UnknownState("unknown state %r" % (state,)) from None

    def coalition(self, agents) -> tuple:
        """Canonicalise a group of agents to model order, rejecting unknowns."""
        group = set(agents)
        for ag in group:
            if ag not in self._agent_pos:
                raise UnknownAgent("unknown agent %r" % (ag,))
        return tuple(ag for ag in self.agents if ag in group)

    def state_set(self, states: Iterable[str]) -> "StateSet":
        mask = 0
        for q in states:
            mask |= 1 << self.state_position(q)
        return StateSet(self, mask)

    def all_states(self) -> "StateSet":
        return StateSet(self, self._all_mask)

    def labeled(self, atom) -> "StateSet":
        """All states carrying the given atomic proposition."""
        return StateSet(self, self.label_mask(atom))

    def label_mask(self, atom) -> int:
        if self._label_masks is None:
            masks = {}
            for i, q in enumerate(self.states):
                for p in self.labels[q]:
                    masks[p] = masks.get(p, 0) | (1 << i)
            self._label_masks = masks
        return self._label_masks.get(atom, 0)

    def require_valid(self):
        issues = validate(self)
        if issues:
            raise ModelError(
                "invalid model: " + "; ".join(str(i) for i in issues), issues)
        return self

    def index(self, gamma: tuple):
        """Internal per-coalition index (cached); ``gamma`` must be canonical."""
        idx = self._indexes.get(gamma)
        if idx is None:
            from ._index import CoalitionIndex
            idx = self._indexes[gamma] = CoalitionIndex(self, gamma)
        return idx


@dataclass(frozen=True)
class GroupAction:
    """An action tuple for a coalition, stored in model agent order."""

    coalition: tuple
    picks: tuple

    def pick(self, agent):
        try:
            return self.picks[self.coalition.index(agent)]
        except ValueError:
            raise UnknownAgent("agent %r not in coalition" % (agent,)) from None

    def as_dict(self):
        return dict(zip(self.coalition, self.picks))

    def completes(self, model: Icgs, joint: tuple) -> bool:
        """True iff the full joint action agrees with this one on the coalition."""
        return all(joint[model._agent_pos[ag]] == a
                   for ag, a in zip(self.coalition, self.picks))


@dataclass(frozen=True)
class Move:
    """A state together with a coalition action enabled there."""

    state: str
    action: GroupAction

    @property
    def coalition(self):
        return self.action.coalition


def bits(mask: int) -> Iterator[int]:
    """Iterate over set bit positions, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class StateSet:
    """An immutable set of states of one model, iterated in state order."""

    __slots__ = ("model", "mask", "_idcache")

    def __init__(self, model: Icgs, mask: int):
        self.model = model
        self.mask = mask
        self._idcache = None

    @classmethod
    def of(cls, model: Icgs, states: Iterable[str]) -> "StateSet":
        return model.state_set(states)

    def ids(self) -> frozenset:
        if self._idcache is None:
            self._idcache = frozenset(self.model.states[i] for i in bits(self.mask))
        return self._idcache

    def __iter__(self):
        return (self.model.states[i] for i in bits(self.mask))

    def __len__(self):
        return bin(self.mask).count("1")

    def __bool__(self):
        return self.mask != 0

    def __contains__(self, state):
        pos = self.model._state_pos.get(state)
        return pos is not None and (self.mask >> pos) & 1 == 1

    def _coerce(self, other):
        if not isinstance(other, StateSet):
            raise TypeError("expected a StateSet, got %r" % (other,))
        if other.model is not self.model:
            raise ModelError("state sets belong to different models")
        return other

    def __or__(self, other):
        return StateSet(self.model, self.mask | self._coerce(other).mask)

    def __and__(self, other):
        return StateSet(self.model, self.mask & self._coerce(other).mask)

    def __sub__(self, other):
        return StateSet(self.model, self.mask & ~self._coerce(other).mask)

    def __le__(self, other):
        return self.mask & ~self._coerce(other).mask == 0

    def __lt__(self, other):
        other = self._coerce(other)
        return self.mask != other.mask and self.mask & ~other.mask == 0

    def __eq__(self, other):
        if not isinstance(other, StateSet):
            return NotImplemented
        if other.model is self.model:
            return self.mask == other.mask
        return self.ids() == other.ids()

    def __hash__(self):
        return hash(self.ids())

    def __repr__(self):
        return "StateSet({%s})" % ", ".join(sorted(self.ids()))


class MoveSet:
    """An immutable set of moves of one coalition over one model.

    Iteration order is canonical: state-major (model state order), then
    lexicographic on the action tuple.
    """

    __slots__ = ("model", "coalition", "mask", "_movecache")

    def __init__(self, model: Icgs, coalition: tuple, mask: int):
        self.model = model
        self.coalition = coalition
        self.mask = mask
        self._movecache = None

    @classmethod
    def of(cls, model: Icgs, coalition, moves: Iterable[Move]) -> "MoveSet":
        gamma = model.coalition(coalition)
        idx = model.index(gamma)
        mask = 0
        for mv in moves:
            if mv.action.coalition != gamma:
                raise CoalitionMismatch(
                    "move coalition %r does not match %r"
                    % (mv.action.coalition, gamma))
            mask |= 1 << idx.move_id(mv.state, mv.action.picks)
        return cls(model, gamma, mask)

    def moves(self) -> tuple:
        if self._movecache is None:
            idx = self.model.index(self.coalition)
            self._movecache = tuple(
                Move(self.model.states[idx.move_state[m]],
                     GroupAction(self.coalition, idx.move_action[m]))
                for m in bits(self.mask))
        return self._movecache

    def covered_states(self) -> StateSet:
        """The states this move set proposes an action for."""
        idx = self.model.index(self.coalition)
        return StateSet(self.model, idx.cover(self.mask))

    def __iter__(self):
        return iter(self.moves())

    def __len__(self):
        return bin(self.mask).count("1")

    def __bool__(self):
        return self.mask != 0

    def __contains__(self, move):
        return isinstance(move, Move) and move in self.moves()

    def _coerce(self, other):
        if not isinstance(other, MoveSet):
            raise TypeError("expected a MoveSet, got %r" % (other,))
        if other.model is not self.model:
            raise ModelError("move sets belong to different models")
        if other.coalition != self.coalition:
            raise CoalitionMismatch(
                "move sets over different coalitions: %r vs %r"
                % (self.coalition, other.coalition))
        return other

    def __or__(self, other):
        return MoveSet(self.model, self.coalition, self.mask | self._coerce(other).mask)

    def __and__(self, other):
        return MoveSet(self.model, self.coalition, self.mask & self._coerce(other).mask)

    def __sub__(self, other):
        return MoveSet(self.model, self.coalition, self.mask & ~self._coerce(other).mask)

    def __le__(self, other):
        return self.mask & ~self._coerce(other).mask == 0

    def __eq__(self, other):
        if not isinstance(other, MoveSet):
            return NotImplemented
        if other.model is self.model and other.coalition == self.coalition:
            return self.mask == other.mask
        return set(self.moves()) == set(other.moves())

    def __hash__(self):
        return hash((self.coalition, frozenset(self.moves())))

    def __repr__(self):
        body = ", ".join("<%s, %s>" % (m.state, "/".join(m.action.picks))
                         for m in self.moves())
        return "MoveSet[%s]{%s}" % (",".join(self.coalition), body)


# ---------------------------------------------------------------------------
# Elementary queries
# ---------------------------------------------------------------------------

def validate(model: Icgs):
    """Check every structural invariant; return the list of violations.

    An empty list means the model is well formed.  Every violation carries
    the offending state/agent/action in its message.
    """
    issues = list(model._extra_issues)

    def dangling(msg):
        issues.append(ValidationIssue(DANGLING_REFERENCE, msg))

    states = set(model.states)
    for q in model._initial_raw:
        if q not in states:
            dangling("initial state %r is not a declared state" % (q,))
    for ag in model.agents:
        if ag not in model.actions:
            dangling("agent %r has no action alphabet" % (ag,))
        if ag not in model.protocol:
            dangling("agent %r has no protocol" % (ag,))
        if ag not in model.observation:
            dangling("agent %r has no observation map" % (ag,))
    for ag in model.actions:
        if ag not in model._agent_pos:
            dangling("actions declared for unknown agent %r" % (ag,))
    for ag, per_state in model.protocol.items():
        if ag not in model._agent_pos:
            dangling("protocol declared for unknown agent %r" % (ag,))
            continue
        alphabet = set(model.actions.get(ag, ()))
        for q, acts in per_state.items():
            if q not in states:
                dangling("protocol of %r mentions unknown state %r" % (ag, q))
            for a in acts:
                if a not in alphabet:
                    dangling("protocol of %r in %r uses undeclared action %r"
                             % (ag, q, a))
    for ag, per_state in model.observation.items():
        if ag not in model._agent_pos:
            dangling("observation declared for unknown agent %r" % (ag,))
            continue
        for q in per_state:
            if q not in states:
                dangling("observation of %r mentions unknown state %r" % (ag, q))

    # Non-empty protocols.
    for ag in model.agents:
        per_state = model.protocol.get(ag, {})
        for q in model.states:
            if not per_state.get(q, ()):
                issues.append(ValidationIssue(
                    EMPTY_PROTOCOL,
                    "agent %r has no enabled action in state %r" % (ag, q)))

    # Transitions: defined exactly for the enabled joint actions.
    seen = set()
    for q in model.states:
        proto = [model.protocol.get(ag, {}).get(q, ()) for ag in model.agents]
        if any(not acts for acts in proto):
            continue  # already reported as EmptyProtocol
        for joint in itertools.product(*proto):
            key = (q, joint)
            seen.add(key)
            if key not in model.transition:
                issues.append(ValidationIssue(
                    MISSING_TRANSITION,
                    "no transition from %r under joint action %r" % (q, joint)))
    for (q, joint), target in model.transition.items():
        if q not in states:
            dangling("transition from unknown state %r" % (q,))
        elif (q, joint) not in seen:
            dangling("transition from %r under disabled joint action %r"
                     % (q, joint))
        if target not in states:
            dangling("transition from %r leads to unknown state %r" % (q, target))

    # Observation-protocol consistency: same token, same enabled actions.
    for ag in model.agents:
        obs = model.observation.get(ag, {})
        proto = model.protocol.get(ag, {})
        rep = {}
        for q in model.states:
            tok = obs.get(q)
            if tok is None:
                dangling("agent %r has no observation token for state %r" % (ag, q))
                continue
            prev = rep.get(tok)
            if prev is None:
                rep[tok] = q
            elif proto.get(q, ()) != proto.get(prev, ()):
                issues.append(ValidationIssue(
                    OBSERVATION_PROTOCOL_MISMATCH,
                    "agent %r cannot distinguish %r from %r but has protocols "
                    "%r vs %r" % (ag, prev, q, proto.get(prev, ()), proto.get(q, ()))))
    return issues


def enabled_group(model: Icgs, coalition, state) -> frozenset:
    """The coalition actions enabled in ``state``: the product of protocols."""
    gamma = model.coalition(coalition)
    model.state_position(state)
    picks = [model.protocol[ag][state] for ag in gamma]
    return frozenset(GroupAction(gamma, combo)
                     for combo in itertools.product(*picks))


def all_moves(model: Icgs, coalition) -> MoveSet:
    """Every enabled coalition move of the model, over every state."""
    gamma = model.coalition(coalition)
    idx = model.index(gamma)
    return MoveSet(model, gamma, idx.all_moves_mask)


def moves_of(model: Icgs, coalition, qs: StateSet) -> MoveSet:
    """The enabled coalition moves whose state lies in ``qs``."""
    gamma = model.coalition(coalition)
    idx = model.index(gamma)
    return MoveSet(model, gamma, idx.moves_of(qs.mask))


def post_states(model: Icgs, qs: StateSet) -> StateSet:
    """All one-step successors of states of ``qs`` (any joint action)."""
    idx = model.index(())
    return StateSet(model, idx.post(qs.mask))


def gamma_closure(model: Icgs, coalition, qs: StateSet) -> StateSet:
    """States some coalition agent cannot distinguish from a state of ``qs``.

    Empty for the empty coalition; otherwise contains ``qs`` (reflexivity).
    Not idempotent in general: distinct agents contribute distinct
    equivalences, so closing twice can grow the set further.
    """
    gamma = model.coalition(coalition)
    idx = model.index(gamma)
    return StateSet(model, idx.closure(qs.mask))


def step(model: Icgs, state, joint) -> str:
    """The successor of ``state`` under a full joint action.

    ``joint`` may be a mapping from agent to action or a tuple in agent
    order.  Raises :class:`DisabledJointAction` unless every component is
    enabled.
    """
    model.state_position(state)
    if isinstance(joint, Mapping):
        missing = [ag for ag in model.agents if ag not in joint]
        if missing:
            raise DisabledJointAction("joint action misses agents %r" % (missing,))
        joint = tuple(joint[ag] for ag in model.agents)
    else:
        joint = tuple(joint)
        if len(joint) != len(model.agents):
            raise DisabledJointAction(
                "joint action has %d entries for %d agents"
                % (len(joint), len(model.agents)))
    for ag, a in zip(model.agents, joint):
        if a not in model.protocol[ag].get(state, ()):
            raise DisabledJointAction(
                "action %r of agent %r is not enabled in state %r" % (a, ag, state))
    try:
        return model.transition[(state, joint)]
    except KeyError:
        raise DisabledJointAction(
            "no transition from %r under %r" % (state, joint)) from None


def with_perfect_information(model: Icgs) -> Icgs:
    """A copy of the model where every agent observes the exact state."""
    observation = {ag: {q: q for q in model.states} for ag in model.agents}
    return Icgs(model.agents, model.states, model.initial, model.actions,
                model.protocol, model.transition, observation, model.labels)
