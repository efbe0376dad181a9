"""Model documents (JSON), loading/saving, and the benchmark generators.

Document layout (all eight keys required)::

    {
      "agents":      ["a", "b"],
      "actions":     {"a": ["go", "wait"], ...},
      "states":      ["s0", "s1", ...],
      "initial":     ["s0"],
      "labels":      {"s1": ["goal"], ...},          # omitted states: no labels
      "obs":         {"a": {"s0": "tok", ...}, ...},
      "protocol":    {"a": {"s0": ["go"], ...}, ...},
      "transitions": [["s0", {"a": "go", "b": "wait"}, "s1"], ...]
    }

Serialisation is canonical: keys and lists are sorted, so documents diff
cleanly and ``save . load`` is the identity on documents.  Loading validates
the structure and raises with every violated well-formedness condition.
"""

from __future__ import annotations

import itertools
import json

from .errors import CapExceeded, DocumentError
from .icgs import NONDETERMINISTIC_TRANSITION, Icgs, ValidationIssue

FILE_EXTENSION = ".icgs.json"
CASTLES_WORKER_CAP = 7

_REQUIRED_KEYS = ("agents", "actions", "states", "initial", "labels", "obs",
                  "protocol", "transitions")


def loads(text: str) -> Icgs:
    """Parse a model document and return the validated structure."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError("not valid JSON: %s" % exc.msg,
                            "line %d column %d" % (exc.lineno, exc.colno)) from None
    return from_document(doc)


def load(path) -> Icgs:
    with open(path, "r", encoding="utf-8") as handle:
        text = handle.read()
    return loads(text)


def from_document(doc) -> Icgs:
    """Build and validate a model from an already-decoded document."""
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    for key in _REQUIRED_KEYS:
        if key not in doc:
            raise DocumentError("missing top-level key %r" % key)

    agents = _string_list(doc["agents"], "agents")
    states = _string_list(doc["states"], "states")
    if len(set(states)) != len(states):
        raise DocumentError("duplicate state identifier in 'states'")
    if len(set(agents)) != len(agents):
        raise DocumentError("duplicate agent identifier in 'agents'")
    initial = _string_list(doc["initial"], "initial")
    actions = {ag: _string_list(acts, "actions[%r]" % ag)
               for ag, acts in _object(doc["actions"], "actions").items()}
    labels = {q: _string_list(props, "labels[%r]" % q)
              for q, props in _object(doc["labels"], "labels").items()}
    for q in labels:
        if q not in set(states):
            raise DocumentError("labels mention unknown state %r" % q)
    obs = {}
    for ag, per_state in _object(doc["obs"], "obs").items():
        obs[ag] = {q: _string(tok, "obs[%r][%r]" % (ag, q))
                   for q, tok in _object(per_state, "obs[%r]" % ag).items()}
    protocol = {}
    for ag, per_state in _object(doc["protocol"], "protocol").items():
        protocol[ag] = {q: _string_list(acts, "protocol[%r][%r]" % (ag, q))
                        for q, acts in _object(per_state, "protocol[%r]" % ag).items()}

    if not isinstance(doc["transitions"], list):
        raise DocumentError("'transitions' must be a list of triples")
    transition = {}
    issues = []
    for k, entry in enumerate(doc["transitions"]):
        where = "transitions[%d]" % k
        if not (isinstance(entry, list) and len(entry) == 3):
            raise DocumentError("expected a [from, {agent: action}, to] triple", where)
        source, joint_map, target = entry
        source = _string(source, where + ".from")
        target = _string(target, where + ".to")
        joint_map = _object(joint_map, where + ".action")
        extra = set(joint_map) - set(agents)
        missing = set(agents) - set(joint_map)
        if extra:
            raise DocumentError("action for unknown agent %r" % sorted(extra)[0], where)
        if missing:
            raise DocumentError("no action for agent %r" % sorted(missing)[0], where)
        joint = tuple(_string(joint_map[ag], where) for ag in agents)
        prev = transition.get((source, joint))
        if prev is not None and prev != target:
            issues.append(ValidationIssue(
                NONDETERMINISTIC_TRANSITION,
                "two transitions from %r under %r lead to %r and %r"
                % (source, joint, prev, target)))
        transition[(source, joint)] = target

    model = Icgs(agents, states, initial, actions, protocol, transition, obs,
                 labels, extra_issues=issues)
    return model.require_valid()


def to_document(model: Icgs) -> dict:
    """The canonical document of a model (sorted keys and lists)."""
    transitions = sorted(
        ([q, dict(zip(model.agents, joint)), target]
         for (q, joint), target in model.transition.items()),
        key=lambda entry: (entry[0], tuple(sorted(entry[1].items())), entry[2]))
    return {
        "agents": sorted(model.agents),
        "actions": {ag: sorted(acts) for ag, acts in model.actions.items()},
        "states": sorted(model.states),
        "initial": sorted(model.initial),
        "labels": {q: sorted(props)
                   for q, props in sorted(model.labels.items()) if props},
        "obs": {ag: dict(sorted(per.items()))
                for ag, per in model.observation.items()},
        "protocol": {ag: {q: sorted(acts) for q, acts in sorted(per.items())}
                     for ag, per in model.protocol.items()},
        "transitions": transitions,
    }


def dumps(model: Icgs) -> str:
    return json.dumps(to_document(model), indent=2, sort_keys=True) + "\n"


def save(model: Icgs, path):
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(dumps(model))


def _string(value, where):
    if not isinstance(value, str):
        raise DocumentError("expected a string, found %r" % (value,), where)
    return value


def _string_list(value, where):
    if not isinstance(value, list):
        raise DocumentError("expected a list of strings", where)
    return [_string(v, where) for v in value]


def _object(value, where):
    if not isinstance(value, dict):
        raise DocumentError("expected an object", where)
    return value


# ---------------------------------------------------------------------------
# Card game
# ---------------------------------------------------------------------------

CARDS = ("A", "K", "Q")
_BEATS = {("A", "K"), ("K", "Q"), ("Q", "A")}


def gen_cardgame() -> Icgs:
    """The three-card guessing game between a player and a dealer.

    The dealer hands one of A/K/Q to the player, keeps one, and leaves the
    third face down on the table; the player then keeps or swaps with the
    table card and wins when his card beats the dealer's (A beats K, K beats
    Q, Q beats A).  The player observes only his own card while playing, and
    the revealed outcome afterwards; deal states with the same player card
    are therefore indistinguishable.  Outcome states loop on themselves so
    that every path is infinite.
    """
    agents = ["dealer", "player"]
    deals = [(p, d) for p in CARDS for d in CARDS if p != d]
    deal_id = {pair: "deal_%s%s" % pair for pair in deals}
    show_id = {pair: "show_%s%s" % pair for pair in deals}
    start = "start"

    states = sorted([start] + list(deal_id.values()) + list(show_id.values()))
    labels = {show_id[pair]: ["win"] for pair in deals if pair in _BEATS}

    deal_actions = sorted("deal_%s%s" % pair for pair in deals)
    actions = {"dealer": deal_actions + ["noop"],
               "player": ["keep", "noop", "swap", "wait"]}

    protocol = {"dealer": {start: deal_actions},
                "player": {start: ["wait"]}}
    for pair in deals:
        protocol["dealer"][deal_id[pair]] = ["noop"]
        protocol["player"][deal_id[pair]] = ["keep", "swap"]
        protocol["dealer"][show_id[pair]] = ["noop"]
        protocol["player"][show_id[pair]] = ["noop"]

    transition = {}
    for pair in deals:
        transition[(start, ("deal_%s%s" % pair, "wait"))] = deal_id[pair]
        player, dealer = pair
        table = next(c for c in CARDS if c not in pair)
        transition[(deal_id[pair], ("noop", "keep"))] = show_id[pair]
        transition[(deal_id[pair], ("noop", "swap"))] = show_id[(table, dealer)]
        transition[(show_id[pair], ("noop", "noop"))] = show_id[pair]

    observation = {
        "dealer": {q: q for q in states},
        "player": {start: "start"},
    }
    for pair in deals:
        player, _ = pair
        observation["player"][deal_id[pair]] = "holding_%s" % player
        outcome = "win" if pair in _BEATS else "lose"
        observation["player"][show_id[pair]] = "show_%s_%s" % (player, outcome)

    return Icgs(agents, states, [start], actions, protocol, transition,
                observation, labels)


# ---------------------------------------------------------------------------
# Castles
# ---------------------------------------------------------------------------

def castle_workers(n1: int, n2: int, n3: int):
    """Worker names per castle, in model agent order."""
    return [["c%dw%d" % (castle, j + 1) for j in range(count)]
            for castle, count in ((1, n1), (2, n2), (3, n3))]


def gen_castles(n1: int, n2: int, n3: int, cap: int = CASTLES_WORKER_CAP) -> Icgs:
    """Three castles with hit points 3..0, each defended by a team of workers.

    Every turn each worker simultaneously attacks another castle, defends
    its own (never twice in a row), or does nothing; workers whose castle
    has fallen can only do nothing.  A castle loses as many hit points as it
    has attackers in excess of defenders, floored at zero.  Workers observe
    only their own readiness to defend, which castles have fallen, and
    whether the game just started; hit points stay hidden.  States are the
    reachable (hit points, per-worker readiness, start flag) combinations.
    """
    if min(n1, n2, n3) < 1:
        raise ValueError("each castle needs at least one worker")
    if n1 + n2 + n3 > cap:
        raise CapExceeded(
            "%d workers exceed the configured cap of %d" % (n1 + n2 + n3, cap))

    teams = castle_workers(n1, n2, n3)
    agents = [w for team in teams for w in team]
    own = {w: castle for castle, team in enumerate(teams) for w in team}
    attack_of = {w: tuple("attack%d" % (c + 1) for c in range(3) if c != own[w])
                 for w in agents}
    all_actions = ("attack1", "attack2", "attack3", "defend", "noop")
    actions = {w: [a for a in all_actions if a == "noop" or a == "defend"
                   or a in attack_of[w]] for w in agents}

    def menu(worker, hp, ready):
        if hp[own[worker]] == 0:
            return ("noop",)
        acts = attack_of[worker] + (("defend",) if ready else ()) + ("noop",)
        return tuple(sorted(acts))

    def state_id(hp, ready, init):
        return "hp%d%d%d_cd%s%s" % (hp[0], hp[1], hp[2],
                                    "".join("1" if r else "0" for r in ready),
                                    "_init" if init else "")

    initial = ((3, 3, 3), (True,) * len(agents), True)
    ids = {initial: state_id(*initial)}
    protocol = {w: {} for w in agents}
    observation = {w: {} for w in agents}
    transition = {}
    frontier = [initial]
    explored = set()
    while frontier:
        state = frontier.pop()
        if state in explored:
            continue
        explored.add(state)
        hp, ready, init = state
        sid = ids[state]
        menus = []
        for i, w in enumerate(agents):
            m = menu(w, hp, ready[i])
            protocol[w][sid] = list(m)
            observation[w][sid] = "cd%d_df%d%d%d%s" % (
                int(ready[i]), int(hp[0] == 0), int(hp[1] == 0),
                int(hp[2] == 0), "_init" if init else "")
            menus.append(m)
        for joint in itertools.product(*menus):
            attackers = [0, 0, 0]
            defenders = [0, 0, 0]
            for i, act in enumerate(joint):
                if act == "defend":
                    defenders[own[agents[i]]] += 1
                elif act != "noop":
                    attackers[int(act[-1]) - 1] += 1
            new_hp = tuple(max(0, hp[c] - max(0, attackers[c] - defenders[c]))
                           for c in range(3))
            new_ready = tuple(act != "defend" for act in joint)
            succ = (new_hp, new_ready, False)
            tid = ids.get(succ)
            if tid is None:
                tid = ids[succ] = state_id(*succ)
                frontier.append(succ)
            transition[(sid, joint)] = tid

    states = sorted(ids.values())
    labels = {}
    for (hp, _, _), sid in ids.items():
        props = []
        if hp[2] == 0:
            props.append("castle3_defeated")
        if hp == (0, 0, 0):
            props.append("all_defeated")
        if props:
            labels[sid] = props

    return Icgs(agents, states, [ids[initial]], actions, protocol, transition,
                observation, labels)


def model_depth(model: Icgs) -> int:
    """Steps needed to reach every reachable state from the initial ones."""
    idx = model.index(())
    seen = 0
    for q in model.initial:
        seen |= 1 << model._state_pos[q]
    depth = 0
    frontier = seen
    while True:
        new = idx.post(frontier) & ~seen
        if new == 0:
            return depth
        seen |= new
        frontier = new
        depth += 1
