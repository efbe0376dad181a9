"""Internal per-coalition index: integer move tables and bit-mask operators.

Everything here works on plain ints: a state set is a bit mask over state
positions, a move set a bit mask over move ids.  Move ids are assigned in
canonical order (state-major, then lexicographic on the coalition action
tuple), so ascending bit order *is* canonical iteration order.
"""

from __future__ import annotations

import itertools

from .icgs import bits


class CoalitionIndex:
    """Move tables and mask operators for one model and one coalition."""

    def __init__(self, model, gamma):
        self.model = model
        self.gamma = gamma
        n = len(model.states)
        self.n_states = n
        self.full_states = (1 << n) - 1

        # Enumerate coalition moves in canonical order.
        move_state = []
        move_action = []
        moves_at = []
        lookup = {}
        for i, q in enumerate(model.states):
            ids = []
            picks = [model.protocol[ag].get(q, ()) for ag in gamma]
            for combo in sorted(itertools.product(*picks)):
                mid = len(move_state)
                lookup[(i, combo)] = mid
                move_state.append(i)
                move_action.append(combo)
                ids.append(mid)
            moves_at.append(ids)
        self.move_state = move_state
        self.move_action = move_action
        self.moves_at = moves_at
        self._lookup = lookup
        self.all_moves_mask = (1 << len(move_state)) - 1
        self.state_moves = [0] * n
        for m, si in enumerate(move_state):
            self.state_moves[si] |= 1 << m

        # Successors of each move over all completions by the other agents,
        # and the plain post relation (successors of each state).
        others = [ag for ag in model.agents if ag not in gamma]
        gamma_pos = [model._agent_pos[ag] for ag in gamma]
        succ = [0] * len(move_state)
        post = [0] * n
        for i, q in enumerate(model.states):
            proto = [model.protocol[ag].get(q, ()) for ag in model.agents]
            if any(not acts for acts in proto):
                continue
            for joint in itertools.product(*proto):
                target = model.transition.get((q, joint))
                if target is None:
                    continue
                bit = 1 << model._state_pos[target]
                post[i] |= bit
                combo = tuple(joint[p] for p in gamma_pos)
                succ[lookup[(i, combo)]] |= bit
        self.succ_mask = succ
        self.post_mask = post

        # Observation machinery per coalition agent.
        self.tok = []           # per agent: token per state position
        self.class_states = []  # per agent: token -> state mask
        self.move_tok = []      # per agent: token per move id
        self.class_moves = []   # per agent: token -> move mask
        self.class_action_moves = []  # per agent: (token, action) -> move mask
        for a, ag in enumerate(gamma):
            obs = model.observation.get(ag, {})
            tok = [obs.get(q) for q in model.states]
            cstates = {}
            for i in range(n):
                cstates[tok[i]] = cstates.get(tok[i], 0) | (1 << i)
            mtok = [tok[si] for si in move_state]
            cmoves = {}
            camoves = {}
            for m, si in enumerate(move_state):
                t = tok[si]
                cmoves[t] = cmoves.get(t, 0) | (1 << m)
                key = (t, move_action[m][a])
                camoves[key] = camoves.get(key, 0) | (1 << m)
            self.tok.append(tok)
            self.class_states.append(cstates)
            self.move_tok.append(mtok)
            self.class_moves.append(cmoves)
            self.class_action_moves.append(camoves)

        # Per-state closure mask: union over coalition agents of the state's
        # observation class.  Empty coalition: empty closure.
        closure = [0] * n
        for a in range(len(gamma)):
            cstates = self.class_states[a]
            tok = self.tok[a]
            for i in range(n):
                closure[i] |= cstates[tok[i]]
        self.closure_of = closure

        self._filter_memo = {}

    # -- state-level operators ----------------------------------------------

    def move_id(self, state, picks):
        i = self.model.state_position(state)
        try:
            return self._lookup[(i, tuple(picks))]
        except KeyError:
            from .errors import DisabledJointAction
            raise DisabledJointAction(
                "coalition action %r is not enabled in state %r"
                % (tuple(picks), state)) from None

    def moves_of(self, qmask):
        out = 0
        for i in bits(qmask):
            out |= self.state_moves[i]
        return out

    def cover(self, movemask):
        out = 0
        for m in bits(movemask):
            out |= 1 << self.move_state[m]
        return out

    def post(self, qmask):
        out = 0
        for i in bits(qmask):
            out |= self.post_mask[i]
        return out

    def closure(self, qmask):
        out = 0
        for i in bits(qmask):
            out |= self.closure_of[i]
        return out

    def closed_within(self, qmask, inside):
        """States of ``qmask`` whose whole closure lies inside ``inside``."""
        out = 0
        outside = ~inside
        for i in bits(qmask):
            if self.closure_of[i] & outside == 0:
                out |= 1 << i
        return out

    def pre_move(self, target_states):
        """Moves all of whose completions land in ``target_states``."""
        out = 0
        outside = ~target_states
        succ = self.succ_mask
        for m in range(len(succ)):
            if succ[m] & outside == 0:
                out |= 1 << m
        return out

    def pre_ce(self, target_states, among=None):
        """States with some enabled coalition action surely entering the target.

        ``among`` restricts which states are examined (callers that only need
        part of the answer skip the rest).
        """
        out = 0
        outside = ~target_states
        succ = self.succ_mask
        candidates = range(self.n_states) if among is None else bits(among)
        for i in candidates:
            for m in bits(self.state_moves[i]):
                if succ[m] & outside == 0:
                    out |= 1 << i
                    break
        return out

    def filter_ceu(self, q1mask, q2mask, stats=None, floor=0):
        """Least fixpoint of ``Z -> q2 | (q1 & pre_ce(Z))`` (memoised).

        ``floor`` must be a known subset of the result (e.g. the fixpoint of
        a smaller target); iteration then starts there instead of at ``q2``.
        """
        key = (q1mask, q2mask)
        hit = self._filter_memo.get(key)
        if hit is not None:
            return hit
        z = q2mask | floor
        iterations = 0
        while True:
            iterations += 1
            gain = self.pre_ce(z, among=q1mask & ~z)
            nz = z | (q1mask & gain)
            if nz == z:
                break
            z = nz
        if stats is not None:
            stats.fixpoint_iterations += iterations
        self._filter_memo[key] = z
        return z

    # -- conflicts and compatibility ----------------------------------------

    def conflicting_pair(self, m1, m2):
        for a in range(len(self.gamma)):
            if (self.move_tok[a][m1] == self.move_tok[a][m2]
                    and self.move_action[m1][a] != self.move_action[m2][a]):
                return True
        return False

    def is_conflicting(self, movemask):
        for a in range(len(self.gamma)):
            seen = {}
            for m in bits(movemask):
                t = self.move_tok[a][m]
                act = self.move_action[m][a]
                prev = seen.get(t)
                if prev is None:
                    seen[t] = act
                elif prev != act:
                    return True
        return False

    def compatible(self, candidates, base):
        """Candidates that conflict with no move of ``base``."""
        if base == 0 or candidates == 0:
            return candidates
        k = len(self.gamma)
        assigned = [dict() for _ in range(k)]
        for m in bits(base):
            for a in range(k):
                t = self.move_tok[a][m]
                acts = assigned[a].setdefault(t, set())
                acts.add(self.move_action[m][a])
        out = 0
        for m in bits(candidates):
            for a in range(k):
                acts = assigned[a].get(self.move_tok[a][m])
                if acts and (len(acts) > 1 or self.move_action[m][a] not in acts):
                    break
            else:
                out |= 1 << m
        return out

    # -- splitting ----------------------------------------------------------

    def split_agent(self, a, movemask, maximal):
        """Stream the subsets of non-conflicting classes of one agent.

        The classes of ``movemask`` for agent ``a`` are peeled in canonical
        order (by least move id); each contributes one option per action it
        assigns to ``a`` (sorted), plus a drop option when not maximal.
        """
        if movemask == 0:
            yield 0
            return
        options = []
        rem = movemask
        while rem:
            mid = (rem & -rem).bit_length() - 1
            t = self.move_tok[a][mid]
            cls = self.class_moves[a][t] & movemask
            rem &= ~cls
            acts = sorted({self.move_action[m][a] for m in bits(cls)})
            opts = [self.class_action_moves[a][(t, act)] & movemask for act in acts]
            if not maximal:
                opts.append(0)
            options.append(opts)
        for combo in itertools.product(*options):
            out = 0
            for sub in combo:
                out |= sub
            yield out

    def split_all(self, movemask, maximal):
        """Stream the per-agent split fold over the whole coalition.

        Outputs are deduplicated structurally.  For ``maximal`` runs, outputs
        that are not genuinely maximal (a dropped input move could be added
        back without a conflict, which per-agent folds cannot rule out on
        ragged inputs) are filtered away; full-product inputs skip the check.
        """
        k = len(self.gamma)
        if k == 0:
            yield movemask
            return
        seen = set()
        check_max = maximal and not self._is_uniform_product(movemask)

        def rec(mask, ai):
            if ai == k:
                if mask in seen:
                    return
                seen.add(mask)
                if check_max and not self._is_maximal(mask, movemask):
                    return
                yield mask
                return
            for sub in self.split_agent(ai, mask, maximal):
                yield from rec(sub, ai + 1)

        yield from rec(movemask, 0)

    def _is_uniform_product(self, movemask):
        """True iff the set is a full action product over its states, with
        class-uniform per-agent action sets; every maximal split of such a
        set keeps one move per covered state and is maximal by construction."""
        k = len(self.gamma)
        class_acts = [dict() for _ in range(k)]
        per_state = {}
        for m in bits(movemask):
            si = self.move_state[m]
            per_state[si] = per_state.get(si, 0) + 1
            for a in range(k):
                acts = class_acts[a].setdefault(self.move_tok[a][m], set())
                acts.add(self.move_action[m][a])
        for si, count in per_state.items():
            expected = 1
            for a in range(k):
                expected *= len(class_acts[a][self.tok[a][si]])
            if count != expected:
                return False
        return True

    def _is_maximal(self, mask, movemask):
        k = len(self.gamma)
        assigned = [dict() for _ in range(k)]
        for m in bits(mask):
            for a in range(k):
                assigned[a][self.move_tok[a][m]] = self.move_action[m][a]
        for x in bits(movemask & ~mask):
            for a in range(k):
                act = assigned[a].get(self.move_tok[a][x])
                if act is not None and act != self.move_action[x][a]:
                    break
            else:
                return False  # x could be added without any conflict
        return True
