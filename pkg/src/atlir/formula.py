"""Formula AST, concrete-syntax parser, and derived-operator rewriting.

Concrete syntax::

    phi  := phi '<->' phi            (lowest precedence, left associative)
          | phi '->' phi             (right associative)
          | phi '|' phi
          | phi '&' phi              (highest binary precedence)
          | '!' phi
          | '<<' agents '>>' path    (coalition "can enforce")
          | '[[' agents ']]' path    (coalition "cannot avoid")
          | 'true' | identifier | '(' phi ')'
    path := 'X' phi | 'F' phi | 'G' phi | '(' phi 'U' phi ')' | '(' phi 'W' phi ')'

Identifiers are ``[A-Za-z_][A-Za-z0-9_]*``; ``true`` is reserved, and the
letters X/F/G/U/W act as operators where a path formula is expected.
Unary operators bind tightest.  Coalitions must be non-empty groups of
declared agents; atoms must be declared propositions of the model.

:func:`normalize` reduces every formula to the core the checker evaluates
(true, atoms, negation, disjunction, coalition-next, coalition-until) and
rejects the operators outside the supported fragment: greatest-fixpoint
objectives cannot be built backwards from target states.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import (
    FormulaSyntaxError,
    UnknownProposition,
    UnsupportedOperator,
)


@dataclass(frozen=True)
class Formula:
    """Base class of all AST nodes."""


@dataclass(frozen=True)
class TrueConst(Formula):
    pass


TRUE = TrueConst()


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    sub: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class CanNext(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class CanUntil(Formula):
    coalition: tuple
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class CanEventually(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class CanGlobally(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class CanWeakUntil(Formula):
    coalition: tuple
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class MustNext(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class MustEventually(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class MustGlobally(Formula):
    coalition: tuple
    sub: Formula


@dataclass(frozen=True)
class MustUntil(Formula):
    coalition: tuple
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class MustWeakUntil(Formula):
    coalition: tuple
    lhs: Formula
    rhs: Formula


CORE_NODES = (TrueConst, Atom, Not, Or, CanNext, CanUntil)


# ---------------------------------------------------------------------------
# Normalisation
# ---------------------------------------------------------------------------

def _neg(f: Formula) -> Formula:
    return f.sub if isinstance(f, Not) else Not(f)


def normalize(f: Formula) -> Formula:
    """Rewrite to the core fragment; reject unsupported operators.

    ``F`` becomes ``true U``, the ``[[..]]`` duals are pushed through
    negation, and the binary Boolean connectives are expanded into
    negation/disjunction.  ``<<..>> G``, ``<<..>> W``, ``[[..]] U`` and
    ``[[..]] F`` have no least-fixpoint formulation and raise
    :class:`UnsupportedOperator`.
    """
    if isinstance(f, (TrueConst, Atom)):
        return f
    if isinstance(f, Not):
        return Not(normalize(f.sub))
    if isinstance(f, Or):
        return Or(normalize(f.left), normalize(f.right))
    if isinstance(f, And):
        return Not(Or(_neg(normalize(f.left)), _neg(normalize(f.right))))
    if isinstance(f, Implies):
        return Or(_neg(normalize(f.left)), normalize(f.right))
    if isinstance(f, Iff):
        left, right = normalize(f.left), normalize(f.right)
        both = Not(Or(_neg(left), _neg(right)))
        neither = Not(Or(left, right))
        return Or(both, neither)
    if isinstance(f, CanNext):
        return CanNext(f.coalition, normalize(f.sub))
    if isinstance(f, CanUntil):
        return CanUntil(f.coalition, normalize(f.lhs), normalize(f.rhs))
    if isinstance(f, CanEventually):
        return CanUntil(f.coalition, TRUE, normalize(f.sub))
    if isinstance(f, MustNext):
        return Not(CanNext(f.coalition, _neg(normalize(f.sub))))
    if isinstance(f, MustGlobally):
        return Not(CanUntil(f.coalition, TRUE, _neg(normalize(f.sub))))
    if isinstance(f, MustWeakUntil):
        # not (a W b)  ==  (not b) U (not a and not b)
        lhs, rhs = normalize(f.lhs), normalize(f.rhs)
        return Not(CanUntil(f.coalition, _neg(rhs), Not(Or(lhs, rhs))))
    if isinstance(f, CanGlobally):
        raise UnsupportedOperator("<<..>> G is outside the supported fragment")
    if isinstance(f, CanWeakUntil):
        raise UnsupportedOperator("<<..>> W is outside the supported fragment")
    if isinstance(f, MustUntil):
        raise UnsupportedOperator("[[..]] U is outside the supported fragment")
    if isinstance(f, MustEventually):
        raise UnsupportedOperator("[[..]] F is outside the supported fragment")
    raise UnsupportedOperator("cannot normalize %r" % (f,))


def is_normalized(f: Formula) -> bool:
    if isinstance(f, (TrueConst, Atom)):
        return True
    if isinstance(f, Not):
        return is_normalized(f.sub)
    if isinstance(f, Or):
        return is_normalized(f.left) and is_normalized(f.right)
    if isinstance(f, CanNext):
        return is_normalized(f.sub)
    if isinstance(f, CanUntil):
        return is_normalized(f.lhs) and is_normalized(f.rhs)
    return False


def atoms(f: Formula) -> frozenset:
    """All proposition names occurring in the formula."""
    out = set()

    def walk(g):
        if isinstance(g, Atom):
            out.add(g.name)
        for child in _children(g):
            walk(child)

    walk(f)
    return frozenset(out)


def coalitions(f: Formula) -> frozenset:
    """All coalition tuples occurring in the formula."""
    out = set()

    def walk(g):
        if hasattr(g, "coalition"):
            out.add(g.coalition)
        for child in _children(g):
            walk(child)

    walk(f)
    return frozenset(out)


def _children(f: Formula):
    for name in ("sub", "left", "right", "lhs", "rhs"):
        child = getattr(f, name, None)
        if child is not None:
            yield child


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_PREC_IFF, _PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY, _PREC_ATOM = range(6)


def to_text(f: Formula) -> str:
    """Emit the concrete syntax; ``parse(to_text(f)) == f`` on normalized ASTs."""
    return _print(f, 0)


def _print(f, parent_prec):
    text, prec = _print_prec(f)
    if prec < parent_prec:
        return "(" + text + ")"
    return text


def _coal(coalition):
    return ",".join(coalition)


def _print_prec(f):
    if isinstance(f, TrueConst):
        return "true", _PREC_ATOM
    if isinstance(f, Atom):
        return f.name, _PREC_ATOM
    if isinstance(f, Not):
        return "!" + _print(f.sub, _PREC_UNARY), _PREC_UNARY
    if isinstance(f, And):
        # left associative: wrap a right child of equal precedence
        return ("%s & %s" % (_print(f.left, _PREC_AND),
                             _print(f.right, _PREC_AND + 1)), _PREC_AND)
    if isinstance(f, Or):
        return ("%s | %s" % (_print(f.left, _PREC_OR),
                             _print(f.right, _PREC_OR + 1)), _PREC_OR)
    if isinstance(f, Implies):
        # right associative: wrap a left child of equal precedence
        return ("%s -> %s" % (_print(f.left, _PREC_IMPLIES + 1),
                              _print(f.right, _PREC_IMPLIES)), _PREC_IMPLIES)
    if isinstance(f, Iff):
        return ("%s <-> %s" % (_print(f.left, _PREC_IFF),
                               _print(f.right, _PREC_IFF + 1)), _PREC_IFF)
    unary_ops = {CanNext: ("<<%s>>", "X"), CanEventually: ("<<%s>>", "F"),
                 CanGlobally: ("<<%s>>", "G"), MustNext: ("[[%s]]", "X"),
                 MustEventually: ("[[%s]]", "F"), MustGlobally: ("[[%s]]", "G")}
    binary_ops = {CanUntil: ("<<%s>>", "U"), CanWeakUntil: ("<<%s>>", "W"),
                  MustUntil: ("[[%s]]", "U"), MustWeakUntil: ("[[%s]]", "W")}
    if type(f) in unary_ops:
        braces, op = unary_ops[type(f)]
        head = braces % _coal(f.coalition)
        return ("%s %s %s" % (head, op, _print(f.sub, _PREC_UNARY)), _PREC_UNARY)
    if type(f) in binary_ops:
        braces, op = binary_ops[type(f)]
        head = braces % _coal(f.coalition)
        return ("%s (%s %s %s)" % (head, _print(f.lhs, 0), op, _print(f.rhs, 0)),
                _PREC_UNARY)
    raise ValueError("cannot print %r" % (f,))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>\s+)
  | (?P<iff><->)
  | (?P<implies>->)
  | (?P<ldouble><<)
  | (?P<rdouble>>>)
  | (?P<lbrack>\[\[)
  | (?P<rbrack>\]\])
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<comma>,)
  | (?P<not>!)
  | (?P<and>&)
  | (?P<or>\|)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise FormulaSyntaxError("unexpected character %r" % text[pos], pos)
        pos = m.end()
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), m.start()))
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text, model, macros):
        self.tokens = _tokenize(text)
        self.i = 0
        self.model = model
        self.macros = macros or {}

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, what):
        tok = self.next()
        if tok[0] != kind:
            raise FormulaSyntaxError("expected %s, found %r" % (what, tok[1]), tok[2])
        return tok

    def parse(self):
        f = self.parse_iff()
        tok = self.peek()
        if tok[0] != "eof":
            raise FormulaSyntaxError("unexpected trailing input %r" % tok[1], tok[2])
        return f

    def parse_iff(self):
        f = self.parse_implies()
        while self.peek()[0] == "iff":
            self.next()
            f = Iff(f, self.parse_implies())
        return f

    def parse_implies(self):
        f = self.parse_or()
        if self.peek()[0] == "implies":
            self.next()
            return Implies(f, self.parse_implies())
        return f

    def parse_or(self):
        f = self.parse_and()
        while self.peek()[0] == "or":
            self.next()
            f = Or(f, self.parse_and())
        return f

    def parse_and(self):
        f = self.parse_unary()
        while self.peek()[0] == "and":
            self.next()
            f = And(f, self.parse_unary())
        return f

    def parse_unary(self):
        kind, text, pos = self.peek()
        if kind == "not":
            self.next()
            return Not(self.parse_unary())
        if kind in ("ldouble", "lbrack"):
            return self.parse_strategic()
        if kind == "lparen":
            self.next()
            f = self.parse_iff()
            self.expect("rparen", "')'")
            return f
        if kind == "ident":
            self.next()
            if text == "true":
                return TRUE
            if text not in self.model.atoms:
                raise UnknownProposition(
                    "unknown proposition %r at position %d" % (text, pos))
            return Atom(text)
        raise FormulaSyntaxError("expected a formula, found %r" % (text or "end of input"), pos)

    def parse_strategic(self):
        kind, _, pos = self.next()
        can = kind == "ldouble"
        closing, closer = ("rdouble", "'>>'") if can else ("rbrack", "']]'")
        names = [self.expect("ident", "an agent name")]
        while self.peek()[0] == "comma":
            self.next()
            names.append(self.expect("ident", "an agent name"))
        self.expect(closing, closer)
        agents = []
        for _, name, npos in names:
            expansion = self.macros.get(name)
            if expansion is not None:
                agents.extend(expansion)
            else:
                agents.append(name)
        from .errors import UnknownAgent
        try:
            coalition = self.model.coalition(agents)
        except UnknownAgent as exc:
            raise UnknownAgent("%s (coalition at position %d)" % (exc, pos)) from None
        if not coalition:
            raise FormulaSyntaxError("empty coalition", pos)

        kind, text, pos = self.next()
        if kind == "ident" and text in ("X", "F", "G"):
            sub = self.parse_unary()
            table = {
                ("X", True): CanNext, ("F", True): CanEventually,
                ("G", True): CanGlobally,
                ("X", False): MustNext, ("F", False): MustEventually,
                ("G", False): MustGlobally,
            }
            return table[(text, can)](coalition, sub)
        if kind == "lparen":
            lhs = self.parse_iff()
            optok = self.next()
            if optok[0] != "ident" or optok[1] not in ("U", "W"):
                raise FormulaSyntaxError(
                    "expected 'U' or 'W', found %r" % optok[1], optok[2])
            rhs = self.parse_iff()
            self.expect("rparen", "')'")
            table = {
                ("U", True): CanUntil, ("W", True): CanWeakUntil,
                ("U", False): MustUntil, ("W", False): MustWeakUntil,
            }
            return table[(optok[1], can)](coalition, lhs, rhs)
        raise FormulaSyntaxError(
            "expected a temporal operator after the coalition, found %r" % text, pos)


def parse(text: str, model, coalition_macros=None) -> Formula:
    """Parse concrete syntax against a model.

    Coalition members are resolved against ``model.agents`` (and canonicalised
    to model order), atoms against the model's declared propositions.
    ``coalition_macros`` maps a name usable inside ``<<..>>`` to a list of
    agents it expands to.
    """
    return _Parser(text, model, coalition_macros).parse()
