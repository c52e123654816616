"""First-order terms and formulas with embedded evaluated values.

Terms may contain `Lit` leaves holding already-evaluated domain values
(the partial-evaluation convention: ground subterms get folded into
values as soon as all arguments are known). Formulas are plain
first-order syntax without a universal quantifier; `~exists x ~F`
expresses it when needed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass


class FolcpError(Exception):
    """Base class for errors raised by this package."""


class ParseError(FolcpError):
    """Source text does not conform to the formula or algebra grammar."""


class SubstitutionError(FolcpError):
    """A substitution precondition was violated (capture or occurrence)."""


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Value:
    """Base class for evaluated domain elements."""


@dataclass(frozen=True)
class IntValue(Value):
    n: int

    def __str__(self) -> str:
        return str(self.n)


@dataclass(frozen=True)
class ElemValue(Value):
    """Named element of a finite domain."""

    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class TermValue(Value):
    """Ground term of the term algebra, used as its own value.

    The payload is a pure App tree (constants are nullary Apps); it never
    contains Lit or Variable nodes.
    """

    term: "Term"

    def __str__(self) -> str:
        return print_term(self.term)


# ---------------------------------------------------------------------------
# Variables
# ---------------------------------------------------------------------------

_FRESH_NAME = re.compile(r"^_u(\d+)$")


@dataclass(frozen=True)
class Var:
    """A variable. Names matching `_u<k>` form the reserved fresh namespace."""

    name: str

    @property
    def is_fresh(self) -> bool:
        return _FRESH_NAME.match(self.name) is not None

    @property
    def fresh_index(self) -> int:
        m = _FRESH_NAME.match(self.name)
        if m is None:
            raise ValueError(f"{self.name} is not a fresh-namespace variable")
        return int(m.group(1))

    def __str__(self) -> str:
        return self.name


def fresh_var(index: int) -> Var:
    return Var(f"_u{index}")


def var_key(v: Var) -> tuple:
    """Canonical ordering: user variables alphabetically, then fresh by index."""
    if v.is_fresh:
        return (1, v.fresh_index, "")
    return (0, 0, v.name)


class FreshSupply:
    """Monotone counter handing out fresh-namespace variables.

    One supply is confined to a single evaluation; drawn variables never
    repeat within it.
    """

    def __init__(self, start: int = 0):
        self.index = start

    def draw(self) -> Var:
        v = fresh_var(self.index)
        self.index += 1
        return v

    def __repr__(self) -> str:
        return f"FreshSupply(at={self.index})"


# ---------------------------------------------------------------------------
# Terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class Variable(Term):
    var: Var


@dataclass(frozen=True)
class Lit(Term):
    value: Value


@dataclass(frozen=True)
class App(Term):
    fun: str
    args: tuple[Term, ...]


def const(name: str) -> Term:
    """Nullary function application (a constant term)."""
    return App(name, ())


# ---------------------------------------------------------------------------
# Formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Formula:
    pass


@dataclass(frozen=True)
class Atom(Formula):
    pred: str
    args: tuple[Term, ...]


@dataclass(frozen=True)
class Eq(Formula):
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Bot(Formula):
    """The always-false formula."""


@dataclass(frozen=True)
class Top(Formula):
    """The always-true formula (dual of Bot)."""


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Or(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: Var
    body: Formula


BOT = Bot()
TOP = Top()

# `in` is a builtin membership predicate: in(t, v1, ..., vn) holds iff the
# value of t equals the value of some vi. It is variadic and exists in every
# algebra, like equality.
IN_PRED = "in"


def conj(formulas) -> Formula:
    """Right-nested conjunction; empty input is Top."""
    formulas = list(formulas)
    if not formulas:
        return TOP
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = And(f, out)
    return out


def disj(formulas) -> Formula:
    """Right-nested disjunction; empty input is Bot."""
    formulas = list(formulas)
    if not formulas:
        return BOT
    out = formulas[-1]
    for f in reversed(formulas[:-1]):
        out = Or(f, out)
    return out


def conjuncts(phi: Formula) -> list[Formula]:
    """Flatten the top-level conjunction tree of a formula."""
    if isinstance(phi, And):
        return conjuncts(phi.lhs) + conjuncts(phi.rhs)
    return [phi]


# ---------------------------------------------------------------------------
# Traversals
# ---------------------------------------------------------------------------

def term_vars(t: Term) -> set[Var]:
    if isinstance(t, Variable):
        return {t.var}
    if isinstance(t, App):
        out: set[Var] = set()
        for a in t.args:
            out |= term_vars(a)
        return out
    return set()


def free_vars(phi: Formula) -> set[Var]:
    """Free variables of a formula; Exists binds its variable."""
    if isinstance(phi, (Atom,)):
        out: set[Var] = set()
        for t in phi.args:
            out |= term_vars(t)
        return out
    if isinstance(phi, Eq):
        return term_vars(phi.lhs) | term_vars(phi.rhs)
    if isinstance(phi, (Bot, Top)):
        return set()
    if isinstance(phi, Not):
        return free_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return free_vars(phi.lhs) | free_vars(phi.rhs)
    if isinstance(phi, Exists):
        return free_vars(phi.body) - {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def all_vars(phi: Formula) -> set[Var]:
    """Every variable occurring in a formula, free or bound, binders included."""
    if isinstance(phi, Atom):
        out: set[Var] = set()
        for t in phi.args:
            out |= term_vars(t)
        return out
    if isinstance(phi, Eq):
        return term_vars(phi.lhs) | term_vars(phi.rhs)
    if isinstance(phi, (Bot, Top)):
        return set()
    if isinstance(phi, Not):
        return all_vars(phi.body)
    if isinstance(phi, (And, Or)):
        return all_vars(phi.lhs) | all_vars(phi.rhs)
    if isinstance(phi, Exists):
        return all_vars(phi.body) | {phi.var}
    raise TypeError(f"not a formula: {phi!r}")


def _subst_var_term(t: Term, x: Var, u: Var) -> Term:
    if isinstance(t, Variable):
        return Variable(u) if t.var == x else t
    if isinstance(t, App):
        return App(t.fun, tuple(_subst_var_term(a, x, u) for a in t.args))
    return t


def subst_var(phi: Formula, x: Var, u: Var) -> Formula:
    """Replace every free occurrence of x in phi by u.

    Requires u not to occur in phi at all (free or bound), which rules out
    capture; the check is defensive and always holds for u drawn fresh.
    """
    if u in all_vars(phi):
        raise SubstitutionError(f"target variable {u} already occurs in formula")
    return _subst_var_unchecked(phi, x, u)


def _subst_var_unchecked(phi: Formula, x: Var, u: Var) -> Formula:
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(_subst_var_term(t, x, u) for t in phi.args))
    if isinstance(phi, Eq):
        return Eq(_subst_var_term(phi.lhs, x, u), _subst_var_term(phi.rhs, x, u))
    if isinstance(phi, (Bot, Top)):
        return phi
    if isinstance(phi, Not):
        return Not(_subst_var_unchecked(phi.body, x, u))
    if isinstance(phi, And):
        return And(_subst_var_unchecked(phi.lhs, x, u), _subst_var_unchecked(phi.rhs, x, u))
    if isinstance(phi, Or):
        return Or(_subst_var_unchecked(phi.lhs, x, u), _subst_var_unchecked(phi.rhs, x, u))
    if isinstance(phi, Exists):
        if phi.var == x:
            return phi
        return Exists(phi.var, _subst_var_unchecked(phi.body, x, u))
    raise TypeError(f"not a formula: {phi!r}")


def rename_term(t: Term, u: Var, v: Var) -> Term:
    if isinstance(t, Variable):
        return Variable(v) if t.var == u else t
    if isinstance(t, App):
        return App(t.fun, tuple(rename_term(a, u, v) for a in t.args))
    return t


def rename_formula(phi: Formula, u: Var, v: Var) -> Formula:
    """Systematically replace all occurrences of u by v, binders included.

    Requires v not to occur in phi.
    """
    if v in all_vars(phi):
        raise SubstitutionError(f"replacement variable {v} already occurs")
    return _rename_formula_unchecked(phi, u, v)


def _rename_formula_unchecked(phi: Formula, u: Var, v: Var) -> Formula:
    if isinstance(phi, Atom):
        return Atom(phi.pred, tuple(rename_term(t, u, v) for t in phi.args))
    if isinstance(phi, Eq):
        return Eq(rename_term(phi.lhs, u, v), rename_term(phi.rhs, u, v))
    if isinstance(phi, (Bot, Top)):
        return phi
    if isinstance(phi, Not):
        return Not(_rename_formula_unchecked(phi.body, u, v))
    if isinstance(phi, And):
        return And(_rename_formula_unchecked(phi.lhs, u, v),
                   _rename_formula_unchecked(phi.rhs, u, v))
    if isinstance(phi, Or):
        return Or(_rename_formula_unchecked(phi.lhs, u, v),
                  _rename_formula_unchecked(phi.rhs, u, v))
    if isinstance(phi, Exists):
        return Exists(v if phi.var == u else phi.var,
                      _rename_formula_unchecked(phi.body, u, v))
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

_ARITH_PREC = {"+": 1, "-": 1, "*": 2}


def print_term(t: Term, parent_prec: int = 0) -> str:
    if isinstance(t, Variable):
        return t.var.name
    if isinstance(t, Lit):
        s = str(t.value)
        if isinstance(t.value, IntValue) and t.value.n < 0 and parent_prec > 0:
            return f"({s})"
        return s
    if isinstance(t, App):
        if t.fun in _ARITH_PREC and len(t.args) == 2:
            prec = _ARITH_PREC[t.fun]
            lhs = print_term(t.args[0], prec)
            # right operand of - and left-assoc chains need parens at equal prec
            rhs = print_term(t.args[1], prec + 1)
            s = f"{lhs} {t.fun} {rhs}"
            return f"({s})" if parent_prec > prec else s
        if not t.args:
            return t.fun
        return f"{t.fun}({', '.join(print_term(a) for a in t.args)})"
    raise TypeError(f"not a term: {t!r}")


# formula precedence: \/ = 1, /\ = 2, ~ / exists / atoms = 3
def print_formula(phi: Formula, parent_prec: int = 0) -> str:
    if isinstance(phi, Top):
        return "true"
    if isinstance(phi, Bot):
        return "false"
    if isinstance(phi, Atom):
        if phi.pred == IN_PRED and len(phi.args) >= 1:
            head = print_term(phi.args[0])
            elems = ", ".join(print_term(a) for a in phi.args[1:])
            return f"in({head}, {{{elems}}})"
        if not phi.args:
            return phi.pred
        return f"{phi.pred}({', '.join(print_term(a) for a in phi.args)})"
    if isinstance(phi, Eq):
        return f"{print_term(phi.lhs)} = {print_term(phi.rhs)}"
    if isinstance(phi, Not):
        return f"~{print_formula(phi.body, 3)}"
    if isinstance(phi, Exists):
        # exists extends right as far as possible, so its body never needs
        # parens, but the quantifier itself does inside a connective.
        s = f"exists {phi.var.name} {print_formula(phi.body, 0)}"
        return f"({s})" if parent_prec > 0 else s
    if isinstance(phi, And):
        s = f"{print_formula(phi.lhs, 3)} /\\ {print_formula(phi.rhs, 2)}"
        return f"({s})" if parent_prec > 2 else s
    if isinstance(phi, Or):
        s = f"{print_formula(phi.lhs, 2)} \\/ {print_formula(phi.rhs, 1)}"
        return f"({s})" if parent_prec > 1 else s
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>/\\|\\/|->|[()={},~+\-*]))"
)

_KEYWORDS = {"true", "false", "exists", IN_PRED}


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:].lstrip()
                if not rest:
                    break
                raise ParseError(f"unexpected character {rest[0]!r} at position {pos}")
            pos = m.end()
            for kind in ("int", "ident", "op"):
                val = m.group(kind)
                if val is not None:
                    self.toks.append((kind, val, m.start(kind)))
                    break
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def next(self) -> tuple[str, str, int]:
        tok = self.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        self.i += 1
        return tok

    def expect(self, val: str) -> None:
        tok = self.peek()
        if tok is None or tok[1] != val:
            got = tok[1] if tok else "end of input"
            at = tok[2] if tok else len(self.text)
            raise ParseError(f"expected {val!r} but found {got!r} at position {at}")
        self.i += 1

    def accept(self, val: str) -> bool:
        tok = self.peek()
        if tok is not None and tok[1] == val:
            self.i += 1
            return True
        return False


class FormulaParser:
    """Recursive-descent parser for the ASCII formula grammar.

    When an algebra is supplied, identifiers naming its finite-domain
    elements become literal values and nullary function symbols become
    constants; all other identifiers are user variables.
    """

    def __init__(self, text: str, alg=None):
        self.toks = _Tokens(text)
        self.alg = alg

    def parse(self) -> Formula:
        phi = self.formula()
        tok = self.toks.peek()
        if tok is not None:
            raise ParseError(f"trailing input {tok[1]!r} at position {tok[2]}")
        return phi

    def formula(self) -> Formula:
        lhs = self.and_formula()
        if self.toks.accept("\\/"):
            return Or(lhs, self.formula())
        return lhs

    def and_formula(self) -> Formula:
        lhs = self.unary_formula()
        if self.toks.accept("/\\"):
            return And(lhs, self.and_formula())
        return lhs

    def unary_formula(self) -> Formula:
        tok = self.toks.peek()
        if tok is None:
            raise ParseError("unexpected end of input")
        if tok[1] == "~":
            self.toks.next()
            return Not(self.unary_formula())
        if tok[1] == "exists":
            self.toks.next()
            v = self._variable()
            return Exists(v, self.formula())
        if tok[1] == "true":
            self.toks.next()
            return TOP
        if tok[1] == "false":
            self.toks.next()
            return BOT
        if tok[1] == IN_PRED:
            return self._in_atom()
        return self._atomic()

    def _variable(self) -> Var:
        kind, name, at = self.toks.next()
        if kind != "ident":
            raise ParseError(f"expected a variable but found {name!r} at position {at}")
        self._check_var_name(name, at)
        return Var(name)

    def _check_var_name(self, name: str, at: int) -> None:
        if _FRESH_NAME.match(name):
            raise ParseError(
                f"identifier {name!r} at position {at} is reserved for fresh variables"
            )
        if name in _KEYWORDS:
            raise ParseError(f"keyword {name!r} cannot be a variable (position {at})")

    def _in_atom(self) -> Formula:
        self.toks.expect(IN_PRED)
        self.toks.expect("(")
        head = self.term()
        self.toks.expect(",")
        args = [head]
        if self.toks.accept("{"):
            while True:
                args.append(self.term())
                if not self.toks.accept(","):
                    break
            self.toks.expect("}")
        else:
            while True:
                args.append(self.term())
                if not self.toks.accept(","):
                    break
        self.toks.expect(")")
        return Atom(IN_PRED, tuple(args))

    def _atomic(self) -> Formula:
        # Both `p(x)` and `f(x) = t` start with a term-shaped prefix; parse a
        # term first and decide by the presence of `=`.
        save = self.toks.i
        try:
            t = self.term()
        except ParseError:
            self.toks.i = save
            self.toks.expect("(")
            phi = self.formula()
            self.toks.expect(")")
            return phi
        if self.toks.accept("="):
            rhs = self.term()
            return Eq(t, rhs)
        # no `=`: the term must be reinterpretable as a predicate atom
        if isinstance(t, App):
            if self.alg is not None and not self.alg.signature.has_pred(t.fun, len(t.args)):
                raise ParseError(f"unknown predicate {t.fun!r}/{len(t.args)}")
            return Atom(t.fun, t.args)
        if isinstance(t, Variable):
            if self.alg is not None and self.alg.signature.has_pred(t.var.name, 0):
                return Atom(t.var.name, ())
            raise ParseError(f"expected a formula but found bare term {t.var.name!r}")
        raise ParseError("expected a formula")

    # terms: + - (level 1, left assoc) < * (level 2) < primary
    def term(self) -> Term:
        t = self.mul_term()
        while True:
            if self.toks.accept("+"):
                t = App("+", (t, self.mul_term()))
            elif self.toks.accept("-"):
                t = App("-", (t, self.mul_term()))
            else:
                return t

    def mul_term(self) -> Term:
        t = self.primary()
        while self.toks.accept("*"):
            t = App("*", (t, self.primary()))
        return t

    def primary(self) -> Term:
        tok = self.toks.peek()
        if tok is None:
            raise ParseError("unexpected end of input in term")
        kind, val, at = tok
        if kind == "int":
            self.toks.next()
            return Lit(IntValue(int(val)))
        if val == "-":
            self.toks.next()
            kind2, val2, at2 = self.toks.next()
            if kind2 != "int":
                raise ParseError(f"expected an integer after unary '-' at position {at2}")
            return Lit(IntValue(-int(val2)))
        if val == "(":
            self.toks.next()
            t = self.term()
            self.toks.expect(")")
            return t
        if kind == "ident":
            self.toks.next()
            if self.toks.accept("("):
                args = []
                if not self.toks.accept(")"):
                    while True:
                        args.append(self.term())
                        if not self.toks.accept(","):
                            break
                    self.toks.expect(")")
                return App(val, tuple(args))
            if self.alg is not None:
                lit = self.alg.element_literal(val)
                if lit is not None:
                    return lit
                if self.alg.signature.declares_fun(val, 0):
                    return App(val, ())
            self._check_var_name(val, at)
            return Variable(Var(val))
        raise ParseError(f"unexpected token {val!r} at position {at} in term")


def parse_formula(text: str, alg=None) -> Formula:
    """Parse the ASCII formula grammar into an AST.

    Fresh-namespace identifiers (`_u<k>`) are rejected in source text.
    """
    return FormulaParser(text, alg).parse()


def parse_term(text: str, alg=None) -> Term:
    p = FormulaParser(text, alg)
    t = p.term()
    tok = p.toks.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r} at position {tok[2]}")
    return t
