"""Interpreted algebras: finite table-based structures, the integers, and
the algebra of ground terms.

Equality is interpreted as identity of values in every algebra and is always
available; the membership predicate `in` likewise. Partial operations signal
`EvaluationError`, which callers convert to the error state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    App,
    ElemValue,
    FolcpError,
    IntValue,
    Lit,
    ParseError,
    Term,
    TermValue,
    Value,
    IN_PRED,
)


class AlgebraError(FolcpError):
    """Unknown symbol, arity mismatch, or ill-formed algebra."""


class EvaluationError(FolcpError):
    """A partial operation failed (e.g. division by zero)."""


class UnsupportedOperation(FolcpError):
    """The operation is not available for this algebra kind."""


@dataclass(frozen=True)
class Signature:
    """Function and predicate symbols with arities.

    `open_functions` admits any function symbol at any arity (term algebra);
    equality and `in` are implicit predicates and never declared.
    """

    functions: dict[str, int] = field(default_factory=dict)
    predicates: dict[str, int] = field(default_factory=dict)
    open_functions: bool = False

    def has_fun(self, name: str, arity: int) -> bool:
        if name in self.functions:
            return self.functions[name] == arity
        return self.open_functions

    def declares_fun(self, name: str, arity: int) -> bool:
        return self.functions.get(name) == arity

    def has_pred(self, name: str, arity: int) -> bool:
        return self.predicates.get(name) == arity


class Algebra:
    """Base interface; concrete kinds below."""

    kind: str
    signature: Signature
    domain_enumerable: bool = False

    def eval_fun(self, f: str, args: list[Value] | tuple[Value, ...]) -> Value:
        raise NotImplementedError

    def eval_pred(self, p: str, args: list[Value] | tuple[Value, ...]) -> bool:
        if p == "=":
            if len(args) != 2:
                raise AlgebraError("equality takes two arguments")
            return args[0] == args[1]
        if p == IN_PRED:
            if not args:
                raise AlgebraError("in takes at least one argument")
            return args[0] in args[1:]
        raise AlgebraError(f"unknown predicate {p!r}")

    def enumerate_domain(self) -> list[Value]:
        raise UnsupportedOperation(f"the {self.kind} domain is not enumerable")

    def element_literal(self, name: str) -> Term | None:
        """Literal for a domain element named in source text, if any."""
        return None

    def _check_fun(self, f: str, nargs: int) -> None:
        if not self.signature.has_fun(f, nargs):
            if f in self.signature.functions:
                raise AlgebraError(
                    f"function {f!r} has arity {self.signature.functions[f]}, got {nargs}"
                )
            raise AlgebraError(f"unknown function {f!r}")


class FiniteAlgebra(Algebra):
    """Finite domain with explicit function tables and true-tuple predicates."""

    kind = "finite"
    domain_enumerable = True

    def __init__(
        self,
        domain: list[str],
        fun_tables: dict[str, dict[tuple[str, ...], str]],
        pred_tables: dict[str, set[tuple[str, ...]]],
        pred_arities: dict[str, int] | None = None,
    ):
        if not domain:
            raise AlgebraError("empty domain: a structure needs at least one element")
        if len(set(domain)) != len(domain):
            raise AlgebraError("duplicate domain element")
        self.domain = list(domain)
        self._elems = {name: ElemValue(name) for name in domain}
        self.fun_tables = {f: dict(tbl) for f, tbl in fun_tables.items()}
        self.pred_tables = {p: set(tbl) for p, tbl in pred_tables.items()}

        functions: dict[str, int] = {}
        for f, tbl in self.fun_tables.items():
            arities = {len(k) for k in tbl}
            if len(arities) > 1:
                raise AlgebraError(f"function {f!r} has tuples of mixed arity")
            arity = arities.pop() if arities else 0
            functions[f] = arity
            self._check_total(f, arity, tbl)
        predicates: dict[str, int] = {}
        for p, tbl in self.pred_tables.items():
            arities = {len(k) for k in tbl}
            if len(arities) > 1:
                raise AlgebraError(f"predicate {p!r} has tuples of mixed arity")
            if pred_arities and p in pred_arities:
                arity = pred_arities[p]
                if arities and arities != {arity}:
                    raise AlgebraError(f"predicate {p!r} tuples disagree with arity {arity}")
            elif arities:
                arity = arities.pop()
            else:
                raise AlgebraError(f"predicate {p!r} needs an arity (no tuples listed)")
            predicates[p] = arity
            for tup in tbl:
                for e in tup:
                    if e not in self._elems:
                        raise AlgebraError(f"predicate {p!r} mentions unknown element {e!r}")
        overlap = set(functions) & set(predicates)
        if overlap:
            raise AlgebraError(f"symbols both function and predicate: {sorted(overlap)}")
        self.signature = Signature(functions, predicates)

    def _check_total(self, f: str, arity: int, tbl: dict[tuple[str, ...], str]) -> None:
        from itertools import product

        for tup in product(self.domain, repeat=arity):
            if tup not in tbl:
                args = ", ".join(tup)
                raise AlgebraError(f"function table {f!r} is missing tuple ({args})")
        if len(tbl) != len(self.domain) ** arity:
            extra = [k for k in tbl if any(e not in self._elems for e in k)]
            raise AlgebraError(f"function table {f!r} lists unknown tuples: {extra}")
        for tup, out in tbl.items():
            if out not in self._elems:
                raise AlgebraError(f"function {f!r} maps ({', '.join(tup)}) outside the domain")

    def eval_fun(self, f, args):
        self._check_fun(f, len(args))
        names = []
        for v in args:
            if not isinstance(v, ElemValue) or v.name not in self._elems:
                raise AlgebraError(f"value {v} does not belong to this finite algebra")
            names.append(v.name)
        return self._elems[self.fun_tables[f][tuple(names)]]

    def eval_pred(self, p, args):
        if p in self.pred_tables:
            if len(args) != self.signature.predicates[p]:
                raise AlgebraError(f"predicate {p!r} arity mismatch")
            names = []
            for v in args:
                if not isinstance(v, ElemValue) or v.name not in self._elems:
                    raise AlgebraError(f"value {v} does not belong to this finite algebra")
                names.append(v.name)
            return tuple(names) in self.pred_tables[p]
        return super().eval_pred(p, args)

    def enumerate_domain(self):
        return [self._elems[name] for name in self.domain]

    def element_literal(self, name):
        if name in self._elems:
            return Lit(self._elems[name])
        return None


class IntAlgebra(Algebra):
    """Arbitrary-precision integers with + - * pow, partial div, and <=."""

    kind = "integer"
    domain_enumerable = False

    def __init__(self):
        self.signature = Signature(
            functions={"+": 2, "-": 2, "*": 2, "pow": 2, "div": 2},
            predicates={"<=": 2},
        )

    def _ints(self, f, args):
        out = []
        for v in args:
            if not isinstance(v, IntValue):
                raise AlgebraError(f"{f!r} expects integer values, got {v}")
            out.append(v.n)
        return out

    def eval_fun(self, f, args):
        self._check_fun(f, len(args))
        a, b = self._ints(f, args)
        if f == "+":
            return IntValue(a + b)
        if f == "-":
            return IntValue(a - b)
        if f == "*":
            return IntValue(a * b)
        if f == "pow":
            if b < 0:
                raise EvaluationError(f"pow with negative exponent {b}")
            return IntValue(a ** b)
        if f == "div":
            if b == 0:
                raise EvaluationError("division by zero")
            return IntValue(a // b)
        raise AlgebraError(f"unknown function {f!r}")

    def eval_pred(self, p, args):
        if p == "<=":
            a, b = self._ints(p, args)
            return a <= b
        return super().eval_pred(p, args)


class IntSliceAlgebra(IntAlgebra):
    """Integer algebra whose enumeration is restricted to a finite slice.

    Term evaluation stays full-width; only quantifier and free-variable
    ranges use the slice, so slice-based checks are heuristic.
    """

    kind = "integer-slice"
    domain_enumerable = True

    def __init__(self, lo: int, hi: int):
        super().__init__()
        if lo > hi:
            raise AlgebraError("empty integer slice")
        self.lo = lo
        self.hi = hi

    def enumerate_domain(self):
        return [IntValue(n) for n in range(self.lo, self.hi + 1)]


class HerbrandAlgebra(Algebra):
    """Algebra of ground terms: function application is term formation.

    The function signature is open (any symbol, any arity) unless explicit
    constants are declared; declared constants let the parser distinguish
    `a` from a variable.
    """

    kind = "herbrand"
    domain_enumerable = False

    def __init__(self, constants: tuple[str, ...] = ("a", "b", "c")):
        self.constants = tuple(constants)
        self.signature = Signature(
            functions={c: 0 for c in self.constants},
            predicates={},
            open_functions=True,
        )

    def eval_fun(self, f, args):
        parts = []
        for v in args:
            if not isinstance(v, TermValue):
                raise AlgebraError(f"value {v} does not belong to the term algebra")
            parts.append(v.term)
        return TermValue(App(f, tuple(parts)))


# ---------------------------------------------------------------------------
# Algebra-spec text format
# ---------------------------------------------------------------------------

def parse_algebra_spec(text: str) -> FiniteAlgebra:
    """Parse the line-oriented finite-algebra format.

    domain: a b
    fun f/1: (a)->b (b)->a
    pred p/1: a
    `#` starts a comment.
    """
    domain: list[str] | None = None
    fun_tables: dict[str, dict[tuple[str, ...], str]] = {}
    pred_tables: dict[str, set[tuple[str, ...]]] = {}
    pred_arities: dict[str, int] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("domain:"):
            if domain is not None:
                raise ParseError(f"line {lineno}: duplicate domain declaration")
            domain = line[len("domain:"):].split()
            if not domain:
                raise ParseError(f"line {lineno}: the domain must not be empty")
            continue
        if line.startswith("fun ") or line.startswith("pred "):
            is_fun = line.startswith("fun ")
            rest = line[4:] if is_fun else line[5:]
            if ":" not in rest:
                raise ParseError(f"line {lineno}: missing ':' in symbol declaration")
            head, body = rest.split(":", 1)
            head = head.strip()
            if "/" not in head:
                raise ParseError(f"line {lineno}: symbol needs an arity, e.g. f/1")
            name, _, arity_s = head.partition("/")
            name = name.strip()
            try:
                arity = int(arity_s)
            except ValueError:
                raise ParseError(f"line {lineno}: bad arity {arity_s!r}") from None
            if arity < 0:
                raise ParseError(f"line {lineno}: negative arity")
            if name in fun_tables or name in pred_tables:
                raise ParseError(f"line {lineno}: duplicate symbol {name!r}")
            if is_fun:
                fun_tables[name] = _parse_fun_clauses(body, name, arity, lineno)
            else:
                pred_arities[name] = arity
                pred_tables[name] = _parse_pred_clauses(body, name, arity, lineno)
            continue
        raise ParseError(f"line {lineno}: unrecognized line {line!r}")

    if domain is None:
        raise ParseError("missing domain declaration")
    if len(set(domain)) != len(domain):
        raise ParseError("duplicate domain element")
    try:
        return FiniteAlgebra(domain, fun_tables, pred_tables, pred_arities)
    except AlgebraError as e:
        raise ParseError(str(e)) from None


def _parse_fun_clauses(body: str, name: str, arity: int, lineno: int):
    table: dict[tuple[str, ...], str] = {}
    for clause in body.split():
        if "->" not in clause:
            raise ParseError(f"line {lineno}: clause {clause!r} of {name!r} needs '->'")
        args_s, _, out = clause.partition("->")
        args = _parse_tuple(args_s, lineno, name)
        if len(args) != arity:
            raise ParseError(
                f"line {lineno}: clause {clause!r} of {name!r} has {len(args)} args, "
                f"expected {arity}"
            )
        if args in table:
            raise ParseError(f"line {lineno}: duplicate tuple in table of {name!r}")
        table[args] = out.strip()
    return table


def _parse_pred_clauses(body: str, name: str, arity: int, lineno: int):
    table: set[tuple[str, ...]] = set()
    for clause in body.split():
        if clause.startswith("("):
            tup = _parse_tuple(clause, lineno, name)
        else:
            if arity != 1:
                raise ParseError(
                    f"line {lineno}: bare element {clause!r} only allowed for arity 1"
                )
            tup = (clause,)
        if len(tup) != arity:
            raise ParseError(f"line {lineno}: tuple {clause!r} of {name!r} has wrong arity")
        table.add(tup)
    return table


def _parse_tuple(s: str, lineno: int, name: str) -> tuple[str, ...]:
    s = s.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ParseError(f"line {lineno}: malformed tuple {s!r} for {name!r}")
    inner = s[1:-1].strip()
    if not inner:
        return ()
    return tuple(part.strip() for part in inner.split(","))


def print_algebra_spec(alg: FiniteAlgebra) -> str:
    """Deterministic printer; round-trips through parse_algebra_spec."""
    lines = [f"domain: {' '.join(alg.domain)}"]
    for f in sorted(alg.fun_tables):
        arity = alg.signature.functions[f]
        clauses = []
        from itertools import product

        for tup in product(alg.domain, repeat=arity):
            clauses.append(f"({','.join(tup)})->{alg.fun_tables[f][tup]}")
        lines.append(f"fun {f}/{arity}: {' '.join(clauses)}")
    for p in sorted(alg.pred_tables):
        arity = alg.signature.predicates[p]
        tuples = sorted(alg.pred_tables[p])
        clauses = [f"({','.join(tup)})" for tup in tuples]
        lines.append(f"pred {p}/{arity}: {' '.join(clauses)}")
    return "\n".join(lines) + "\n"


def int_algebra() -> IntAlgebra:
    return IntAlgebra()


def herbrand_algebra(constants: tuple[str, ...] = ("a", "b", "c")) -> HerbrandAlgebra:
    return HerbrandAlgebra(constants)


def int_slice(lo: int, hi: int) -> IntSliceAlgebra:
    return IntSliceAlgebra(lo, hi)
