# src/modules/fo/parser.py

import logging
import re
from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

from src.modules.vocabulary.service import Vocabulary
from src.utils.errors import ArityError, FormulaSyntaxError, UnknownRelation

logger = logging.getLogger(__name__)


# --- AST ---
@dataclass(frozen=True)
class Atom:
    relation: str
    args: Tuple[str, ...]


@dataclass(frozen=True)
class Eq:
    left: str
    right: str


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class And:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    parts: Tuple["Formula", ...]


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    body: "Formula"


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Formula"


Formula = Union[Atom, Eq, Const, Not, And, Or, Implies, Iff, Exists, Forall]

KEYWORDS = {"exists", "forall", "not", "and", "or", "implies", "iff", "true", "false"}
ALIASES = {"~": "not", "&": "and", "|": "or", "->": "implies", "<->": "iff"}

TOKEN_RE = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_']*)|(?P<sym><->|->|!=|[().,=~&|]))")


@dataclass(frozen=True)
class Token:
    kind: str  # ident | kw | sym | end
    text: str
    pos: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        match = TOKEN_RE.match(text, pos)
        if not match or match.end() == pos:
            raise FormulaSyntaxError(f"Unexpected character {text[pos]!r}", pos)
        start = match.start("ident") if match.group("ident") else match.start("sym")
        if match.group("ident"):
            word = match.group("ident")
            tokens.append(Token("kw" if word in KEYWORDS else "ident", word, start))
        else:
            sym = match.group("sym")
            if sym in ALIASES:
                tokens.append(Token("kw", ALIASES[sym], start))
            else:
                tokens.append(Token("sym", sym, start))
        pos = match.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, vocabulary: Optional[Vocabulary]):
        self.tokens = tokenize(text)
        self.i = 0
        self.vocabulary = vocabulary

    @property
    def current(self) -> Token:
        return self.tokens[self.i]

    def _advance(self) -> Token:
        token = self.tokens[self.i]
        self.i += 1
        return token

    def _accept(self, kind: str, text: str) -> bool:
        if self.current.kind == kind and self.current.text == text:
            self.i += 1
            return True
        return False

    def _expect(self, kind: str, text: str) -> Token:
        if self.current.kind != kind or self.current.text != text:
            found = self.current.text or "end of input"
            raise FormulaSyntaxError(f"Expected '{text}', found '{found}'", self.current.pos)
        return self._advance()

    def _variable(self) -> str:
        if self.current.kind != "ident":
            raise FormulaSyntaxError(f"Expected a variable, found '{self.current.text or 'end of input'}'",
                                     self.current.pos)
        return self._advance().text

    def parse(self) -> Formula:
        formula = self.formula()
        if self.current.kind != "end":
            raise FormulaSyntaxError(f"Unexpected '{self.current.text}'", self.current.pos)
        return formula

    def formula(self) -> Formula:
        if self.current.kind == "kw" and self.current.text in ("exists", "forall"):
            return self.quantified()
        return self.iff()

    def quantified(self) -> Formula:
        quantifier = self._advance().text
        var = self._variable()
        self._expect("sym", ".")
        body = self.formula()
        return Exists(var, body) if quantifier == "exists" else Forall(var, body)

    def iff(self) -> Formula:
        left = self.implies()
        while self._accept("kw", "iff"):
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self._accept("kw", "implies"):
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self._accept("kw", "or"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.literal()]
        while self._accept("kw", "and"):
            parts.append(self.literal())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def literal(self) -> Formula:
        token = self.current
        if self._accept("kw", "not"):
            return Not(self.literal())
        if token.kind == "kw" and token.text in ("exists", "forall"):
            return self.quantified()
        if self._accept("kw", "true"):
            return Const(True)
        if self._accept("kw", "false"):
            return Const(False)
        if self._accept("sym", "("):
            inner = self.formula()
            self._expect("sym", ")")
            return inner
        if token.kind != "ident":
            raise FormulaSyntaxError(f"Unexpected '{token.text or 'end of input'}'", token.pos)
        name = self._advance().text
        if self._accept("sym", "("):
            args = [self._variable()]
            while self._accept("sym", ","):
                args.append(self._variable())
            self._expect("sym", ")")
            return self._atom(name, tuple(args), token.pos)
        if self._accept("sym", "="):
            return Eq(name, self._variable())
        if self._accept("sym", "!="):
            return Not(Eq(name, self._variable()))
        raise FormulaSyntaxError(f"Expected '(' or '=' after '{name}'", self.current.pos)

    def _atom(self, name: str, args: Tuple[str, ...], pos: int) -> Atom:
        if self.vocabulary is not None:
            try:
                relation = self.vocabulary.relation(name)
            except UnknownRelation:
                raise UnknownRelation(f"Relation '{name}' at position {pos} is not in vocabulary "
                                      f"'{self.vocabulary.name}'", details={"position": pos})
            if relation.arity != len(args):
                raise ArityError(f"{name} has arity {relation.arity}, used with {len(args)} arguments at position {pos}",
                                 details={"position": pos})
        return Atom(name, args)


def parse(text: str, vocabulary: Optional[Vocabulary] = None) -> Formula:
    formula = _Parser(text, vocabulary).parse()
    logger.debug(f"Parsed formula: {to_text(formula)}")
    return formula


# Пріоритети для друку з мінімальними дужками
_PRECEDENCE = {Iff: 1, Implies: 2, Or: 3, And: 4}
_ATOMIC = 6


def _precedence(f: Formula) -> int:
    if isinstance(f, (Exists, Forall)):
        return 0
    return _PRECEDENCE.get(type(f), _ATOMIC)


def _wrap(f: Formula, minimum: int) -> str:
    text = to_text(f)
    return f"({text})" if _precedence(f) < minimum else text


def to_text(f: Formula) -> str:
    if isinstance(f, Atom):
        return f"{f.relation}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left} = {f.right}"
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Not):
        if isinstance(f.body, Eq):
            return f"{f.body.left} != {f.body.right}"
        return f"not {_wrap(f.body, _ATOMIC)}"
    if isinstance(f, And):
        return " and ".join(_wrap(p, _ATOMIC) for p in f.parts)
    if isinstance(f, Or):
        return " or ".join(_wrap(p, _PRECEDENCE[And]) for p in f.parts)
    if isinstance(f, Implies):
        return f"{_wrap(f.left, _PRECEDENCE[Or])} implies {_wrap(f.right, _PRECEDENCE[Implies])}"
    if isinstance(f, Iff):
        return f"{_wrap(f.left, _PRECEDENCE[Iff])} iff {_wrap(f.right, _PRECEDENCE[Implies])}"
    if isinstance(f, Exists):
        return f"exists {f.var}. {to_text(f.body)}"
    if isinstance(f, Forall):
        return f"forall {f.var}. {to_text(f.body)}"
    raise TypeError(f"Not a formula: {f!r}")
