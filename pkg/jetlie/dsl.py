"""
Input language for systems, manifolds and jobs.

A file holds one ``system`` or ``manifold`` block and an optional ``job`` block::

    # third-order scalar ODE
    system {
        independent: x;
        dependent: u;
        order: 3;
        eq u[x,x,x] = u[x]^2 - 3/2*x*u;
    }
    job { command: solve; degree: 3; }

Expressions use ``+ - * / ^`` and parentheses; literals are integers or ``p/q``,
division only by rational constants. Jets are written ``u[x,x,y]`` with repeated
variables. ``#`` starts a comment. Errors carry the line and column.
"""

from __future__ import annotations

import re
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

from sympy.polys.domains import QQ

from .algebra import Poly, Rat, format_poly, poly_ring
from .config import Config
from .errors import JetlieError, ParseError
from .jet import JetCoord, JetSpace, canonical_jet
from .jetpoly import JetPoly
from .manifold import ManifoldSpec, manifold_names
from .system import SystemSpec

COMMANDS = (
    "prolong",
    "determine",
    "solve",
    "verify-closed-forms",
    "closure",
    "finite-check",
    "manifold-analyze",
    "bound",
)

OPTIONS: Dict[str, Tuple[str, ...]] = {
    "prolong": ("n", "m", "kappa", "q", "r"),
    "determine": (),
    "solve": ("degree", "shape"),
    "verify-closed-forms": ("formula", "kappa", "n", "m", "mode", "exhaustive"),
    "closure": ("family", "n", "m", "kappa"),
    "finite-check": ("family", "n", "m", "kappa"),
    "manifold-analyze": ("kmax", "degree", "mu0"),
    "bound": ("n", "m", "p", "l0", "l0star", "mu0", "kappa", "theorem1"),
}

TEXT_OPTIONS = ("shape", "formula", "mode", "family", "q", "r")

TOKENS = {
    "comment": r"#[^\n]*",
    "newline": r"\n",
    "skip": r"[ \t\r]+",
    "decimal": r"\d+\.\d*|\.\d+",
    "number": r"\d+",
    "name": r"[A-Za-z_][A-Za-z0-9_]*",
    "op": r"[-+*/^]",
    "punct": r"[{}\[\](),;:=]",
    "error": r".",
}
_TOKEN_RE = re.compile("|".join(f"(?P<{kind}>{text})" for kind, text in TOKENS.items()))


class Token(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


def tokenize(text: str) -> Iterator[Token]:
    line, line_start = 1, 0
    for mo in _TOKEN_RE.finditer(text):
        kind = str(mo.lastgroup)
        value = mo.group()
        column = mo.start() - line_start + 1
        if kind == "newline":
            line, line_start = line + 1, mo.end()
            continue
        if kind in ("skip", "comment"):
            continue
        if kind == "decimal":
            raise ParseError(line, column, f"decimal literal {value!r}; write it as a fraction p/q")
        if kind == "error":
            raise ParseError(line, column, f"unexpected character {value!r}")
        yield Token(kind, value, line, column)
    yield Token("end", "", line, len(text) - line_start + 1)


# Expression trees
@dataclass
class Node:
    token: Token

    def constant(self) -> Optional[Rat]:
        return None


@dataclass
class Num(Node):
    value: Rat

    def constant(self) -> Optional[Rat]:
        return self.value


@dataclass
class Name(Node):
    name: str


@dataclass
class Jet(Node):
    name: str
    indices: Tuple[Token, ...]


@dataclass
class Neg(Node):
    operand: Node

    def constant(self) -> Optional[Rat]:
        value = self.operand.constant()
        return None if value is None else -value


@dataclass
class BinOp(Node):
    op: str
    left: Node
    right: Node

    def constant(self) -> Optional[Rat]:
        a, b = self.left.constant(), self.right.constant()
        if a is None or b is None:
            return None
        if self.op == "/":
            return a / b if b else None
        return {"+": a + b, "-": a - b, "*": a * b}[self.op]


@dataclass
class Pow(Node):
    base: Node
    exponent: int

    def constant(self) -> Optional[Rat]:
        value = self.base.constant()
        return None if value is None else value**self.exponent


BINDING = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 40}


class Parser:
    """Pratt parser over the token stream, plus the block statements"""

    def __init__(self, text: str):
        self.tokens = list(tokenize(text))
        self.pos = 0

    @property
    def token(self) -> Token:
        return self.tokens[self.pos]

    def error(self, message: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.token
        return ParseError(token.line, token.column, message)

    def advance(self, expected: Optional[str] = None) -> Token:
        token = self.token
        if expected is not None and token.value != expected:
            found = token.value or "end of input"
            raise self.error(f"expected {expected!r}, found {found!r}")
        if token.kind != "end":
            self.pos += 1
        return token

    def at(self, value: str) -> bool:
        return self.token.value == value and self.token.kind != "end"

    def name(self) -> Token:
        if self.token.kind != "name":
            raise self.error(f"expected a name, found {self.token.value or 'end of input'!r}")
        return self.advance()

    def integer(self) -> int:
        if self.token.kind != "number":
            raise self.error(f"expected an integer, found {self.token.value or 'end of input'!r}")
        return int(self.advance().value)

    # Expressions
    def expression(self, rbp: int = 0) -> Node:
        left = self.prefix()
        while self.token.kind == "op" and rbp < BINDING[self.token.value]:
            left = self.infix(left)
        return left

    def prefix(self) -> Node:
        token = self.advance()
        if token.kind == "number":
            return Num(token, QQ(int(token.value)))
        if token.kind == "name":
            if self.at("["):
                self.advance("[")
                indices: List[Token] = []
                if not self.at("]"):
                    indices.append(self.name())
                    while self.at(","):
                        self.advance(",")
                        indices.append(self.name())
                self.advance("]")
                return Jet(token, token.value, tuple(indices))
            return Name(token, token.value)
        if token.value == "-":
            return Neg(token, self.expression(30))
        if token.value == "+":
            return self.expression(30)
        if token.value == "(":
            inner = self.expression()
            self.advance(")")
            return inner
        raise self.error(f"unexpected {token.value or 'end of input'!r}", token)

    def infix(self, left: Node) -> Node:
        token = self.advance()
        if token.value == "^":
            exponent = self.expression(BINDING["^"] - 1).constant()
            if exponent is None or exponent.denominator != 1 or exponent < 0:
                raise self.error("exponents must be natural numbers", token)
            return Pow(token, left, int(exponent.numerator))
        return BinOp(token, token.value, left, self.expression(BINDING[token.value]))

    # Statements
    def option_value(self) -> str:
        pieces = []
        while not self.at(";"):
            if self.token.kind == "end":
                raise self.error("expected ';'")
            pieces.append(self.advance().value)
        if not pieces:
            raise self.error("missing value")
        return "".join(pieces)


# Evaluation
Value = Union[Poly, JetPoly]


class Context(ABC):
    """Maps names and jets to values of one carrier type"""

    @abstractmethod
    def number(self, value: Rat) -> Value: ...

    @abstractmethod
    def variable(self, node: Name) -> Value: ...

    def jet(self, node: Jet) -> Value:
        raise ParseError(node.token.line, node.token.column, "jets are not allowed here")


class PolyContext(Context):
    def __init__(self, ring, names: Sequence[str]):
        self.ring = ring
        self.names = list(names)

    def number(self, value: Rat) -> Poly:
        return self.ring.ground_new(value)

    def variable(self, node: Name) -> Poly:
        if node.name not in self.names:
            raise ParseError(
                node.token.line,
                node.token.column,
                f"unknown symbol {node.name!r}; expected one of {', '.join(self.names)}",
            )
        return self.ring.gens[self.names.index(node.name)]


class JetContext(Context):
    def __init__(self, space: JetSpace, kappa: int):
        self.space = space
        self.kappa = kappa
        self.base = PolyContext(space.ring, space.names)

    def number(self, value: Rat) -> JetPoly:
        return JetPoly.constant(self.space, self.base.number(value))

    def variable(self, node: Name) -> JetPoly:
        return JetPoly.constant(self.space, self.base.variable(node))

    def jet(self, node: Jet) -> JetPoly:
        return JetPoly.coord(self.space, jet_coord(self.space, node, self.kappa))


def jet_coord(space: JetSpace, node: Jet, kappa: int) -> JetCoord:
    token = node.token
    if node.name not in space.u_names:
        raise ParseError(token.line, token.column, f"{node.name!r} is not a dependent variable")
    indices = []
    for index in node.indices:
        if index.value not in space.x_names:
            raise ParseError(
                index.line, index.column, f"{index.value!r} is not an independent variable"
            )
        indices.append(space.x_names.index(index.value) + 1)
    if len(indices) > kappa:
        raise ParseError(
            token.line,
            token.column,
            f"jet of order {len(indices)} exceeds the system order {kappa}",
        )
    return canonical_jet(space.u_names.index(node.name) + 1, indices, space)


def evaluate(node: Node, ctx: Context) -> Value:
    if isinstance(node, Num):
        return ctx.number(node.value)
    if isinstance(node, Name):
        return ctx.variable(node)
    if isinstance(node, Jet):
        return ctx.jet(node)
    if isinstance(node, Neg):
        return -evaluate(node.operand, ctx)
    if isinstance(node, Pow):
        return evaluate(node.base, ctx) ** node.exponent
    if isinstance(node, BinOp):
        if node.op == "/":
            divisor = node.right.constant()
            if divisor is None:
                raise ParseError(
                    node.token.line, node.token.column, "division only by rational constants"
                )
            if not divisor:
                raise ParseError(node.token.line, node.token.column, "division by zero")
            return evaluate(node.left, ctx) * (QQ.one / divisor)
        left, right = evaluate(node.left, ctx), evaluate(node.right, ctx)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        return left * right
    raise TypeError(f"unknown node {node!r}")


def parse_expression(text: str, ctx: Context) -> Value:
    parser = Parser(text)
    node = parser.expression()
    if parser.token.kind != "end":
        raise parser.error(f"unexpected {parser.token.value!r} after the expression")
    return evaluate(node, ctx)


def parse_poly(space: JetSpace, text: str) -> Poly:
    """Polynomial in the base variables of a jet space"""
    return parse_expression(text, PolyContext(space.ring, space.names))


# Jobs
@dataclass
class JobSpec:
    """One parsed input: a system or manifold and what to do with it"""

    command: Optional[str] = None
    system: Optional[SystemSpec] = None
    manifold: Optional[ManifoldSpec] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.system is not None and self.manifold is not None:
            raise JetlieError("a job holds either a system or a manifold")
        if self.command is not None:
            validate_options(self.command, self.options)

    @property
    def subject(self) -> str:
        if self.system is not None:
            return "system"
        if self.manifold is not None:
            return "manifold"
        return "none"


def validate_options(command: str, options: Dict[str, Any], where: Optional[Token] = None) -> None:
    def fail(message: str) -> JetlieError:
        if where is not None:
            return ParseError(where.line, where.column, message)
        return JetlieError(message)

    if command not in COMMANDS:
        raise fail(f"unknown command {command!r}; choose from {', '.join(COMMANDS)}")
    allowed = OPTIONS[command]
    for key, value in options.items():
        if key not in allowed:
            raise fail(
                f"option {key!r} does not apply to {command}"
                + (f"; allowed: {', '.join(allowed)}" if allowed else "")
            )
        if key not in TEXT_OPTIONS and not isinstance(value, int):
            raise fail(f"option {key!r} needs an integer, got {value!r}")


def _names(parser: Parser) -> Tuple[str, ...]:
    names = [parser.name().value]
    while parser.at(","):
        parser.advance(",")
        names.append(parser.name().value)
    return tuple(names)


def _system_block(parser: Parser, start: Token) -> SystemSpec:
    x_names: Tuple[str, ...] = ()
    u_names: Tuple[str, ...] = ()
    kappa: Optional[int] = None
    space: Optional[JetSpace] = None
    equations: Dict[JetCoord, JetPoly] = {}
    parametric: Optional[List[JetCoord]] = None
    homogeneous = False

    def require_space(token: Token) -> JetSpace:
        nonlocal space
        if not x_names or not u_names or kappa is None:
            raise ParseError(
                token.line, token.column, "declare independent, dependent and order first"
            )
        if space is None:
            try:
                space = JetSpace(len(x_names), len(u_names), x_names, u_names)
            except JetlieError as exc:
                raise ParseError(token.line, token.column, str(exc)) from exc
        return space

    parser.advance("{")
    while not parser.at("}"):
        key = parser.name()
        if key.value in ("independent", "dependent", "order") and space is not None:
            raise ParseError(key.line, key.column, f"{key.value} must precede the equations")
        if key.value == "independent":
            parser.advance(":")
            x_names = _names(parser)
        elif key.value == "dependent":
            parser.advance(":")
            u_names = _names(parser)
        elif key.value == "order":
            parser.advance(":")
            kappa = parser.integer()
        elif key.value == "eq":
            space = require_space(key)
            lhs = parser.expression()
            if not isinstance(lhs, Jet) or not lhs.indices:
                raise ParseError(key.line, key.column, "left-hand side must be a jet like u[x,x]")
            coord = jet_coord(space, lhs, kappa)
            if coord in equations:
                raise ParseError(
                    lhs.token.line, lhs.token.column, f"{coord.label(space)} is declared twice"
                )
            parser.advance("=")
            equations[coord] = evaluate(parser.expression(), JetContext(space, kappa))
        elif key.value == "parametric":
            space = require_space(key)
            parser.advance(":")
            parametric = []
            while True:
                node = parser.expression()
                if not isinstance(node, Jet):
                    raise ParseError(node.token.line, node.token.column, "expected a jet")
                parametric.append(jet_coord(space, node, kappa))
                if not parser.at(","):
                    break
                parser.advance(",")
        elif key.value == "homogeneous":
            space = require_space(key)
            homogeneous = True
        else:
            raise ParseError(key.line, key.column, f"unknown system statement {key.value!r}")
        parser.advance(";")
    parser.advance("}")
    space = require_space(start)
    if homogeneous:
        for coord in space.coordinates(kappa):
            equations.setdefault(coord, JetPoly.zero(space))
    try:
        return SystemSpec(
            space, kappa, equations, tuple(parametric) if parametric is not None else None
        )
    except JetlieError as exc:
        raise ParseError(start.line, start.column, str(exc)) from exc


def _manifold_block(parser: Parser, start: Token) -> ManifoldSpec:
    dims: Dict[str, int] = {}
    truncation: Optional[int] = None
    omega: Dict[int, Poly] = {}
    parser.advance("{")
    while not parser.at("}"):
        key = parser.name()
        if key.value in ("x", "u", "chi"):
            if omega:
                raise ParseError(key.line, key.column, "dimensions must precede omega")
            parser.advance(":")
            dims[key.value] = parser.integer()
        elif key.value == "truncation":
            parser.advance(":")
            truncation = parser.integer()
        elif key.value == "omega":
            if set(dims) != {"x", "u", "chi"}:
                raise ParseError(key.line, key.column, "declare x, u and chi before omega")
            target = parser.name()
            names = [f"u{j}" for j in range(1, dims["u"] + 1)]
            if target.value not in names:
                raise ParseError(
                    target.line, target.column, f"omega target must be one of {', '.join(names)}"
                )
            j = names.index(target.value) + 1
            if j in omega:
                raise ParseError(target.line, target.column, f"{target.value} is defined twice")
            parser.advance("=")
            variables = manifold_names(dims["x"], dims["u"], dims["chi"])
            omega[j] = evaluate(parser.expression(), PolyContext(poly_ring(variables), variables))
        else:
            raise ParseError(key.line, key.column, f"unknown manifold statement {key.value!r}")
        parser.advance(";")
    parser.advance("}")
    if set(dims) != {"x", "u", "chi"}:
        raise ParseError(start.line, start.column, "manifold needs x, u and chi dimensions")
    missing = [j for j in range(1, dims["u"] + 1) if j not in omega]
    if missing:
        raise ParseError(
            start.line, start.column, "missing omega for " + ", ".join(f"u{j}" for j in missing)
        )
    try:
        return ManifoldSpec.from_polys(
            dims["x"],
            dims["u"],
            dims["chi"],
            [omega[j] for j in range(1, dims["u"] + 1)],
            truncation if truncation is not None else Config.DEFAULT_TRUNCATION,
        )
    except JetlieError as exc:
        raise ParseError(start.line, start.column, str(exc)) from exc


def _job_block(parser: Parser, start: Token) -> Tuple[str, Dict[str, Any]]:
    command: Optional[str] = None
    options: Dict[str, Any] = {}
    parser.advance("{")
    while not parser.at("}"):
        key = parser.name()
        parser.advance(":")
        value = parser.option_value()
        if key.value == "command":
            command = value
        elif key.value in options:
            raise ParseError(key.line, key.column, f"option {key.value!r} given twice")
        else:
            options[key.value] = value if key.value in TEXT_OPTIONS else _option_int(value, key)
        parser.advance(";")
    parser.advance("}")
    if command is None:
        raise ParseError(start.line, start.column, "job block needs a command")
    validate_options(command, options, start)
    return command, options


def _option_int(value: str, token: Token) -> int:
    if value in ("true", "false"):
        return int(value == "true")
    try:
        return int(value)
    except ValueError as exc:
        raise ParseError(token.line, token.column, f"{token.value} needs an integer") from exc


def parse_input(text: str) -> JobSpec:
    """Parse a whole input file"""
    parser = Parser(text)
    system: Optional[SystemSpec] = None
    manifold: Optional[ManifoldSpec] = None
    command: Optional[str] = None
    options: Dict[str, Any] = {}
    while parser.token.kind != "end":
        start = parser.name()
        if start.value == "system" or start.value == "manifold":
            if system is not None or manifold is not None:
                raise ParseError(start.line, start.column, "only one system or manifold per file")
            if start.value == "system":
                system = _system_block(parser, start)
            else:
                manifold = _manifold_block(parser, start)
        elif start.value == "job":
            if command is not None:
                raise ParseError(start.line, start.column, "only one job block per file")
            command, options = _job_block(parser, start)
        else:
            raise ParseError(start.line, start.column, f"unknown block {start.value!r}")
    return JobSpec(command, system, manifold, options)


# Printing
def render_system(spec: SystemSpec) -> List[str]:
    space = spec.space
    lines = [
        "system {",
        f"    independent: {', '.join(space.x_names)};",
        f"    dependent: {', '.join(space.u_names)};",
        f"    order: {spec.kappa};",
    ]
    if spec.is_homogeneous():
        lines.append("    homogeneous;")
    else:
        if spec.parametric is not None:
            lines.append(
                f"    parametric: {', '.join(c.label(space) for c in spec.parametric)};"
            )
        for coord in spec.declared:
            lines.append(f"    eq {coord.label(space)} = {spec.rhs(coord).format()};")
    lines.append("}")
    return lines


def render_manifold(M: ManifoldSpec) -> List[str]:
    lines = [
        "manifold {",
        f"    x: {M.n};",
        f"    u: {M.m};",
        f"    chi: {M.p};",
        f"    truncation: {M.truncation};",
    ]
    for j, omega in enumerate(M.omega.outputs, 1):
        lines.append(f"    omega u{j} = {format_poly(omega)};")
    lines.append("}")
    return lines


def render_input(job: JobSpec) -> str:
    """DSL text that parses back to an equal JobSpec"""
    lines: List[str] = []
    if job.system is not None:
        lines.extend(render_system(job.system))
    if job.manifold is not None:
        lines.extend(render_manifold(job.manifold))
    if job.command is not None:
        body = [f"command: {job.command};"] + [
            f"{key}: {value};" for key, value in job.options.items()
        ]
        lines.append("job { " + " ".join(body) + " }")
    return "\n".join(lines) + "\n"

