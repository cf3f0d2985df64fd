"""AST node definitions for MiniJ.

Node equality is structural: spans participate in identity only for
error reporting and never in ``==``, which keeps round-trip tests
(parse, print, parse again) straightforward.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Span:
    start: int
    end: int


_NOSPAN = Span(0, 0)

PRIMITIVE_TYPES = frozenset({"int", "boolean", "String", "void"})


@dataclass
class Node:
    pass


# ---------------------------------------------------------------- expressions


@dataclass
class Expr(Node):
    pass


@dataclass
class Literal(Expr):
    type_name: str  # "int" | "boolean" | "String"
    value: str      # canonical lexeme, e.g. "42", "true", 'hi'
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Literal"


@dataclass
class VarRef(Expr):
    name: str
    var_type: str = ""  # filled by the parser's scope resolution
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "VarRef"


@dataclass
class Call(Expr):
    receiver: Expr | None   # None for receiverless calls
    receiver_class: str     # declared type of the receiver, "?" if unknown
    name: str
    args: list[Expr]
    arg_types: list[str] = field(default_factory=list)
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Call"


@dataclass
class New(Expr):
    class_name: str
    args: list[Expr]
    arg_types: list[str] = field(default_factory=list)
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "New"


@dataclass
class InfixOperator(Expr):
    op: str
    left: Expr
    right: Expr
    result_type: str = ""
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "InfixOperator"


# ----------------------------------------------------------------- statements


@dataclass
class Stmt(Node):
    pass


@dataclass
class Block(Node):
    stmts: list[Stmt]
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Block"


@dataclass
class VarDecl(Stmt):
    var_type: str
    name: str
    init: Expr | None
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "VarDecl"


@dataclass
class Assign(Stmt):
    name: str
    value: Expr
    var_type: str = ""  # resolved declared type of the target
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Assign"


@dataclass
class If(Stmt):
    cond: Expr
    then_block: Block
    else_block: Block | None
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "If"


@dataclass
class While(Stmt):
    cond: Expr
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "While"


@dataclass
class For(Stmt):
    # Grammar fixes all three header parts: "for" "(" varDecl expr ";" assign ")"
    init: VarDecl
    cond: Expr
    update: Assign
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "For"


@dataclass
class CatchClause(Node):
    exc_type: str
    name: str
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class TryCatchFinally(Stmt):
    try_block: Block
    catches: list[CatchClause]
    finally_block: Block | None
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "TryCatchFinally"


@dataclass
class Return(Stmt):
    value: Expr | None
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Return"


@dataclass
class Throw(Stmt):
    value: Expr
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Throw"


@dataclass
class ExprStmt(Stmt):
    expr: Expr
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "ExprStmt"


# -------------------------------------------------------------------- methods


@dataclass
class Param(Node):
    var_type: str
    name: str
    span: Span = field(default=_NOSPAN, compare=False)


@dataclass
class MethodAst(Node):
    return_type: str
    name: str
    params: list[Param]
    body: Block
    span: Span = field(default=_NOSPAN, compare=False)

    kind = "Method"


@dataclass
class SourceUnit(Node):
    """One .mj file: raw method texts plus their package of origin."""

    package_name: str
    methods: list[str]
    origin: str = ""


AST_KINDS = frozenset({
    "VarDecl", "Assign", "If", "While", "For", "TryCatchFinally",
    "Return", "Throw", "ExprStmt", "Call", "New", "InfixOperator",
    "Literal", "VarRef", "Block", "Method",
})
