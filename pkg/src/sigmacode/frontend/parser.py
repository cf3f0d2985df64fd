"""Recursive-descent parser and static checks for MiniJ.

Beyond the grammar, parse_method enforces the language's static rules:
lexical block scoping with shadowing forbidden, resolution of every
variable reference, and rejection of unreachable code (statements after
a return/throw, a for-update after an always-abrupt body, and catch
clauses that can never receive control).
"""

from __future__ import annotations

from .astnodes import (
    Assign,
    Block,
    Call,
    CatchClause,
    Expr,
    ExprStmt,
    For,
    If,
    InfixOperator,
    Literal,
    MethodAst,
    New,
    Param,
    Return,
    Span,
    Stmt,
    Throw,
    TryCatchFinally,
    VarDecl,
    VarRef,
    While,
)
from .lexer import EOF, IDENT, INT, KW, OP, PUNCT, STRING, Token, tokenize

COMPARISON_OPS = frozenset({"==", "!=", "<", ">", "<=", ">="})
LOGICAL_OPS = frozenset({"&&", "||"})
ARITHMETIC_OPS = frozenset({"+", "-", "*", "/", "%"})
INFIX_OPS = COMPARISON_OPS | LOGICAL_OPS | ARITHMETIC_OPS

# Binding strength, left-associative throughout.
_PRECEDENCE = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3,
    "<": 4, ">": 4, "<=": 4, ">=": 4,
    "+": 5, "-": 5,
    "*": 6, "/": 6, "%": 6,
}


class ParseError(Exception):
    def __init__(self, message: str, token: Token | None = None):
        if token is not None:
            found = token.value if token.kind != EOF else "end of input"
            message = f"{message} at line {token.line}, column {token.col} (found {found!r})"
        super().__init__(message)
        self.token = token


class UnresolvedVariable(ParseError):
    """A variable reference with no visible declaration."""


def expr_type(e: Expr) -> str:
    """Simple type of an expression's value; "?" when not locally known."""
    if isinstance(e, Literal):
        return e.type_name
    if isinstance(e, VarRef):
        return e.var_type
    if isinstance(e, New):
        return e.class_name
    if isinstance(e, Call):
        return "?"
    if isinstance(e, InfixOperator):
        return e.result_type
    raise TypeError(f"not an expression: {e!r}")


def _infix_result_type(op: str, left: Expr, right: Expr) -> str:
    if op in COMPARISON_OPS or op in LOGICAL_OPS:
        return "boolean"
    if op == "+" and "String" in (expr_type(left), expr_type(right)):
        return "String"
    return "int"


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.scopes: list[dict[str, str]] = []

    # ------------------------------------------------------------- stream

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        j = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[j]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != EOF:
            self.pos += 1
        return tok

    def expect(self, kind: str, value: str | None = None) -> Token:
        tok = self.cur
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}", tok)
        return self.advance()

    def at(self, kind: str, value: str | None = None) -> bool:
        return self.cur.kind == kind and (value is None or self.cur.value == value)

    def _span_from(self, start: Token) -> Span:
        end = self.tokens[self.pos - 1].end if self.pos > 0 else start.end
        return Span(start.start, end)

    # -------------------------------------------------------------- scope

    def declare(self, name: str, var_type: str, tok: Token) -> None:
        for scope in self.scopes:
            if name in scope:
                raise ParseError(f"variable {name!r} shadows an existing declaration", tok)
        self.scopes[-1][name] = var_type

    def resolve(self, name: str, tok: Token) -> str:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise UnresolvedVariable(f"variable {name!r} is not declared", tok)

    # ------------------------------------------------------------- method

    def parse_method(self) -> MethodAst:
        start = self.cur
        if self.at(KW, "void"):
            return_type = self.advance().value
        else:
            return_type = self.expect(IDENT).value
        name = self.expect(IDENT).value
        self.expect(PUNCT, "(")
        params: list[Param] = []
        self.scopes.append({})
        if not self.at(PUNCT, ")"):
            while True:
                ptok = self.cur
                ptype = self.expect(IDENT).value
                pname_tok = self.expect(IDENT)
                self.declare(pname_tok.value, ptype, pname_tok)
                params.append(Param(ptype, pname_tok.value, self._span_from(ptok)))
                if self.at(PUNCT, ","):
                    self.advance()
                    continue
                break
        self.expect(PUNCT, ")")
        body = self.parse_block()
        self.scopes.pop()
        return MethodAst(return_type, name, params, body, self._span_from(start))

    def parse_block(self) -> Block:
        start = self.expect(PUNCT, "{")
        self.scopes.append({})
        stmts: list[Stmt] = []
        while not self.at(PUNCT, "}"):
            if self.at(EOF):
                raise ParseError("expected '}'", self.cur)
            stmts.append(self.parse_stmt())
        self.expect(PUNCT, "}")
        self.scopes.pop()
        return Block(stmts, self._span_from(start))

    # ---------------------------------------------------------- statements

    def parse_stmt(self) -> Stmt:
        tok = self.cur
        if tok.kind == KW:
            if tok.value == "if":
                return self.parse_if()
            if tok.value == "while":
                return self.parse_while()
            if tok.value == "for":
                return self.parse_for()
            if tok.value == "try":
                return self.parse_try()
            if tok.value == "return":
                self.advance()
                value = None
                if not self.at(PUNCT, ";"):
                    value = self.parse_expr()
                self.expect(PUNCT, ";")
                return Return(value, self._span_from(tok))
            if tok.value == "throw":
                self.advance()
                value = self.parse_expr()
                self.expect(PUNCT, ";")
                return Throw(value, self._span_from(tok))
            if tok.value in ("true", "false", "new"):
                expr = self.parse_expr()
                self.expect(PUNCT, ";")
                return ExprStmt(expr, self._span_from(tok))
            raise ParseError("unexpected keyword", tok)
        if tok.kind == IDENT:
            nxt = self.peek()
            if nxt.kind == IDENT:
                return self.parse_var_decl()
            if nxt.kind == OP and nxt.value == "=":
                stmt = self.parse_assign()
                self.expect(PUNCT, ";")
                return stmt
        expr = self.parse_expr()
        self.expect(PUNCT, ";")
        return ExprStmt(expr, self._span_from(tok))

    def parse_var_decl(self) -> VarDecl:
        start = self.cur
        var_type = self.expect(IDENT).value
        name_tok = self.expect(IDENT)
        init = None
        if self.at(OP, "="):
            self.advance()
            init = self.parse_expr()
        self.expect(PUNCT, ";")
        # Declared after the initializer: "int x = x;" must not resolve.
        self.declare(name_tok.value, var_type, name_tok)
        return VarDecl(var_type, name_tok.value, init, self._span_from(start))

    def parse_assign(self) -> Assign:
        start = self.cur
        name_tok = self.expect(IDENT)
        var_type = self.resolve(name_tok.value, name_tok)
        self.expect(OP, "=")
        value = self.parse_expr()
        return Assign(name_tok.value, value, var_type, self._span_from(start))

    def parse_if(self) -> If:
        start = self.expect(KW, "if")
        self.expect(PUNCT, "(")
        cond = self.parse_expr()
        self.expect(PUNCT, ")")
        then_block = self.parse_block()
        else_block = None
        if self.at(KW, "else"):
            self.advance()
            else_block = self.parse_block()
        return If(cond, then_block, else_block, self._span_from(start))

    def parse_while(self) -> While:
        start = self.expect(KW, "while")
        self.expect(PUNCT, "(")
        cond = self.parse_expr()
        self.expect(PUNCT, ")")
        body = self.parse_block()
        return While(cond, body, self._span_from(start))

    def parse_for(self) -> For:
        start = self.expect(KW, "for")
        self.expect(PUNCT, "(")
        self.scopes.append({})  # header scope covers init, cond, update, body
        init = self.parse_var_decl()
        cond = self.parse_expr()
        self.expect(PUNCT, ";")
        update = self.parse_assign()
        self.expect(PUNCT, ")")
        body = self.parse_block()
        self.scopes.pop()
        return For(init, cond, update, body, self._span_from(start))

    def parse_try(self) -> TryCatchFinally:
        start = self.expect(KW, "try")
        try_block = self.parse_block()
        catches: list[CatchClause] = []
        while self.at(KW, "catch"):
            ctok = self.advance()
            self.expect(PUNCT, "(")
            exc_type = self.expect(IDENT).value
            name_tok = self.expect(IDENT)
            self.expect(PUNCT, ")")
            self.scopes.append({})
            self.declare(name_tok.value, exc_type, name_tok)
            body = self.parse_block()
            self.scopes.pop()
            catches.append(CatchClause(exc_type, name_tok.value, body, self._span_from(ctok)))
        if not catches:
            raise ParseError("try requires at least one catch clause", self.cur)
        finally_block = None
        if self.at(KW, "finally"):
            self.advance()
            finally_block = self.parse_block()
        return TryCatchFinally(try_block, catches, finally_block, self._span_from(start))

    # --------------------------------------------------------- expressions

    def parse_expr(self, min_prec: int = 1) -> Expr:
        left = self.parse_postfix()
        while self.at(OP) and self.cur.value in _PRECEDENCE and _PRECEDENCE[self.cur.value] >= min_prec:
            op_tok = self.advance()
            right = self.parse_expr(_PRECEDENCE[op_tok.value] + 1)
            node = InfixOperator(op_tok.value, left, right)
            node.result_type = _infix_result_type(op_tok.value, left, right)
            node.span = Span(_expr_span(left).start, _expr_span(right).end)
            left = node
        return left

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self.at(PUNCT, "."):
            self.advance()
            name = self.expect(IDENT).value
            self.expect(PUNCT, "(")
            args = self.parse_args()
            close = self.expect(PUNCT, ")")
            receiver_class = expr_type(expr)
            expr = Call(
                expr, receiver_class, name, args,
                [expr_type(a) for a in args],
                Span(_expr_span(expr).start, close.end),
            )
        return expr

    def parse_args(self) -> list[Expr]:
        args: list[Expr] = []
        if not self.at(PUNCT, ")"):
            while True:
                args.append(self.parse_expr())
                if self.at(PUNCT, ","):
                    self.advance()
                    continue
                break
        return args

    def parse_primary(self) -> Expr:
        tok = self.cur
        if tok.kind == INT:
            self.advance()
            return Literal("int", tok.value, Span(tok.start, tok.end))
        if tok.kind == STRING:
            self.advance()
            return Literal("String", tok.value, Span(tok.start, tok.end))
        if tok.kind == KW and tok.value in ("true", "false"):
            self.advance()
            return Literal("boolean", tok.value, Span(tok.start, tok.end))
        if tok.kind == KW and tok.value == "new":
            self.advance()
            cls = self.expect(IDENT).value
            self.expect(PUNCT, "(")
            args = self.parse_args()
            close = self.expect(PUNCT, ")")
            return New(cls, args, [expr_type(a) for a in args], Span(tok.start, close.end))
        if tok.kind == IDENT:
            self.advance()
            if self.at(PUNCT, "("):
                self.advance()
                args = self.parse_args()
                close = self.expect(PUNCT, ")")
                return Call(None, "?", tok.value, args,
                            [expr_type(a) for a in args], Span(tok.start, close.end))
            var_type = self.resolve(tok.value, tok)
            return VarRef(tok.value, var_type, Span(tok.start, tok.end))
        if tok.kind == PUNCT and tok.value == "(":
            self.advance()
            inner = self.parse_expr()
            self.expect(PUNCT, ")")
            return inner
        raise ParseError("expected an expression", tok)


def _expr_span(e: Expr) -> Span:
    return e.span  # type: ignore[attr-defined]


# ------------------------------------------------------------ static checks


def can_complete_normally(stmt: Stmt) -> bool:
    """Whether control can flow past the statement (no break/continue in MiniJ)."""
    if isinstance(stmt, (Return, Throw)):
        return False
    if isinstance(stmt, If):
        if stmt.else_block is None:
            return True
        return block_completes(stmt.then_block) or block_completes(stmt.else_block)
    if isinstance(stmt, (While, For)):
        return True  # the predicate may be false on first evaluation
    if isinstance(stmt, TryCatchFinally):
        body_done = block_completes(stmt.try_block) or any(
            block_completes(c.body) for c in stmt.catches
        )
        if stmt.finally_block is not None:
            return body_done and block_completes(stmt.finally_block)
        return body_done
    return True


def block_completes(block: Block) -> bool:
    return all(can_complete_normally(s) for s in block.stmts)


def contains_action(node) -> bool:
    """True when a subtree yields at least one action node in the graph."""
    if isinstance(node, (Call, New, InfixOperator)):
        return True
    if isinstance(node, Assign):
        return True
    if isinstance(node, VarDecl):
        return node.init is not None
    if isinstance(node, (Literal, VarRef)) or node is None:
        return False
    if isinstance(node, Block):
        return any(contains_action(s) for s in node.stmts)
    if isinstance(node, ExprStmt):
        return contains_action(node.expr)
    if isinstance(node, If):
        return (contains_action(node.cond) or contains_action(node.then_block)
                or (node.else_block is not None and contains_action(node.else_block)))
    if isinstance(node, While):
        return contains_action(node.cond) or contains_action(node.body)
    if isinstance(node, For):
        return True  # init has a declaration, update is an assignment
    if isinstance(node, TryCatchFinally):
        return (contains_action(node.try_block)
                or any(contains_action(c.body) for c in node.catches)
                or (node.finally_block is not None and contains_action(node.finally_block)))
    if isinstance(node, Return):
        return node.value is not None and contains_action(node.value)
    if isinstance(node, Throw):
        return contains_action(node.value)
    return False


def _check_block(block: Block) -> None:
    reachable = True
    for stmt in block.stmts:
        if not reachable:
            raise ParseError("unreachable statement")
        _check_stmt(stmt)
        if not can_complete_normally(stmt):
            reachable = False


def _check_stmt(stmt: Stmt) -> None:
    if isinstance(stmt, If):
        _check_block(stmt.then_block)
        if stmt.else_block is not None:
            _check_block(stmt.else_block)
    elif isinstance(stmt, While):
        _check_block(stmt.body)
    elif isinstance(stmt, For):
        if not block_completes(stmt.body):
            raise ParseError("unreachable for-loop update")
        _check_block(stmt.body)
    elif isinstance(stmt, TryCatchFinally):
        if not contains_action(stmt.try_block):
            raise ParseError("unreachable catch clause: try block performs no action")
        _check_block(stmt.try_block)
        for c in stmt.catches:
            _check_block(c.body)
        if stmt.finally_block is not None:
            _check_block(stmt.finally_block)


def check_static(method: MethodAst) -> None:
    _check_block(method.body)


# -------------------------------------------------------------- entry points


def parse_method(tokens: list[Token]) -> MethodAst:
    """Parse one method declaration; the token list must end at EOF."""
    p = _Parser(tokens)
    method = p.parse_method()
    if not p.at(EOF):
        raise ParseError("trailing input after method", p.cur)
    check_static(method)
    return method


def parse_method_text(source: str) -> MethodAst:
    return parse_method(tokenize(source))


def split_methods(source: str) -> list[str]:
    """Slice a file into its top-level method texts via brace balancing."""
    tokens = tokenize(source)
    texts: list[str] = []
    depth = 0
    start: int | None = None
    for tok in tokens:
        if tok.kind == EOF:
            break
        if start is None:
            start = tok.start
        if tok.kind == PUNCT and tok.value == "{":
            depth += 1
        elif tok.kind == PUNCT and tok.value == "}":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced '}'", tok)
            if depth == 0:
                texts.append(source[start:tok.end])
                start = None
    if start is not None or depth != 0:
        raise ParseError("unterminated method body", tokens[-1])
    return texts


def parse_source(source: str) -> list[MethodAst]:
    return [parse_method_text(text) for text in split_methods(source)]
