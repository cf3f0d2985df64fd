"""Canonical MiniJ printer.

Infix expressions are printed fully parenthesized so the output
reparses to a structurally identical tree no matter the original
grouping.
"""

from __future__ import annotations

from .astnodes import (
    Assign,
    Block,
    Call,
    Expr,
    ExprStmt,
    For,
    If,
    InfixOperator,
    Literal,
    MethodAst,
    New,
    Return,
    Stmt,
    Throw,
    TryCatchFinally,
    VarDecl,
    VarRef,
    While,
)

_STRING_ESCAPES = [("\\", "\\\\"), ('"', '\\"'), ("\n", "\\n"), ("\t", "\\t")]


def _escape(text: str) -> str:
    for raw, enc in _STRING_ESCAPES:
        text = text.replace(raw, enc)
    return text


def print_expr(e: Expr) -> str:
    if isinstance(e, Literal):
        if e.type_name == "String":
            return f'"{_escape(e.value)}"'
        return e.value
    if isinstance(e, VarRef):
        return e.name
    if isinstance(e, Call):
        args = ", ".join(print_expr(a) for a in e.args)
        if e.receiver is None:
            return f"{e.name}({args})"
        return f"{print_expr(e.receiver)}.{e.name}({args})"
    if isinstance(e, New):
        args = ", ".join(print_expr(a) for a in e.args)
        return f"new {e.class_name}({args})"
    if isinstance(e, InfixOperator):
        return f"({print_expr(e.left)} {e.op} {print_expr(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


def _decl_text(d: VarDecl) -> str:
    if d.init is None:
        return f"{d.var_type} {d.name};"
    return f"{d.var_type} {d.name} = {print_expr(d.init)};"


def _assign_text(a: Assign) -> str:
    return f"{a.name} = {print_expr(a.value)}"


def print_stmt(stmt: Stmt, indent: int = 0) -> str:
    pad = "    " * indent
    if isinstance(stmt, VarDecl):
        return pad + _decl_text(stmt)
    if isinstance(stmt, Assign):
        return pad + _assign_text(stmt) + ";"
    if isinstance(stmt, If):
        out = pad + f"if ({print_expr(stmt.cond)}) " + print_block(stmt.then_block, indent)
        if stmt.else_block is not None:
            out += " else " + print_block(stmt.else_block, indent)
        return out
    if isinstance(stmt, While):
        return pad + f"while ({print_expr(stmt.cond)}) " + print_block(stmt.body, indent)
    if isinstance(stmt, For):
        header = f"for ({_decl_text(stmt.init)} {print_expr(stmt.cond)}; {_assign_text(stmt.update)}) "
        return pad + header + print_block(stmt.body, indent)
    if isinstance(stmt, TryCatchFinally):
        out = pad + "try " + print_block(stmt.try_block, indent)
        for c in stmt.catches:
            out += f" catch ({c.exc_type} {c.name}) " + print_block(c.body, indent)
        if stmt.finally_block is not None:
            out += " finally " + print_block(stmt.finally_block, indent)
        return out
    if isinstance(stmt, Return):
        if stmt.value is None:
            return pad + "return;"
        return pad + f"return {print_expr(stmt.value)};"
    if isinstance(stmt, Throw):
        return pad + f"throw {print_expr(stmt.value)};"
    if isinstance(stmt, ExprStmt):
        return pad + print_expr(stmt.expr) + ";"
    raise TypeError(f"not a statement: {stmt!r}")


def print_block(block: Block, indent: int = 0) -> str:
    if not block.stmts:
        return "{}"
    inner = "\n".join(print_stmt(s, indent + 1) for s in block.stmts)
    return "{\n" + inner + "\n" + "    " * indent + "}"


def print_method(m: MethodAst) -> str:
    params = ", ".join(f"{p.var_type} {p.name}" for p in m.params)
    return f"{m.return_type} {m.name}({params}) " + print_block(m.body, 0)
