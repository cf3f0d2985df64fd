"""MiniJ language frontend: lexing, parsing, printing, generation."""

from .astnodes import (
    AST_KINDS,
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
    Node,
    Param,
    Return,
    SourceUnit,
    Span,
    Stmt,
    Throw,
    TryCatchFinally,
    VarDecl,
    VarRef,
    While,
)
from .generate import (
    generate_family_method,
    generate_free_method,
    generate_package,
    generate_tiny_method,
    write_corpus,
)
from .lexer import KEYWORDS, LexError, Token, tokenize
from .parser import (
    ParseError,
    UnresolvedVariable,
    expr_type,
    parse_method,
    parse_method_text,
    parse_source,
    split_methods,
)
from .pretty import print_method

__all__ = [
    "AST_KINDS", "Assign", "Block", "Call", "CatchClause", "Expr", "ExprStmt",
    "For", "If", "InfixOperator", "KEYWORDS", "LexError", "Literal",
    "MethodAst", "New", "Node", "Param", "ParseError", "Return", "SourceUnit",
    "Span", "Stmt", "Throw", "Token", "TryCatchFinally", "UnresolvedVariable",
    "VarDecl", "VarRef", "While", "expr_type", "generate_family_method",
    "generate_free_method", "generate_package", "generate_tiny_method",
    "parse_method", "parse_method_text", "parse_source", "print_method",
    "split_methods", "tokenize", "write_corpus",
]
