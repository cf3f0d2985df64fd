"""Method AST to σ0/σ1 heterogeneous graph conversion.

σ0 holds control flow (dep, throw) and data flow (receiver, parameter,
definition, condition, qualifier). σ1 keeps the same node set, labels
every node with its AST kind, and adds first_use, last_use, alias, and
control_dep edges. Node ids are assigned in construction order with
entry always 0 and exit always 1, so builds are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .frontend.astnodes import (
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
    Span,
    Stmt,
    Throw,
    TryCatchFinally,
    VarDecl,
    VarRef,
    While,
)

SIGMA0 = "sigma0"
SIGMA1 = "sigma1"

NODE_TYPES = ("entry", "exit", "data", "action", "control")

CONTROL_EDGE_KINDS = frozenset({"dep", "throw"})
DATA_EDGE_KINDS = frozenset({"receiver", "parameter", "definition", "condition", "qualifier"})
SIGMA1_EDGE_KINDS = frozenset({"first_use", "last_use", "alias", "control_dep"})
SIGMA0_EDGE_KINDS = CONTROL_EDGE_KINDS | DATA_EDGE_KINDS
ALL_EDGE_KINDS = SIGMA0_EDGE_KINDS | SIGMA1_EDGE_KINDS

# Types whose variables never alias (everything else is a reference).
PRIMITIVE_VALUE_TYPES = frozenset({"int", "boolean"})


class InternalError(Exception):
    """AST invariant violated during graph construction."""


@dataclass
class SigmaNode:
    id: int
    ntype: str
    feature: str
    ast_kind: str | None = None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class SigmaEdge:
    src: int
    etype: str
    dst: int


@dataclass
class SigmaGraph:
    method_id: str
    flavor: str
    nodes: list[SigmaNode] = field(default_factory=list)
    edges: list[SigmaEdge] = field(default_factory=list)

    def nodes_of_type(self, ntype: str) -> list[SigmaNode]:
        return [n for n in self.nodes if n.ntype == ntype]

    def out_edges(self, node_id: int, etype: str | None = None) -> list[SigmaEdge]:
        return [e for e in self.edges if e.src == node_id and (etype is None or e.etype == etype)]

    def in_edges(self, node_id: int, etype: str | None = None) -> list[SigmaEdge]:
        return [e for e in self.edges if e.dst == node_id and (etype is None or e.etype == etype)]


def call_feature(receiver_class: str, name: str, arg_types: list[str]) -> str:
    return f"{receiver_class}.{name}#" + "".join(f"{t}#" for t in arg_types)


class _Builder:
    def __init__(self) -> None:
        self.nodes: list[SigmaNode] = []
        self.core: list[SigmaEdge] = []     # σ0 edges
        self.aug: list[SigmaEdge] = []      # σ1-only edges
        self.frontier: list[int] = []
        self.scopes: list[dict[str, int]] = []
        self.catch_stack: list[list[int]] = []
        self.finally_stack: list[int] = []
        self.ref_copies: list[tuple[int, int]] = []   # (dst var node, src var node)
        self.var_types: dict[int, str] = {}

    # ------------------------------------------------------------ plumbing

    def add_node(self, ntype: str, feature: str, ast_kind: str, span: Span | None = None) -> int:
        nid = len(self.nodes)
        self.nodes.append(SigmaNode(nid, ntype, feature, ast_kind, span))
        return nid

    def edge(self, src: int, etype: str, dst: int) -> None:
        self.core.append(SigmaEdge(src, etype, dst))

    def add_action(self, feature: str, ast_kind: str, span: Span | None = None) -> int:
        nid = self.add_node("action", feature, ast_kind, span)
        # Any action inside a try block may raise into every catch in scope.
        for catches in self.catch_stack:
            for cid in catches:
                self.core.append(SigmaEdge(nid, "throw", cid))
        self.thread_to(nid)
        return nid

    def thread_to(self, nid: int) -> None:
        for prev in self.frontier:
            self.edge(prev, "dep", nid)
        self.frontier = [nid]

    def declare(self, name: str, var_type: str, ast_kind: str, span: Span | None = None) -> int:
        nid = self.add_node("data", var_type, ast_kind, span)
        self.scopes[-1][name] = nid
        self.var_types[nid] = var_type
        return nid

    def lookup(self, name: str) -> int:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        raise InternalError(f"unresolved variable {name!r} reached the graph builder")

    def abrupt_exit_target(self) -> int:
        return self.finally_stack[-1] if self.finally_stack else 1

    # --------------------------------------------------------- expressions

    def walk_expr(self, e: Expr) -> int:
        """Evaluate an expression; returns the node holding its value."""
        if isinstance(e, Literal):
            return self.add_node("data", e.type_name, "Literal", e.span)
        if isinstance(e, VarRef):
            return self.lookup(e.name)
        if isinstance(e, Call):
            recv = self.walk_expr(e.receiver) if e.receiver is not None else None
            args = [self.walk_expr(a) for a in e.args]
            nid = self.add_action(call_feature(e.receiver_class, e.name, e.arg_types), "Call", e.span)
            if recv is not None:
                self.edge(recv, "receiver", nid)
            for a in args:
                self.edge(a, "parameter", nid)
            return nid
        if isinstance(e, New):
            args = [self.walk_expr(a) for a in e.args]
            nid = self.add_action(call_feature(e.class_name, "new", e.arg_types), "New", e.span)
            for a in args:
                self.edge(a, "parameter", nid)
            return nid
        if isinstance(e, InfixOperator):
            left = self.walk_expr(e.left)
            right = self.walk_expr(e.right)
            nid = self.add_action(e.op, "InfixOperator", e.span)
            self.edge(left, "parameter", nid)
            self.edge(right, "parameter", nid)
            return nid
        raise InternalError(f"unknown expression node {e!r}")

    def define_from(self, value_node: int, var_node: int, stmt_kind: str, span: Span | None) -> None:
        """Route a computed value into a variable's data node."""
        if self.nodes[value_node].ntype == "action":
            # The producing action is the definition source directly.
            self.core.append(SigmaEdge(value_node, "definition", var_node))
            return
        copy = self.add_action("=", stmt_kind, span)
        self.edge(value_node, "parameter", copy)
        self.core.append(SigmaEdge(copy, "definition", var_node))

    # ---------------------------------------------------------- statements

    def walk_block(self, block: Block) -> None:
        self.scopes.append({})
        for stmt in block.stmts:
            self.walk_stmt(stmt)
        self.scopes.pop()

    def _governed(self, governor: int, mark: int) -> None:
        for node in self.nodes[mark:]:
            if node.ntype in ("action", "control"):
                self.aug.append(SigmaEdge(governor, "control_dep", node.id))

    def walk_stmt(self, stmt: Stmt) -> None:
        if isinstance(stmt, VarDecl):
            init_val = self.walk_expr(stmt.init) if stmt.init is not None else None
            var_node = self.declare(stmt.name, stmt.var_type, "VarDecl", stmt.span)
            if init_val is not None:
                self.define_from(init_val, var_node, "VarDecl", stmt.span)
            if stmt.init is not None and isinstance(stmt.init, VarRef):
                self.ref_copies.append((var_node, init_val))
            return
        if isinstance(stmt, Assign):
            value = self.walk_expr(stmt.value)
            var_node = self.lookup(stmt.name)
            self.define_from(value, var_node, "Assign", stmt.span)
            if isinstance(stmt.value, VarRef):
                self.ref_copies.append((var_node, value))
            return
        if isinstance(stmt, ExprStmt):
            self.walk_expr(stmt.expr)
            return
        if isinstance(stmt, If):
            cond_val = self.walk_expr(stmt.cond)
            if_node = self.add_node("control", "if", "If", stmt.span)
            self.thread_to(if_node)
            self.core.append(SigmaEdge(cond_val, "condition", if_node))
            mark = len(self.nodes)
            self.frontier = [if_node]
            self.walk_block(stmt.then_block)
            then_frontier = self.frontier
            if stmt.else_block is not None:
                self.frontier = [if_node]
                self.walk_block(stmt.else_block)
                else_frontier = self.frontier
            else:
                else_frontier = [if_node]
            self._governed(if_node, mark)
            self.frontier = then_frontier + else_frontier
            return
        if isinstance(stmt, While):
            cond_val = self.walk_expr(stmt.cond)
            w_node = self.add_node("control", "while", "While", stmt.span)
            self.thread_to(w_node)
            self.core.append(SigmaEdge(cond_val, "condition", w_node))
            mark = len(self.nodes)
            self.frontier = [w_node]
            self.walk_block(stmt.body)
            for nid in self.frontier:
                if nid != w_node:   # empty body: no statement ends the iteration
                    self.edge(nid, "dep", w_node)
            self._governed(w_node, mark)
            self.frontier = [w_node]
            return
        if isinstance(stmt, For):
            self.scopes.append({})
            self.walk_stmt(stmt.init)
            cond_val = self.walk_expr(stmt.cond)
            f_node = self.add_node("control", "for", "For", stmt.span)
            self.thread_to(f_node)
            self.core.append(SigmaEdge(cond_val, "condition", f_node))
            mark = len(self.nodes)
            self.frontier = [f_node]
            self.walk_block(stmt.body)
            self.walk_stmt(stmt.update)
            for nid in self.frontier:
                if nid != f_node:
                    self.edge(nid, "dep", f_node)
            self._governed(f_node, mark)
            self.scopes.pop()
            self.frontier = [f_node]
            return
        if isinstance(stmt, Return):
            if stmt.value is not None:
                self.walk_expr(stmt.value)
            target = self.abrupt_exit_target()
            for prev in self.frontier:
                self.edge(prev, "dep", target)
            self.frontier = []
            return
        if isinstance(stmt, Throw):
            self.walk_expr(stmt.value)
            target = self.abrupt_exit_target()
            for prev in self.frontier:
                self.edge(prev, "dep", target)
            self.frontier = []
            return
        if isinstance(stmt, TryCatchFinally):
            self.walk_try(stmt)
            return
        raise InternalError(f"unknown statement node {stmt!r}")

    def walk_try(self, stmt: TryCatchFinally) -> None:
        catch_ids: list[int] = []
        param_scopes: list[tuple[str, int]] = []
        for clause in stmt.catches:
            cid = self.add_node("control", "catch", "TryCatchFinally", clause.span)
            pid = self.add_node("data", clause.exc_type, "VarDecl", clause.span)
            self.var_types[pid] = clause.exc_type
            self.core.append(SigmaEdge(cid, "definition", pid))
            catch_ids.append(cid)
            param_scopes.append((clause.name, pid))
        f_node = None
        if stmt.finally_block is not None:
            f_node = self.add_node("control", "finally", "TryCatchFinally", stmt.span)

        entry_frontier = self.frontier
        self.catch_stack.append(catch_ids)
        if f_node is not None:
            self.finally_stack.append(f_node)
        self.frontier = entry_frontier
        self.walk_block(stmt.try_block)
        self.catch_stack.pop()
        after: list[int] = list(self.frontier)

        for clause, cid, (pname, pid) in zip(stmt.catches, catch_ids, param_scopes):
            self.frontier = [cid]
            self.scopes.append({pname: pid})
            mark = len(self.nodes)
            self.walk_block(clause.body)
            self._governed(cid, mark)
            self.scopes.pop()
            after.extend(self.frontier)

        if f_node is not None:
            self.finally_stack.pop()
            for nid in after:
                self.edge(nid, "dep", f_node)
            self.frontier = [f_node]
            mark = len(self.nodes)
            self.walk_block(stmt.finally_block)
            self._governed(f_node, mark)
        else:
            self.frontier = after

    # -------------------------------------------------------------- method

    def build(self, ast: MethodAst) -> None:
        entry = self.add_node("entry", "ENTRY", "Method", ast.span)
        self.add_node("exit", "EXIT", "Method", ast.span)
        self.scopes.append({})
        for p in ast.params:
            self.declare(p.name, p.var_type, "VarDecl", p.span)
        self.frontier = [entry]
        self.walk_block(ast.body)
        for nid in self.frontier:
            self.edge(nid, "dep", 1)
        self.scopes.pop()
        self._augment_uses()
        self._augment_alias()

    def _augment_uses(self) -> None:
        var_ids = sorted(self.var_types)
        uses: dict[int, list[int]] = {v: [] for v in var_ids}
        for e in self.core:
            if e.etype in ("receiver", "parameter", "condition") and e.src in uses:
                uses[e.src].append(e.dst)
        for v in var_ids:
            seq = uses[v]
            if not seq:
                continue
            self.aug.append(SigmaEdge(v, "first_use", seq[0]))
            for a, b in zip(seq, seq[1:]):
                self.aug.append(SigmaEdge(a, "last_use", b))

    def _augment_alias(self) -> None:
        parent: dict[int, int] = {}
        members: set[int] = set()

        def find(x: int) -> int:
            while parent.get(x, x) != x:
                x = parent[x]
            return x

        def union(a: int, b: int) -> None:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for dst, src in self.ref_copies:
            if (self.var_types.get(dst) in PRIMITIVE_VALUE_TYPES
                    or self.var_types.get(src) in PRIMITIVE_VALUE_TYPES):
                continue
            union(dst, src)
            members.update((dst, src))
        groups: dict[int, list[int]] = {}
        for v in sorted(members):
            groups.setdefault(find(v), []).append(v)
        for group in groups.values():
            for i, a in enumerate(group):
                for b in group[i + 1:]:
                    self.aug.append(SigmaEdge(a, "alias", b))
                    self.aug.append(SigmaEdge(b, "alias", a))


def _built(ast: MethodAst) -> _Builder:
    b = _Builder()
    b.build(ast)
    return b


def build_sigma0(ast: MethodAst, method_id: str = "") -> SigmaGraph:
    b = _built(ast)
    nodes = [SigmaNode(n.id, n.ntype, n.feature, None, n.span) for n in b.nodes]
    return SigmaGraph(method_id or ast.name, SIGMA0, nodes, list(b.core))


def build_sigma1(ast: MethodAst, method_id: str = "") -> SigmaGraph:
    b = _built(ast)
    nodes = [SigmaNode(n.id, n.ntype, n.feature, n.ast_kind, n.span) for n in b.nodes]
    return SigmaGraph(method_id or ast.name, SIGMA1, nodes, list(b.core) + list(b.aug))


# ------------------------------------------------------------------ validity


def validate_graph(g: SigmaGraph) -> list[str]:
    """Invariant scan; returns one line per violation, empty when valid."""
    issues: list[str] = []
    ids = [n.id for n in g.nodes]
    if ids != list(range(len(g.nodes))):
        issues.append("NodeIds: ids are not 0..n-1 in order")
    by_id = {n.id: n for n in g.nodes}

    entries = [n for n in g.nodes if n.ntype == "entry"]
    exits = [n for n in g.nodes if n.ntype == "exit"]
    if len(entries) != 1:
        issues.append(f"DuplicateEntry: {len(entries)} entry nodes")
    if len(exits) != 1:
        issues.append(f"DuplicateExit: {len(exits)} exit nodes")
    for n in entries:
        if n.feature != "ENTRY":
            issues.append(f"EntryFeature: {n.feature!r}")
    for n in exits:
        if n.feature != "EXIT":
            issues.append(f"ExitFeature: {n.feature!r}")
    for n in g.nodes:
        if n.ntype not in NODE_TYPES:
            issues.append(f"NodeType: node {n.id} has unknown type {n.ntype!r}")
        if g.flavor == SIGMA0 and n.ast_kind is not None:
            issues.append(f"AstKindInSigma0: node {n.id}")
        if g.flavor == SIGMA1 and n.ast_kind is None:
            issues.append(f"MissingAstKind: node {n.id}")

    allowed = SIGMA0_EDGE_KINDS if g.flavor == SIGMA0 else ALL_EDGE_KINDS
    for e in g.edges:
        if e.src not in by_id or e.dst not in by_id:
            issues.append(f"DanglingEdge: {e.src}-{e.etype}->{e.dst}")
            continue
        if e.etype not in allowed:
            issues.append(f"EdgeKind: {e.etype!r} not allowed in {g.flavor}")
            continue
        s, d = by_id[e.src], by_id[e.dst]
        if e.etype in CONTROL_EDGE_KINDS and ("data" in (s.ntype, d.ntype)):
            issues.append(f"ControlEdgeOnData: {e.src}-{e.etype}->{e.dst}")
        if e.etype in ("receiver", "parameter", "condition"):
            if s.ntype not in ("data", "action") or d.ntype not in ("action", "control"):
                issues.append(f"DataEdgeEndpoints: {e.src}-{e.etype}->{e.dst}")
        if e.etype == "definition" and d.ntype != "data":
            issues.append(f"DefinitionTarget: {e.src}-{e.etype}->{e.dst}")

    if entries and exits and len(entries) == 1:
        entry_id = entries[0].id
        dep_out = [e for e in g.edges if e.src == entry_id and e.etype == "dep"]
        if len(dep_out) != 1:
            issues.append(f"EntryOutDegree: {len(dep_out)} dep edges from entry")
        for n in g.nodes:
            if n.ntype == "control" and n.feature == "if":
                k = sum(1 for e in g.edges if e.src == n.id and e.etype == "dep")
                if k != 2:
                    issues.append(f"BranchArity: if node {n.id} has {k} dep out-edges")
        # Every action/control node must be reachable over control edges.
        adj: dict[int, list[int]] = {}
        for e in g.edges:
            if e.etype in CONTROL_EDGE_KINDS:
                adj.setdefault(e.src, []).append(e.dst)
        seen = {entry_id}
        stack = [entry_id]
        while stack:
            cur = stack.pop()
            for nxt in adj.get(cur, []):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        for n in g.nodes:
            if n.ntype in ("action", "control", "exit") and n.id not in seen:
                issues.append(f"Unreachable: node {n.id} ({n.ntype} {n.feature!r})")
    return issues
