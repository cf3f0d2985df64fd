"""Seeded random MiniJ program generator.

Two modes:

* family methods: names follow verb families (get/set/compute/...) whose
  bodies call correspondingly named methods, so a corpus carries real
  signal linking graph structure to method names;
* free-form methods: exercise every construct (nested control flow,
  try/catch/finally, throw) for validation and fuzz tests.

All choices run through random.Random, so a seed fixes the corpus.
"""

from __future__ import annotations

import random

NOUNS = [
    "item", "user", "name", "id", "count", "value", "data", "list",
    "node", "key", "buffer", "config", "token", "file", "path", "size",
    "index", "flag", "state", "cache", "entry", "record", "field", "label",
]

CLASSES = [
    "Store", "Repo", "Service", "Manager", "Handler", "Worker", "Channel",
    "Session", "Registry", "Builder", "Reader", "Writer", "Queue", "Pool",
]

EXCEPTIONS = ["Error", "Fault", "Timeout"]

FAMILIES = ["get", "set", "compute", "find", "check", "make", "handle"]


def _cap(word: str) -> str:
    return word[0].upper() + word[1:]


def camel(subtokens: list[str]) -> str:
    return subtokens[0] + "".join(_cap(t) for t in subtokens[1:])


class _Names:
    """Fresh identifiers that never collide (shadowing is illegal)."""

    def __init__(self, rng: random.Random):
        self.rng = rng
        self.used: set[str] = set()

    def fresh(self, stem: str) -> str:
        name = stem
        k = 2
        while name in self.used:
            name = f"{stem}{k}"
            k += 1
        self.used.add(name)
        return name


# ------------------------------------------------------------------ families


def _gen_get(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    cls = rng.choice(CLASSES)
    src = names.fresh("src")
    out = names.fresh("out")
    rtype = rng.choice(["int", "String", cls])
    sub = ["get", noun] + ([rng.choice(NOUNS)] if rng.random() < 0.4 else [])
    getter = camel(["get", noun])
    lines = [f"{rtype} {out} = {src}.{getter}();"]
    if rng.random() < 0.3:
        check = names.fresh("ok")
        lines.insert(0, f"boolean {check} = {src}.{camel(['has', noun])}();")
    lines.append(f"return {out};")
    body = "\n    ".join(lines)
    return sub, f"{rtype} {camel(sub)}({cls} {src}) {{\n    {body}\n}}"


def _gen_set(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    cls = rng.choice(CLASSES)
    obj = names.fresh("obj")
    val = names.fresh("val")
    vtype = rng.choice(["int", "String", "boolean"])
    sub = ["set", noun] + ([rng.choice(NOUNS)] if rng.random() < 0.4 else [])
    setter = camel(["set", noun])
    lines = []
    if rng.random() < 0.35:
        lines.append(f"{obj}.{camel(['clear', noun])}();")
    lines.append(f"{obj}.{setter}({val});")
    body = "\n    ".join(lines)
    return sub, f"void {camel(sub)}({cls} {obj}, {vtype} {val}) {{\n    {body}\n}}"


def _gen_compute(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    a = names.fresh("a")
    b = names.fresh("b")
    acc = names.fresh("total")
    i = names.fresh("i")
    sub = ["compute", noun] + ([rng.choice(["sum", "total", "size"])] if rng.random() < 0.5 else [])
    op = rng.choice(["+", "*", "-"])
    loop = rng.random() < 0.6
    lines = [f"int {acc} = {a} {op} {rng.randint(1, 9)};"]
    if loop:
        lines.append(f"for (int {i} = 0; {i} < {b}; {i} = {i} + 1) {{")
        lines.append(f"    {acc} = {acc} + {i};")
        lines.append("}")
    else:
        lines.append(f"{acc} = {acc} * {b};")
    lines.append(f"return {acc};")
    body = "\n    ".join(lines)
    return sub, f"int {camel(sub)}(int {a}, int {b}) {{\n    {body}\n}}"


def _gen_find(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    cls = rng.choice(CLASSES)
    repo = names.fresh("repo")
    cur = names.fresh("cur")
    sub = ["find", noun] + ([rng.choice(["first", "next", "last"])] if rng.random() < 0.4 else [])
    lines = [
        f"{cls} {cur} = {repo}.{camel(['first', noun])}();",
        f"while ({repo}.{camel(['has', noun])}()) {{",
        f"    {cur} = {repo}.{camel(['next', noun])}();",
        "}",
        f"return {cur};",
    ]
    body = "\n    ".join(lines)
    return sub, f"{cls} {camel(sub)}({cls} {repo}) {{\n    {body}\n}}"


def _gen_check(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    a = names.fresh("n")
    lim = names.fresh("limit")
    sub = ["check", noun] + ([rng.choice(["valid", "bound", "limit"])] if rng.random() < 0.5 else [])
    cmp_op = rng.choice(["<", ">", "<=", ">=", "=="])
    lines = [
        f"if ({a} {cmp_op} {lim}) {{",
        "    return true;",
        "}",
        "return false;",
    ]
    body = "\n    ".join(lines)
    return sub, f"boolean {camel(sub)}(int {a}, int {lim}) {{\n    {body}\n}}"


def _gen_make(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    cls = rng.choice(CLASSES)
    label = names.fresh("label")
    obj = names.fresh("made")
    sub = ["make", noun] + ([rng.choice(NOUNS)] if rng.random() < 0.3 else [])
    lines = [f"{cls} {obj} = new {cls}({label});"]
    if rng.random() < 0.5:
        lines.append(f"{obj}.{camel(['init', noun])}();")
    lines.append(f"return {obj};")
    body = "\n    ".join(lines)
    return sub, f"{cls} {camel(sub)}(String {label}) {{\n    {body}\n}}"


def _gen_handle(rng: random.Random, names: _Names) -> tuple[list[str], str]:
    noun = rng.choice(NOUNS)
    cls = rng.choice(CLASSES)
    exc = rng.choice(EXCEPTIONS)
    w = names.fresh("worker")
    e = names.fresh("err")
    sub = ["handle", noun] + ([rng.choice(["error", "fault"])] if rng.random() < 0.4 else [])
    lines = [
        "try {",
        f"    {w}.{camel(['process', noun])}();",
        f"}} catch ({exc} {e}) {{",
        f"    {w}.{camel(['reset', noun])}();",
    ]
    if rng.random() < 0.3:
        lines += ["} finally {", f"    {w}.{camel(['close', noun])}();"]
    lines.append("}")
    body = "\n    ".join(lines)
    return sub, f"void {camel(sub)}({cls} {w}) {{\n    {body}\n}}"


_FAMILY_BUILDERS = {
    "get": _gen_get,
    "set": _gen_set,
    "compute": _gen_compute,
    "find": _gen_find,
    "check": _gen_check,
    "make": _gen_make,
    "handle": _gen_handle,
}


def generate_family_method(rng: random.Random, family: str | None = None) -> tuple[list[str], str]:
    """Return (name subtokens, method text) for a verb-family method."""
    if family is None:
        family = rng.choice(FAMILIES)
    return _FAMILY_BUILDERS[family](rng, _Names(rng))


# ----------------------------------------------------------------- free form


class _FreeGen:
    def __init__(self, rng: random.Random):
        self.rng = rng
        self.names = _Names(rng)
        self.vars: dict[str, list[str]] = {"int": [], "boolean": [], "String": []}
        self.objects: list[tuple[str, str]] = []  # (class, name)

    def int_expr(self) -> str:
        r = self.rng
        if self.vars["int"] and r.random() < 0.6:
            base = r.choice(self.vars["int"])
        else:
            base = str(r.randint(0, 9))
        if r.random() < 0.4:
            op = r.choice(["+", "-", "*", "%"])
            other = r.choice(self.vars["int"]) if self.vars["int"] and r.random() < 0.5 else str(r.randint(1, 9))
            return f"{base} {op} {other}"
        return base

    def bool_expr(self) -> str:
        r = self.rng
        if self.vars["boolean"] and r.random() < 0.3:
            return r.choice(self.vars["boolean"])
        if r.random() < 0.2:
            return r.choice(["true", "false"])
        op = r.choice(["<", ">", "<=", ">=", "==", "!="])
        return f"{self.int_expr()} {op} {self.int_expr()}"

    def call_stmt(self) -> str:
        r = self.rng
        verb = camel([r.choice(["log", "emit", "push", "mark"]), r.choice(NOUNS)])
        args = []
        if self.vars["int"] and r.random() < 0.5:
            args.append(r.choice(self.vars["int"]))
        if self.objects and r.random() < 0.6:
            cls, obj = r.choice(self.objects)
            return f"{obj}.{verb}({', '.join(args)});"
        return f"{verb}({', '.join(args)});"

    def decl_stmt(self) -> str:
        r = self.rng
        kind = r.random()
        if kind < 0.45:
            name = self.names.fresh(r.choice(["n", "k", "m", "len"]))
            text = f"int {name} = {self.int_expr()};"
            self.vars["int"].append(name)
            return text
        if kind < 0.6:
            name = self.names.fresh("ok")
            text = f"boolean {name} = {self.bool_expr()};"
            self.vars["boolean"].append(name)
            return text
        if kind < 0.75:
            name = self.names.fresh("txt")
            text = f'String {name} = "{r.choice(NOUNS)}";'
            self.vars["String"].append(name)
            return text
        cls = r.choice(CLASSES)
        name = self.names.fresh(cls.lower())
        self.objects.append((cls, name))
        return f"{cls} {name} = new {cls}();"

    def assign_stmt(self) -> str:
        r = self.rng
        if self.vars["int"] and r.random() < 0.7:
            return f"{r.choice(self.vars['int'])} = {self.int_expr()};"
        if self.vars["boolean"]:
            return f"{r.choice(self.vars['boolean'])} = {self.bool_expr()};"
        return self.decl_stmt()

    def simple_stmt(self) -> str:
        r = self.rng
        roll = r.random()
        if roll < 0.45:
            return self.decl_stmt()
        if roll < 0.7:
            return self.assign_stmt()
        return self.call_stmt()

    def _snapshot(self):
        return {k: list(v) for k, v in self.vars.items()}, list(self.objects)

    def _restore(self, snap) -> None:
        saved_vars, saved_objects = snap
        self.vars = {k: list(v) for k, v in saved_vars.items()}
        self.objects = list(saved_objects)

    def block_lines(self, depth: int, budget: int) -> list[str]:
        r = self.rng
        lines: list[str] = []
        n = r.randint(1, max(1, budget))
        for _ in range(n):
            roll = r.random()
            if depth > 0 and roll < 0.30:
                lines.extend(self.compound_stmt(depth))
            else:
                lines.append(self.simple_stmt())
        return lines

    def _inner(self, depth: int) -> list[str]:
        # Declarations inside a nested block go out of scope with it.
        snap = self._snapshot()
        lines = ["    " + s for s in self.block_lines(depth - 1, 3)]
        self._restore(snap)
        return lines

    def compound_stmt(self, depth: int) -> list[str]:
        r = self.rng
        kind = r.choice(["if", "if_else", "while", "for", "try"])
        if kind == "if":
            return [f"if ({self.bool_expr()}) {{", *self._inner(depth), "}"]
        if kind == "if_else":
            return [f"if ({self.bool_expr()}) {{", *self._inner(depth),
                    "} else {", *self._inner(depth), "}"]
        if kind == "while":
            return [f"while ({self.bool_expr()}) {{", *self._inner(depth), "}"]
        if kind == "for":
            snap = self._snapshot()
            i = self.names.fresh("it")
            bound = r.choice(self.vars["int"]) if self.vars["int"] else str(r.randint(2, 9))
            self.vars["int"].append(i)
            body = self._inner(depth)
            self._restore(snap)
            return [f"for (int {i} = 0; {i} < {bound}; {i} = {i} + 1) {{", *body, "}"]
        exc = r.choice(EXCEPTIONS)
        e = self.names.fresh("ex")
        out = ["try {", "    " + self.call_stmt(), *self._inner(depth),
               f"}} catch ({exc} {e}) {{", *self._inner(depth)]
        if r.random() < 0.35:
            out += ["} finally {", *self._inner(depth)]
        out.append("}")
        return out


def generate_free_method(rng: random.Random, max_depth: int = 2) -> str:
    """A method using arbitrary constructs; valid per all static rules."""
    gen = _FreeGen(rng)
    name = camel([rng.choice(["run", "apply", "update", "scan", "fill"]), rng.choice(NOUNS)])
    params = []
    if rng.random() < 0.7:
        p = gen.names.fresh("arg")
        gen.vars["int"].append(p)
        params.append(f"int {p}")
    if rng.random() < 0.4:
        cls = rng.choice(CLASSES)
        p = gen.names.fresh("peer")
        gen.objects.append((cls, p))
        params.append(f"{cls} {p}")
    lines = gen.block_lines(max_depth, 5)
    rtype = "void"
    if rng.random() < 0.4 and gen.vars["int"]:
        rtype = "int"
        lines.append(f"return {rng.choice(gen.vars['int'])};")
    elif rng.random() < 0.3:
        lines.append(f"throw new {rng.choice(EXCEPTIONS)}();")
    body = "\n".join("    " + ln for ln in lines)
    return f"{rtype} {name}({', '.join(params)}) {{\n{body}\n}}"


def generate_tiny_method(rng: random.Random) -> str:
    """Methods whose graphs stay small (a dozen nodes or fewer)."""
    r = rng
    choice = r.randint(0, 4)
    if choice == 0:
        return "void f() {}"
    if choice == 1:
        return f"int f(int a) {{ return a {r.choice(['+', '*'])} {r.randint(1, 5)}; }}"
    if choice == 2:
        verb = camel([r.choice(["get", "do"]), r.choice(NOUNS)])
        return f"void f({r.choice(CLASSES)} x) {{ x.{verb}(); }}"
    if choice == 3:
        return f"void f(int a) {{ if (a < {r.randint(1, 9)}) {{ mark(); }} }}"
    return f"void f(int a) {{ int b = a + 1; emit(b); }}"


# ------------------------------------------------------------------- corpora


def generate_package(rng: random.Random, n_methods: int, free_ratio: float = 0.2) -> list[tuple[str, str]]:
    """List of (method name, text); family methods mixed with free-form ones."""
    out = []
    for _ in range(n_methods):
        if rng.random() < free_ratio:
            text = generate_free_method(rng)
            name = text.split("(")[0].split()[-1]
        else:
            sub, text = generate_family_method(rng)
            name = camel(sub)
        out.append((name, text))
    return out


def write_corpus(out_dir, n_packages: int, methods_per_package: int, seed: int,
                 free_ratio: float = 0.2) -> list[str]:
    """Write pkg000/methods.mj ... under out_dir; returns package names."""
    from pathlib import Path

    root = Path(out_dir)
    rng = random.Random(seed)
    packages = []
    for p in range(n_packages):
        pkg = f"pkg{p:03d}"
        pdir = root / pkg
        pdir.mkdir(parents=True, exist_ok=True)
        methods = generate_package(rng, methods_per_package, free_ratio)
        text = "\n\n".join(t for _, t in methods) + "\n"
        (pdir / "methods.mj").write_text(text, encoding="utf-8")
        packages.append(pkg)
    return packages
