"""Parser and validator for the restricted script language.

Source text is parsed with the stdlib ``ast`` module, then walked to confirm
every node falls inside the supported subset.  Anything outside the subset is
reported as a :class:`ParseError` with a 1-based line and column, never as a
silent downgrade.  The subset, matching what agent-written analysis scripts
actually use:

statements
    assignment (incl. chained and tuple unpacking), augmented assignment,
    ``if``/``elif``/``else``, ``for``, ``while``, function definitions,
    ``return``, ``break``, ``continue``, ``pass``, expression statements,
    top-level ``import`` / ``from .. import``, and a single
    ``try``/``except`` form (one handler, no ``else``/``finally``)

expressions
    literals, f-strings, list/tuple/dict displays, arithmetic, comparisons
    (incl. chained, ``in``, ``is``), boolean operators, subscripts and
    slices, attribute access, calls with positional and keyword args, list
    and dict comprehensions

Classes, decorators, lambdas, generators, ``with``, ``raise``, bitwise
operators, starred expressions, and nested imports are rejected up front.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field


class ParseError(Exception):
    """Source text falls outside the supported language subset."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    def __str__(self) -> str:
        return f"{self.message} (line {self.line}, column {self.column})"


@dataclass
class ScriptProgram:
    """A validated program: original source plus its syntax tree."""

    source: str
    tree: ast.Module = field(repr=False)

    def statements(self) -> list[ast.stmt]:
        return self.tree.body

    def source_segment(self, node: ast.AST) -> str | None:
        """Exact source text for a node, straight from the original string."""
        return ast.get_source_segment(self.source, node)


# Friendly names for constructs we refuse, keyed by AST class name.
_REJECTED = {
    "ClassDef": "class definitions are not supported",
    "Lambda": "lambda expressions are not supported",
    "With": "with blocks are not supported",
    "AsyncWith": "with blocks are not supported",
    "Raise": "raise statements are not supported",
    "Assert": "assert statements are not supported",
    "Delete": "del statements are not supported",
    "Global": "global declarations are not supported",
    "Nonlocal": "nonlocal declarations are not supported",
    "AsyncFunctionDef": "async constructs are not supported",
    "AsyncFor": "async constructs are not supported",
    "Await": "async constructs are not supported",
    "Yield": "generators are not supported",
    "YieldFrom": "generators are not supported",
    "GeneratorExp": "generator expressions are not supported",
    "SetComp": "set comprehensions are not supported",
    "Set": "set literals are not supported",
    "IfExp": "conditional expressions are not supported",
    "NamedExpr": "assignment expressions are not supported",
    "Starred": "starred expressions are not supported",
    "Match": "match statements are not supported",
    "AnnAssign": "annotated assignments are not supported",
}

_ALLOWED_BINOPS = (
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.FloorDiv,
    ast.Mod,
    ast.Pow,
)

_CONST_TYPES = (type(None), bool, int, float, str)


class _Validator:
    """Recursive walk that proves a tree stays inside the subset."""

    def __init__(self) -> None:
        self.func_depth = 0
        self.loop_depth = 0

    def fail(self, node: ast.AST, message: str) -> None:
        line = getattr(node, "lineno", 1)
        col = getattr(node, "col_offset", 0) + 1
        raise ParseError(message, line, col)

    def run(self, tree: ast.Module) -> None:
        for stmt in tree.body:
            self.stmt(stmt, top=True)

    # -- statements ---------------------------------------------------------

    def stmt(self, node: ast.stmt, top: bool = False) -> None:
        name = type(node).__name__
        if name in _REJECTED:
            self.fail(node, _REJECTED[name])
        handler = getattr(self, f"stmt_{name}", None)
        if handler is None:
            self.fail(node, f"{name} statements are not supported")
        handler(node, top)

    def block(self, body: list[ast.stmt]) -> None:
        for stmt in body:
            self.stmt(stmt, top=False)

    def stmt_Expr(self, node: ast.Expr, top: bool) -> None:
        self.expr(node.value)

    def stmt_Assign(self, node: ast.Assign, top: bool) -> None:
        for target in node.targets:
            self.target(target)
        self.expr(node.value)

    def stmt_AugAssign(self, node: ast.AugAssign, top: bool) -> None:
        if not isinstance(node.op, _ALLOWED_BINOPS):
            self.fail(node, f"operator {type(node.op).__name__} is not supported")
        if isinstance(node.target, ast.Name):
            pass
        elif isinstance(node.target, ast.Subscript):
            self.subscript_target(node.target)
        else:
            self.fail(node.target, "augmented assignment target must be a name or subscript")
        self.expr(node.value)

    def stmt_If(self, node: ast.If, top: bool) -> None:
        self.expr(node.test)
        self.block(node.body)
        self.block(node.orelse)

    def stmt_While(self, node: ast.While, top: bool) -> None:
        if node.orelse:
            self.fail(node.orelse[0], "while/else clauses are not supported")
        self.expr(node.test)
        self.loop_depth += 1
        self.block(node.body)
        self.loop_depth -= 1

    def stmt_For(self, node: ast.For, top: bool) -> None:
        if node.orelse:
            self.fail(node.orelse[0], "for/else clauses are not supported")
        self.loop_target(node.target)
        self.expr(node.iter)
        self.loop_depth += 1
        self.block(node.body)
        self.loop_depth -= 1

    def stmt_FunctionDef(self, node: ast.FunctionDef, top: bool) -> None:
        if node.decorator_list:
            self.fail(node.decorator_list[0], "decorators are not supported")
        if node.returns is not None:
            self.fail(node.returns, "return annotations are not supported")
        a = node.args
        if a.posonlyargs or a.kwonlyargs or a.vararg or a.kwarg:
            self.fail(node, "only plain positional parameters are supported")
        for arg in a.args:
            if arg.annotation is not None:
                self.fail(arg.annotation, "parameter annotations are not supported")
        for default in a.defaults:
            self.expr(default)
        outer_loops = self.loop_depth
        self.loop_depth = 0
        self.func_depth += 1
        self.block(node.body)
        self.func_depth -= 1
        self.loop_depth = outer_loops

    def stmt_Return(self, node: ast.Return, top: bool) -> None:
        if self.func_depth == 0:
            self.fail(node, "return outside function")
        if node.value is not None:
            self.expr(node.value)

    def stmt_Break(self, node: ast.Break, top: bool) -> None:
        if self.loop_depth == 0:
            self.fail(node, "break outside loop")

    def stmt_Continue(self, node: ast.Continue, top: bool) -> None:
        if self.loop_depth == 0:
            self.fail(node, "continue outside loop")

    def stmt_Pass(self, node: ast.Pass, top: bool) -> None:
        pass

    def stmt_Import(self, node: ast.Import, top: bool) -> None:
        if not top:
            self.fail(node, "imports are only allowed at the top level")

    def stmt_ImportFrom(self, node: ast.ImportFrom, top: bool) -> None:
        if not top:
            self.fail(node, "imports are only allowed at the top level")
        if node.level:
            self.fail(node, "relative imports are not supported")
        if node.module is None:
            self.fail(node, "relative imports are not supported")
        for alias in node.names:
            if alias.name == "*":
                self.fail(node, "wildcard imports are not supported")

    def stmt_Try(self, node: ast.Try, top: bool) -> None:
        if len(node.handlers) != 1:
            self.fail(node, "try must have exactly one except handler")
        if node.orelse:
            self.fail(node.orelse[0], "try/else clauses are not supported")
        if node.finalbody:
            self.fail(node.finalbody[0], "try/finally clauses are not supported")
        handler = node.handlers[0]
        if handler.type is not None and not isinstance(handler.type, ast.Name):
            self.fail(handler.type, "except may only name a single exception type")
        self.block(node.body)
        self.block(handler.body)

    # -- assignment / loop targets ------------------------------------------

    def target(self, node: ast.expr) -> None:
        if isinstance(node, ast.Name):
            return
        if isinstance(node, (ast.Tuple, ast.List)):
            for elt in node.elts:
                self.target(elt)
            return
        if isinstance(node, ast.Subscript):
            self.subscript_target(node)
            return
        if isinstance(node, ast.Attribute):
            self.fail(node, "attribute assignment is not supported")
        if isinstance(node, ast.Starred):
            self.fail(node, "starred assignment targets are not supported")
        self.fail(node, f"cannot assign to {type(node).__name__}")

    def subscript_target(self, node: ast.Subscript) -> None:
        if isinstance(node.slice, ast.Slice):
            self.fail(node, "slice assignment is not supported")
        self.expr(node.value)
        self.expr(node.slice)

    def loop_target(self, node: ast.expr) -> None:
        if isinstance(node, ast.Name):
            return
        if isinstance(node, (ast.Tuple, ast.List)):
            for elt in node.elts:
                self.loop_target(elt)
            return
        self.fail(node, "loop target must be a name or tuple of names")

    # -- expressions --------------------------------------------------------

    def expr(self, node: ast.expr) -> None:
        name = type(node).__name__
        if name in _REJECTED:
            self.fail(node, _REJECTED[name])
        handler = getattr(self, f"expr_{name}", None)
        if handler is None:
            self.fail(node, f"{name} expressions are not supported")
        handler(node)

    def expr_Constant(self, node: ast.Constant) -> None:
        if not isinstance(node.value, _CONST_TYPES):
            kind = type(node.value).__name__
            self.fail(node, f"{kind} literals are not supported")

    def expr_Name(self, node: ast.Name) -> None:
        pass

    def expr_JoinedStr(self, node: ast.JoinedStr) -> None:
        for value in node.values:
            if isinstance(value, ast.FormattedValue):
                self.expr_FormattedValue(value)
            else:
                self.expr(value)

    def expr_FormattedValue(self, node: ast.FormattedValue) -> None:
        self.expr(node.value)
        if node.format_spec is not None:
            self.expr(node.format_spec)

    def expr_List(self, node: ast.List) -> None:
        for elt in node.elts:
            self.expr(elt)

    def expr_Tuple(self, node: ast.Tuple) -> None:
        for elt in node.elts:
            self.expr(elt)

    def expr_Dict(self, node: ast.Dict) -> None:
        for key, value in zip(node.keys, node.values):
            if key is None:
                self.fail(node, "dict unpacking is not supported")
            self.expr(key)
            self.expr(value)

    def expr_BinOp(self, node: ast.BinOp) -> None:
        if not isinstance(node.op, _ALLOWED_BINOPS):
            op = type(node.op).__name__
            if op in ("LShift", "RShift", "BitOr", "BitXor", "BitAnd"):
                self.fail(node, "bitwise operators are not supported")
            if op == "MatMult":
                self.fail(node, "the @ operator is not supported")
            self.fail(node, f"operator {op} is not supported")
        self.expr(node.left)
        self.expr(node.right)

    def expr_UnaryOp(self, node: ast.UnaryOp) -> None:
        if isinstance(node.op, ast.Invert):
            self.fail(node, "bitwise operators are not supported")
        self.expr(node.operand)

    def expr_BoolOp(self, node: ast.BoolOp) -> None:
        for value in node.values:
            self.expr(value)

    def expr_Compare(self, node: ast.Compare) -> None:
        self.expr(node.left)
        for comparator in node.comparators:
            self.expr(comparator)

    def expr_Subscript(self, node: ast.Subscript) -> None:
        self.expr(node.value)
        if isinstance(node.slice, ast.Tuple):
            self.fail(node.slice, "tuple subscripts are not supported")
        self.expr(node.slice)

    def expr_Slice(self, node: ast.Slice) -> None:
        for part in (node.lower, node.upper, node.step):
            if part is not None:
                self.expr(part)

    def expr_Attribute(self, node: ast.Attribute) -> None:
        self.expr(node.value)

    def expr_Call(self, node: ast.Call) -> None:
        self.expr(node.func)
        for arg in node.args:
            self.expr(arg)
        for kw in node.keywords:
            if kw.arg is None:
                self.fail(node, "** call arguments are not supported")
            self.expr(kw.value)

    def expr_ListComp(self, node: ast.ListComp) -> None:
        self.expr(node.elt)
        self.comprehensions(node.generators)

    def expr_DictComp(self, node: ast.DictComp) -> None:
        self.expr(node.key)
        self.expr(node.value)
        self.comprehensions(node.generators)

    def comprehensions(self, generators: list[ast.comprehension]) -> None:
        for gen in generators:
            if gen.is_async:
                self.fail(gen.iter, "async constructs are not supported")
            self.loop_target(gen.target)
            self.expr(gen.iter)
            for cond in gen.ifs:
                self.expr(cond)


def parse(source: str) -> ScriptProgram:
    """Parse and validate source; raises ParseError outside the subset."""
    try:
        tree = ast.parse(source, filename="<script>", mode="exec")
    except SyntaxError as exc:
        msg = exc.msg or "invalid syntax"
        raise ParseError(msg, exc.lineno or 1, exc.offset or 1) from None
    except ValueError as exc:
        raise ParseError(str(exc) or "invalid source", 1, 1) from None
    _Validator().run(tree)
    return ScriptProgram(source=source, tree=tree)


def referenced_imports(program: ScriptProgram) -> list[str]:
    """Root module names imported by the program, in first-appearance order.

    Dotted imports report their root package, which is the unit the import
    gate reasons about.
    """
    seen: list[str] = []
    for stmt in program.tree.body:
        names: list[str] = []
        if isinstance(stmt, ast.Import):
            names = [alias.name for alias in stmt.names]
        elif isinstance(stmt, ast.ImportFrom):
            names = [stmt.module or ""]
        for name in names:
            root = name.split(".")[0]
            if root and root not in seen:
                seen.append(root)
    return seen
