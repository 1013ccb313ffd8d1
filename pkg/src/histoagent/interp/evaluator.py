"""Tree-walking evaluator for the restricted script language.

Executes a validated :class:`~histoagent.interp.parser.ScriptProgram` under an
operation budget (one operation per AST node evaluated), an import gate, and a
working-directory jail.  Results always come back as an
:class:`ExecutionResult`; script-level problems surface as a structured
:class:`ExecutionError`, never as a host exception.

Scoping is a dynamic approximation of Python's: reads walk the enclosing
frame chain, writes bind in the innermost frame.  A function that reads a
module-level name before assigning it sees the module value instead of
raising, which is friendlier to generated code than UnboundLocalError.

Inside ``try``/``except`` only runtime faults are catchable; the bound
exception variable holds the fault message as a string.  Budget exhaustion,
sandbox violations, and ``final_answer`` cut straight through handlers.
"""

from __future__ import annotations

import ast
import functools
import string as _string
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import (
    ImportViolation,
    OperationsExhausted,
    SandboxEscape,
    ScriptFault,
    WallClockExhausted,
)
from .parser import ParseError, ScriptProgram, parse
from .shims import (
    FILE_METHODS,
    FILE_PROPERTIES,
    PATH_METHODS,
    PATH_PROPERTIES,
    SandboxContext,
    ScriptFile,
    ScriptPath,
    ShimModule,
    build_shims,
    jail_relative,
    resolve_in_jail,
)

INT_LIMIT = 2**63 - 1
MAX_STDOUT_BYTES = 8 * 2**20
MAX_SEQUENCE_ITEMS = 10_000_000
MAX_STR_CHARS = 1 << 26
MAX_CALL_DEPTH = 200

DEFAULT_ALLOWED_IMPORTS = frozenset({"math", "json", "random", "statistics", "pathlib"})
DEFAULT_FORBIDDEN_IMPORTS = frozenset({"os"})

ERROR_KINDS = (
    "ParseError",
    "ForbiddenImport",
    "UnknownImport",
    "OperationLimitExceeded",
    "RuntimeFault",
    "SandboxViolation",
)


@dataclass(frozen=True)
class InterpreterLimits:
    """Budget and confinement configuration for one execution."""

    working_dir: Path
    max_operations: int = 10_000_000
    allowed_imports: frozenset = DEFAULT_ALLOWED_IMPORTS
    forbidden_imports: frozenset = DEFAULT_FORBIDDEN_IMPORTS
    wall_clock_seconds: float | None = None
    random_seed: int = 42


@dataclass(frozen=True)
class ExecutionError:
    """One script failure: a kind from ERROR_KINDS, a message, and a line."""

    kind: str
    message: str
    line: int | None = None

    def render(self) -> str:
        """Single-line form: ``Kind (line N): message``."""
        message = " ".join(self.message.split())
        if self.line is None:
            return f"{self.kind}: {message}"
        return f"{self.kind} (line {self.line}): {message}"


@dataclass
class ExecutionResult:
    """Everything one execution produced."""

    stdout: str
    final_answer: Any
    answered: bool
    error: ExecutionError | None
    operations_used: int
    files_written: list[str]

    @property
    def ok(self) -> bool:
        return self.error is None


def check_imports(program: ScriptProgram, limits: InterpreterLimits) -> None:
    """Static import gate; runs before any evaluation.

    Raises ImportViolation for the first offending module.  A forbidden
    module outranks an unknown one regardless of source order.
    """
    forbidden: tuple[str, int] | None = None
    unknown: tuple[str, int] | None = None
    for stmt in program.tree.body:
        if isinstance(stmt, ast.Import):
            names = [alias.name for alias in stmt.names]
        elif isinstance(stmt, ast.ImportFrom):
            names = [stmt.module or ""]
        else:
            continue
        for name in names:
            root = name.split(".")[0]
            if not root:
                continue
            if root in limits.forbidden_imports:
                if forbidden is None:
                    forbidden = (root, stmt.lineno)
            elif root not in limits.allowed_imports:
                if unknown is None:
                    unknown = (root, stmt.lineno)
    if forbidden is not None:
        raise ImportViolation("ForbiddenImport", forbidden[0], forbidden[1])
    if unknown is not None:
        raise ImportViolation("UnknownImport", unknown[0], unknown[1])


class _Break(Exception):
    pass


class _Continue(Exception):
    pass


class _Return(Exception):
    def __init__(self, value: Any):
        self.value = value


class _Answered(Exception):
    def __init__(self, value: Any):
        self.value = value


class ScriptFunction:
    """A function defined in script code; callable from host code too."""

    __slots__ = ("name", "node", "defaults", "closure", "evaluator")

    def __init__(self, name, node, defaults, closure, evaluator):
        self.name = name
        self.node = node
        self.defaults = defaults
        self.closure = closure
        self.evaluator = evaluator

    def __call__(self, *args: Any, **kwargs: Any) -> Any:
        return self.evaluator.call_function(self, list(args), dict(kwargs))

    def __repr__(self) -> str:
        return f"<function {self.name}>"


_STR_METHODS = frozenset(
    {
        "capitalize", "casefold", "center", "count", "endswith", "find",
        "format", "index", "isalnum", "isalpha", "isdecimal", "isdigit",
        "islower", "isnumeric", "isspace", "istitle", "isupper", "join",
        "ljust", "lower", "lstrip", "partition", "removeprefix",
        "removesuffix", "replace", "rfind", "rindex", "rjust", "rpartition",
        "rsplit", "rstrip", "split", "splitlines", "startswith", "strip",
        "swapcase", "title", "upper", "zfill",
    }
)
_LIST_METHODS = frozenset(
    {
        "append", "clear", "copy", "count", "extend", "index", "insert",
        "pop", "remove", "reverse", "sort",
    }
)
_TUPLE_METHODS = frozenset({"count", "index"})
_DICT_METHODS = frozenset(
    {"clear", "copy", "get", "items", "keys", "pop", "setdefault", "update", "values"}
)

_HOST_ERRORS = (TypeError, ValueError, ArithmeticError, LookupError, OSError, StopIteration)
_CONTROL = (_Break, _Continue, _Return, _Answered, OperationsExhausted, WallClockExhausted)


def _type_name(value: Any) -> str:
    if value is None:
        return "None"
    if isinstance(value, ScriptPath):
        return "path"
    if isinstance(value, ScriptFile):
        return "file"
    if isinstance(value, ShimModule):
        return "module"
    if isinstance(value, ScriptFunction) or callable(value):
        return "function"
    return type(value).__name__


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float))


class _Evaluator:
    def __init__(
        self,
        program: ScriptProgram,
        limits: InterpreterLimits,
        bindings: dict[str, Any],
        jail: Path,
    ):
        self.program = program
        self.limits = limits
        self.jail = jail
        self.ops = 0
        self.t0 = time.monotonic()
        self.out_parts: list[str] = []
        self.out_bytes = 0
        self.answer: Any = None
        self.answered = False
        self.tracked_writes: set[str] = set()
        self.open_files: list[ScriptFile] = []
        self.call_depth = 0
        self.ctx = SandboxContext(jail=jail, record_write=self.tracked_writes.add)
        self.shims = build_shims(self.ctx, limits.random_seed)
        self.scopes: list[dict[str, Any]] = [{}]
        self.bindings = dict(bindings)
        self.bindings.update(self._make_builtins())
        self._stmt_table = {
            ast.Expr: self._stmt_expr,
            ast.Assign: self._stmt_assign,
            ast.AugAssign: self._stmt_augassign,
            ast.If: self._stmt_if,
            ast.While: self._stmt_while,
            ast.For: self._stmt_for,
            ast.FunctionDef: self._stmt_functiondef,
            ast.Return: self._stmt_return,
            ast.Break: self._stmt_break,
            ast.Continue: self._stmt_continue,
            ast.Pass: self._stmt_pass,
            ast.Import: self._stmt_import,
            ast.ImportFrom: self._stmt_importfrom,
            ast.Try: self._stmt_try,
        }
        self._expr_table = {
            ast.Constant: self._expr_constant,
            ast.Name: self._expr_name,
            ast.JoinedStr: self._expr_joinedstr,
            ast.List: self._expr_list,
            ast.Tuple: self._expr_tuple,
            ast.Dict: self._expr_dict,
            ast.BinOp: self._expr_binop,
            ast.UnaryOp: self._expr_unaryop,
            ast.BoolOp: self._expr_boolop,
            ast.Compare: self._expr_compare,
            ast.Subscript: self._expr_subscript,
            ast.Attribute: self._expr_attribute,
            ast.Call: self._expr_call,
            ast.ListComp: self._expr_listcomp,
            ast.DictComp: self._expr_dictcomp,
        }

    # -- plumbing -----------------------------------------------------------

    def tick(self, node: ast.AST) -> None:
        self.ops += 1
        if self.ops > self.limits.max_operations:
            self.ops = self.limits.max_operations
            raise OperationsExhausted(getattr(node, "lineno", None))
        cap = self.limits.wall_clock_seconds
        if cap is not None and (self.ops & 4095) == 0:
            if time.monotonic() - self.t0 > cap:
                raise WallClockExhausted(getattr(node, "lineno", None))

    def fault(self, node: ast.AST | None, message: str) -> None:
        line = getattr(node, "lineno", None) if node is not None else None
        raise ScriptFault(message, line)

    def run(self) -> ExecutionResult:
        before = self._scan_files()
        error: ExecutionError | None = None
        try:
            for stmt in self.program.statements():
                self._exec(stmt)
        except _Answered as sig:
            self.answer = sig.value
            self.answered = True
        except OperationsExhausted as sig:
            error = ExecutionError(
                "OperationLimitExceeded",
                f"operation budget of {self.limits.max_operations} exhausted",
                sig.line,
            )
        except WallClockExhausted as sig:
            error = ExecutionError(
                "OperationLimitExceeded",
                f"wall clock budget of {self.limits.wall_clock_seconds}s exhausted",
                sig.line,
            )
        except SandboxEscape as exc:
            error = ExecutionError("SandboxViolation", exc.message, exc.line)
        except ScriptFault as exc:
            error = ExecutionError("RuntimeFault", exc.message, exc.line)
        except ImportViolation as exc:
            error = ExecutionError(exc.kind, exc.message, exc.line)
        except RecursionError:
            error = ExecutionError("RuntimeFault", "maximum recursion depth exceeded", None)
        finally:
            for handle in self.open_files:
                if not handle.closed:
                    try:
                        handle.close()
                    except OSError:
                        pass
        after = self._scan_files()
        changed = {rel for rel, sig in after.items() if before.get(rel) != sig}
        files = sorted(self.tracked_writes | changed)
        return ExecutionResult(
            stdout="".join(self.out_parts),
            final_answer=self.answer,
            answered=self.answered,
            error=error,
            operations_used=self.ops,
            files_written=files,
        )

    def _scan_files(self) -> dict[str, tuple[int, int]]:
        seen: dict[str, tuple[int, int]] = {}
        if not self.jail.is_dir():
            return seen
        for path in self.jail.rglob("*"):
            if path.is_file():
                st = path.stat()
                seen[path.relative_to(self.jail).as_posix()] = (st.st_size, st.st_mtime_ns)
        return seen

    # -- statements ---------------------------------------------------------

    def _exec(self, node: ast.stmt) -> None:
        self.tick(node)
        self._stmt_table[type(node)](node)

    def _stmt_expr(self, node: ast.Expr) -> None:
        self._eval(node.value)

    def _stmt_assign(self, node: ast.Assign) -> None:
        value = self._eval(node.value)
        for target in node.targets:
            self._assign(target, value)

    def _assign(self, target: ast.expr, value: Any) -> None:
        if isinstance(target, ast.Name):
            self.scopes[-1][target.id] = value
            return
        if isinstance(target, (ast.Tuple, ast.List)):
            if isinstance(value, (list, tuple, str)):
                items = list(value)
            else:
                self.fault(target, f"cannot unpack {_type_name(value)}")
            if len(items) != len(target.elts):
                self.fault(
                    target,
                    f"cannot unpack {len(items)} values into {len(target.elts)} targets",
                )
            for elt, item in zip(target.elts, items):
                self._assign(elt, item)
            return
        # subscript target, validated at parse time
        container = self._eval(target.value)
        key = self._eval(target.slice)
        self._set_item(target, container, key, value)

    def _set_item(self, node: ast.AST, container: Any, key: Any, value: Any) -> None:
        if isinstance(container, list):
            if not isinstance(key, int) or isinstance(key, bool):
                self.fault(node, "list indices must be integers")
            try:
                container[key] = value
            except IndexError:
                self.fault(node, "list index out of range")
            return
        if isinstance(container, dict):
            if not isinstance(key, (str, int)):
                self.fault(node, "map keys must be strings or integers")
            container[key] = value
            return
        self.fault(node, f"{_type_name(container)} does not support item assignment")

    def _stmt_augassign(self, node: ast.AugAssign) -> None:
        if isinstance(node.target, ast.Name):
            name = node.target.id
            frame = self._frame_of(name)
            if frame is None:
                self.fault(node, f"name '{name}' is not defined")
            current = frame[name]
            frame[name] = self._binary_op(node, node.op, current, self._eval(node.value))
            return
        container = self._eval(node.target.value)
        key = self._eval(node.target.slice)
        current = self._get_item(node.target, container, key)
        self._set_item(
            node.target, container, key, self._binary_op(node, node.op, current, self._eval(node.value))
        )

    def _stmt_if(self, node: ast.If) -> None:
        if self._truthy(self._eval(node.test)):
            for stmt in node.body:
                self._exec(stmt)
        else:
            for stmt in node.orelse:
                self._exec(stmt)

    def _stmt_while(self, node: ast.While) -> None:
        while self._truthy(self._eval(node.test)):
            try:
                for stmt in node.body:
                    self._exec(stmt)
            except _Break:
                break
            except _Continue:
                continue

    def _stmt_for(self, node: ast.For) -> None:
        iterable = self._eval(node.iter)
        for item in self._iterate(node.iter, iterable):
            self._assign(node.target, item)
            try:
                for stmt in node.body:
                    self._exec(stmt)
            except _Break:
                break
            except _Continue:
                continue

    def _iterate(self, node: ast.AST, value: Any):
        if isinstance(value, (list, tuple, str, range)):
            return iter(value)
        if isinstance(value, dict):
            return iter(list(value.keys()))
        self.fault(node, f"{_type_name(value)} is not iterable")

    def _stmt_functiondef(self, node: ast.FunctionDef) -> None:
        defaults = [self._eval(d) for d in node.args.defaults]
        fn = ScriptFunction(node.name, node, defaults, list(self.scopes), self)
        self.scopes[-1][node.name] = fn

    def _stmt_return(self, node: ast.Return) -> None:
        value = self._eval(node.value) if node.value is not None else None
        raise _Return(value)

    def _stmt_break(self, node: ast.Break) -> None:
        raise _Break()

    def _stmt_continue(self, node: ast.Continue) -> None:
        raise _Continue()

    def _stmt_pass(self, node: ast.Pass) -> None:
        pass

    def _stmt_import(self, node: ast.Import) -> None:
        for alias in node.names:
            root = alias.name.split(".")[0]
            self._gate_module(node, root)
            self.scopes[-1][alias.asname or root] = self.shims[root]

    def _stmt_importfrom(self, node: ast.ImportFrom) -> None:
        root = (node.module or "").split(".")[0]
        self._gate_module(node, root)
        module = self.shims[root]
        for alias in node.names:
            try:
                value = module.get(alias.name)
            except ScriptFault:
                self.fault(node, f"cannot import name '{alias.name}' from '{root}'")
            self.scopes[-1][alias.asname or alias.name] = value

    def _gate_module(self, node: ast.AST, root: str) -> None:
        # execute() already gated; re-check so the evaluator is safe alone
        if root in self.limits.forbidden_imports:
            raise ImportViolation("ForbiddenImport", root, node.lineno)
        if root not in self.limits.allowed_imports:
            raise ImportViolation("UnknownImport", root, node.lineno)
        if root not in self.shims:
            self.fault(node, f"module '{root}' has no shim available")

    def _stmt_try(self, node: ast.Try) -> None:
        try:
            for stmt in node.body:
                self._exec(stmt)
        except ScriptFault as fault:
            handler = node.handlers[0]
            if handler.name is not None:
                self.scopes[-1][handler.name] = fault.message
            for stmt in handler.body:
                self._exec(stmt)

    # -- expressions --------------------------------------------------------

    def _eval(self, node: ast.expr) -> Any:
        self.tick(node)
        return self._expr_table[type(node)](node)

    def _expr_constant(self, node: ast.Constant) -> Any:
        return node.value

    def _expr_name(self, node: ast.Name) -> Any:
        name = node.id
        for frame in reversed(self.scopes):
            if name in frame:
                return frame[name]
        if name in self.bindings:
            return self.bindings[name]
        self.fault(node, f"name '{name}' is not defined")

    def _frame_of(self, name: str) -> dict[str, Any] | None:
        for frame in reversed(self.scopes):
            if name in frame:
                return frame
        return None

    def _expr_joinedstr(self, node: ast.JoinedStr) -> str:
        parts: list[str] = []
        for piece in node.values:
            if isinstance(piece, ast.Constant):
                parts.append(piece.value)
            else:
                parts.append(self._format_field(piece))
        return "".join(parts)

    def _format_field(self, node: ast.FormattedValue) -> str:
        value = self._eval(node.value)
        if node.conversion == 115:
            value = self._display(value)
        elif node.conversion == 114:
            value = self._repr_value(value)
        elif node.conversion == 97:
            value = ascii(self._display(value))
        spec = ""
        if node.format_spec is not None:
            spec = self._expr_joinedstr(node.format_spec)
        if not spec:
            return value if isinstance(value, str) else self._display(value)
        if value is None or not isinstance(value, (bool, int, float, str)):
            self.fault(node, f"format spec not supported for {_type_name(value)}")
        try:
            return format(value, spec)
        except (ValueError, TypeError) as exc:
            self.fault(node, f"bad format spec: {exc}")

    def _expr_list(self, node: ast.List) -> list:
        return [self._eval(e) for e in node.elts]

    def _expr_tuple(self, node: ast.Tuple) -> tuple:
        return tuple(self._eval(e) for e in node.elts)

    def _expr_dict(self, node: ast.Dict) -> dict:
        result: dict[Any, Any] = {}
        for key_node, value_node in zip(node.keys, node.values):
            key = self._eval(key_node)
            if not isinstance(key, (str, int)):
                self.fault(key_node, "map keys must be strings or integers")
            result[key] = self._eval(value_node)
        return result

    # -- operators ----------------------------------------------------------

    def _expr_binop(self, node: ast.BinOp) -> Any:
        left = self._eval(node.left)
        right = self._eval(node.right)
        return self._binary_op(node, node.op, left, right)

    def _binary_op(self, node: ast.AST, op: ast.operator, left: Any, right: Any) -> Any:
        if isinstance(op, ast.Add):
            if _is_number(left) and _is_number(right):
                return self._check_int(node, left + right)
            if isinstance(left, str) and isinstance(right, str):
                if len(left) + len(right) > MAX_STR_CHARS:
                    self.fault(node, "string result too large")
                return left + right
            if isinstance(left, list) and isinstance(right, list):
                if len(left) + len(right) > MAX_SEQUENCE_ITEMS:
                    self.fault(node, "list result too large")
                return left + right
            if isinstance(left, tuple) and isinstance(right, tuple):
                return left + right
            self.fault(node, f"cannot add {_type_name(left)} and {_type_name(right)}")
        if isinstance(op, ast.Sub):
            if _is_number(left) and _is_number(right):
                return self._check_int(node, left - right)
            self.fault(node, f"cannot subtract {_type_name(right)} from {_type_name(left)}")
        if isinstance(op, ast.Mult):
            if _is_number(left) and _is_number(right):
                return self._check_int(node, left * right)
            seq, count = (left, right) if isinstance(right, int) else (right, left)
            if isinstance(count, int) and not isinstance(count, bool):
                if isinstance(seq, str):
                    if len(seq) * max(count, 0) > MAX_STR_CHARS:
                        self.fault(node, "string result too large")
                    return seq * count
                if isinstance(seq, (list, tuple)):
                    if len(seq) * max(count, 0) > MAX_SEQUENCE_ITEMS:
                        self.fault(node, "sequence result too large")
                    return seq * count
            self.fault(node, f"cannot multiply {_type_name(left)} and {_type_name(right)}")
        if isinstance(op, ast.Div):
            if isinstance(left, ScriptPath) and isinstance(right, (str, ScriptPath)):
                return left.joinpath(right)
            if _is_number(left) and _is_number(right):
                if right == 0:
                    self.fault(node, "division by zero")
                return left / right
            self.fault(node, f"cannot divide {_type_name(left)} by {_type_name(right)}")
        if isinstance(op, ast.FloorDiv):
            if _is_number(left) and _is_number(right):
                if right == 0:
                    self.fault(node, "division by zero")
                return self._check_int(node, left // right)
            self.fault(node, f"cannot divide {_type_name(left)} by {_type_name(right)}")
        if isinstance(op, ast.Mod):
            if isinstance(left, str):
                self.fault(node, "% formatting is not supported; use .format or f-strings")
            if _is_number(left) and _is_number(right):
                if right == 0:
                    self.fault(node, "division by zero")
                return self._check_int(node, left % right)
            self.fault(node, f"cannot take {_type_name(left)} modulo {_type_name(right)}")
        if isinstance(op, ast.Pow):
            return self._power(node, left, right)
        self.fault(node, f"operator {type(op).__name__} is not supported")

    def _power(self, node: ast.AST, left: Any, right: Any) -> Any:
        if not (_is_number(left) and _is_number(right)):
            self.fault(node, f"cannot raise {_type_name(left)} to {_type_name(right)}")
        if isinstance(left, int) and isinstance(right, int) and right >= 0:
            # lower bound on result bits; keeps the bignum small before the
            # exact check in _check_int
            if abs(left) > 1 and (abs(left).bit_length() - 1) * right > 70:
                self.fault(node, "integer overflow (beyond 64-bit range)")
            return self._check_int(node, left**right)
        try:
            result = left**right
        except (OverflowError, ZeroDivisionError) as exc:
            self.fault(node, f"{type(exc).__name__}: {exc}")
        if isinstance(result, complex):
            self.fault(node, "complex results are not supported")
        return result

    def _check_int(self, node: ast.AST, value: Any) -> Any:
        if isinstance(value, int) and not isinstance(value, bool) and abs(value) > INT_LIMIT:
            self.fault(node, "integer overflow (beyond 64-bit range)")
        return value

    def _expr_unaryop(self, node: ast.UnaryOp) -> Any:
        operand = self._eval(node.operand)
        if isinstance(node.op, ast.Not):
            return not self._truthy(operand)
        if isinstance(node.op, ast.USub):
            if _is_number(operand):
                return self._check_int(node, -operand)
            self.fault(node, f"cannot negate {_type_name(operand)}")
        if isinstance(node.op, ast.UAdd):
            if _is_number(operand):
                return +operand
            self.fault(node, f"cannot apply unary + to {_type_name(operand)}")
        self.fault(node, f"operator {type(node.op).__name__} is not supported")

    def _expr_boolop(self, node: ast.BoolOp) -> Any:
        is_and = isinstance(node.op, ast.And)
        result: Any = None
        for value_node in node.values:
            result = self._eval(value_node)
            truthy = self._truthy(result)
            if is_and and not truthy:
                return result
            if not is_and and truthy:
                return result
        return result

    def _expr_compare(self, node: ast.Compare) -> bool:
        left = self._eval(node.left)
        for op, comparator_node in zip(node.ops, node.comparators):
            right = self._eval(comparator_node)
            if not self._compare_once(node, op, left, right):
                return False
            left = right
        return True

    def _compare_once(self, node: ast.AST, op: ast.cmpop, left: Any, right: Any) -> bool:
        if isinstance(op, ast.Eq):
            return left == right
        if isinstance(op, ast.NotEq):
            return left != right
        if isinstance(op, ast.Is):
            return left is right
        if isinstance(op, ast.IsNot):
            return left is not right
        if isinstance(op, (ast.In, ast.NotIn)):
            found = self._membership(node, left, right)
            return not found if isinstance(op, ast.NotIn) else found
        # ordering
        orderable = (
            (_is_number(left) and _is_number(right))
            or (isinstance(left, str) and isinstance(right, str))
            or (isinstance(left, list) and isinstance(right, list))
            or (isinstance(left, tuple) and isinstance(right, tuple))
        )
        if not orderable:
            self.fault(
                node,
                f"cannot order {_type_name(left)} and {_type_name(right)}",
            )
        try:
            if isinstance(op, ast.Lt):
                return left < right
            if isinstance(op, ast.LtE):
                return left <= right
            if isinstance(op, ast.Gt):
                return left > right
            return left >= right
        except TypeError as exc:
            self.fault(node, f"TypeError: {exc}")

    def _membership(self, node: ast.AST, needle: Any, haystack: Any) -> bool:
        if isinstance(haystack, str):
            if not isinstance(needle, str):
                self.fault(node, "substring test requires a string")
            return needle in haystack
        if isinstance(haystack, (list, tuple, range)):
            return needle in haystack
        if isinstance(haystack, dict):
            return needle in haystack
        self.fault(node, f"{_type_name(haystack)} does not support membership tests")

    # -- subscripts, attributes, calls --------------------------------------

    def _expr_subscript(self, node: ast.Subscript) -> Any:
        container = self._eval(node.value)
        if isinstance(node.slice, ast.Slice):
            return self._slice(node, container, node.slice)
        key = self._eval(node.slice)
        return self._get_item(node, container, key)

    def _get_item(self, node: ast.AST, container: Any, key: Any) -> Any:
        if isinstance(container, dict):
            if key in container:
                return container[key]
            self.fault(node, f"KeyError: {key!r}")
        if isinstance(container, (list, tuple, str, range)):
            if not isinstance(key, int) or isinstance(key, bool):
                self.fault(node, f"{_type_name(container)} indices must be integers")
            try:
                return container[key]
            except IndexError:
                self.fault(node, f"{_type_name(container)} index out of range")
        self.fault(node, f"{_type_name(container)} is not subscriptable")

    def _slice(self, node: ast.AST, container: Any, spec: ast.Slice) -> Any:
        def part(sub: ast.expr | None) -> int | None:
            if sub is None:
                return None
            value = self._eval(sub)
            if value is None:
                return None
            if not isinstance(value, int) or isinstance(value, bool):
                self.fault(sub, "slice bounds must be integers")
            return value

        lower, upper, step = part(spec.lower), part(spec.upper), part(spec.step)
        if step == 0:
            self.fault(node, "slice step cannot be zero")
        if isinstance(container, (str, list, tuple)):
            return container[lower:upper:step]
        self.fault(node, f"{_type_name(container)} cannot be sliced")

    def _expr_attribute(self, node: ast.Attribute) -> Any:
        obj = self._eval(node.value)
        name = node.attr
        if name.startswith("_"):
            self.fault(node, "private attributes are not accessible")
        if isinstance(obj, ShimModule):
            try:
                return obj.get(name)
            except ScriptFault as exc:
                exc.line = node.lineno
                raise
        if isinstance(obj, ScriptPath):
            if name in PATH_PROPERTIES:
                return getattr(obj, name)
            if name in PATH_METHODS:
                return getattr(obj, name)
            self.fault(node, f"path has no attribute '{name}'")
        if isinstance(obj, ScriptFile):
            if name in FILE_PROPERTIES:
                return getattr(obj, name)
            if name in FILE_METHODS:
                return getattr(obj, name)
            self.fault(node, f"file has no attribute '{name}'")
        if isinstance(obj, str):
            if name == "format":
                return functools.partial(self._safe_format, obj)
            if name in _STR_METHODS:
                return getattr(obj, name)
            self.fault(node, f"str has no attribute '{name}'")
        if isinstance(obj, list):
            if name in _LIST_METHODS:
                return getattr(obj, name)
            self.fault(node, f"list has no attribute '{name}'")
        if isinstance(obj, tuple):
            if name in _TUPLE_METHODS:
                return getattr(obj, name)
            self.fault(node, f"tuple has no attribute '{name}'")
        if isinstance(obj, dict):
            return self._dict_method(node, obj, name)
        self.fault(node, f"{_type_name(obj)} has no attribute '{name}'")

    def _dict_method(self, node: ast.AST, obj: dict, name: str) -> Any:
        if name not in _DICT_METHODS:
            self.fault(node, f"map has no attribute '{name}'")
        if name == "keys":
            return lambda: list(obj.keys())
        if name == "values":
            return lambda: list(obj.values())
        if name == "items":
            return lambda: [(k, v) for k, v in obj.items()]
        if name == "copy":
            return lambda: dict(obj)
        if name == "update":
            def update(other: Any) -> None:
                if not isinstance(other, dict):
                    raise ScriptFault("update requires a map")
                obj.update(other)

            return update
        if name == "setdefault":
            def setdefault(key: Any, default: Any = None) -> Any:
                if not isinstance(key, (str, int)):
                    raise ScriptFault("map keys must be strings or integers")
                return obj.setdefault(key, default)

            return setdefault
        return getattr(obj, name)  # get, pop, clear

    def _safe_format(self, template: str, *args: Any, **kwargs: Any) -> str:
        for _, fieldname, spec, _ in _string.Formatter().parse(template):
            if fieldname is not None and ("." in fieldname or "[" in fieldname):
                raise ScriptFault(
                    "format fields with attribute or index access are not supported"
                )
            if spec is not None and "{" in spec:
                raise ScriptFault("nested format specs are not supported")
        shown_args = [self._display(a) if not isinstance(a, (bool, int, float, str)) else a for a in args]
        shown_kwargs = {
            k: (self._display(v) if not isinstance(v, (bool, int, float, str)) else v)
            for k, v in kwargs.items()
        }
        return template.format(*shown_args, **shown_kwargs)

    def _expr_call(self, node: ast.Call) -> Any:
        fn = self._eval(node.func)
        args = [self._eval(a) for a in node.args]
        kwargs = {kw.arg: self._eval(kw.value) for kw in node.keywords}
        if isinstance(fn, ScriptFunction):
            return self.call_function(fn, args, kwargs, node)
        if callable(fn):
            try:
                result = fn(*args, **kwargs)
            except (ScriptFault, SandboxEscape) as exc:
                if exc.line is None:
                    exc.line = node.lineno
                raise
            except _CONTROL:
                raise
            except ImportViolation:
                raise
            except _HOST_ERRORS as exc:
                self.fault(node, f"{type(exc).__name__}: {exc}")
            return self._check_host_result(node, result)
        self.fault(node, f"{_type_name(fn)} is not callable")

    def _check_host_result(self, node: ast.AST, value: Any, depth: int = 0) -> Any:
        if depth > 16:
            return value
        if isinstance(value, int) and not isinstance(value, bool):
            self._check_int(node, value)
        elif isinstance(value, (list, tuple)):
            for item in value:
                self._check_host_result(node, item, depth + 1)
        elif isinstance(value, dict):
            for item in value.values():
                self._check_host_result(node, item, depth + 1)
        return value

    def call_function(
        self,
        fn: ScriptFunction,
        args: list[Any],
        kwargs: dict[str, Any],
        node: ast.AST | None = None,
    ) -> Any:
        self.call_depth += 1
        if self.call_depth > MAX_CALL_DEPTH:
            self.call_depth -= 1
            self.fault(node, "maximum recursion depth exceeded")
        params = [a.arg for a in fn.node.args.args]
        frame: dict[str, Any] = {}
        if len(args) > len(params):
            self.call_depth -= 1
            self.fault(
                node,
                f"{fn.name}() takes {len(params)} arguments ({len(args)} given)",
            )
        for name, value in zip(params, args):
            frame[name] = value
        for name, value in kwargs.items():
            if name not in params:
                self.call_depth -= 1
                self.fault(node, f"{fn.name}() got an unexpected keyword argument '{name}'")
            if name in frame:
                self.call_depth -= 1
                self.fault(node, f"{fn.name}() got multiple values for argument '{name}'")
            frame[name] = value
        n_required = len(params) - len(fn.defaults)
        for i, name in enumerate(params):
            if name not in frame:
                if i >= n_required:
                    frame[name] = fn.defaults[i - n_required]
                else:
                    self.call_depth -= 1
                    self.fault(node, f"{fn.name}() missing required argument '{name}'")
        saved = self.scopes
        self.scopes = fn.closure + [frame]
        try:
            for stmt in fn.node.body:
                self._exec(stmt)
            return None
        except _Return as ret:
            return ret.value
        finally:
            self.scopes = saved
            self.call_depth -= 1

    # -- comprehensions -----------------------------------------------------

    def _expr_listcomp(self, node: ast.ListComp) -> list:
        result: list[Any] = []
        self.scopes.append({})
        try:
            self._run_comprehension(node.generators, 0, lambda: result.append(self._eval(node.elt)))
        finally:
            self.scopes.pop()
        return result

    def _expr_dictcomp(self, node: ast.DictComp) -> dict:
        result: dict[Any, Any] = {}
        self.scopes.append({})

        def emit() -> None:
            key = self._eval(node.key)
            if not isinstance(key, (str, int)):
                self.fault(node.key, "map keys must be strings or integers")
            result[key] = self._eval(node.value)

        try:
            self._run_comprehension(node.generators, 0, emit)
        finally:
            self.scopes.pop()
        return result

    def _run_comprehension(
        self, generators: list[ast.comprehension], index: int, emit: Callable[[], None]
    ) -> None:
        if index == len(generators):
            emit()
            return
        gen = generators[index]
        iterable = self._eval(gen.iter)
        for item in self._iterate(gen.iter, iterable):
            self.tick(gen.target)
            self._assign(gen.target, item)
            if all(self._truthy(self._eval(cond)) for cond in gen.ifs):
                self._run_comprehension(generators, index + 1, emit)

    # -- value helpers ------------------------------------------------------

    def _truthy(self, value: Any) -> bool:
        if value is None:
            return False
        if isinstance(value, (bool, int, float)):
            return bool(value)
        if isinstance(value, (str, list, tuple, dict, range)):
            return len(value) > 0
        return True

    def _display(self, value: Any) -> str:
        if isinstance(value, str):
            return value
        if value is None or isinstance(value, (bool, int, float)):
            return str(value)
        if isinstance(value, ScriptPath):
            return value.raw
        return self._repr_value(value)

    def _repr_value(self, value: Any, depth: int = 0) -> str:
        if depth > 32:
            return "..."
        if isinstance(value, str):
            return repr(value)
        if value is None or isinstance(value, (bool, int, float)):
            return str(value)
        if isinstance(value, list):
            return "[" + ", ".join(self._repr_value(v, depth + 1) for v in value) + "]"
        if isinstance(value, tuple):
            inner = ", ".join(self._repr_value(v, depth + 1) for v in value)
            if len(value) == 1:
                inner += ","
            return "(" + inner + ")"
        if isinstance(value, dict):
            items = ", ".join(
                f"{self._repr_value(k, depth + 1)}: {self._repr_value(v, depth + 1)}"
                for k, v in value.items()
            )
            return "{" + items + "}"
        if isinstance(value, range):
            return repr(value)
        if isinstance(value, (ScriptPath, ScriptFile, ShimModule, ScriptFunction)):
            return repr(value)
        name = getattr(value, "__name__", type(value).__name__)
        return f"<callable {name}>"

    def _concrete(self, node: ast.AST | None, value: Any) -> list:
        if isinstance(value, list):
            return list(value)
        if isinstance(value, tuple):
            return list(value)
        if isinstance(value, str):
            return list(value)
        if isinstance(value, range):
            if len(value) > MAX_SEQUENCE_ITEMS:
                raise ScriptFault("sequence result too large")
            return list(value)
        if isinstance(value, dict):
            return list(value.keys())
        raise ScriptFault(f"{_type_name(value)} is not iterable")

    # -- builtins -----------------------------------------------------------

    def _make_builtins(self) -> dict[str, Any]:
        ev = self

        def b_print(*args: Any, sep: Any = " ", end: Any = "\n") -> None:
            if not isinstance(sep, str) or not isinstance(end, str):
                raise ScriptFault("sep and end must be strings")
            text = sep.join(ev._display(a) for a in args) + end
            ev._write_stdout(text)

        def b_len(value: Any) -> int:
            if isinstance(value, (str, list, tuple, dict, range)):
                return len(value)
            raise ScriptFault(f"{_type_name(value)} has no length")

        def b_abs(value: Any) -> Any:
            if _is_number(value):
                return abs(value)
            raise ScriptFault(f"cannot take abs of {_type_name(value)}")

        def b_int(value: Any = 0) -> int:
            if isinstance(value, str) or _is_number(value):
                result = int(value)
                if abs(result) > INT_LIMIT:
                    raise ScriptFault("integer overflow (beyond 64-bit range)")
                return result
            raise ScriptFault(f"cannot convert {_type_name(value)} to int")

        def b_float(value: Any = 0.0) -> float:
            if isinstance(value, str) or _is_number(value):
                return float(value)
            raise ScriptFault(f"cannot convert {_type_name(value)} to float")

        def b_str(value: Any = "") -> str:
            return ev._display(value)

        def b_repr(value: Any) -> str:
            return ev._repr_value(value)

        def b_bool(value: Any = False) -> bool:
            return ev._truthy(value)

        def b_round(value: Any, ndigits: Any = None) -> Any:
            if not _is_number(value):
                raise ScriptFault(f"cannot round {_type_name(value)}")
            if ndigits is None:
                return round(value)
            if not isinstance(ndigits, int) or isinstance(ndigits, bool):
                raise ScriptFault("ndigits must be an integer")
            return round(value, ndigits)

        def b_range(*args: Any) -> range:
            if not 1 <= len(args) <= 3:
                raise ScriptFault("range takes 1 to 3 arguments")
            for a in args:
                if not isinstance(a, int) or isinstance(a, bool):
                    raise ScriptFault("range arguments must be integers")
            return range(*args)

        def b_list(value: Any = None) -> list:
            if value is None:
                return []
            return ev._concrete(None, value)

        def b_tuple(value: Any = None) -> tuple:
            if value is None:
                return ()
            return tuple(ev._concrete(None, value))

        def b_dict(value: Any = None) -> dict:
            if value is None:
                return {}
            if isinstance(value, dict):
                return dict(value)
            raise ScriptFault("dict() accepts a map or nothing")

        def b_sorted(value: Any, key: Any = None, reverse: Any = False) -> list:
            items = ev._concrete(None, value)
            if key is not None and not callable(key):
                raise ScriptFault("key must be callable")
            return sorted(items, key=key, reverse=ev._truthy(reverse))

        def b_sum(value: Any, start: Any = 0) -> Any:
            items = ev._concrete(None, value)
            result = sum(items, start)
            if isinstance(result, int) and abs(result) > INT_LIMIT:
                raise ScriptFault("integer overflow (beyond 64-bit range)")
            return result

        def _pick(fn: Callable, args: tuple, kwargs: dict) -> Any:
            key = kwargs.pop("key", None)
            has_default = "default" in kwargs
            default = kwargs.pop("default", None)
            if kwargs:
                raise ScriptFault(f"unexpected keyword arguments: {sorted(kwargs)}")
            if key is not None and not callable(key):
                raise ScriptFault("key must be callable")
            if len(args) == 0:
                raise ScriptFault(f"{fn.__name__}() needs at least one argument")
            items = ev._concrete(None, args[0]) if len(args) == 1 else list(args)
            if not items:
                if has_default:
                    return default
                raise ScriptFault(f"{fn.__name__}() of an empty sequence")
            if key is None:
                return fn(items)
            return fn(items, key=key)

        def b_min(*args: Any, **kwargs: Any) -> Any:
            return _pick(min, args, kwargs)

        def b_max(*args: Any, **kwargs: Any) -> Any:
            return _pick(max, args, kwargs)

        def b_enumerate(value: Any, start: Any = 0) -> list:
            if not isinstance(start, int) or isinstance(start, bool):
                raise ScriptFault("start must be an integer")
            return list(enumerate(ev._concrete(None, value), start))

        def b_zip(*values: Any) -> list:
            columns = [ev._concrete(None, v) for v in values]
            return list(zip(*columns))

        def b_reversed(value: Any) -> list:
            return list(reversed(ev._concrete(None, value)))

        def b_all(value: Any) -> bool:
            return all(ev._truthy(v) for v in ev._concrete(None, value))

        def b_any(value: Any) -> bool:
            return any(ev._truthy(v) for v in ev._concrete(None, value))

        def b_open(path: Any, mode: Any = "r") -> ScriptFile:
            return ev._open_file(path, mode)

        def b_final_answer(value: Any = None) -> None:
            ev._validate_answer(value)
            raise _Answered(value)

        names = {
            "print": b_print,
            "len": b_len,
            "abs": b_abs,
            "int": b_int,
            "float": b_float,
            "str": b_str,
            "repr": b_repr,
            "bool": b_bool,
            "round": b_round,
            "range": b_range,
            "list": b_list,
            "tuple": b_tuple,
            "dict": b_dict,
            "sorted": b_sorted,
            "sum": b_sum,
            "min": b_min,
            "max": b_max,
            "enumerate": b_enumerate,
            "zip": b_zip,
            "reversed": b_reversed,
            "all": b_all,
            "any": b_any,
            "open": b_open,
            "final_answer": b_final_answer,
        }
        for public, fn in names.items():
            try:
                fn.__name__ = public
            except AttributeError:
                pass
        return names

    def _write_stdout(self, text: str) -> None:
        self.out_bytes += len(text)
        if self.out_bytes > MAX_STDOUT_BYTES:
            raise ScriptFault("stdout limit exceeded (8 MiB)")
        self.out_parts.append(text)

    def _open_file(self, path: Any, mode: Any) -> ScriptFile:
        if isinstance(path, ScriptPath):
            raw = path.raw
        elif isinstance(path, str):
            raw = path
        else:
            raise ScriptFault("open requires a string path")
        if not isinstance(mode, str):
            raise ScriptFault("open mode must be a string")
        normalized = mode.replace("t", "")
        if normalized not in ("r", "w", "a"):
            raise ScriptFault(f"mode '{mode}' is not supported (text r, w, a only)")
        resolved = resolve_in_jail(self.ctx, raw)
        handle = open(resolved, normalized, encoding="utf-8")
        if normalized in ("w", "a"):
            self.ctx.record_write(jail_relative(self.ctx, resolved))
        wrapper = ScriptFile(handle, raw, normalized)
        self.open_files.append(wrapper)
        return wrapper

    def _validate_answer(self, value: Any, depth: int = 0) -> None:
        if depth > 64:
            raise ScriptFault("final answer is too deeply nested")
        if value is None or isinstance(value, (bool, int, float, str)):
            return
        if isinstance(value, (list, tuple)):
            for item in value:
                self._validate_answer(item, depth + 1)
            return
        if isinstance(value, dict):
            for key, item in value.items():
                if not isinstance(key, (str, int)):
                    raise ScriptFault("final answer map keys must be strings or integers")
                self._validate_answer(item, depth + 1)
            return
        raise ScriptFault(
            f"final answer contains a {_type_name(value)}, which is not serializable"
        )


def execute(
    program: ScriptProgram,
    limits: InterpreterLimits,
    bindings: dict[str, Any] | None = None,
) -> ExecutionResult:
    """Run a validated program; the import gate fires before any evaluation.

    A gate refusal produces a result with zero operations used and no
    filesystem effects, since the evaluator never starts.
    """
    try:
        check_imports(program, limits)
    except ImportViolation as violation:
        return ExecutionResult(
            stdout="",
            final_answer=None,
            answered=False,
            error=ExecutionError(violation.kind, violation.message, violation.line),
            operations_used=0,
            files_written=[],
        )
    jail = Path(limits.working_dir).resolve()
    jail.mkdir(parents=True, exist_ok=True)
    evaluator = _Evaluator(program, limits, dict(bindings or {}), jail)
    return evaluator.run()


def run_source(
    source: str,
    limits: InterpreterLimits,
    bindings: dict[str, Any] | None = None,
) -> ExecutionResult:
    """Parse, gate, and execute source text in one call."""
    try:
        program = parse(source)
    except ParseError as exc:
        return ExecutionResult(
            stdout="",
            final_answer=None,
            answered=False,
            error=ExecutionError("ParseError", exc.message, exc.line),
            operations_used=0,
            files_written=[],
        )
    return execute(program, limits, bindings)
