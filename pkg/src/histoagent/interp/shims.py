"""Module shims and sandboxed filesystem values for the script runtime.

Scripts never touch real Python modules.  An allowed import binds a
:class:`ShimModule`, a name-to-value table over vetted callables.  Filesystem
access goes through :class:`ScriptPath` and the restricted ``open``, both of
which resolve every path inside the working directory jail and refuse
anything that lands outside it (symlinks included, since resolution follows
them before the containment check).

Shimmed modules and their exact exports:

    math        sqrt floor ceil fabs exp log log10 log2 sin cos tan asin acos
                atan atan2 hypot degrees radians isnan isinf isfinite fsum
                gcd factorial pow pi e tau inf nan
    json        loads dumps load dump
    random      seed random randint uniform choice shuffle sample gauss
                randrange (one seeded generator per execution)
    statistics  mean median mode stdev pstdev variance pvariance
    pathlib     Path
"""

from __future__ import annotations

import json as _json
import math as _math
import random as _random
import statistics as _statistics
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

from .errors import SandboxEscape, ScriptFault


@dataclass
class SandboxContext:
    """Per-execution sandbox state handed to filesystem-touching values."""

    jail: Path
    record_write: Callable[[str], None] = field(default=lambda rel: None)


def resolve_in_jail(ctx: SandboxContext, raw: str) -> Path:
    """Resolve a script-supplied path and prove it stays inside the jail.

    Relative paths are anchored at the working directory.  Resolution follows
    symlinks, so a link pointing outside the jail is caught here.
    """
    candidate = Path(raw)
    if not candidate.is_absolute():
        candidate = ctx.jail / candidate
    resolved = candidate.resolve()
    if resolved != ctx.jail and not resolved.is_relative_to(ctx.jail):
        raise SandboxEscape(f"path escapes the working directory: {raw}")
    return resolved


def jail_relative(ctx: SandboxContext, resolved: Path) -> str:
    if resolved == ctx.jail:
        return "."
    return resolved.relative_to(ctx.jail).as_posix()


class ShimModule:
    """Read-only attribute table standing in for a real module."""

    __slots__ = ("name", "_attrs")

    def __init__(self, name: str, attrs: dict[str, Any]):
        self.name = name
        self._attrs = attrs

    def get(self, attr: str) -> Any:
        if attr in self._attrs:
            return self._attrs[attr]
        raise ScriptFault(f"module '{self.name}' has no attribute '{attr}'")

    def __repr__(self) -> str:
        return f"<module '{self.name}' (restricted)>"


class ScriptPath:
    """Path value with lexical operations plus jail-confined filesystem ones."""

    __slots__ = ("raw", "ctx")

    def __init__(self, raw: Any, ctx: SandboxContext):
        if isinstance(raw, ScriptPath):
            raw = raw.raw
        if not isinstance(raw, str):
            raise ScriptFault("Path() requires a string")
        self.raw = raw
        self.ctx = ctx

    # lexical, no filesystem involved
    @property
    def name(self) -> str:
        return Path(self.raw).name

    @property
    def stem(self) -> str:
        return Path(self.raw).stem

    @property
    def suffix(self) -> str:
        return Path(self.raw).suffix

    @property
    def parent(self) -> "ScriptPath":
        return ScriptPath(str(Path(self.raw).parent), self.ctx)

    def joinpath(self, *parts: Any) -> "ScriptPath":
        for part in parts:
            if not isinstance(part, (str, ScriptPath)):
                raise ScriptFault("path segments must be strings")
        tail = [p.raw if isinstance(p, ScriptPath) else p for p in parts]
        return ScriptPath(str(Path(self.raw).joinpath(*tail)), self.ctx)

    def with_suffix(self, suffix: str) -> "ScriptPath":
        return ScriptPath(str(Path(self.raw).with_suffix(suffix)), self.ctx)

    def with_name(self, name: str) -> "ScriptPath":
        return ScriptPath(str(Path(self.raw).with_name(name)), self.ctx)

    # filesystem, jail-checked
    def _resolved(self) -> Path:
        return resolve_in_jail(self.ctx, self.raw)

    def exists(self) -> bool:
        return self._resolved().exists()

    def is_file(self) -> bool:
        return self._resolved().is_file()

    def is_dir(self) -> bool:
        return self._resolved().is_dir()

    def mkdir(self, parents: bool = False, exist_ok: bool = False) -> None:
        self._resolved().mkdir(parents=bool(parents), exist_ok=bool(exist_ok))

    def read_text(self) -> str:
        return self._resolved().read_text(encoding="utf-8")

    def write_text(self, text: Any) -> int:
        if not isinstance(text, str):
            raise ScriptFault("write_text requires a string")
        target = self._resolved()
        count = target.write_text(text, encoding="utf-8")
        self.ctx.record_write(jail_relative(self.ctx, target))
        return count

    def iterdir(self) -> list["ScriptPath"]:
        base = self._resolved()
        entries = sorted(p.name for p in base.iterdir())
        joined = Path(self.raw)
        return [ScriptPath(str(joined / name), self.ctx) for name in entries]

    def glob(self, pattern: str) -> list["ScriptPath"]:
        if not isinstance(pattern, str):
            raise ScriptFault("glob requires a string pattern")
        if pattern.startswith("/") or ".." in pattern.split("/"):
            raise SandboxEscape(f"glob pattern escapes the working directory: {pattern}")
        base = self._resolved()
        rels = sorted(p.relative_to(base).as_posix() for p in base.glob(pattern))
        joined = Path(self.raw)
        return [ScriptPath(str(joined / rel), self.ctx) for rel in rels]

    def __truediv__(self, other: Any) -> "ScriptPath":
        return self.joinpath(other)

    def __eq__(self, other: Any) -> bool:
        return isinstance(other, ScriptPath) and other.raw == self.raw

    def __hash__(self) -> int:
        return hash(("ScriptPath", self.raw))

    def __str__(self) -> str:
        return self.raw

    def __repr__(self) -> str:
        return f"Path('{self.raw}')"


# Methods a path exposes to attribute access (properties listed separately).
PATH_PROPERTIES = frozenset({"name", "stem", "suffix", "parent"})
PATH_METHODS = frozenset(
    {
        "joinpath",
        "with_suffix",
        "with_name",
        "exists",
        "is_file",
        "is_dir",
        "mkdir",
        "read_text",
        "write_text",
        "iterdir",
        "glob",
    }
)


class ScriptFile:
    """Open text file handle confined to the jail; r, w, and a modes only."""

    __slots__ = ("_handle", "name", "mode", "closed")

    def __init__(self, handle: Any, name: str, mode: str):
        self._handle = handle
        self.name = name
        self.mode = mode
        self.closed = False

    def read(self) -> str:
        return self._handle.read()

    def readline(self) -> str:
        return self._handle.readline()

    def readlines(self) -> list[str]:
        return self._handle.readlines()

    def write(self, text: Any) -> int:
        if not isinstance(text, str):
            raise ScriptFault("write requires a string")
        return self._handle.write(text)

    def close(self) -> None:
        self._handle.close()
        self.closed = True

    def __repr__(self) -> str:
        return f"<file '{self.name}' mode '{self.mode}'>"


FILE_METHODS = frozenset({"read", "readline", "readlines", "write", "close"})
FILE_PROPERTIES = frozenset({"name", "mode", "closed"})


def _build_math() -> ShimModule:
    names = [
        "sqrt", "floor", "ceil", "fabs", "exp", "log", "log10", "log2",
        "sin", "cos", "tan", "asin", "acos", "atan", "atan2", "hypot",
        "degrees", "radians", "isnan", "isinf", "isfinite", "fsum", "gcd",
        "pow",
    ]
    attrs: dict[str, Any] = {n: getattr(_math, n) for n in names}

    def factorial(n: Any) -> int:
        if not isinstance(n, int) or isinstance(n, bool) or n < 0:
            raise ScriptFault("factorial requires a non-negative integer")
        if n > 20:  # 21! no longer fits the 64-bit value model
            raise ScriptFault("integer overflow (beyond 64-bit range)")
        return _math.factorial(n)

    attrs["factorial"] = factorial
    attrs.update(pi=_math.pi, e=_math.e, tau=_math.tau, inf=_math.inf, nan=_math.nan)
    return ShimModule("math", attrs)


def _build_json() -> ShimModule:
    def _ensure_jsonable(value: Any, depth: int = 0) -> None:
        if depth > 64:
            raise ScriptFault("value is too deeply nested for json")
        if value is None or isinstance(value, (bool, int, float, str)):
            return
        if isinstance(value, (list, tuple)):
            for item in value:
                _ensure_jsonable(item, depth + 1)
            return
        if isinstance(value, dict):
            for key, item in value.items():
                if not isinstance(key, (str, int)):
                    raise ScriptFault("json object keys must be strings")
                _ensure_jsonable(item, depth + 1)
            return
        raise ScriptFault(f"value of type {type(value).__name__} is not json serializable")

    def dumps(value: Any, indent: Any = None, sort_keys: bool = False) -> str:
        _ensure_jsonable(value)
        return _json.dumps(value, indent=indent, sort_keys=bool(sort_keys))

    def loads(text: Any) -> Any:
        if not isinstance(text, str):
            raise ScriptFault("json.loads requires a string")
        return _json.loads(text)

    def dump(value: Any, fh: Any, indent: Any = None, sort_keys: bool = False) -> None:
        if not isinstance(fh, ScriptFile):
            raise ScriptFault("json.dump requires an open file")
        fh.write(dumps(value, indent=indent, sort_keys=sort_keys))

    def load(fh: Any) -> Any:
        if not isinstance(fh, ScriptFile):
            raise ScriptFault("json.load requires an open file")
        return _json.loads(fh.read())

    return ShimModule("json", {"loads": loads, "dumps": dumps, "load": load, "dump": dump})


def _build_random(seed: int) -> ShimModule:
    rng = _random.Random(seed)
    names = [
        "seed", "random", "randint", "uniform", "choice", "shuffle",
        "sample", "gauss", "randrange",
    ]
    return ShimModule("random", {n: getattr(rng, n) for n in names})


def _build_statistics() -> ShimModule:
    names = ["mean", "median", "mode", "stdev", "pstdev", "variance", "pvariance"]
    return ShimModule("statistics", {n: getattr(_statistics, n) for n in names})


def _build_pathlib(ctx: SandboxContext) -> ShimModule:
    def path_factory(raw: Any = ".") -> ScriptPath:
        return ScriptPath(raw, ctx)

    path_factory.__name__ = "Path"
    return ShimModule("pathlib", {"Path": path_factory})


def build_shims(ctx: SandboxContext, random_seed: int = 42) -> dict[str, ShimModule]:
    """Fresh shim set for one execution; the RNG is seeded here."""
    return {
        "math": _build_math(),
        "json": _build_json(),
        "random": _build_random(random_seed),
        "statistics": _build_statistics(),
        "pathlib": _build_pathlib(ctx),
    }
