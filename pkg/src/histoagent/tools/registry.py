"""Tool descriptors, bindings, and the registry the agent draws from.

A descriptor is the model-facing contract: name, category, description, typed
parameters, and documented return keys.  A binding pairs a descriptor with the
callable that implements it.  The registry owns uniqueness, argument
validation, dispatch, and the standardized docstring rendering that goes into
the system prompt.  Once frozen it is immutable and safe to share across
parallel runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from ..interp.errors import ScriptFault


class ToolError(Exception):
    """Base class for tool-layer failures surfaced to callers."""


class DuplicateTool(ToolError):
    pass


class UnknownTool(ToolError):
    pass


class ArgumentError(ToolError):
    pass


class DegenerateContour(ToolError):
    """Contour has too few distinct points for the requested measure."""


class FixtureMiss(ToolError):
    """No recorded fixture matches the canonicalized call arguments."""


_TYPE_CHECKS: dict[str, tuple[type, ...]] = {
    "str": (str,),
    "int": (int,),
    "float": (int, float),
    "bool": (bool,),
    "list": (list, tuple),
    "dict": (dict,),
}

_NO_DEFAULT = object()


@dataclass(frozen=True)
class ToolParam:
    """One parameter of a tool signature.

    ``keyed`` marks whether the parameter takes part in fixture lookup keys;
    per-run scratch locations (job dirs) set it to False so recordings stay
    portable across working directories.
    """

    name: str
    type_name: str
    doc: str
    default: Any = _NO_DEFAULT
    keyed: bool = True

    @property
    def required(self) -> bool:
        return self.default is _NO_DEFAULT

    def signature_fragment(self) -> str:
        if self.required:
            return f"{self.name}: {self.type_name}"
        return f"{self.name}: {self.type_name} = {self.default!r}"


@dataclass(frozen=True)
class ToolDescriptor:
    """Model-facing contract for one tool."""

    name: str
    category: str
    description: str
    params: tuple[ToolParam, ...] = ()
    returns: tuple[tuple[str, str], ...] = ()
    notes: tuple[str, ...] = ()
    prerequisites: tuple[str, ...] = ()

    def signature(self) -> str:
        inner = ", ".join(p.signature_fragment() for p in self.params)
        return f"{self.name}({inner}) -> dict"

    def render(self) -> str:
        """Standardized docstring block for the system prompt."""
        lines = [self.signature(), "", self.description.strip()]
        if self.notes:
            lines += ["", "Notes:"]
            lines += [f"    - {note}" for note in self.notes]
        if self.prerequisites:
            lines += ["", "Prerequisites:"]
            lines += [f"    - {req}" for req in self.prerequisites]
        if self.returns:
            lines += ["", "Returns (dict):"]
            lines += [f'    "{key}": {doc}' for key, doc in self.returns]
        if self.params:
            lines += ["", "Args:"]
            lines += [f"    {p.name} ({p.type_name}): {p.doc}" for p in self.params]
        return "\n".join(lines)


@dataclass
class ToolBinding:
    """A descriptor plus the callable that implements it."""

    descriptor: ToolDescriptor
    func: Callable[..., Any]
    deterministic: bool = True


class ToolRegistry:
    """Ordered, name-unique collection of tool bindings."""

    def __init__(self) -> None:
        self._bindings: dict[str, ToolBinding] = {}
        self._frozen = False

    def register(self, binding: ToolBinding) -> None:
        if self._frozen:
            raise ToolError("registry is frozen")
        name = binding.descriptor.name
        if name in self._bindings:
            raise DuplicateTool(f"tool '{name}' is already registered")
        self._bindings[name] = binding

    def freeze(self) -> None:
        self._frozen = True

    def __len__(self) -> int:
        return len(self._bindings)

    def __contains__(self, name: str) -> bool:
        return name in self._bindings

    def names(self) -> list[str]:
        return list(self._bindings)

    def get(self, name: str) -> ToolBinding:
        try:
            return self._bindings[name]
        except KeyError:
            raise UnknownTool(f"unknown tool '{name}'") from None

    def categories(self) -> list[str]:
        seen: list[str] = []
        for binding in self._bindings.values():
            cat = binding.descriptor.category
            if cat not in seen:
                seen.append(cat)
        return seen

    def by_category(self, category: str) -> list[ToolDescriptor]:
        return [
            b.descriptor
            for b in self._bindings.values()
            if b.descriptor.category == category
        ]

    def validate_args(self, descriptor: ToolDescriptor, args: dict[str, Any]) -> dict[str, Any]:
        """Check names and types against the descriptor; fill defaults."""
        known = {p.name: p for p in descriptor.params}
        for name in args:
            if name not in known:
                raise ArgumentError(
                    f"{descriptor.name} got an unexpected argument '{name}'"
                )
        merged: dict[str, Any] = {}
        for param in descriptor.params:
            if param.name in args:
                value = args[param.name]
            elif param.required:
                raise ArgumentError(
                    f"{descriptor.name} missing required argument '{param.name}'"
                )
            else:
                value = param.default
            if value is None and not param.required:
                merged[param.name] = None
                continue
            expected = _TYPE_CHECKS.get(param.type_name)
            if expected is not None and not isinstance(value, expected):
                raise ArgumentError(
                    f"{descriptor.name} argument '{param.name}' must be "
                    f"{param.type_name}, got {type(value).__name__}"
                )
            merged[param.name] = value
        return merged

    def invoke(self, name: str, args: dict[str, Any] | None = None) -> Any:
        binding = self.get(name)
        merged = self.validate_args(binding.descriptor, dict(args or {}))
        return binding.func(**merged)

    def render_docs(self, categories: list[str] | None = None) -> str:
        """Render every tool once, grouped under category headers."""
        chosen = categories if categories is not None else self.categories()
        sections: list[str] = []
        for category in chosen:
            descriptors = self.by_category(category)
            if not descriptors:
                continue
            blocks = [d.render() for d in descriptors]
            sections.append(f"## {category}\n\n" + "\n\n".join(blocks))
        return "\n\n".join(sections)

    def interpreter_bindings(self) -> dict[str, Callable[..., Any]]:
        """Name-to-callable map for the script runtime.

        The bridge accepts positional arguments in descriptor order, then
        funnels through invoke() so validation is identical either way.
        Tool-layer errors become script faults, which scripts may catch.
        """
        out: dict[str, Callable[..., Any]] = {}
        for name, binding in self._bindings.items():
            out[name] = _make_bridge(self, binding)
        return out


def _make_bridge(registry: ToolRegistry, binding: ToolBinding) -> Callable[..., Any]:
    param_names = [p.name for p in binding.descriptor.params]
    tool_name = binding.descriptor.name

    def bridge(*args: Any, **kwargs: Any) -> Any:
        if len(args) > len(param_names):
            raise ScriptFault(
                f"{tool_name} takes {len(param_names)} arguments ({len(args)} given)"
            )
        call_args: dict[str, Any] = {}
        for name, value in zip(param_names, args):
            call_args[name] = value
        for name, value in kwargs.items():
            if name in call_args:
                raise ScriptFault(
                    f"{tool_name} got multiple values for argument '{name}'"
                )
            call_args[name] = value
        try:
            return registry.invoke(tool_name, call_args)
        except ToolError as exc:
            raise ScriptFault(str(exc)) from None

    bridge.__name__ = tool_name
    return bridge
