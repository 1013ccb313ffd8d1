"""Deterministic playback of recorded tool results.

Heavyweight pipeline tools are backed by recordings instead of live model
inference.  A tool's recordings live in ``<root>/<tool_name>/records.json``
as a JSON array of ``{"args": {...}, "result": ...}`` entries.  Lookup keys
canonicalize the call: defaults filled in, map keys sorted, paths under the
dataset root rewritten to a ``{dataset}`` placeholder, and non-keyed params
(per-run scratch dirs) dropped.  Result strings may reference ``{dataset}``
or any string-valued argument as ``{argname}``; substitution happens at call
time, which keeps one recording valid for every working directory.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from .registry import FixtureMiss, ToolDescriptor


def _norm(path: str) -> str:
    return Path(path).as_posix()


class FixtureStore:
    """Lazy per-tool loader over a directory of recorded results."""

    def __init__(self, root: Path | str, dataset_root: Path | str | None = None):
        self.root = Path(root)
        self._dataset_variants: tuple[str, ...] = ()
        self._dataset_str = ""
        if dataset_root is not None:
            raw = Path(dataset_root)
            self._dataset_str = _norm(str(raw))
            variants = {self._dataset_str, _norm(str(raw.resolve()))}
            # longest first so resolved prefixes win over raw ones
            self._dataset_variants = tuple(sorted(variants, key=len, reverse=True))
        self._records: dict[str, dict[str, Any]] = {}

    # -- canonicalization ---------------------------------------------------

    def _canonical_value(self, value: Any) -> Any:
        if isinstance(value, str):
            text = _norm(value) if "/" in value else value
            for prefix in self._dataset_variants:
                if text == prefix:
                    return "{dataset}"
                if text.startswith(prefix + "/"):
                    return "{dataset}" + text[len(prefix):]
            return value
        if isinstance(value, (list, tuple)):
            return [self._canonical_value(v) for v in value]
        if isinstance(value, dict):
            return {k: self._canonical_value(v) for k, v in value.items()}
        return value

    def canonical_key(self, descriptor: ToolDescriptor, args: dict[str, Any]) -> str:
        keyed = {
            name: self._canonical_value(value)
            for name, value in args.items()
            if self._is_keyed(descriptor, name)
        }
        return json.dumps(keyed, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def _is_keyed(descriptor: ToolDescriptor, name: str) -> bool:
        for param in descriptor.params:
            if param.name == name:
                return param.keyed
        return True

    # -- playback -----------------------------------------------------------

    def _table_for(self, descriptor: ToolDescriptor) -> dict[str, Any]:
        name = descriptor.name
        if name not in self._records:
            path = self.root / name / "records.json"
            table: dict[str, Any] = {}
            if path.is_file():
                for entry in json.loads(path.read_text(encoding="utf-8")):
                    key = self.canonical_key(descriptor, entry["args"])
                    table[key] = entry["result"]
            self._records[name] = table
        return self._records[name]

    def lookup(self, descriptor: ToolDescriptor, args: dict[str, Any]) -> Any:
        table = self._table_for(descriptor)
        key = self.canonical_key(descriptor, args)
        if key not in table:
            raise FixtureMiss(
                f"no recorded result for {descriptor.name} with args {key}"
            )
        return self._substitute(table[key], args)

    def _substitute(self, value: Any, args: dict[str, Any]) -> Any:
        if isinstance(value, str):
            out = value
            if "{dataset}" in out and self._dataset_str:
                out = out.replace("{dataset}", self._dataset_str)
            for name, arg in args.items():
                token = "{" + name + "}"
                if isinstance(arg, str) and token in out:
                    out = out.replace(token, arg)
            return out
        if isinstance(value, list):
            return [self._substitute(v, args) for v in value]
        if isinstance(value, dict):
            return {k: self._substitute(v, args) for k, v in value.items()}
        return value

    def bind(self, descriptor: ToolDescriptor):
        """Callable implementing the tool by playback."""

        def call(**call_args: Any) -> Any:
            return self.lookup(descriptor, call_args)

        call.__name__ = descriptor.name
        return call


def unavailable_tool(descriptor: ToolDescriptor):
    """Binding used when no fixture store is configured."""

    def call(**call_args: Any) -> Any:
        raise FixtureMiss(
            f"{descriptor.name} has no fixture store configured in this run"
        )

    call.__name__ = descriptor.name
    return call
