"""Unresolved syntax trees for ``.fnet`` and ``.fview`` files.

Equality on every node is structural: source spans and file names are
carried along for diagnostics but never compared.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from .diagnostics import NO_SPAN, Span

Dotted = tuple[str, ...]


def dotted_text(path: Dotted) -> str:
    return ".".join(path)


@dataclass
class SignalDecl:
    name: str
    value_type: str | None = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class PortDecl:
    direction: str  # "in" | "out"
    name: str
    stereotype: str | None = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class ConnectDecl:
    source: Dotted
    target: Dotted
    signals: frozenset[str] = frozenset()
    stereotype: str | None = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    def describe(self) -> str:
        return f"{dotted_text(self.source)} -> {dotted_text(self.target)}"


@dataclass
class BlockDecl:
    name: str
    type_ref: str | None = None
    body: list[BodyDecl] = field(default_factory=list)
    span: Span = field(default=NO_SPAN, compare=False, repr=False)

    @property
    def blocks(self) -> list[BlockDecl]:
        return [d for d in self.body if isinstance(d, BlockDecl)]


BodyDecl = Union[BlockDecl, PortDecl, ConnectDecl]


@dataclass
class TypeDecl:
    name: str
    body: list[BodyDecl] = field(default_factory=list)
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


TopDecl = Union[SignalDecl, TypeDecl, BlockDecl, ConnectDecl]


@dataclass
class NetFragment:
    """One parsed architecture file, declarations kept in source order."""

    file: str = field(default="<memory>", compare=False)
    decls: list[TopDecl] = field(default_factory=list)

    @property
    def signal_decls(self) -> list[SignalDecl]:
        return [d for d in self.decls if isinstance(d, SignalDecl)]

    @property
    def type_decls(self) -> list[TypeDecl]:
        return [d for d in self.decls if isinstance(d, TypeDecl)]

    @property
    def block_decls(self) -> list[BlockDecl]:
        return [d for d in self.decls if isinstance(d, BlockDecl)]

    @property
    def connect_decls(self) -> list[ConnectDecl]:
        return [d for d in self.decls if isinstance(d, ConnectDecl)]


@dataclass
class VBlockDecl:
    name: Dotted
    env: bool = False
    stereotype: str | None = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class VConnectDecl:
    source: Dotted
    target: Dotted
    signals: frozenset[str] = frozenset()
    stereotype: str | None = None
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


@dataclass
class ContainsDecl:
    outer: Dotted
    body: list[ViewItem] = field(default_factory=list)
    span: Span = field(default=NO_SPAN, compare=False, repr=False)


ViewItem = Union[VBlockDecl, ContainsDecl, VConnectDecl]


@dataclass
class ViewFragment:
    name: str
    items: list[ViewItem] = field(default_factory=list)
    file: str = field(default="<memory>", compare=False)
    span: Span = field(default=NO_SPAN, compare=False, repr=False)
