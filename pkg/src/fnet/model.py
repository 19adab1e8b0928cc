"""Resolved in-memory model: block forest, ports, signals, connectors and feature views.

A :class:`ResolvedNet` is immutable once built. Block ids are dense integers
that index the net's block table; they mean nothing outside the net that
issued them.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from . import diagnostics as diag
from .diagnostics import NO_SPAN, Diagnostic, Span
from .syntax import BodyDecl, ConnectDecl, ContainsDecl, Dotted, VBlockDecl, VConnectDecl, ViewFragment, dotted_text

BlockId = int


class InternalError(Exception):
    """A programming error, such as indexing a net with an id it never issued."""


@dataclass(frozen=True)
class Port:
    name: str
    direction: str
    owner: BlockId
    stereotype: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)
    from_type: bool = False


@dataclass(frozen=True)
class Block:
    id: BlockId
    name: str
    parent: BlockId | None
    children: tuple[BlockId, ...]
    type_ref: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)
    # (instance root, type name) for blocks produced by type expansion
    instantiated_from: tuple[BlockId, str] | None = None
    ports: tuple[Port, ...] = ()

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None


@dataclass(frozen=True)
class Signal:
    name: str
    value_type: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class BlockTypeDef:
    name: str
    body: tuple[BodyDecl, ...]
    origin: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True, order=True)
class Endpoint:
    block: BlockId
    port: str | None = None


@dataclass(frozen=True)
class Connector:
    id: int
    source: Endpoint
    target: Endpoint
    signals: frozenset[str]
    stereotype: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)
    # instance root whose type body produced this connector
    instantiated_from: BlockId | None = None


@dataclass(frozen=True)
class ConnectSource:
    """A connect declaration together with the block path it was written in."""

    scope: Dotted
    decl: ConnectDecl


@dataclass(frozen=True)
class Rejected:
    """A connect declaration that could not become a connector (N004 / N006 material)."""

    code: str
    message: str
    origin: Span
    related: tuple[str, ...] = ()


class AncestorIndex:
    """Entry/exit numbering of a depth-first walk; ancestor queries are O(1)."""

    def __init__(self, parents: list[BlockId | None], children: list[tuple[BlockId, ...]]) -> None:
        n = len(parents)
        self.enter = [0] * n
        self.exit = [0] * n
        self.depth = [0] * n
        self.order: list[BlockId] = []
        clock = 0
        for root in (b for b in range(n) if parents[b] is None):
            stack: list[tuple[BlockId, bool]] = [(root, False)]
            while stack:
                b, done = stack.pop()
                if done:
                    self.exit[b] = clock
                    continue
                self.enter[b] = clock
                clock += 1
                self.order.append(b)
                p = parents[b]
                self.depth[b] = 0 if p is None else self.depth[p] + 1
                stack.append((b, True))
                for c in reversed(children[b]):
                    stack.append((c, False))
        if len(self.order) != n:
            raise InternalError("containment graph is not a forest")

    def is_ancestor(self, a: BlockId, b: BlockId) -> bool:
        return self.enter[a] < self.enter[b] and self.exit[b] <= self.exit[a]

    def is_ancestor_or_self(self, a: BlockId, b: BlockId) -> bool:
        return a == b or self.is_ancestor(a, b)


class ResolvedNet:
    """The resolved automotive function net."""

    def __init__(
        self,
        blocks: Iterable[Block],
        signals: Iterable[Signal] = (),
        connectors: Iterable[Connector] = (),
        types: Iterable[BlockTypeDef] = (),
        rejected: Iterable[Rejected] = (),
        connect_sources: Iterable[ConnectSource] = (),
    ) -> None:
        self.blocks: tuple[Block, ...] = tuple(blocks)
        self.signals: dict[str, Signal] = {s.name: s for s in signals}
        self.connectors: tuple[Connector, ...] = tuple(connectors)
        self.types: dict[str, BlockTypeDef] = {t.name: t for t in types}
        self.rejected: tuple[Rejected, ...] = tuple(rejected)
        self.connect_sources: tuple[ConnectSource, ...] = tuple(connect_sources)

        for i, b in enumerate(self.blocks):
            if b.id != i:
                raise InternalError(f"block table out of order at {i}")
        self.roots: tuple[BlockId, ...] = tuple(b.id for b in self.blocks if b.parent is None)
        self.ancestors_index = AncestorIndex(
            [b.parent for b in self.blocks], [b.children for b in self.blocks]
        )
        self._paths: tuple[Dotted, ...] = self._compute_paths()
        self._by_path: dict[Dotted, BlockId] = {p: i for i, p in enumerate(self._paths)}
        if len(self._by_path) != len(self._paths):
            raise InternalError("qualified paths are not unique")
        self._by_name: dict[str, list[BlockId]] = {}
        for b in self.blocks:
            self._by_name.setdefault(b.name, []).append(b.id)
        # connectors sorted by the entry number of their source block
        idx = self.ancestors_index
        self._by_source = sorted(self.connectors, key=lambda c: (idx.enter[c.source.block], c.id))
        self._source_keys = [idx.enter[c.source.block] for c in self._by_source]

    def _compute_paths(self) -> tuple[Dotted, ...]:
        paths: list[Dotted] = [()] * len(self.blocks)
        for b in self.ancestors_index.order:
            block = self.blocks[b]
            prefix = () if block.parent is None else paths[block.parent]
            paths[b] = prefix + (block.name,)
        return tuple(paths)

    # -- lookups -------------------------------------------------------------
    def _check(self, b: BlockId) -> None:
        if not isinstance(b, int) or not 0 <= b < len(self.blocks):
            raise InternalError(f"invalid block id {b!r} for this net")

    def block(self, b: BlockId) -> Block:
        self._check(b)
        return self.blocks[b]

    def __len__(self) -> int:
        return len(self.blocks)

    def path(self, b: BlockId) -> Dotted:
        self._check(b)
        return self._paths[b]

    def qualified_path(self, b: BlockId) -> str:
        return dotted_text(self.path(b))

    def find(self, path: Dotted | str) -> BlockId | None:
        if isinstance(path, str):
            path = tuple(path.split("."))
        return self._by_path.get(tuple(path))

    def lookup_suffix(self, segments: Dotted) -> list[BlockId]:
        """All blocks whose qualified path ends with ``segments``, in path order."""
        if not segments:
            return []
        k = len(segments)
        hits = [
            b for b in self._by_name.get(segments[-1], ())
            if self._paths[b][-k:] == tuple(segments)
        ]
        return sorted(hits, key=lambda b: self._paths[b])

    def iter_paths(self) -> Iterator[tuple[str, BlockId]]:
        for b in sorted(range(len(self.blocks)), key=lambda b: self._paths[b]):
            yield dotted_text(self._paths[b]), b

    def endpoint_text(self, e: Endpoint) -> str:
        text = self.qualified_path(e.block)
        return f"{text}:{e.port}" if e.port else text

    def describe(self, c: Connector) -> str:
        return f"{self.endpoint_text(c.source)} -> {self.endpoint_text(c.target)}"

    # -- hierarchy -------------------------------------------------------------
    def is_ancestor(self, a: BlockId, b: BlockId) -> bool:
        self._check(a)
        self._check(b)
        return self.ancestors_index.is_ancestor(a, b)

    def is_ancestor_or_self(self, a: BlockId, b: BlockId) -> bool:
        self._check(a)
        self._check(b)
        return self.ancestors_index.is_ancestor_or_self(a, b)

    def ancestors(self, b: BlockId) -> list[BlockId]:
        """Proper ancestors of ``b``, nearest first."""
        out = []
        p = self.block(b).parent
        while p is not None:
            out.append(p)
            p = self.blocks[p].parent
        return out

    def subtree(self, b: BlockId) -> list[BlockId]:
        """``b`` and all of its descendants in depth-first order."""
        self._check(b)
        idx = self.ancestors_index
        start = idx.enter[b]
        return idx.order[start:idx.exit[b]]

    def connectors_from_subtree(self, b: BlockId) -> list[Connector]:
        """Connectors whose source block lies in the subtree rooted at ``b``."""
        self._check(b)
        idx = self.ancestors_index
        lo = bisect.bisect_left(self._source_keys, idx.enter[b])
        hi = bisect.bisect_left(self._source_keys, idx.exit[b])
        return self._by_source[lo:hi]

    # -- comparison --------------------------------------------------------------
    def structure(self) -> tuple:
        """A path-based canonical form; two nets are structurally equal iff these match."""
        blocks = []
        for path, b in self.iter_paths():
            block = self.blocks[b]
            inst = None
            if block.instantiated_from is not None:
                inst = (self.qualified_path(block.instantiated_from[0]), block.instantiated_from[1])
            ports = tuple(sorted((p.name, p.direction, p.stereotype, p.from_type) for p in block.ports))
            blocks.append((path, block.type_ref, inst, ports))
        signals = tuple(sorted((s.name, s.value_type) for s in self.signals.values()))
        connectors = tuple(sorted(
            (
                self.endpoint_text(c.source),
                self.endpoint_text(c.target),
                tuple(sorted(c.signals)),
                c.stereotype or "",
                "" if c.instantiated_from is None else self.qualified_path(c.instantiated_from),
            )
            for c in self.connectors
        ))
        # declarations compare without their source positions
        types = tuple((name, self.types[name].body) for name in sorted(self.types))
        return (tuple(blocks), signals, connectors, types)


class NetBuilder:
    """Mutable staging area that produces a :class:`ResolvedNet`."""

    def __init__(self) -> None:
        self.names: list[str] = []
        self.parents: list[BlockId | None] = []
        self.children: list[list[BlockId]] = []
        self.type_refs: list[str | None] = []
        self.origins: list[Span] = []
        self.provenance: list[tuple[BlockId, str] | None] = []
        self.ports: list[list[Port]] = []
        self.child_index: dict[tuple[BlockId | None, str], BlockId] = {}
        self.signals: dict[str, Signal] = {}
        self.connectors: list[Connector] = []
        self.types: dict[str, BlockTypeDef] = {}

    def child(self, parent: BlockId | None, name: str) -> BlockId | None:
        return self.child_index.get((parent, name))

    def add_block(
        self,
        name: str,
        parent: BlockId | None,
        type_ref: str | None = None,
        origin: Span = NO_SPAN,
        instantiated_from: tuple[BlockId, str] | None = None,
    ) -> BlockId:
        if (parent, name) in self.child_index:
            raise InternalError(f"duplicate sibling {name!r}")
        b = len(self.names)
        self.names.append(name)
        self.parents.append(parent)
        self.children.append([])
        self.type_refs.append(type_ref)
        self.origins.append(origin)
        self.provenance.append(instantiated_from)
        self.ports.append([])
        self.child_index[(parent, name)] = b
        if parent is not None:
            self.children[parent].append(b)
        return b

    def add_port(self, owner: BlockId, name: str, direction: str, stereotype: str | None = None,
                 origin: Span = NO_SPAN, from_type: bool = False) -> bool:
        """Attach a port; returns False if the owner already has a port of that name."""
        if any(p.name == name for p in self.ports[owner]):
            return False
        self.ports[owner].append(Port(name, direction, owner, stereotype, origin, from_type))
        return True

    def port(self, owner: BlockId, name: str) -> Port | None:
        for p in self.ports[owner]:
            if p.name == name:
                return p
        return None

    def add_connector(self, source: Endpoint, target: Endpoint, signals: Iterable[str],
                      stereotype: str | None = None, origin: Span = NO_SPAN,
                      instantiated_from: BlockId | None = None) -> Connector:
        c = Connector(len(self.connectors), source, target, frozenset(signals), stereotype,
                      origin, instantiated_from)
        self.connectors.append(c)
        return c

    def build(self, rejected: Iterable[Rejected] = (),
              connect_sources: Iterable[ConnectSource] = ()) -> ResolvedNet:
        blocks = [
            Block(i, self.names[i], self.parents[i], tuple(self.children[i]), self.type_refs[i],
                  self.origins[i], self.provenance[i], tuple(self.ports[i]))
            for i in range(len(self.names))
        ]
        return ResolvedNet(blocks, self.signals.values(), self.connectors, self.types.values(),
                           rejected, connect_sources)


# -- feature views -----------------------------------------------------------------

@dataclass(frozen=True)
class ViewBlock:
    name: str
    env: bool = False
    stereotype: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)
    # False when the block is only named as a connector endpoint
    explicit: bool = True

    @property
    def segments(self) -> Dotted:
        return tuple(self.name.split("."))


@dataclass(frozen=True)
class Nesting:
    outer: str
    inner: str
    origin: Span = field(default=NO_SPAN, compare=False)


@dataclass(frozen=True)
class ViewConnector:
    source: str
    target: str
    signals: frozenset[str] = frozenset()
    stereotype: str | None = None
    origin: Span = field(default=NO_SPAN, compare=False)

    def describe(self) -> str:
        text = f"{self.source} -> {self.target}"
        if self.signals:
            text += " : [" + ", ".join(sorted(self.signals)) + "]"
        if self.stereotype:
            text += f" <<{self.stereotype}>>"
        return text


@dataclass(frozen=True)
class FeatureView:
    """One feature's cross-hierarchy view of the function net."""

    name: str
    vblocks: tuple[ViewBlock, ...] = ()
    nestings: tuple[Nesting, ...] = ()
    vconnectors: tuple[ViewConnector, ...] = ()
    file: str = field(default="<memory>", compare=False)
    origin: Span = field(default=NO_SPAN, compare=False)
    # problems found while assembling the view (duplicate declarations)
    diagnostics: tuple[Diagnostic, ...] = field(default=(), compare=False)

    def vblock(self, name: str) -> ViewBlock:
        for vb in self.vblocks:
            if vb.name == name:
                return vb
        raise KeyError(name)

    @classmethod
    def from_fragment(cls, fragment: ViewFragment) -> FeatureView:
        declared: dict[str, VBlockDecl] = {}
        drawn: set[str] = set()
        order: dict[str, Span] = {}
        nestings: list[Nesting] = []
        seen_nestings: set[tuple[str, str]] = set()
        vconnectors: list[ViewConnector] = []
        problems: list[Diagnostic] = []

        def mention(name: str, span: Span) -> None:
            order.setdefault(name, span)

        def walk(items, outer: str | None) -> None:
            for item in items:
                if isinstance(item, VBlockDecl):
                    name = dotted_text(item.name)
                    mention(name, item.span)
                    prev = declared.get(name)
                    if prev is None:
                        declared[name] = item
                    elif (prev.env, prev.stereotype) != (item.env, item.stereotype):
                        problems.append(diag.make(
                            "N001", item.span,
                            f"view block '{name}' declared again with different attributes",
                            [str(prev.span)],
                        ))
                    inner = name
                elif isinstance(item, ContainsDecl):
                    inner = dotted_text(item.outer)
                    mention(inner, item.span)
                    drawn.add(inner)
                    walk(item.body, inner)
                else:
                    assert isinstance(item, VConnectDecl)
                    src, dst = dotted_text(item.source), dotted_text(item.target)
                    mention(src, item.span)
                    mention(dst, item.span)
                    vconnectors.append(ViewConnector(src, dst, item.signals, item.stereotype, item.span))
                    continue
                if outer is not None and (outer, inner) not in seen_nestings:
                    seen_nestings.add((outer, inner))
                    nestings.append(Nesting(outer, inner, item.span))

        walk(fragment.items, None)
        vblocks = []
        for name, span in order.items():
            decl = declared.get(name)
            if decl is not None:
                vblocks.append(ViewBlock(name, decl.env, decl.stereotype, decl.span, True))
            else:
                vblocks.append(ViewBlock(name, False, None, span, name in drawn))
        return cls(fragment.name, tuple(vblocks), tuple(nestings), tuple(vconnectors),
                   fragment.file, fragment.span, tuple(problems))
