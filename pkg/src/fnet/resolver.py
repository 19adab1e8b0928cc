"""Turns parsed ``.fnet`` fragments into a :class:`~fnet.model.ResolvedNet`.

Resolution runs in two stages. :func:`merge_fragments` unions the files into
one block forest (a block path may be re-opened in several files) and
:func:`expand_types` replaces every typed block by a copy of its type body.
Connect declarations are re-resolved against the expanded forest, so they may
point into type instances. :func:`resolve` runs both stages.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import diagnostics as diag
from .diagnostics import NO_SPAN, Diagnostic, Span, has_errors, sort_diagnostics
from .model import (
    BlockId,
    BlockTypeDef,
    ConnectSource,
    Endpoint,
    NetBuilder,
    Rejected,
    ResolvedNet,
    Signal,
)
from .syntax import BlockDecl, BodyDecl, ConnectDecl, Dotted, NetFragment, PortDecl, dotted_text


@dataclass
class ResolutionResult:
    net: ResolvedNet | None
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.net is not None


@dataclass
class _PathInfo:
    decls: list[BlockDecl] = field(default_factory=list)
    ports: list[PortDecl] = field(default_factory=list)


def _check_body_duplicates(body: Sequence[BodyDecl], owner: str, out: list[Diagnostic]) -> None:
    seen_blocks: dict[str, BlockDecl] = {}
    seen_ports: dict[str, PortDecl] = {}
    for d in body:
        if isinstance(d, BlockDecl):
            if d.name in seen_blocks:
                out.append(diag.make(
                    "N001", d.span, f"duplicate block '{d.name}' in {owner}",
                    [str(seen_blocks[d.name].span)],
                ))
            else:
                seen_blocks[d.name] = d
        elif isinstance(d, PortDecl):
            if d.name in seen_ports:
                out.append(diag.make(
                    "N001", d.span, f"duplicate port '{d.name}' in {owner}",
                    [str(seen_ports[d.name].span)],
                ))
            else:
                seen_ports[d.name] = d


def merge_fragments(fragments: Iterable[NetFragment]) -> ResolutionResult:
    """Union several architecture files into one unexpanded net."""
    fragments = list(fragments)
    problems: list[Diagnostic] = []

    # signals
    signal_decls = defaultdict(list)
    for frag in fragments:
        for s in frag.signal_decls:
            signal_decls[s.name].append(s)
    signals: list[Signal] = []
    for name in sorted(signal_decls):
        decls = signal_decls[name]
        typed = sorted({d.value_type for d in decls if d.value_type is not None})
        if len(typed) > 1:
            for d in decls:
                if d.value_type is not None:
                    problems.append(diag.make(
                        "N005", d.span,
                        f"signal '{name}' declared with conflicting value types: {', '.join(typed)}",
                    ))
        first = min(decls, key=lambda d: (d.value_type is None, d.span))
        signals.append(Signal(name, typed[0] if typed else None, first.span))

    # types
    type_decls = defaultdict(list)
    for frag in fragments:
        for t in frag.type_decls:
            type_decls[t.name].append(t)
    types: list[BlockTypeDef] = []
    for name in sorted(type_decls):
        decls = type_decls[name]
        if any(d.body != decls[0].body for d in decls[1:]):
            for d in decls:
                problems.append(diag.make("N002", d.span, f"conflicting definitions of type '{name}'"))
        first = min(decls, key=lambda d: d.span)
        _check_type_body(first.body, f"type '{name}'", problems)
        types.append(BlockTypeDef(name, tuple(first.body), first.span))

    # block forest
    paths: dict[Dotted, _PathInfo] = defaultdict(_PathInfo)
    sources: list[ConnectSource] = []

    def walk(decl: BlockDecl, prefix: Dotted) -> None:
        path = prefix + (decl.name,)
        info = paths[path]
        info.decls.append(decl)
        _check_body_duplicates(decl.body, f"block '{dotted_text(path)}'", problems)
        for d in decl.body:
            if isinstance(d, BlockDecl):
                walk(d, path)
            elif isinstance(d, PortDecl):
                info.ports.append(d)
            else:
                sources.append(ConnectSource(path, d))

    for frag in fragments:
        for d in frag.decls:
            if isinstance(d, BlockDecl):
                walk(d, ())
            elif isinstance(d, ConnectDecl):
                sources.append(ConnectSource((), d))

    typed_paths: dict[Dotted, str] = {}
    for path in sorted(paths):
        decls = paths[path].decls
        refs = sorted({d.type_ref for d in decls if d.type_ref is not None})
        if len(refs) > 1:
            for d in decls:
                if d.type_ref is not None:
                    problems.append(diag.make(
                        "N001", d.span,
                        f"block '{dotted_text(path)}' declared with conflicting types: {', '.join(refs)}",
                    ))
        if refs:
            typed_paths[path] = refs[0]
        if len(path) > 1 and path[:-1] in typed_paths:
            for d in decls:
                problems.append(diag.make(
                    "N002", d.span,
                    f"block '{dotted_text(path[:-1])}' is an instance of type "
                    f"'{typed_paths[path[:-1]]}' and cannot declare child blocks",
                ))
        port_groups = defaultdict(set)
        for p in paths[path].ports:
            port_groups[p.name].add((p.direction, p.stereotype))
        for p in paths[path].ports:
            if len(port_groups[p.name]) > 1:
                problems.append(diag.make(
                    "N001", p.span, f"port '{p.name}' of '{dotted_text(path)}' declared inconsistently",
                ))

    if has_errors(problems):
        return ResolutionResult(None, sort_diagnostics(problems))

    builder = NetBuilder()
    builder.signals = {s.name: s for s in signals}
    builder.types = {t.name: t for t in types}
    ids: dict[Dotted, BlockId] = {}
    for path in sorted(paths):
        info = paths[path]
        parent = ids[path[:-1]] if len(path) > 1 else None
        origin = min(d.span for d in info.decls)
        b = builder.add_block(path[-1], parent, typed_paths.get(path), origin)
        ids[path] = b
        for p in sorted(info.ports, key=lambda p: p.span):
            builder.add_port(b, p.name, p.direction, p.stereotype, p.span)

    sources.sort(key=lambda s: (s.decl.span, s.scope))
    rejected, notes = _resolve_connects(builder, sources)
    net = builder.build(rejected, sources)
    return ResolutionResult(net, sort_diagnostics(problems + notes))


def _check_type_body(body: Sequence[BodyDecl], owner: str, out: list[Diagnostic]) -> None:
    _check_body_duplicates(body, owner, out)
    for d in body:
        if isinstance(d, BlockDecl):
            if d.type_ref is not None and d.blocks:
                out.append(diag.make(
                    "N002", d.blocks[0].span,
                    f"block '{d.name}' is an instance of type '{d.type_ref}' and cannot declare child blocks",
                ))
            _check_type_body(d.body, owner, out)


# -- connector resolution ------------------------------------------------------------

def _walk(builder: NetBuilder, base: BlockId | None, segments: Sequence[str]) -> BlockId | None:
    b = base
    for name in segments:
        b = builder.child(b, name)
        if b is None:
            return None
    return b


def _resolve_endpoint(builder: NetBuilder, scopes: Sequence[BlockId | None],
                      dotted: Dotted) -> Endpoint | None:
    for base in scopes:
        b = _walk(builder, base, dotted)
        if b is not None:
            return Endpoint(b)
        owner = _walk(builder, base, dotted[:-1]) if len(dotted) > 1 else base
        if owner is not None and builder.port(owner, dotted[-1]) is not None:
            return Endpoint(owner, dotted[-1])
    return None


def _scope_chain(builder: NetBuilder, scope: BlockId | None, limit: BlockId | None) -> list[BlockId | None]:
    """``scope`` and its ancestors up to ``limit``; the top level is appended when ``limit`` is None."""
    chain: list[BlockId | None] = []
    b = scope
    while b is not None:
        chain.append(b)
        if b == limit:
            return chain
        b = builder.parents[b]
    chain.append(None)
    return chain


def _connect(builder: NetBuilder, decl: ConnectDecl, scopes: Sequence[BlockId | None],
             seen: dict, rejected: list[Rejected], notes: list[Diagnostic],
             instance: BlockId | None = None, type_name: str | None = None) -> None:
    src = _resolve_endpoint(builder, scopes, decl.source)
    dst = _resolve_endpoint(builder, scopes, decl.target)
    where = f" within type '{type_name}'" if type_name else ""
    for end, dotted in ((src, decl.source), (dst, decl.target)):
        if end is None:
            rejected.append(Rejected(
                "N004", f"connector endpoint '{dotted_text(dotted)}' does not name a block or port{where}",
                decl.span, (decl.describe(),),
            ))
    if src is None or dst is None:
        return
    if src == dst:
        rejected.append(Rejected(
            "N004", f"connector source and target are the same endpoint '{dotted_text(decl.source)}'",
            decl.span, (decl.describe(),),
        ))
        return
    unknown = sorted(s for s in decl.signals if s not in builder.signals)
    if unknown:
        rejected.append(Rejected(
            "N006", f"connector carries undeclared signal(s): {', '.join(unknown)}",
            decl.span, (decl.describe(),),
        ))
        return
    key = (src, dst, decl.signals, decl.stereotype)
    if key in seen:
        notes.append(diag.make("W004", decl.span, f"duplicate connector {decl.describe()}",
                               [str(seen[key])]))
        return
    seen[key] = decl.span
    builder.add_connector(src, dst, decl.signals, decl.stereotype, decl.span, instance)


def _resolve_connects(builder: NetBuilder, sources: Sequence[ConnectSource],
                      type_sources: Sequence[tuple[BlockId, str, BlockId, ConnectDecl]] = ()
                      ) -> tuple[list[Rejected], list[Diagnostic]]:
    rejected: list[Rejected] = []
    notes: list[Diagnostic] = []
    seen: dict = {}
    for s in sources:
        scope = _walk(builder, None, s.scope) if s.scope else None
        _connect(builder, s.decl, _scope_chain(builder, scope, None), seen, rejected, notes)
    for instance, type_name, scope, decl in type_sources:
        _connect(builder, decl, _scope_chain(builder, scope, instance), seen, rejected, notes,
                 instance, type_name)
    # type-body problems repeat once per instance; report each declaration once
    unique_rejected = list({(r.code, r.message, r.origin): r for r in rejected}.values())
    unique_notes = list({(d.code, d.span, d.message): d for d in notes}.values())
    return unique_rejected, unique_notes


# -- type expansion ------------------------------------------------------------------

def _type_refs(body: Sequence[BodyDecl]) -> list[BlockDecl]:
    out = []
    for d in body:
        if isinstance(d, BlockDecl):
            if d.type_ref is not None:
                out.append(d)
            out.extend(_type_refs(d.body))
    return out


def _find_cycles(types: dict[str, BlockTypeDef]) -> list[list[str]]:
    graph = {name: sorted({d.type_ref for d in _type_refs(t.body) if d.type_ref in types})
             for name, t in types.items()}
    color: dict[str, int] = {}
    stack: list[str] = []
    cycles: list[list[str]] = []
    seen: set[frozenset[str]] = set()

    def visit(n: str) -> None:
        color[n] = 1
        stack.append(n)
        for m in graph[n]:
            if color.get(m) == 1:
                cycle = stack[stack.index(m):] + [m]
                key = frozenset(cycle)
                if key not in seen:
                    seen.add(key)
                    cycles.append(cycle)
            elif m not in color:
                visit(m)
        stack.pop()
        color[n] = 2

    for name in sorted(graph):
        if name not in color:
            visit(name)
    return cycles


def expand_types(net: ResolvedNet) -> ResolutionResult:
    """Replace each typed block's subtree with a fresh copy of its type body.

    Connectors inside a type body are copied per instance with endpoints
    remapped. Blocks, ports and connectors produced by an earlier expansion are
    discarded first, so expanding twice is the same as expanding once.
    """
    problems: list[Diagnostic] = []
    types = net.types
    user_blocks = [b for b in net.blocks if b.instantiated_from is None]
    for b in user_blocks:
        if b.type_ref is not None and b.type_ref not in types:
            problems.append(diag.make(
                "N002", b.origin, f"unknown type '{b.type_ref}' for block '{net.qualified_path(b.id)}'"
            ))
    for t in sorted(types.values(), key=lambda t: t.name):
        for d in _type_refs(t.body):
            if d.type_ref not in types:
                problems.append(diag.make("N002", d.span, f"unknown type '{d.type_ref}' in type '{t.name}'"))
    for cycle in _find_cycles(dict(types)):
        problems.append(diag.make(
            "N003", types[cycle[0]].origin,
            "recursive type instantiation: " + " -> ".join(cycle),
            cycle,
        ))
    if has_errors(problems):
        return ResolutionResult(None, sort_diagnostics(problems))

    builder = NetBuilder()
    builder.signals = dict(net.signals)
    builder.types = dict(types)
    type_sources: list[tuple[BlockId, str, BlockId, ConnectDecl]] = []

    def instantiate(type_name: str, root: BlockId) -> None:
        body = types[type_name].body

        def emit(decls: Sequence[BodyDecl], owner: BlockId) -> None:
            for d in decls:
                if isinstance(d, BlockDecl):
                    b = builder.add_block(d.name, owner, d.type_ref, d.span, (root, type_name))
                    if d.type_ref is not None:
                        instantiate(d.type_ref, b)
                        emit([x for x in d.body if not isinstance(x, BlockDecl)], b)
                    else:
                        emit(d.body, b)
                elif isinstance(d, PortDecl):
                    builder.add_port(owner, d.name, d.direction, d.stereotype, d.span, from_type=True)
                else:
                    type_sources.append((root, type_name, owner, d))

        emit(body, root)

    remap: dict[BlockId, BlockId] = {}
    for path, old in net.iter_paths():
        block = net.blocks[old]
        if block.instantiated_from is not None:
            continue
        parent = None if block.parent is None else remap[block.parent]
        b = builder.add_block(block.name, parent, block.type_ref, block.origin)
        remap[old] = b
        for p in block.ports:
            if not p.from_type:
                builder.add_port(b, p.name, p.direction, p.stereotype, p.origin)
    # instances are filled in after the user forest so user ports are not shadowed
    for old, b in sorted(remap.items(), key=lambda kv: kv[1]):
        type_ref = net.blocks[old].type_ref
        if type_ref is not None:
            instantiate(type_ref, b)

    rejected, notes = _resolve_connects(builder, net.connect_sources, type_sources)
    expanded = builder.build(rejected, net.connect_sources)
    return ResolutionResult(expanded, sort_diagnostics(notes))


def resolve(fragments: Iterable[NetFragment]) -> ResolutionResult:
    """Merge and expand: the usual way to get a net from parsed files."""
    merged = merge_fragments(fragments)
    if merged.net is None:
        return merged
    expanded = expand_types(merged.net)
    # W004 notes from the merge stage are recomputed during expansion
    return ResolutionResult(expanded.net, sort_diagnostics(expanded.diagnostics))


def resolve_ref(net: ResolvedNet, dotted: Dotted | str, span: Span = NO_SPAN) -> BlockId | Diagnostic:
    """Resolve a suffix reference such as ``BrakeLogic`` or ``Brake.BrakeLogic``."""
    segments = tuple(dotted.split(".")) if isinstance(dotted, str) else tuple(dotted)
    text = dotted_text(segments)
    hits = net.lookup_suffix(segments)
    if len(hits) == 1:
        return hits[0]
    if not hits:
        return diag.make("V001", span, f"'{text}' is not part of the logical architecture")
    candidates = [net.qualified_path(b) for b in hits]
    return diag.make("V002", span, f"'{text}' is ambiguous: {', '.join(candidates)}", candidates)
