"""Canonical text for nets and views: two-space indentation, sorted signal lists.

Comments are not part of the syntax tree and are therefore not reproduced.
"""

from __future__ import annotations

from typing import Sequence

from .model import ResolvedNet
from .syntax import (
    BlockDecl,
    BodyDecl,
    ConnectDecl,
    ContainsDecl,
    NetFragment,
    PortDecl,
    SignalDecl,
    TypeDecl,
    VBlockDecl,
    VConnectDecl,
    ViewFragment,
    ViewItem,
    dotted_text,
)

INDENT = "  "


def _suffix(signals: frozenset[str], stereotype: str | None) -> str:
    text = ""
    if signals:
        text += " : [" + ", ".join(sorted(signals)) + "]"
    if stereotype:
        text += f" <<{stereotype}>>"
    return text


def _connect(decl: ConnectDecl | VConnectDecl) -> str:
    return (f"connect {dotted_text(decl.source)} -> {dotted_text(decl.target)}"
            + _suffix(decl.signals, decl.stereotype))


def _body(decls: Sequence[BodyDecl], depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for d in decls:
        if isinstance(d, BlockDecl):
            head = f"{pad}block {d.name}" + (f" : {d.type_ref}" if d.type_ref else "")
            if d.body:
                out.append(head + " {")
                _body(d.body, depth + 1, out)
                out.append(pad + "}")
            else:
                out.append(head)
        elif isinstance(d, PortDecl):
            out.append(f"{pad}port {d.direction} {d.name}" + (f" <<{d.stereotype}>>" if d.stereotype else ""))
        else:
            out.append(pad + _connect(d))


def _finish(lines: list[str]) -> str:
    return "\n".join(lines) + "\n" if lines else ""


def serialize_fragment(fragment: NetFragment) -> str:
    lines: list[str] = []
    for i, d in enumerate(fragment.decls):
        if i and isinstance(d, (TypeDecl, BlockDecl)):
            lines.append("")
        if isinstance(d, SignalDecl):
            lines.append(f"signal {d.name}" + (f" : {d.value_type}" if d.value_type else ""))
        elif isinstance(d, TypeDecl):
            lines.append(f"type {d.name} {{")
            _body(d.body, 1, lines)
            lines.append("}")
        elif isinstance(d, BlockDecl):
            _body([d], 0, lines)
        else:
            lines.append(_connect(d))
    return _finish(lines)


def net_to_fragment(net: ResolvedNet) -> NetFragment:
    """Rebuild declarations for a resolved net in path order.

    Typed instances are written as ``block A : T`` only; their contents come
    back from the type definition on the next resolution.
    """
    decls: list = [SignalDecl(s.name, s.value_type) for s in sorted(net.signals.values(), key=lambda s: s.name)]
    decls += [TypeDecl(t.name, list(t.body)) for t in sorted(net.types.values(), key=lambda t: t.name)]

    def block_decl(b: int) -> BlockDecl:
        block = net.blocks[b]
        body: list[BodyDecl] = [
            PortDecl(p.direction, p.name, p.stereotype)
            for p in sorted(block.ports, key=lambda p: p.name) if not p.from_type
        ]
        if block.type_ref is None:
            children = sorted(block.children, key=lambda c: net.blocks[c].name)
            body += [block_decl(c) for c in children]
        return BlockDecl(block.name, block.type_ref, body)

    roots = sorted((b for b in net.roots if net.blocks[b].instantiated_from is None),
                   key=lambda b: net.blocks[b].name)
    decls += [block_decl(b) for b in roots]
    conns = []
    for c in net.connectors:
        if c.instantiated_from is not None:
            continue
        src, dst = net.path(c.source.block), net.path(c.target.block)
        if c.source.port:
            src += (c.source.port,)
        if c.target.port:
            dst += (c.target.port,)
        conns.append(ConnectDecl(src, dst, c.signals, c.stereotype))
    conns.sort(key=lambda d: (d.source, d.target, sorted(d.signals), d.stereotype or ""))
    decls += conns
    return NetFragment("<resolved>", decls)


def serialize_net(model: NetFragment | ResolvedNet) -> str:
    if isinstance(model, ResolvedNet):
        model = net_to_fragment(model)
    return serialize_fragment(model)


def _view_items(items: Sequence[ViewItem], depth: int, out: list[str]) -> None:
    pad = INDENT * depth
    for item in items:
        if isinstance(item, VBlockDecl):
            out.append(pad + ("env " if item.env else "") + f"block {dotted_text(item.name)}"
                       + (f" <<{item.stereotype}>>" if item.stereotype else ""))
        elif isinstance(item, ContainsDecl):
            out.append(f"{pad}contains {dotted_text(item.outer)} {{")
            _view_items(item.body, depth + 1, out)
            out.append(pad + "}")
        else:
            out.append(pad + _connect(item))


def serialize_view(fragment: ViewFragment) -> str:
    lines = [f"view {fragment.name} {{"]
    _view_items(fragment.items, 1, lines)
    lines.append("}")
    return _finish(lines)
