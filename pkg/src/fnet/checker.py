"""Architecture lints and view consistency checks.

A view is consistent with the architecture when

1. every non-environment block it shows exists in the architecture,
2. every containment it shows holds there, possibly skipping intermediate
   blocks, and
3. every communication link it shows is realised by architecture connectors
   running from the link's source (or a block inside it) to the link's target
   (or a block inside it), carrying the signals the link names, or at least
   one signal when it names none.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import diagnostics as diag
from .diagnostics import Diagnostic, apply_strict, sort_diagnostics
from .model import BlockId, FeatureView, ResolvedNet, ViewConnector
from .resolver import resolve_ref

# A link stereotyped with anything but this models physical, not signal, communication.
SIGNAL_STEREOTYPE = "signal"


@dataclass
class ViewBinding:
    """Evidence behind a check: which architecture elements each view element stands for."""

    blocks: dict[str, BlockId] = field(default_factory=dict)
    # index into view.vconnectors -> ids of matched architecture connectors
    connectors: dict[int, list[int]] = field(default_factory=dict)

    def bound(self, name: str) -> BlockId | None:
        return self.blocks.get(name)


def lint_net(net: ResolvedNet, strict: bool = False) -> list[Diagnostic]:
    """Well-formedness findings for a resolved architecture."""
    out: list[Diagnostic] = []
    for r in net.rejected:
        out.append(diag.make(r.code, r.origin, r.message, r.related))

    endpoint_blocks: set[BlockId] = set()
    for c in net.connectors:
        endpoint_blocks.add(c.source.block)
        endpoint_blocks.add(c.target.block)
        if not c.signals:
            out.append(diag.make("W001", c.origin, f"connector {net.describe(c)} carries no signal"))
        if c.source.port is not None:
            port = net.block(c.source.block).port(c.source.port)
            if port is not None and port.direction == "in" and not net.is_ancestor(c.source.block, c.target.block):
                out.append(diag.make(
                    "W002", c.origin,
                    f"connector {net.describe(c)} leaves input port '{c.source.port}'",
                ))
        if c.target.port is not None:
            port = net.block(c.target.block).port(c.target.port)
            if port is not None and port.direction == "out" and not net.is_ancestor(c.target.block, c.source.block):
                out.append(diag.make(
                    "W002", c.origin,
                    f"connector {net.describe(c)} enters output port '{c.target.port}'",
                ))

    # a block takes part in communication if any connector touches its subtree
    covered: set[BlockId] = set()
    for b in endpoint_blocks:
        cur: BlockId | None = b
        while cur is not None and cur not in covered:
            covered.add(cur)
            cur = net.blocks[cur].parent
    for path, b in net.iter_paths():
        if b not in covered:
            out.append(diag.make("W003", net.blocks[b].origin, f"block '{path}' takes part in no communication"))

    if strict:
        out = apply_strict(out)
    return sort_diagnostics(out)


def check_cc1(net: ResolvedNet, view: FeatureView) -> tuple[ViewBinding, list[Diagnostic]]:
    """Bind every non-environment view block to exactly one architecture block."""
    binding = ViewBinding()
    out: list[Diagnostic] = []
    for vb in view.vblocks:
        if vb.env:
            continue
        result = resolve_ref(net, vb.segments, vb.origin)
        if isinstance(result, Diagnostic):
            out.append(result)
        else:
            binding.blocks[vb.name] = result
    return binding, out


def check_cc2(net: ResolvedNet, view: FeatureView, binding: ViewBinding) -> list[Diagnostic]:
    """Every containment drawn in the view must hold in the architecture."""
    out: list[Diagnostic] = []
    for n in view.nestings:
        outer, inner = binding.bound(n.outer), binding.bound(n.inner)
        if outer is None or inner is None:
            continue
        if not net.is_ancestor(outer, inner):
            po, pi = net.qualified_path(outer), net.qualified_path(inner)
            out.append(diag.make(
                "V003", n.origin,
                f"'{n.inner}' ({pi}) is not contained in '{n.outer}' ({po}) in the logical architecture",
                [po, pi],
            ))
    return out


def match_connectors(net: ResolvedNet, src: BlockId, dst: BlockId) -> list[int]:
    """Ids of connectors running from inside ``src`` to inside ``dst`` (either end may be the block itself)."""
    return sorted(
        c.id for c in net.connectors_from_subtree(src)
        if net.ancestors_index.is_ancestor_or_self(dst, c.target.block)
    )


def is_exempt(view: FeatureView, vc: ViewConnector) -> bool:
    """Links touching the environment or carrying physical communication have no architecture counterpart."""
    if vc.stereotype is not None and vc.stereotype != SIGNAL_STEREOTYPE:
        return True
    return view.vblock(vc.source).env or view.vblock(vc.target).env


def check_cc3(net: ResolvedNet, view: FeatureView, binding: ViewBinding,
              single_connector: bool = False) -> list[Diagnostic]:
    """Every signal link drawn in the view must be realised by architecture connectors."""
    out: list[Diagnostic] = []
    for i, vc in enumerate(view.vconnectors):
        if is_exempt(view, vc):
            continue
        src, dst = binding.bound(vc.source), binding.bound(vc.target)
        if src is None or dst is None:
            continue
        matched = match_connectors(net, src, dst)
        binding.connectors[i] = matched
        conns = [net.connectors[c] for c in matched]
        evidence = [net.describe(c) for c in conns]
        if not conns:
            out.append(diag.make(
                "V004", vc.origin,
                f"no connector from {net.qualified_path(src)} to {net.qualified_path(dst)} "
                f"in the logical architecture",
                [net.qualified_path(src), net.qualified_path(dst)],
            ))
        elif vc.signals:
            carried = set().union(*(c.signals for c in conns))
            for s in sorted(vc.signals - carried):
                out.append(diag.make(
                    "V005", vc.origin,
                    f"signal '{s}' is not carried from {net.qualified_path(src)} "
                    f"to {net.qualified_path(dst)}",
                    evidence,
                ))
            if single_connector and vc.signals <= carried and not any(vc.signals <= c.signals for c in conns):
                out.append(diag.make(
                    "V005", vc.origin,
                    f"no single connector carries all of [{', '.join(sorted(vc.signals))}]",
                    evidence,
                ))
        elif not any(c.signals for c in conns):
            out.append(diag.make(
                "V006", vc.origin,
                f"connectors from {net.qualified_path(src)} to {net.qualified_path(dst)} carry no signal",
                evidence,
            ))
    return out


def bind_view(net: ResolvedNet, view: FeatureView,
              single_connector: bool = False) -> tuple[ViewBinding, list[Diagnostic]]:
    """Run all three checks, returning the binding they built and their findings."""
    binding, out = check_cc1(net, view)
    out = list(view.diagnostics) + out
    out += check_cc2(net, view, binding)
    out += check_cc3(net, view, binding, single_connector)
    return binding, sort_diagnostics(out)


def check_view(net: ResolvedNet, view: FeatureView, single_connector: bool = False) -> list[Diagnostic]:
    return bind_view(net, view, single_connector)[1]
