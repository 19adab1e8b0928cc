"""Feature-to-function traceability, change impact, and flattened communication."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .checker import ViewBinding, bind_view
from .diagnostics import Diagnostic, has_errors
from .model import Connector, FeatureView, ResolvedNet

DIRECT = "direct-reference"
SUPERBLOCK = "superblock-match"
SIGNAL_USE = "signal-use"


class ViewInconsistent(Exception):
    def __init__(self, view: str, diagnostics: Sequence[Diagnostic]) -> None:
        super().__init__(f"view '{view}' has unresolved blocks")
        self.view = view
        self.diagnostics = list(diagnostics)


class UnknownElement(ValueError):
    """The element named in an impact query is neither a block path nor a connector."""


def _explicit_paths(net: ResolvedNet, view: FeatureView, binding: ViewBinding) -> set[str]:
    return {
        net.qualified_path(b) for name, b in binding.blocks.items() if view.vblock(name).explicit
    }


def blocks_of_view(net: ResolvedNet, view: FeatureView) -> set[str]:
    """Architecture blocks a view uses.

    That is every block the view draws, plus both ends of each architecture
    connector that realises one of its links. Blocks named only as the end of
    a link are abstractions and are represented by the connector ends instead.
    """
    binding, diagnostics = bind_view(net, view)
    cc1 = [d for d in diagnostics if d.code in ("V001", "V002", "N001")]
    if cc1:
        raise ViewInconsistent(view.name, cc1)
    paths = _explicit_paths(net, view, binding)
    for matched in binding.connectors.values():
        for cid in matched:
            c = net.connectors[cid]
            paths.add(net.qualified_path(c.source.block))
            paths.add(net.qualified_path(c.target.block))
    return paths


@dataclass(frozen=True, order=True)
class ImpactHit:
    view: str
    element: str
    reason: str


@dataclass
class ImpactReport:
    element: str
    hits: list[ImpactHit] = field(default_factory=list)

    def views(self) -> list[str]:
        return sorted({h.view for h in self.hits})

    def format(self) -> str:
        lines = [f"impact of {self.element}:"]
        if not self.hits:
            lines.append("  no view refers to it")
        for h in self.hits:
            lines.append(f"  {h.view}: {h.element} ({h.reason})")
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, object]:
        return {
            "element": self.element,
            "hits": [{"view": h.view, "element": h.element, "reason": h.reason} for h in self.hits],
        }


def _find_connectors(net: ResolvedNet, text: str) -> list[Connector]:
    src, sep, dst = text.partition("->")
    if not sep:
        return []
    src, dst = src.strip(), dst.strip()
    return [c for c in net.connectors
            if net.endpoint_text(c.source) == src and net.endpoint_text(c.target) == dst]


def impact(net: ResolvedNet, views: Iterable[FeatureView], element: str) -> ImpactReport:
    """Which views would be affected by changing ``element``.

    ``element`` is a qualified block path or a connector written ``src -> dst``.
    Only direct evidence is reported; effects are not propagated along
    connectors.
    """
    block = net.find(element) if "->" not in element else None
    conns = [] if block is not None else _find_connectors(net, element)
    if block is None and not conns:
        raise UnknownElement(f"no block or connector named '{element}'")
    idx = net.ancestors_index

    if block is not None:
        label = net.qualified_path(block)
        touching = [c for c in net.connectors
                    if idx.is_ancestor_or_self(block, c.source.block)
                    or idx.is_ancestor_or_self(block, c.target.block)]
    else:
        label = net.describe(conns[0])
        touching = conns
    own_signals = set().union(*(c.signals for c in touching)) if touching else set()
    conn_ids = {c.id for c in conns}

    hits: set[ImpactHit] = set()
    for view in views:
        binding, _ = bind_view(net, view)
        if block is not None:
            for name, b in binding.blocks.items():
                if b == block:
                    hits.add(ImpactHit(view.name, name, DIRECT))
        for i, matched in binding.connectors.items():
            vc = view.vconnectors[i]
            vsrc, vdst = binding.blocks[vc.source], binding.blocks[vc.target]
            for cid in matched:
                c = net.connectors[cid]
                if block is not None:
                    for bound, end in ((vsrc, c.source.block), (vdst, c.target.block)):
                        if idx.is_ancestor_or_self(block, end) and idx.is_ancestor(bound, block):
                            hits.add(ImpactHit(view.name, vc.describe(), SUPERBLOCK))
                elif cid in conn_ids:
                    exact = vsrc == c.source.block and vdst == c.target.block
                    hits.add(ImpactHit(view.name, vc.describe(), DIRECT if exact else SUPERBLOCK))
        for vc in view.vconnectors:
            if vc.signals & own_signals:
                hits.add(ImpactHit(view.name, vc.describe(), SIGNAL_USE))
    return ImpactReport(label, sorted(hits))


@dataclass
class FeatureFunctionMatrix:
    rows: list[str]
    columns: list[str]
    cells: dict[str, set[str]]
    # views that failed their consistency check; only their drawn blocks are tabulated
    flagged: set[str] = field(default_factory=set)

    def is_set(self, row: str, column: str) -> bool:
        return column in self.cells.get(row, ())

    @property
    def set_count(self) -> int:
        return sum(len(self.cells[r]) for r in self.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["view"] + self.columns)
        for r in self.rows:
            writer.writerow([r] + ["1" if self.is_set(r, c) else "0" for c in self.columns])
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned table, one row per view; ``*`` marks an inconsistent view."""
        heads = [r + ("*" if r in self.flagged else "") for r in self.rows]
        first = max([len(h) for h in heads] + [len("view")])
        widths = [len(c) for c in self.columns]
        lines = ["  ".join(["view".ljust(first)] + self.columns).rstrip()]
        for r, h in zip(self.rows, heads):
            marks = [("x" if self.is_set(r, c) else ".").ljust(w) for c, w in zip(self.columns, widths)]
            lines.append("  ".join([h.ljust(first)] + marks).rstrip())
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict[str, object]:
        return {
            "rows": self.rows,
            "columns": self.columns,
            "cells": {r: sorted(self.cells[r]) for r in self.rows},
            "flagged": sorted(self.flagged),
        }


def matrix(net: ResolvedNet, views: Iterable[FeatureView]) -> FeatureFunctionMatrix:
    cells: dict[str, set[str]] = {}
    flagged: set[str] = set()
    for view in views:
        binding, diagnostics = bind_view(net, view)
        if has_errors(diagnostics):
            flagged.add(view.name)
            used = _explicit_paths(net, view, binding)
        else:
            used = blocks_of_view(net, view)
        cells.setdefault(view.name, set()).update(used)
    columns = [path for path, _ in net.iter_paths()]
    return FeatureFunctionMatrix(sorted(cells), columns, cells, flagged)


def flatten_communication(net: ResolvedNet) -> list[tuple[str, str, tuple[str, ...]]]:
    """One (source, target, signals) entry per connector; port ends are written ``path:port``."""
    entries = [
        (net.endpoint_text(c.source), net.endpoint_text(c.target), tuple(sorted(c.signals)))
        for c in net.connectors
    ]
    return sorted(entries)
