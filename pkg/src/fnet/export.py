"""DOT and JSON renderings of nets, views and diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .checker import bind_view
from .diagnostics import Diagnostic, sort_diagnostics
from .formatter import serialize_fragment
from .model import FeatureView, ResolvedNet
from .syntax import NetFragment, TypeDecl

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ExportOptions:
    include_signals: bool = True
    cluster_hierarchy: bool = True
    highlight_view: str | None = None


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _attrs(**attrs: str | None) -> str:
    parts = [f"{k}={_q(v)}" for k, v in attrs.items() if v is not None]
    return f" [{', '.join(parts)}]" if parts else ""


def to_dot(net: ResolvedNet, views: Sequence[FeatureView] = (),
           options: ExportOptions = ExportOptions()) -> str:
    highlight = None
    if options.highlight_view is not None:
        matches = [v for v in views if v.name == options.highlight_view]
        if not matches:
            raise KeyError(f"no view named '{options.highlight_view}'")
        highlight = matches[0]
    bound: dict[str, int] = {}
    if highlight is not None:
        binding, _ = bind_view(net, highlight)
        bound = binding.blocks
    marked = set(bound.values())

    lines = ["digraph fnet {"]
    if len(net):
        lines += ["  compound=true;", "  node [shape=box];"]

    def node(b: int, pad: str) -> None:
        block = net.blocks[b]
        label = block.name if options.cluster_hierarchy else net.qualified_path(b)
        if block.type_ref:
            label += f" : {block.type_ref}"
        style = "dotted" if block.children else None
        fill = None
        if b in marked:
            style = "filled" if style is None else f"{style},filled"
            fill = "lightyellow"
        lines.append(f"{pad}b{b}{_attrs(label=label, style=style, fillcolor=fill)};")

    def cluster(b: int, depth: int) -> None:
        pad = "  " * depth
        block = net.blocks[b]
        if not block.children:
            node(b, pad)
            return
        lines.append(f"{pad}subgraph cluster_b{b} {{")
        lines.append(f"{pad}  label={_q(block.name)};")
        node(b, pad + "  ")
        for c in sorted(block.children, key=lambda c: net.blocks[c].name):
            cluster(c, depth + 1)
        lines.append(f"{pad}}}")

    if options.cluster_hierarchy:
        for r in sorted(net.roots, key=lambda r: net.blocks[r].name):
            cluster(r, 1)
    else:
        for _, b in net.iter_paths():
            node(b, "  ")

    for c in sorted(net.connectors, key=lambda c: (net.describe(c), sorted(c.signals))):
        label = ", ".join(sorted(c.signals)) if options.include_signals and c.signals else None
        lines.append(
            f"  b{c.source.block} -> b{c.target.block}"
            + _attrs(label=label, taillabel=c.source.port, headlabel=c.target.port,
                     style="dashed" if c.stereotype else None)
            + ";"
        )

    if highlight is not None:
        env_ids: dict[str, str] = {}
        for i, vb in enumerate(highlight.vblocks):
            if vb.env:
                env_ids[vb.name] = f"env{i}"
                label = f"<<env>> {vb.name}"
                if vb.stereotype:
                    label += f" <<{vb.stereotype}>>"
                lines.append(f"  env{i}{_attrs(label=label, style='rounded,dashed')};")

        def ref(name: str) -> str | None:
            if name in env_ids:
                return env_ids[name]
            return f"b{bound[name]}" if name in bound else None

        for vc in highlight.vconnectors:
            physical = vc.stereotype is not None
            if not (physical or vc.source in env_ids or vc.target in env_ids):
                continue
            src, dst = ref(vc.source), ref(vc.target)
            if src is None or dst is None:
                continue
            lines.append(f"  {src} -> {dst}"
                         + _attrs(label=vc.stereotype, style="dashed" if physical else None) + ";")
    lines.append("}")
    return "\n".join(lines) + "\n"


# -- JSON ------------------------------------------------------------------------------

def net_dict(net: ResolvedNet) -> dict[str, list]:
    blocks = []
    for path, b in net.iter_paths():
        block = net.blocks[b]
        entry: dict[str, object] = {
            "path": path,
            "type": block.type_ref,
            "parent": None if block.parent is None else net.qualified_path(block.parent),
            "stereotypes": sorted({p.stereotype for p in block.ports if p.stereotype}),
            "ports": [
                {"name": p.name, "direction": p.direction, "stereotype": p.stereotype,
                 "from_type": p.from_type}
                for p in sorted(block.ports, key=lambda p: p.name)
            ],
        }
        if block.instantiated_from is not None:
            inst, type_name = block.instantiated_from
            entry["instance_of"] = {"instance": net.qualified_path(inst), "type": type_name}
        blocks.append(entry)

    connectors = []
    for c in net.connectors:
        entry = {
            "source": net.qualified_path(c.source.block),
            "target": net.qualified_path(c.target.block),
        }
        if c.source.port:
            entry["source_port"] = c.source.port
        if c.target.port:
            entry["target_port"] = c.target.port
        entry["signals"] = sorted(c.signals)
        if c.stereotype:
            entry["stereotype"] = c.stereotype
        if c.instantiated_from is not None:
            entry["instance"] = net.qualified_path(c.instantiated_from)
        connectors.append(entry)
    connectors.sort(key=lambda e: (e["source"], e.get("source_port", ""), e["target"],
                                   e.get("target_port", ""), e["signals"]))

    signals = [{"name": s.name, "value_type": s.value_type}
               for s in sorted(net.signals.values(), key=lambda s: s.name)]
    types = [{"name": t.name, "source": serialize_fragment(NetFragment(decls=[TypeDecl(t.name, list(t.body))]))}
             for t in sorted(net.types.values(), key=lambda t: t.name)]
    return {"blocks": blocks, "signals": signals, "types": types, "connectors": connectors}


def view_dict(view: FeatureView) -> dict[str, object]:
    return {
        "name": view.name,
        "file": view.file,
        "blocks": [
            {"name": vb.name, "env": vb.env, "stereotype": vb.stereotype, "explicit": vb.explicit}
            for vb in view.vblocks
        ],
        "nestings": [{"outer": n.outer, "inner": n.inner} for n in view.nestings],
        "connectors": [
            {"source": vc.source, "target": vc.target, "signals": sorted(vc.signals),
             "stereotype": vc.stereotype}
            for vc in view.vconnectors
        ],
    }


def export_dict(net: ResolvedNet | None = None, views: Iterable[FeatureView] = (),
                diagnostics: Iterable[Diagnostic] = ()) -> dict[str, object]:
    doc: dict[str, object] = {"schema_version": SCHEMA_VERSION}
    doc.update(net_dict(net) if net is not None
               else {"blocks": [], "signals": [], "types": [], "connectors": []})
    doc["views"] = [view_dict(v) for v in sorted(views, key=lambda v: (v.name, v.file))]
    doc["diagnostics"] = [d.to_dict() for d in sort_diagnostics(diagnostics)]
    return doc


def to_json(net: ResolvedNet | None = None, views: Iterable[FeatureView] = (),
            diagnostics: Iterable[Diagnostic] = ()) -> str:
    return json.dumps(export_dict(net, views, diagnostics), indent=2, ensure_ascii=False) + "\n"
