from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fnet.model import FeatureView, ResolvedNet  # noqa: E402
from fnet.parser import parse_net_source, parse_view_source  # noqa: E402
from fnet.resolver import resolve  # noqa: E402

CORPUS = Path(__file__).resolve().parent.parent / "corpus"
BRAKING_NET = CORPUS / "braking.fnet"
BRAKING_VIEW = CORPUS / "braking.fview"


def net_from(*sources: str) -> ResolvedNet:
    fragments = []
    for i, text in enumerate(sources):
        parsed = parse_net_source(text, f"f{i}.fnet")
        assert parsed.ok, [d.format() for d in parsed.diagnostics]
        fragments.append(parsed.fragment)
    result = resolve(fragments)
    assert result.net is not None, [d.format() for d in result.diagnostics]
    return result.net


def view_from(text: str, filename: str = "v.fview") -> FeatureView:
    parsed = parse_view_source(text, filename)
    assert parsed.ok, [d.format() for d in parsed.diagnostics]
    return FeatureView.from_fragment(parsed.fragment)


@pytest.fixture(scope="session")
def braking_net() -> ResolvedNet:
    return net_from(BRAKING_NET.read_text())


@pytest.fixture(scope="session")
def braking_view() -> FeatureView:
    return view_from(BRAKING_VIEW.read_text(), str(BRAKING_VIEW))
