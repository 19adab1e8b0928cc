from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import net_from, view_from
from fnet.checker import (
    bind_view,
    check_cc1,
    check_cc2,
    check_view,
    lint_net,
    match_connectors,
)
from fnet.diagnostics import has_errors
from fnet.model import FeatureView, ViewBlock, ViewConnector
from generators import (
    STEREOTYPES,
    Oracle,
    mutate_foreign_signal,
    mutate_invert_nesting,
    mutate_rename,
    mutate_reverse,
    mutate_unmatched,
    project_view,
    random_net,
)

SIGNALS = "signal pedalPosition : float\nsignal decelRequest : float\nsignal brakeTorque : float\n"


def codes(diags) -> list[str]:
    return [d.code for d in diags]


def view(body: str, name: str = "V") -> FeatureView:
    return view_from(f"view {name} {{\n{body}\n}}\n", "v.fview")


# -- lint -------------------------------------------------------------------------------

def test_corpus_lints_clean(braking_net):
    assert lint_net(braking_net) == []
    assert lint_net(braking_net, strict=True) == []


def test_signal_less_connector_warns_and_strict_upgrades():
    net = net_from("block A\nblock B\nconnect A -> B")
    (d,) = lint_net(net)
    assert (d.code, d.severity.value) == ("W001", "warning")
    (d,) = lint_net(net, strict=True)
    assert (d.code, d.severity.value) == ("W001", "error")


def test_dangling_endpoint_is_reported_at_the_connect():
    src = SIGNALS + "block Vehicle { block Brake }\nconnect Vehicle.Brake -> Vehicle.Gearbox : [brakeTorque]\n"
    net = net_from(src)
    found = [d for d in lint_net(net) if d.code == "N004"]
    assert len(found) == 1
    assert (found[0].span.line, found[0].span.col) == (5, 1)
    assert "Vehicle.Gearbox" in found[0].message


def test_unknown_signal_on_connector():
    net = net_from("block A\nblock B\nconnect A -> B : [ghost]")
    found = lint_net(net)
    # the rejected connector leaves both blocks without communication
    assert codes(found) == ["W003", "W003", "N006"]
    assert found[2].message.endswith(": ghost")


def test_port_direction_warnings():
    net = net_from("signal s\nblock A { port in i }\nblock B { port out o }\nconnect A.i -> B.o : [s]")
    found = lint_net(net)
    assert codes(found) == ["W002", "W002"]
    assert "enters output port 'o'" in found[0].message
    assert "leaves input port 'i'" in found[1].message


def test_port_delegation_into_children_is_fine():
    net = net_from("signal s\nblock A { port in i block Inner }\nconnect A.i -> A.Inner : [s]\nblock B\nconnect B -> A.i : [s]")
    assert lint_net(net) == []


def test_isolated_block():
    net = net_from("signal s\nblock A { block X block Y block Lonely }\nconnect A.X -> A.Y : [s]")
    (d,) = lint_net(net)
    assert d.code == "W003" and "A.Lonely" in d.message


# -- CC1 / CC2 --------------------------------------------------------------------------

def test_cc1_binds_by_suffix(braking_net):
    binding, found = check_cc1(braking_net, view("block BrakeLogic\nenv block Driver"))
    assert found == []
    assert braking_net.qualified_path(binding.blocks["BrakeLogic"]) == "Vehicle.Brake.BrakeLogic"
    assert "Driver" not in binding.blocks


def test_cc1_unknown_block(braking_net):
    _, found = check_cc1(braking_net, view("block AutoPilot"))
    assert codes(found) == ["V001"]
    assert (found[0].span.line, found[0].span.col) == (2, 1)


def test_cc1_ambiguous():
    net = net_from("block A { block Sensor }\nblock B { block Sensor }")
    _, found = check_cc1(net, view("block Sensor"))
    assert codes(found) == ["V002"]
    assert "A.Sensor" in found[0].message and "B.Sensor" in found[0].message


def test_cc2_skipped_levels_are_fine(braking_net):
    v = view("contains Vehicle { block BrakeLogic }")
    binding, _ = check_cc1(braking_net, v)
    assert check_cc2(braking_net, v, binding) == []


def test_cc2_inverted(braking_net):
    v = view("contains BrakeLogic { block Brake }")
    binding, _ = check_cc1(braking_net, v)
    (d,) = check_cc2(braking_net, v, binding)
    assert d.code == "V003"
    assert "Vehicle.Brake" in d.message and "Vehicle.Brake.BrakeLogic" in d.message


def test_cc2_self_nesting_is_not_proper(braking_net):
    v = view("contains Brake { block Vehicle.Brake }")
    binding, _ = check_cc1(braking_net, v)
    assert codes(check_cc2(braking_net, v, binding)) == ["V003"]


def test_cc2_env_inner_is_skipped(braking_net):
    v = view("contains Vehicle { env block Driver }")
    assert check_view(braking_net, v) == []


# -- matching and CC3 -------------------------------------------------------------------

def test_match_abstracts_source(braking_net):
    acc, logic = braking_net.find("Vehicle.ACC"), braking_net.find("Vehicle.Brake.BrakeLogic")
    (cid,) = match_connectors(braking_net, acc, logic)
    assert braking_net.describe(braking_net.connectors[cid]) == "Vehicle.ACC.DistanceControl -> Vehicle.Brake.BrakeLogic"
    assert match_connectors(braking_net, logic, acc) == []


def test_root_matches_everything(braking_net):
    root = braking_net.find("Vehicle")
    assert match_connectors(braking_net, root, root) == [0, 1, 2]


def test_cc3_superblock_match(braking_net):
    assert check_view(braking_net, view("connect ACC -> BrakeLogic : [decelRequest]")) == []


def test_cc3_missing_signal(braking_net):
    (d,) = check_view(braking_net, view("connect ACC -> BrakeLogic : [steeringAngle]"))
    assert d.code == "V005" and "'steeringAngle'" in d.message


def test_cc3_reversed_link(braking_net):
    (d,) = check_view(braking_net, view("connect BrakeLogic -> ACC"))
    assert d.code == "V004"


def test_cc3_reversed_link_with_signals_is_still_v004(braking_net):
    assert codes(check_view(braking_net, view("connect BrakeLogic -> ACC : [decelRequest]"))) == ["V004"]


def test_cc3_signal_less_match():
    net = net_from("block A { block X }\nblock B\nconnect A.X -> B")
    (d,) = check_view(net, view("connect A -> B"))
    assert d.code == "V006"


def test_cc3_union_semantics_and_single_connector_flag():
    net = net_from("signal s\nsignal t\nblock A { block X block Y }\nblock B\n"
                   "connect A.X -> B : [s]\nconnect A.Y -> B : [t]")
    v = view("connect A -> B : [s, t]")
    assert check_view(net, v) == []
    (d,) = check_view(net, v, single_connector=True)
    assert d.code == "V005" and "no single connector" in d.message


def test_cc3_exemptions(braking_net):
    v = view("env block Road\nconnect Road -> BrakeLogic : [nothing]\n"
             "connect BrakeLogic -> ACC <<hydraulic>>")
    assert check_view(braking_net, v) == []


def test_signal_stereotype_is_checked(braking_net):
    assert codes(check_view(braking_net, view("connect BrakeLogic -> ACC <<signal>>"))) == ["V004"]


def test_braking_view_is_clean(braking_net, braking_view):
    assert check_view(braking_net, braking_view) == []


def test_empty_view_is_clean(braking_net):
    assert check_view(braking_net, view("")) == []


def test_findings_come_in_span_order(braking_net):
    v = view("connect ACC -> BrakeLogic : [steeringAngle]\nblock AutoPilot")
    found = check_view(braking_net, v)
    assert codes(found) == ["V005", "V001"]
    assert [d.span.line for d in found] == [2, 3]


def test_binding_records_matched_connectors(braking_net, braking_view):
    binding, _ = bind_view(braking_net, braking_view)
    # three signal links, two exempt physical links
    assert sorted(binding.connectors) == [0, 1, 2]
    assert all(len(m) == 1 for m in binding.connectors.values())


# -- properties over generated nets -----------------------------------------------------

@pytest.mark.parametrize("seed", range(60))
def test_match_agrees_with_brute_force(seed):
    net = random_net(random.Random(seed), max_blocks=25, max_connectors=40).net
    oracle = Oracle(net)
    for src in range(len(net)):
        for dst in range(len(net)):
            assert match_connectors(net, src, dst) == oracle.match(src, dst)


@pytest.mark.parametrize("seed", range(100))
def test_projected_views_are_sound(seed):
    rng = random.Random(seed)
    net = random_net(rng).net
    v = FeatureView.from_fragment(project_view(rng, net))
    found = check_view(net, v)
    assert not has_errors(found), [d.format() for d in found]


MUTATIONS = {
    "V001": lambda rng, v, net, o: mutate_rename(rng, v),
    "V003": lambda rng, v, net, o: mutate_invert_nesting(rng, v),
    "V004-unmatched": mutate_unmatched,
    "V004-reversed": mutate_reverse,
    "V005": lambda rng, v, net, o: mutate_foreign_signal(rng, v),
}


@pytest.mark.parametrize("kind", sorted(MUTATIONS))
def test_single_mutations_are_detected(kind):
    expected = kind.split("-")[0]
    applied = 0
    seed = 0
    while applied < 20 and seed < 2000:
        rng = random.Random(seed)
        seed += 1
        net = random_net(rng, max_blocks=30, max_connectors=40).net
        oracle = Oracle(net)
        v = FeatureView.from_fragment(project_view(rng, net, oracle))
        mutated = MUTATIONS[kind](rng, v, net, oracle)
        if mutated is None:
            continue
        applied += 1
        assert expected in codes(check_view(net, mutated))
    assert applied == 20


@pytest.mark.parametrize("seed", range(40))
def test_env_additions_never_add_view_errors(seed):
    rng = random.Random(seed)
    net = random_net(rng).net
    v = FeatureView.from_fragment(project_view(rng, net))
    before = codes(check_view(net, v))
    names = [vb.name for vb in v.vblocks if not vb.env]
    vblocks, vcs = list(v.vblocks), list(v.vconnectors)
    for i in range(rng.randint(1, 4)):
        env = f"Outside{i}"
        vblocks.append(ViewBlock(env, env=True, stereotype=rng.choice([None] + STEREOTYPES)))
        for _ in range(rng.randint(0, 3)):
            other = rng.choice(names + [env]) if names else env
            a, b = (env, other) if rng.random() < 0.5 else (other, env)
            vcs.append(ViewConnector(a, b, frozenset({"noSuchSignal"})))
    after = codes(check_view(net, replace(v, vblocks=tuple(vblocks), vconnectors=tuple(vcs))))
    assert after == before


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10**6))
def test_checks_are_deterministic(seed):
    net = random_net(random.Random(seed), max_blocks=20).net
    fragment = project_view(random.Random(seed), net)
    first = [d.format() for d in check_view(net, FeatureView.from_fragment(fragment))]
    second = [d.format() for d in check_view(net, FeatureView.from_fragment(fragment))]
    assert first == second
