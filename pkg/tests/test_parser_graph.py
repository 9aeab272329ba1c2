from __future__ import annotations

import random

import pytest
from hypothesis import given, strategies as st

from bpmn_factory import fixture_model, random_model, random_xml, simple_paths
from bpmnbench.graph import (
    NotASplit, acyclic_successors, degrees, diameter_nodes, find_matching_join, gateway_roles,
    reachability, topological_order,
)
from bpmnbench.model import FlowKind, FlowObject, Kind, ModelError, ProcessModel, UnknownId
from bpmnbench.model import DuplicateId, Flow, UnresolvedReference, UnsupportedRoot
from bpmnbench.parser import IMPLICIT_PROCESS, parse_model

NS = "http://www.omg.org/spec/BPMN/20100524/MODEL"


def doc(body: str, extra: str = "") -> str:
    return f'<definitions xmlns="{NS}" id="d">{extra}<process id="p">{body}</process></definitions>'


class TestParse:
    def test_m0_counts(self):
        m = fixture_model("m0.bpmn")
        assert len(m.flow_objects) == 3
        assert len(m.sequence_flows) == 2
        assert m.pools == ()
        assert list(m.processes) == ["p1"]

    def test_m1_counts(self):
        m = fixture_model("m1.bpmn")
        assert len(m.flow_objects) == 7
        assert len(m.sequence_flows) == 7
        assert m.flow_objects["A"].label == "receive order"
        assert m.flow_objects["g1"].kind is Kind.XOR

    def test_unresolved_target(self):
        with pytest.raises(UnresolvedReference) as ei:
            parse_model(doc('<task id="a"/><sequenceFlow id="f" sourceRef="a" targetRef="missing"/>'))
        assert ei.value.ref == "missing"

    def test_duplicate_id(self):
        with pytest.raises(DuplicateId) as ei:
            parse_model(doc('<task id="a"/><task id="a"/>'))
        assert ei.value.id == "a"

    def test_unsupported_root(self):
        with pytest.raises(UnsupportedRoot):
            parse_model(f'<process xmlns="{NS}" id="p"/>')

    def test_task_subtypes_and_subprocess_contents(self):
        m = parse_model(doc(
            '<userTask id="u"/><serviceTask id="s"/><subProcess id="sp"><task id="inner"/></subProcess>'
            '<callActivity id="ca"/>'))
        assert m.flow_objects["u"].kind is Kind.TASK
        assert m.flow_objects["s"].kind is Kind.TASK
        assert m.flow_objects["sp"].kind is Kind.SUBPROCESS
        assert m.flow_objects["ca"].kind is Kind.SUBPROCESS
        assert "inner" not in m.flow_objects

    def test_boundary_and_message_events(self):
        m = parse_model(doc(
            '<task id="t"/><boundaryEvent id="b" attachedToRef="t"/>'
            '<startEvent id="s"><messageEventDefinition/></startEvent>'))
        assert m.flow_objects["b"].kind is Kind.INTERMEDIATE
        assert m.flow_objects["b"].attached_to == "t"
        assert m.flow_objects["s"].is_message

    def test_implicit_process(self):
        m = parse_model(f'<definitions xmlns="{NS}" id="d"><task id="a"/><task id="b"/>'
                        '<sequenceFlow id="f" sourceRef="a" targetRef="b"/></definitions>')
        assert set(m.processes) == {IMPLICIT_PROCESS}

    def test_participants_become_pools(self):
        m = parse_model(doc('<task id="a"/>', '<collaboration id="c"><participant id="P" name="shop" '
                                               'processRef="p"/><participant id="Q"/>'
                                               '<messageFlow id="m" sourceRef="a" targetRef="Q"/></collaboration>'))
        assert [p.id for p in m.pools] == ["P", "Q"]
        assert m.pools[0].process_ids == ("p",)
        assert m.message_flows[0].kind is FlowKind.MESSAGE

    def test_labels_whitespace_normalised(self):
        m = parse_model(doc('<task id="a" name="  check \n order "/><task id="b" name="  "/>'))
        assert m.flow_objects["a"].label == "check order"
        assert m.flow_objects["b"].label is None

    def test_deterministic(self):
        x = random_xml(random.Random(3))
        assert parse_model(x) == parse_model(x)


class TestModelInvariants:
    def test_attached_only_on_intermediate(self):
        with pytest.raises(ModelError):
            FlowObject("x", Kind.TASK, "p", attached_to="y")

    def test_message_only_on_events(self):
        with pytest.raises(ModelError):
            FlowObject("x", Kind.XOR, "p", is_message=True)

    def test_flow_must_resolve(self):
        with pytest.raises(UnresolvedReference):
            ProcessModel.build([FlowObject("a", Kind.TASK, "p")], [Flow("f", "a", "zzz")])


class TestDegreesAndRoles:
    def test_degrees(self):
        m1, m0 = fixture_model("m1.bpmn"), fixture_model("m0.bpmn")
        assert degrees(m1, "g1") == (1, 2)
        assert degrees(m0, "task") == (1, 1)

    def test_isolated_node(self):
        m = ProcessModel.build([FlowObject("a", Kind.TASK, "p"), FlowObject("b", Kind.TASK, "p")])
        assert degrees(m, "a") == (0, 0)

    def test_unknown_id(self):
        with pytest.raises(UnknownId):
            degrees(fixture_model("m0.bpmn"), "nope")

    def test_message_flows_excluded(self):
        m = parse_model(doc('<task id="a"/><task id="b"/>',
                            '<collaboration id="c"><messageFlow id="m" sourceRef="a" targetRef="b"/></collaboration>'))
        assert degrees(m, "a") == (0, 0)

    def test_roles(self):
        roles = {r.gateway_id: r for r in gateway_roles(fixture_model("m1.bpmn"))}
        assert roles["g1"].is_split and not roles["g1"].is_join
        assert roles["g2"].is_join and not roles["g2"].is_split

    def test_both_and_degenerate(self):
        m = parse_model(doc(
            '<task id="a"/><task id="b"/><task id="c"/><task id="t4"/><exclusiveGateway id="g"/>'
            '<exclusiveGateway id="h"/><task id="e"/>'
            '<sequenceFlow id="f1" sourceRef="a" targetRef="g"/><sequenceFlow id="f2" sourceRef="b" targetRef="g"/>'
            '<sequenceFlow id="f3" sourceRef="g" targetRef="c"/><sequenceFlow id="f4" sourceRef="g" targetRef="t4"/>'
            '<sequenceFlow id="f5" sourceRef="t4" targetRef="h"/><sequenceFlow id="f6" sourceRef="h" targetRef="e"/>'))
        roles = {r.gateway_id: r for r in gateway_roles(m)}
        assert roles["g"].is_split and roles["g"].is_join
        assert roles["h"].is_split and not roles["h"].is_join


class TestMatchingJoin:
    def test_m1(self):
        assert find_matching_join(fixture_model("m1.bpmn"), "g1") == "g2"

    def test_distinct_ends(self):
        m = parse_model(doc(
            '<exclusiveGateway id="g"/><endEvent id="e1"/><endEvent id="e2"/><task id="a"/>'
            '<sequenceFlow id="f0" sourceRef="a" targetRef="g"/>'
            '<sequenceFlow id="f1" sourceRef="g" targetRef="e1"/><sequenceFlow id="f2" sourceRef="g" targetRef="e2"/>'))
        assert find_matching_join(m, "g") is None

    def test_kind_mismatch(self):
        m = parse_model(doc(
            '<exclusiveGateway id="g"/><parallelGateway id="j"/><task id="a"/><task id="b"/><task id="s"/>'
            '<sequenceFlow id="f0" sourceRef="s" targetRef="g"/>'
            '<sequenceFlow id="f1" sourceRef="g" targetRef="a"/><sequenceFlow id="f2" sourceRef="g" targetRef="b"/>'
            '<sequenceFlow id="f3" sourceRef="a" targetRef="j"/><sequenceFlow id="f4" sourceRef="b" targetRef="j"/>'))
        assert find_matching_join(m, "g") is None

    def test_not_a_split(self):
        with pytest.raises(NotASplit):
            find_matching_join(fixture_model("m1.bpmn"), "g2")
        with pytest.raises(NotASplit):
            find_matching_join(fixture_model("m1.bpmn"), "A")

    @given(st.integers(0, 10_000))
    def test_result_is_same_kind_join(self, seed):
        m = random_model(random.Random(seed))
        roles = {r.gateway_id: r for r in gateway_roles(m)}
        for gid, r in roles.items():
            if r.is_split:
                j = find_matching_join(m, gid)
                assert j is None or (roles[j].is_join and m.flow_objects[j].kind is m.flow_objects[gid].kind)


class TestPaths:
    def test_diameter_fixtures(self):
        assert diameter_nodes(fixture_model("m0.bpmn")) == 3
        assert diameter_nodes(fixture_model("m1.bpmn")) == 6

    def test_no_path(self):
        m = ProcessModel.build([FlowObject("s", Kind.START, "p")])
        assert diameter_nodes(m) == 0

    def test_cycle_is_broken(self):
        m = parse_model(doc(
            '<startEvent id="s"/><task id="a"/><task id="b"/><endEvent id="e"/>'
            '<sequenceFlow id="f1" sourceRef="s" targetRef="a"/><sequenceFlow id="f2" sourceRef="a" targetRef="b"/>'
            '<sequenceFlow id="f3" sourceRef="b" targetRef="a"/><sequenceFlow id="f4" sourceRef="b" targetRef="e"/>'))
        dag = acyclic_successors(m)
        assert "a" not in dag["b"]
        assert diameter_nodes(m) == 4

    @given(st.integers(0, 10_000))
    def test_dag_is_acyclic_and_reachability_sound(self, seed):
        m = random_model(random.Random(seed))
        dag = acyclic_successors(m)
        order = topological_order(dag)
        pos = {n: i for i, n in enumerate(order)}
        assert all(pos[u] < pos[v] for u, vs in dag.items() for v in vs)
        reach = reachability(dag)
        for u, vs in dag.items():
            for v in vs:
                assert v in reach[u] and reach[v] <= reach[u]

    @given(st.integers(0, 10_000))
    def test_degree_sums(self, seed):
        m = random_model(random.Random(seed))
        ins = sum(degrees(m, n)[0] for n in m.flow_objects)
        outs = sum(degrees(m, n)[1] for n in m.flow_objects)
        assert ins == outs == len(m.node_flows)

    def test_diameter_matches_brute_force_on_acyclic(self):
        rng = random.Random(11)
        checked = 0
        while checked < 100:
            m = random_model(rng, extras=False)
            succ = {n: list(m.successors[n]) for n in m.flow_objects}
            if any(len(list(simple_paths(succ, v, u))) for u, vs in succ.items() for v in vs):
                continue  # has a cycle
            best = 0
            for s in m.of_kind(Kind.START):
                for e in m.of_kind(Kind.END):
                    for p in simple_paths(succ, s.id, e.id):
                        best = max(best, len(p))
            assert diameter_nodes(m) == best
            checked += 1
