import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from secdispatch.network import Bus, Line, Network
from secdispatch.ptdf import (
    WrongTopology,
    contingency_topologies,
    dc_flows,
    incidence,
    shift_factors,
    two_bus_transfer_limits,
)

from conftest import make_two_bus


def triangle():
    return Network(
        "tri",
        tuple(Bus(i, 1.0) for i in (1, 2, 3)),
        (Line(1, 1, 2, 1.0, 10), Line(2, 1, 3, 1.0, 10), Line(3, 3, 2, 1.0, 10)),
    )


def test_two_bus_parallel_split(two_bus):
    H = shift_factors(two_bus)
    np.testing.assert_allclose(H.flows([200, -200]), [100, 100], atol=1e-12)


def test_symmetric_form_matches_dc_solve():
    # B1 (p1 - p2) / (2 (B1 + B2)) with p2 = -p1 equals B1 p1 / (B1 + B2)
    net = make_two_bus(b=(1.0, 3.0))
    p1 = 120.0
    f = shift_factors(net).flows([p1, -p1])
    assert f[0] == pytest.approx(1.0 * (p1 - -p1) / (2 * (1.0 + 3.0)))
    assert f[1] == pytest.approx(3.0 * (p1 - -p1) / (2 * (1.0 + 3.0)))


def test_zero_injection(pjm5):
    assert not shift_factors(pjm5).flows(np.zeros(5)).any()


def test_triangle_current_divider():
    # direct path has impedance 1, the detour 2: flows split 2/3 and 1/3
    f = shift_factors(triangle()).flows([1, -1, 0])
    np.testing.assert_allclose(f, [2 / 3, 1 / 3, 1 / 3], atol=1e-12)


def test_rows_reproduce_angle_differences(pjm5):
    H = shift_factors(pjm5)
    A = incidence(pjm5)
    b = np.array([l.susceptance for l in pjm5.lines])
    for k in range(pjm5.n):
        p = -np.ones(pjm5.n) / (pjm5.n - 1)
        p[k] = 1.0
        np.testing.assert_allclose(H.flows(p), dc_flows(pjm5, p), atol=1e-9)
    assert H.entries.shape == (6, 5)
    assert np.all(H.entries[:, 0] == 0)  # slack column


balanced = st.lists(st.floats(-500, 500), min_size=4, max_size=4).map(
    lambda xs: np.array(xs + [-sum(xs)])
)


@settings(max_examples=200, deadline=None)
@given(p=balanced, slack=st.sampled_from([2, 3, 4, 5]))
def test_slack_invariance(pjm5, p, slack):
    f1 = shift_factors(pjm5).flows(p)
    f2 = shift_factors(pjm5, slack=slack).flows(p)
    np.testing.assert_allclose(f1, f2, atol=1e-9, rtol=0)


@settings(max_examples=200, deadline=None)
@given(p=balanced)
def test_flow_conservation(pjm5, p):
    f = shift_factors(pjm5).flows(p)
    np.testing.assert_allclose(incidence(pjm5).T @ f, p, atol=1e-9 * max(1.0, np.abs(p).max()))


def test_two_bus_contingencies(two_bus):
    valid, islanding = contingency_topologies(two_bus)
    assert [c.outaged_line for c in valid] == [1, 2]
    assert not islanding
    survivor = valid[0]
    assert survivor.shift_factors.line_ids == (2,)
    np.testing.assert_allclose(survivor.shift_factors.flows([75, -75]), [75])
    assert survivor.limits.tolist() == [100.0]


def test_single_line_islands():
    net = Network("bridge", (Bus(1, 1), Bus(2, 2)), (Line(4, 1, 2, 1.0, 10),))
    valid, islanding = contingency_topologies(net)
    assert valid == []
    assert [c.line_id for c in islanding] == [4]


def test_pjm5_bridge_free(pjm5):
    g = nx.MultiGraph()
    g.add_edges_from((l.from_bus, l.to_bus, l.id) for l in pjm5.lines)
    for line in pjm5.lines:
        h = g.copy()
        h.remove_edge(line.from_bus, line.to_bus, key=line.id)
        assert nx.is_connected(h)
    valid, islanding = contingency_topologies(pjm5)
    assert len(valid) == 6 and not islanding
    for topo in valid:
        assert len(topo.shift_factors.line_ids) == 5
        assert topo.outaged_line not in topo.shift_factors.line_ids


@settings(max_examples=100, deadline=None)
@given(p1=st.floats(-400, 400), lim=st.tuples(st.floats(1, 300), st.floats(1, 300)),
       b=st.tuples(st.floats(0.1, 10), st.floats(0.1, 10)))
def test_two_bus_contingency_rows_equal_compact_form(p1, lim, b):
    net = make_two_bus(limits=lim, b=b)
    _, f_sc = two_bus_transfer_limits(net)
    ok = True
    for topo in contingency_topologies(net)[0]:
        flow = topo.shift_factors.flows([p1, -p1])
        ok &= bool(np.all(np.abs(flow) <= topo.limits + 1e-9))
    assert ok == (abs(p1) <= f_sc + 1e-9) or abs(abs(p1) - f_sc) < 1e-6


@pytest.mark.parametrize(
    "limits, b, expected",
    [
        ((100, 100), (1, 1), (200, 100)),
        ((100, 50), (1, 1), (100, 50)),
        ((100, 100), (1, 3), (400 / 3, 100)),
    ],
)
def test_transfer_limits(limits, b, expected):
    f_ed, f_sc = two_bus_transfer_limits(make_two_bus(limits=limits, b=b))
    assert f_ed == pytest.approx(expected[0])
    assert f_sc == pytest.approx(expected[1])


@settings(max_examples=200)
@given(lim=st.tuples(st.floats(0, 1e3), st.floats(0, 1e3)), b=st.floats(1e-2, 1e2))
def test_f_ed_at_most_twice_f_sc_equal_susceptance(lim, b):
    f_ed, f_sc = two_bus_transfer_limits(make_two_bus(limits=lim, b=(b, b)))
    assert f_sc <= f_ed * (1 + 1e-12)
    assert f_ed <= 2 * f_sc * (1 + 1e-12) + 1e-12


@settings(max_examples=200)
@given(lim=st.tuples(st.floats(0, 1e3), st.floats(0, 1e3)), b=st.tuples(st.floats(1e-2, 1e2), st.floats(1e-2, 1e2)))
def test_transfer_limit_bounds(lim, b):
    f_ed, f_sc = two_bus_transfer_limits(make_two_bus(limits=lim, b=b))
    assert f_sc <= f_ed * (1 + 1e-12) + 1e-12
    assert f_ed <= (lim[0] + lim[1]) * (1 + 1e-12) + 1e-12


def test_f_ed_can_exceed_twice_f_sc():
    # unequal susceptances break the factor-two bound
    f_ed, f_sc = two_bus_transfer_limits(make_two_bus(limits=(2.0, 1.0), b=(2.0, 1.0)))
    assert (f_ed, f_sc) == (3.0, 1.0)


def test_transfer_limits_wrong_topology(pjm5):
    with pytest.raises(WrongTopology):
        two_bus_transfer_limits(pjm5)
