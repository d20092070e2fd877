"""Edge weightings: Lipschitz constants, induced chains, ratio bounds."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from walklab.graphs import GraphError, GraphFileError, build_graph, diameter, generate
from walklab.rng import SplitMix64
from walklab.weighting import (
    EdgeWeighting,
    WeightingError,
    bottleneck_weighting,
    format_weighting_text,
    induced_chain,
    lipschitz_beta,
    parse_weighting_text,
    random_lipschitz_weighting,
    stationary_ratio_audit,
    target_decay_weighting,
    uniform_weighting,
)


# --- construction ---------------------------------------------------------


def test_uniform_strengths_and_total():
    k4 = generate("complete", n=4)
    w = uniform_weighting(k4)
    assert list(w.strengths) == [3.0] * 4
    c6 = generate("cycle", n=6)
    assert uniform_weighting(c6).total == pytest.approx(12.0)


def test_rejects_nonpositive_weights():
    g = generate("cycle", n=4)
    with pytest.raises(WeightingError):
        EdgeWeighting(g, np.array([1.0, 0.0, 1.0, 1.0]))
    with pytest.raises(WeightingError):
        EdgeWeighting(g, np.array([1.0, -2.0, 1.0, 1.0]))
    with pytest.raises(WeightingError):
        EdgeWeighting(g, np.array([1.0, np.inf, 1.0, 1.0]))


def test_weight_lookup_is_symmetric():
    g = generate("cycle", n=4)
    # canonical edge order (0,1),(0,3),(1,2),(2,3)
    w = EdgeWeighting(g, np.array([1.0, 2.0, 3.0, 4.0]))
    assert w.weight(1, 2) == w.weight(2, 1) == 3.0
    assert w.weight(3, 0) == 2.0


# --- Lipschitz constant ---------------------------------------------------


def test_beta_uniform_is_one():
    g = generate("complete", n=5)
    assert lipschitz_beta(g, uniform_weighting(g)) == 1.0


def test_beta_alternating_cycle():
    g = generate("cycle", n=6)
    # canonical edge order (0,1),(0,5),(1,2),(2,3),(3,4),(4,5)
    weights = {(0, 1): 1, (1, 2): 2, (2, 3): 1, (3, 4): 2, (4, 5): 1, (0, 5): 2}
    w = EdgeWeighting(g, np.array([weights[e] for e in g.edges], dtype=float))
    assert lipschitz_beta(g, w) == 2.0


def test_beta_only_constrains_shared_vertex_edges():
    # weights far apart on disjoint edges do not inflate beta
    g = generate("cycle", n=8)
    values = {e: 1.0 for e in g.edges}
    values[(0, 1)] = 100.0
    values[(1, 2)] = 100.0
    values[(2, 3)] = 100.0
    w = EdgeWeighting(g, np.array([values[e] for e in g.edges]))
    assert lipschitz_beta(g, w) == 100.0


# --- target decay ---------------------------------------------------------


def test_target_decay_theta_zero_is_uniform():
    g = generate("cycle", n=6)
    w = target_decay_weighting(g, [0], 0.0)
    assert np.allclose(w.weights, 1.0)


def test_target_decay_cycle_values():
    g = generate("cycle", n=6)
    w = target_decay_weighting(g, [0], 0.5)
    assert w.weight(0, 1) == pytest.approx(0.5)
    assert w.weight(2, 3) == pytest.approx(0.125)
    assert w.weight(0, 5) == pytest.approx(0.5)
    assert w.weight(3, 4) == pytest.approx(0.125)


def test_target_decay_beta_bound():
    rng = SplitMix64(3)
    for theta in (0.1, 0.3, 0.6):
        for g in (generate("cycle", n=9), generate("hypercube", dim=3), generate("complete", n=5)):
            targets = [rng.randrange(g.n)]
            w = target_decay_weighting(g, targets, theta)
            assert lipschitz_beta(g, w) <= 1.0 / (1.0 - theta) + 1e-12


def test_target_decay_rejects_bad_theta():
    g = generate("cycle", n=4)
    with pytest.raises(WeightingError):
        target_decay_weighting(g, [0], 1.0)
    with pytest.raises(WeightingError):
        target_decay_weighting(g, [0], -0.1)


# --- bottleneck -----------------------------------------------------------


def test_bottleneck_cycle12_values():
    g = generate("cycle", n=12)
    w, pair = bottleneck_weighting(g, 2.0)
    assert pair == (0, 6)
    assert w.weight(0, 1) == pytest.approx(1.0)
    assert w.weight(2, 3) == pytest.approx(0.25)
    assert lipschitz_beta(g, w) <= 2.0 + 1e-12


def test_bottleneck_needs_diameter_four():
    with pytest.raises(WeightingError):
        bottleneck_weighting(generate("complete", n=4), 2.0)


def test_bottleneck_needs_beta_above_one():
    with pytest.raises(WeightingError):
        bottleneck_weighting(generate("cycle", n=12), 1.0)


# --- induced chain --------------------------------------------------------


def test_induced_chain_uniform_is_srw():
    g = generate("complete", n=4)
    ch = induced_chain(g, uniform_weighting(g))
    assert np.allclose(ch.pi, 0.25)
    assert ch.matrix[0, 1] == pytest.approx(1 / 3)
    assert ch.matrix[0, 0] == 0.0


def test_induced_chain_c4_alternating():
    g = generate("cycle", n=4)
    # edges in canonical order: (0,1),(0,3),(1,2),(2,3) -> weights 1,2,2,1
    w = EdgeWeighting(g, np.array([1.0, 2.0, 2.0, 1.0]))
    ch = induced_chain(g, w)
    assert np.allclose(ch.pi, 0.25)
    assert ch.matrix[0, 1] == pytest.approx(1 / 3)
    assert ch.matrix[0, 3] == pytest.approx(2 / 3)


def test_induced_chain_rows_sum_to_one():
    rng = SplitMix64(17)
    g = generate("hypercube", dim=3)
    w = random_lipschitz_weighting(g, 2.5, rng)
    ch = induced_chain(g, w)
    assert np.max(np.abs(ch.matrix.sum(axis=1) - 1.0)) < 1e-12


# --- stationary ratio audit -----------------------------------------------


def test_ratio_audit_uniform_all_k():
    g = generate("cycle", n=8)
    w = uniform_weighting(g)
    for k in range(1, 5):
        assert stationary_ratio_audit(g, w, k)


def test_ratio_audit_target_decay_cycle():
    g = generate("cycle", n=6)
    w = target_decay_weighting(g, [0], 0.5)
    for k in range(1, 4):
        assert stationary_ratio_audit(g, w, k)


def test_ratio_audit_flags_violations():
    # beta reported as 1 for a non-uniform weighting must fail at k=1
    g = generate("cycle", n=6)
    w = target_decay_weighting(g, [0], 0.5)
    assert not stationary_ratio_audit(g, w, 1, beta=1.0)


@given(st.integers(min_value=0, max_value=10_000))
@settings(max_examples=30, deadline=None)
def test_ratio_audit_random_weightings(seed):
    rng = SplitMix64(seed)
    g = generate("random_regular", n=10, d=3, seed=seed % 7)
    w = random_lipschitz_weighting(g, 2.0, rng)
    assert lipschitz_beta(g, w) <= 2.0 * (1 + 1e-12)
    dia, _ = diameter(g)
    for k in range(1, dia + 1):
        assert stationary_ratio_audit(g, w, k)


# --- random weighting generator -------------------------------------------


def test_random_weighting_respects_sigma_and_seed():
    g = generate("random_regular", n=16, d=3, seed=2)
    a = random_lipschitz_weighting(g, 1.5, SplitMix64(5))
    b = random_lipschitz_weighting(g, 1.5, SplitMix64(5))
    assert np.array_equal(a.weights, b.weights)
    assert lipschitz_beta(g, a) <= 1.5 * (1 + 1e-12)


def test_random_weighting_sigma_one_is_uniform_ratio():
    g = generate("cycle", n=6)
    w = random_lipschitz_weighting(g, 1.0, SplitMix64(11))
    assert lipschitz_beta(g, w) == pytest.approx(1.0)


# --- file format ----------------------------------------------------------


def test_weighting_text_round_trip():
    g = generate("cycle", n=5)
    w = EdgeWeighting(g, np.array([0.5, 1.25, 2.0, 0.125, 3.0]))
    again = parse_weighting_text(format_weighting_text(w), g)
    assert np.array_equal(again.weights, w.weights)


def test_weighting_parse_reports_line_number():
    g = generate("cycle", n=4)
    text = "0 1 1.0\n0 3 2.0\n1 2 zebra\n2 3 1.0\n"
    with pytest.raises(GraphFileError) as err:
        parse_weighting_text(text, g)
    assert "3" in str(err.value)


def test_weighting_parse_rejects_unknown_edge():
    g = generate("cycle", n=4)
    with pytest.raises(GraphFileError):
        parse_weighting_text("0 2 1.0\n", g)


def test_weighting_parse_rejects_duplicate_and_missing():
    g = generate("cycle", n=4)
    with pytest.raises(GraphFileError):
        parse_weighting_text("0 1 1.0\n1 0 2.0\n", g)
    with pytest.raises(GraphFileError):
        parse_weighting_text("0 1 1.0\n1 2 1.0\n2 3 1.0\n", g)
