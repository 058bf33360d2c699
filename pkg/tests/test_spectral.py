import math

import networkx as nx
import numpy as np
import pytest

from app.core import DimensionError, PreconditionError
from app.construction.model import BaseGraph, PartitionPair, build_instance
from app.construction.params import derive_params
from app.construction.spectral import (
    count_walks_exact,
    decompose,
    dominating_operator,
    estimate_M_norm,
    operator_for,
    summarize,
    tensor_with_ones,
    top_eigenpair,
    walk_bound,
)
from tests.helpers import consecutive, from_networkx


def test_all_ones_application(small_instance):
    op = operator_for(small_instance)
    r = small_instance.partitions.r
    red, blue = small_instance.partitions.red, small_instance.partitions.blue
    expected = np.array([
        r * small_instance.red_base.degrees[red.block(v)] + r * small_instance.blue_base.degrees[blue.block(v)]
        for v in range(op.n)
    ])
    assert np.allclose(op.apply(np.ones(op.n)), expected)


def test_operator_dominates_union(small_instance):
    op = operator_for(small_instance)
    union = small_instance.prime.union_matrix().astype(float)
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = rng.random(op.n)
        assert (op.apply(x) >= union @ x - 1e-9).all()


def test_operator_is_symmetric(small_instance):
    op = operator_for(small_instance)
    rng = np.random.default_rng(1)
    for _ in range(100):
        x, y = rng.standard_normal(op.n), rng.standard_normal(op.n)
        lhs, rhs = x @ op.apply(y), op.apply(x) @ y
        assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


def test_operator_matrix_is_tensor_for_consecutive_blocks():
    part = consecutive(12, 3)
    red = BaseGraph.from_edges(4, [(0, 1), (1, 2), (2, 3)])
    empty = BaseGraph.from_edges(4, [])
    op = dominating_operator(red, empty, PartitionPair(red=part, blue=part))
    assert np.array_equal(op.dense(), tensor_with_ones(red.matrix.toarray(), 3))
    assert np.allclose(op.apply(np.eye(12)), op.dense())


def test_bicolored_edges_weigh_two():
    part = consecutive(4, 2)
    base = BaseGraph.from_edges(2, [(0, 1)])
    op = dominating_operator(base, base, PartitionPair(red=part, blue=part))
    assert op.dense()[0, 2] == 2


def test_operator_dimension_checks(small_instance):
    op = operator_for(small_instance)
    with pytest.raises(DimensionError):
        op.apply(np.ones(op.n + 1))
    with pytest.raises(DimensionError):
        dominating_operator(BaseGraph.from_edges(3, []), small_instance.blue_base, small_instance.partitions)


@pytest.mark.parametrize("seed", range(5))
def test_tensor_norm_identity(seed):
    rng = np.random.default_rng(seed)
    m, r = int(rng.integers(2, 30)), int(rng.integers(1, 6))
    x = rng.standard_normal((m, m))
    x = (x + x.T) / 2
    assert np.linalg.norm(tensor_with_ones(x, r), 2) == pytest.approx(r * np.linalg.norm(x, 2), rel=1e-9)


def test_top_eigenpair_matches_dense(medium_instance):
    op = operator_for(medium_instance)
    mu, v = top_eigenpair(op)
    dense = np.linalg.eigvalsh(op.dense().astype(float))
    assert mu == pytest.approx(dense[-1], rel=1e-6)
    assert (v >= 0).all()
    assert np.linalg.norm(v) == pytest.approx(1.0, rel=1e-12)
    assert np.linalg.norm(op.apply(v) - mu * v) <= 1e-6 * mu


def test_top_eigenvector_is_nonnegative_in_degenerate_eigenspace():
    part = consecutive(8, 2)
    op = dominating_operator(
        BaseGraph.from_edges(4, [(0, 1), (2, 3)]), BaseGraph.from_edges(4, []), PartitionPair(red=part, blue=part)
    )
    mu, v = top_eigenpair(op)
    assert mu == pytest.approx(2.0)
    assert (v >= 0).all()
    assert np.linalg.norm(op.apply(v) - mu * v) <= 1e-9


def test_m_norm_matches_dense_second_eigenvalue(medium_instance):
    decomposition = decompose(operator_for(medium_instance), seed=3)
    values = np.linalg.eigvalsh(operator_for(medium_instance).dense().astype(float))
    rest = np.sort(np.abs(values[:-1]))
    assert decomposition.m_norm == pytest.approx(rest[-1], rel=1e-6)
    assert decomposition.residual <= 1e-6 * decomposition.mu


def test_m_norm_of_rank_one_is_zero():
    v = np.ones(30) / math.sqrt(30)
    matrix = 5.0 * np.outer(v, v)
    assert estimate_M_norm(matrix, 5.0, v) == pytest.approx(0.0, abs=1e-8)


def test_all_ones_oracle():
    matrix = np.ones((20, 20))
    v = np.ones(20) / math.sqrt(20)
    assert np.allclose(matrix @ v, 20 * v)
    assert estimate_M_norm(matrix, 20.0, v) == pytest.approx(0.0, abs=1e-8)


def test_summary_fields(small_instance, small_params):
    decomposition = decompose(operator_for(small_instance), seed=1)
    summary = summarize(decomposition, small_params)
    assert summary.mu_ratio == pytest.approx(decomposition.mu / (2 * 0.2 * 30))
    assert summary.v_inf == pytest.approx(np.max(decomposition.v))
    assert summary.m_norm_bound == pytest.approx(6 * math.sqrt(3 * 0.2 * 30))


def test_walks_on_single_edge():
    graph = from_networkx(nx.path_graph(2))
    assert count_walks_exact(graph, [0, 1], 1) == 2


def test_walks_on_six_cycle():
    assert count_walks_exact(from_networkx(nx.cycle_graph(6)), [0], 2) == 2


def test_walks_match_dense_power():
    nxg = nx.gnp_random_graph(50, 0.15, seed=12)
    dense = nx.to_numpy_array(nxg, nodelist=range(50), dtype=np.int64)
    J = [1, 7, 20, 33]
    expected = int(np.linalg.matrix_power(dense, 4)[np.ix_(J, J)].sum())
    assert count_walks_exact(from_networkx(nxg), J, 4) == expected
    assert count_walks_exact(nx.to_scipy_sparse_array(nxg, nodelist=range(50)), J, 4) == expected


def test_operator_walks_match_dense_power(small_instance):
    op = operator_for(small_instance)
    J = [0, 4, 9, 17]
    expected = int(np.linalg.matrix_power(op.dense(), 4)[np.ix_(J, J)].sum())
    assert count_walks_exact(op, J, 4) == expected


def test_walk_counts_switch_to_exact_integers():
    n, length = 40, 15
    graph = from_networkx(nx.complete_graph(n))
    expected = ((n - 1) ** length + (n - 1) * (-1) ** length) // n
    assert count_walks_exact(graph, [0], length) == expected


def test_walk_count_preconditions():
    graph = from_networkx(nx.cycle_graph(5))
    with pytest.raises(PreconditionError):
        count_walks_exact(graph, [0], 0)
    with pytest.raises(PreconditionError):
        count_walks_exact(graph, [], 2)


def test_closed_form_walk_bound():
    params = derive_params(5, 1000, "operational", {"p": 0.01, "r": 5, "k": 100, "delta": 1 / math.log(1000)})
    closed, intermediate = walk_bound(params, 10)
    assert intermediate is None
    assert closed == pytest.approx(math.log(1000) ** 2 * 32 * 10 * 100, rel=1e-12)
    assert closed == pytest.approx(1.527e6, rel=1e-3)
    assert walk_bound(params, 20)[0] == pytest.approx(4 * closed)


def test_walk_chain_on_instance(medium_instance, medium_params):
    op = operator_for(medium_instance)
    decomposition = decompose(op, seed=5)
    rng = np.random.default_rng(6)
    for _ in range(20):
        J = sorted(rng.choice(medium_params.n, size=6, replace=False).tolist())
        union = count_walks_exact(medium_instance.prime, J, 4)
        dominating = count_walks_exact(op, J, 4)
        _, intermediate = walk_bound(medium_params, len(J), decomposition, J)
        assert union <= dominating
        assert dominating <= intermediate * (1 + 1e-6)


def test_build_instance_with_empty_bases():
    part = consecutive(12, 3)
    empty = BaseGraph.from_edges(4, [])
    op = operator_for(build_instance(PartitionPair(red=part, blue=part), empty, empty))
    assert op.matrix.nnz == 0
    assert count_walks_exact(op, [0, 1], 3) == 0
