"""Statistical checks at experiment scale; run with `pytest -m slow`."""
import itertools
import math

import networkx as nx
import numpy as np
import pytest

from app.construction.cleanup import (
    broken_cycle_expectation,
    build_orderings,
    edge_delete,
    enumerate_bad_broken_cycles,
    kink_reduce,
    vertex_delete,
)
from app.construction.cycles import count_cycles, cycle_edges, enumerate_cycles
from app.construction.indep import check_claim, closed_pairs, exposure_split, independent_set_search
from app.construction.model import is_simple, mask_of, sample_base_graph, sample_instance, sample_partition
from app.construction.params import derive_params
from app.construction.pseudo import check_degrees, check_double_degree, check_expansion, check_projections
from app.construction.pipeline import execute
from app.construction.spectral import (
    count_walks_exact,
    decompose,
    estimate_M_norm,
    operator_for,
    spectral_deviation,
    tensor_with_ones,
    top_eigenpair,
)
from app.core import stage_rng
from app.models import ExperimentConfig
from tests.test_indep import closed_oracle

pytestmark = pytest.mark.slow

CYCLE_FREE_CASES = list(itertools.product((5, 7), (1000, 5000)))


def regime_density(n, ell, r):
    """Largest p with r * (np)^(ell-2) <= n / 10, shaved to stay strictly inside."""
    return 0.999 * ((n / 10) / r) ** (1 / (ell - 2)) / n


@pytest.mark.parametrize("ell, n", CYCLE_FREE_CASES)
def test_final_graph_is_cycle_free(ell, n):
    r = 5
    p = regime_density(n, ell, r)
    assert r * (n * p) ** (ell - 2) <= n / 10
    params = derive_params(ell, n, "operational", {"p": p, "r": r, "k": 100, "delta": 0.5})
    survivors = 0
    for seed in range(10):
        instance = sample_instance(params, seed)
        hat, _ = vertex_delete(instance.prime, instance.partitions, ell)
        for cycle in enumerate_cycles(hat, ell):
            assert is_simple(cycle_edges(cycle), instance.partitions)
        final, _ = edge_delete(hat, build_orderings(instance.partitions, seed), ell)
        assert count_cycles(final, ell) == 0
        survivors += hat.alive_count >= n / 2
    assert survivors >= 9


def test_bad_broken_cycle_means_respect_counting_bound():
    params = derive_params(5, 400, "operational", {"p": 0.01, "r": 4, "k": 20, "delta": 0.5})
    samples = []
    for seed in range(200):
        instance = sample_instance(params, seed)
        _, report = vertex_delete(instance.prime, instance.partitions, 5)
        samples.append(report.histogram)
    shapes = {shape for histogram in samples for shape in histogram}
    for shape in shapes:
        t, a = map(int, shape.split(","))
        counts = np.array([histogram.get(shape, 0) for histogram in samples], dtype=float)
        sigma = counts.std(ddof=1) / math.sqrt(len(counts))
        assert counts.mean() <= broken_cycle_expectation(params, t, a) + 3 * sigma


def test_spectral_deviation_is_small():
    m, p = 2000, 0.05
    passed = sum(
        spectral_deviation(sample_base_graph(m, p, seed), p, seed=seed) <= 3 * math.sqrt(p * m)
        for seed in range(100)
    )
    assert passed >= 90


def test_tensor_identity_on_random_matrices():
    rng = np.random.default_rng(0)
    for _ in range(50):
        m, r = int(rng.integers(2, 51)), int(rng.integers(1, 6))
        x = rng.standard_normal((m, m))
        x = x + x.T
        expected = r * np.linalg.norm(x, 2)
        assert np.linalg.norm(tensor_with_ones(x, r), 2) == pytest.approx(expected, rel=1e-9)


def test_m_norm_matches_dense_eigenvalues():
    params = derive_params(5, 180, "operational", {"p": 0.08, "r": 3, "k": 20, "delta": 0.5})
    for seed in range(20):
        op = operator_for(sample_instance(params, seed))
        mu, v = top_eigenpair(op)
        rest = np.sort(np.abs(np.linalg.eigvalsh(op.dense().astype(float))))
        assert estimate_M_norm(op, mu, v) == pytest.approx(rest[-2], rel=1e-6)


def test_eigenpair_conclusions():
    n = 5000
    params = derive_params(5, n, "operational", {"p": 0.02, "r": 5, "k": 100, "delta": 0.5})
    delta = 1 / math.log(n)
    passed = 0
    for seed in range(100):
        decomposition = decompose(operator_for(sample_instance(params, seed)), seed=stage_rng(seed, "spectral"))
        close = abs(decomposition.mu / (2 * params.p * n) - 1) <= 0.05
        flat = decomposition.v_inf <= 1 / (delta * math.sqrt(n))
        passed += close and flat
    assert passed >= 90


def test_claim_has_no_counterexamples():
    params = derive_params(5, 2000, "operational", {"p": 0.0018, "r": 4, "k": 40, "delta": 0.5})
    checked = 0
    for seed in range(10):
        instance = sample_instance(params, seed)
        hat, _ = vertex_delete(instance.prime, instance.partitions, 5)
        final, _ = edge_delete(hat, build_orderings(instance.partitions, seed), 5)
        independent = independent_set_search(final, params.n, budget=2, seed=seed)
        rng = np.random.default_rng(seed)
        for _ in range(10):
            J = sorted(int(v) for v in rng.choice(independent, size=8, replace=False))
            verdict = check_claim(instance, J, final, 5)
            assert verdict.premise
            assert verdict.passed, verdict.counterexample
            checked += 1
    assert checked == 100


def test_kink_reduction_on_harvested_cycles():
    params = derive_params(5, 24, "operational", {"p": 0.3, "r": 3, "k": 4, "delta": 0.5})
    harvested = 0
    for seed in range(2000):
        instance = sample_instance(params, seed)
        graph, partitions = instance.prime, instance.partitions
        for cycle in enumerate_cycles(graph, 5):
            if is_simple(cycle_edges(cycle), partitions):
                continue
            reduced = kink_reduce(cycle, graph, partitions)
            assert reduced.is_bad(graph, partitions, 6)
            assert reduced.actual_count % 2 == 1
            assert is_simple(reduced.actual_edges(), partitions)
            assert not reduced.vertex_mask() & ~mask_of(cycle)
            oracle = enumerate_bad_broken_cycles(graph, partitions, 6, mask=mask_of(cycle))
            assert next(oracle, None) is not None
            harvested += 1
            if harvested == 500:
                return
    pytest.fail(f"only {harvested} non-simple cycles harvested")


def test_end_to_end_oracles(tmp_path):
    config = ExperimentConfig(
        ell=5, n=60, p=0.1, r=3, k=12, delta=0.5, seeds=list(range(20)),
        trials=50, walk_samples=2, search_budget=5, baseline=False, out=str(tmp_path),
    )
    for seed in config.seeds:
        run = execute(config, seed)
        report = run.report
        assert report.errors == []
        assert report.cycles_in_final_graph == 0
        complement = nx.complement(run.final.to_networkx())
        assert report.independence.alpha_exact == max(len(c) for c in nx.find_cliques(complement))

        J = sorted(int(v) for v in stage_rng(seed, "oracle.J").choice(60, size=6, replace=False))
        prime = run.instance.prime
        assert closed_pairs(prime, run.instance.partitions, J, 5).pairs == closed_oracle(prime, J, 5)
        split = exposure_split(prime, run.instance.partitions, J, 5)
        g0 = split.g0.to_networkx()
        expected = {
            (x, y) for x, y in itertools.combinations(J, 2)
            if not any(len(path) == 5 for path in nx.all_simple_paths(g0, x, y, cutoff=4))
        }
        assert split.open_pairs == expected


def test_co_block_frequency():
    n, r, samples = 20, 4, 4000
    partitions = (sample_partition(n, r, seed) for seed in range(samples))
    together = sum(part.block(0) == part.block(1) for part in partitions)
    expected = (r - 1) / (n - 1)
    sigma = math.sqrt(expected * (1 - expected) / samples)
    assert abs(together / samples - expected) <= 4 * sigma


def test_base_graph_edge_count_concentrates():
    m, p = 400, 0.05
    pairs = math.comb(m, 2)
    sigma = math.sqrt(pairs * p * (1 - p))
    for seed in range(50):
        assert abs(sample_base_graph(m, p, seed).edge_count - p * pairs) <= 4 * sigma


def test_simple_subgraph_containment():
    params = derive_params(5, 30, "operational", {"p": 0.2, "r": 3, "k": 6, "delta": 0.5})
    path = [(0, 1), (1, 2), (2, 3)]
    hits = []
    for seed in range(3000):
        instance = sample_instance(params, seed)
        if is_simple(path, instance.partitions):
            hits.append(all(instance.prime.has_edge(u, v) for u, v in path))
    assert len(hits) >= 300
    rate = float(np.mean(hits))
    sigma = math.sqrt(rate * (1 - rate) / len(hits))
    assert rate <= (2 * params.p) ** len(path) + 3 * sigma


def test_degree_check_on_random_graphs():
    m, p = 2000, 0.05
    passed = sum(check_degrees(sample_base_graph(m, p, seed), p).passed for seed in range(100))
    assert passed >= 95


def test_double_degree_and_expansion():
    params = derive_params(5, 5000, "operational", {"p": 0.02, "r": 5, "k": 100, "delta": 0.5})
    passed = 0
    for seed in range(100):
        instance = sample_instance(params, seed)
        double = check_double_degree(instance.prime, params.eta, params.p)
        expansion = check_expansion(
            instance.prime, instance.partitions, params.p, params.delta, trials=30, seed=seed
        )
        passed += double.passed and expansion.failures == 0
    assert passed >= 95


def test_projection_property_pass_rate():
    params = derive_params(5, 5000, "operational", {"p": 0.02, "r": 5, "k": 100, "delta": 0.5})
    passed = 0
    for seed in range(100):
        instance = sample_instance(params, seed)
        check = check_projections(instance.partitions, params.delta, params.k, trials=100, seed=seed)
        passed += check.failures == 0
    assert passed >= 95


def test_operator_walks_dominate_graph_walks():
    params = derive_params(5, 600, "operational", {"p": 0.02, "r": 3, "k": 40, "delta": 0.5})
    for seed in range(10):
        instance = sample_instance(params, seed)
        op = operator_for(instance)
        J = stage_rng(seed, "walks.J").choice(params.n, size=10, replace=False).tolist()
        for length in (params.ell - 1, params.ell):
            assert count_walks_exact(instance.prime, J, length) <= count_walks_exact(op, J, length)
