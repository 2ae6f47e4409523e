"""Unit tests for gridshift.services.bench."""

import pytest

from gridshift.errors import InvalidParameterError, OracleScaleError
from gridshift.services import bench, datasets


@pytest.fixture
def small_gmm():
    ds = datasets.gaussian_mixture(400, 2, 3, spread=0.02, seed=5)
    return datasets.min_max_normalize(ds.X), ds.labels


def test_run_bench_all_algorithms(small_gmm):
    X, _ = small_gmm
    report = bench.run_bench(X, 0.1, algos=["gridshift", "mspp", "vanilla_ms"], repeats=2, seed=5)

    assert (report.n, report.d, report.h, report.seed, report.repeats) == (400, 2, 0.1, 5, 2)
    assert [r.algorithm for r in report.results] == ["gridshift", "mspp", "vanilla_ms"]
    for r in report.results:
        assert len(r.samples_ms) == 2
        assert r.median_ms >= 0
        assert r.n_clusters >= 1
    assert set(report.speedups) == {"mspp/gridshift", "vanilla_ms/gridshift"}
    assert 0 < report.m_avg_over_n <= 1
    assert report.results[0].m_avg is not None
    assert report.results[1].m_avg is None


def test_run_bench_without_timings(small_gmm):
    X, _ = small_gmm
    report = bench.run_bench(X, 0.1, algos=["gridshift"], record_timings=False)

    assert report.results[0].samples_ms is None
    assert report.results[0].median_ms is None
    assert report.speedups == {}


def test_run_bench_deduplicates_algorithms(small_gmm):
    X, _ = small_gmm
    report = bench.run_bench(X, 0.1, algos=["mspp", "mspp"])
    assert [r.algorithm for r in report.results] == ["mspp"]
    assert report.m_avg_over_n is None


def test_unknown_algorithm(small_gmm):
    X, _ = small_gmm
    with pytest.raises(InvalidParameterError):
        bench.run_bench(X, 0.1, algos=["kmeans"])
    with pytest.raises(InvalidParameterError):
        bench.run_bench(X, 0.1, algos=[])


def test_repeats_must_be_positive(small_gmm):
    X, _ = small_gmm
    with pytest.raises(InvalidParameterError):
        bench.run_bench(X, 0.1, repeats=0)


def test_vanilla_refused_above_cap(small_gmm, monkeypatch):
    monkeypatch.setenv("GRIDSHIFT_VANILLA_MS_MAX_POINTS", "100")
    X, _ = small_gmm
    with pytest.raises(OracleScaleError):
        bench.run_bench(X, 0.1, algos=["gridshift", "vanilla_ms"])


def test_bandwidth_profile(small_gmm):
    X, labels = small_gmm
    entries = bench.bandwidth_profile(X, labels, [0.05, 0.2], algos=["gridshift", "mspp"])

    assert [(e.h, e.algorithm) for e in entries] == [
        (0.05, "gridshift"), (0.05, "mspp"), (0.2, "gridshift"), (0.2, "mspp"),
    ]
    for e in entries:
        assert -1.0 <= e.ari <= 1.0
        assert e.ami <= 1.0 + 1e-12
        assert e.runtime_ms is not None


def test_bandwidth_profile_empty_grid(small_gmm):
    X, labels = small_gmm
    with pytest.raises(InvalidParameterError):
        bench.bandwidth_profile(X, labels, [])


@pytest.mark.slow
@pytest.mark.timeout(900)
def test_million_point_speedup():
    ds = datasets.generate(datasets.parse_generator_spec("gmm:n=1000000,d=3,k=10,spread=0.03"), seed=0)
    report = bench.run_bench(datasets.min_max_normalize(ds.X), 0.1, algos=["gridshift", "mspp"])

    assert report.speedups["mspp/gridshift"] >= 10
    assert report.m_avg_over_n < 0.05
