import numpy as np
import pytest

from graphforge import stats


def test_chunk_layout():
    assert stats.chunk_sizes(10_000) == [4096, 4096, 1808]
    assert stats.chunk_sizes(0) == []
    with pytest.raises(ValueError):
        stats.chunk_sizes(-1)


def test_results_do_not_depend_on_threads():
    fn = lambda n, rng: rng.random(n).sum()
    one = stats.run_chunked(fn, 50_000, 11, threads=1)
    four = stats.run_chunked(fn, 50_000, 11, threads=4)
    assert one == four
    assert (stats.sample_counts(np.array([0.2, 0.8]), 9000, 3)
            == stats.sample_counts(np.array([0.2, 0.8]), 9000, 3, threads=2)).all()


def test_seed_override(monkeypatch):
    monkeypatch.setenv(stats.SEED_ENV, "77")
    assert stats.resolve_seed(5) == 77
    monkeypatch.delenv(stats.SEED_ENV)
    assert stats.resolve_seed(5) == 5 and stats.resolve_seed(None) == 0


def test_interval_rules():
    lo, hi = stats.binomial_ci(500, 1000)
    assert lo == pytest.approx(0.469, abs=1e-3) and hi == pytest.approx(0.531, abs=1e-3)
    lo, hi = stats.binomial_ci(0, 50)
    assert lo == 0.0 and 0.05 < hi < 0.08
    assert stats.binomial_ci(0, 0) == (0.0, 1.0)


def test_agreement_band():
    assert stats.Estimate(530, 1000).agrees(0.5)
    assert not stats.Estimate(560, 1000).agrees(0.5)
    # small expected counts fall back to the exact interval
    assert stats.Estimate(3, 1000).agrees(0.001)
    assert not stats.Estimate(0, 0).agrees(0.5)
