import pytest
from scipy import stats as sps

from viewmix.errors import ParameterError
from viewmix.multiview import MultiViewConfig
from viewmix.stats import Histogram, collect_stats, format_stats, monte_carlo_area_fraction, rate_interval

import oracles


def test_rate_interval_single_binomial():
    lo, hi = rate_interval([10_000], [0.5])
    assert (lo, hi) == tuple(int(v) for v in sps.binom.interval(0.999, 10_000, 0.5))
    assert lo < 5000 < hi


def test_rate_interval_mixture_brackets_mean():
    lo, hi = rate_interval([1000, 1000], [0.2, 0.0])
    assert lo < 200 < hi
    # narrower than treating all 2000 draws at p=0.1
    wide = sps.binom.interval(0.999, 2000, 0.1)
    assert hi - lo <= wide[1] - wide[0]
    with pytest.raises(ParameterError):
        rate_interval([10], [0.5], confidence=1.0)


def test_histogram():
    h = Histogram.of([0.1, 0.2, 0.9], 0.0, 1.0, bins=2)
    assert h.counts == (2, 1)
    assert Histogram.of([0.5, 0.5], 0.5, 0.5).counts == (2,)


def test_monte_carlo_agrees_with_oracles():
    ours = monte_carlo_area_fraction(32, 32, 0.3, 0.6, samples=200_000, seed=1)
    exact = oracles.area_fraction_exact(32, 32, 0.3, 0.6)
    mc = oracles.area_fraction_monte_carlo(32, 32, 0.3, 0.6, 200_000, seed=2)
    assert abs(ours - exact) / exact < 0.005
    assert abs(mc - exact) / exact < 0.005


def test_collect_stats_small(small_dataset):
    rep = collect_stats(small_dataset, MultiViewConfig(), samples=200, seed=3)
    names = [r.name for r in rep.rates]
    assert names[-1] == "strategy:viewmix"
    assert "crop_rescale" in names
    crop = next(r for r in rep.rates if r.name == "crop_rescale")
    assert crop.successes == crop.trials == 400
    assert 0.3 <= rep.lambda_min <= rep.lambda_max <= 0.6
    assert set(rep.donors) <= {"view 0 <- view 1", "view 1 <- view 0"}
    text = format_stats(rep)
    assert "strategy:viewmix" in text and "lambda" in text
    assert rep.to_dict()["samples"] == 200


def test_collect_stats_baseline_has_no_strategy_row(small_dataset):
    rep = collect_stats(small_dataset, MultiViewConfig(strategy="baseline"), samples=20, seed=3)
    assert not any(r.name.startswith("strategy") for r in rep.rates)
    assert rep.oracle_area_fraction is None and rep.lambda_min is None
    with pytest.raises(ParameterError):
        collect_stats(small_dataset, MultiViewConfig(), samples=0, seed=0)
