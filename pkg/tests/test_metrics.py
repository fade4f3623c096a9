import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fpsim.metrics import (
    HALF_NEVER,
    MetricsReport,
    belief_average,
    belief_variance,
    compute_metrics,
    distinct_n,
    half_time_norm,
    infection_rate,
    metrics_from_parts,
    peak_metrics,
    recovery_rate,
    tokenize,
)
from fpsim.simulator import PopulationCounts, SimulationConfig, run_simulation

N, T = 30, 15


def series(I, R=None, n=N):
    R = R if R is not None else [0] * len(I)
    return [PopulationCounts(d, n - i - r, i, r) for d, (i, r) in enumerate(zip(I, R))]


def test_saturated_population():
    b = [1] * 30
    assert belief_average(b) == 1.0
    assert belief_variance(b) == 0.0
    assert infection_rate(series([1] + [30] * T)) == pytest.approx(2.0)


def test_thirteen_believers():
    b = [1] * 13 + [0] * 17
    assert round(belief_average(b), 3) == 0.433
    assert belief_variance(b) == pytest.approx(0.246, abs=1e-3)
    assert belief_variance(b) == pytest.approx(float(Fraction(13, 30) * Fraction(17, 30)))


def test_rates():
    counts = series([1] + [13] * T, [0] + [5] * T)
    assert recovery_rate(counts) == pytest.approx(5 / 15)
    assert infection_rate(series([1] + [0] * T)) == 0.0
    assert belief_average([0] * 30) == 0.0
    assert belief_variance([0, 1] * 15) == 0.25


@given(st.lists(st.integers(0, 1), min_size=1, max_size=200))
def test_bernoulli_identity(beliefs):
    p = Fraction(sum(beliefs), len(beliefs))
    assert belief_variance(beliefs) == pytest.approx(float(p * (1 - p)), abs=1e-12)


def test_peak_examples():
    saturated = [1, 5, 12, 25] + [N] * 12
    frac, when = peak_metrics(series(saturated), N)
    assert frac == 1.0 and when == pytest.approx(4 / 15)
    frac, when = peak_metrics(series([0] * 16), N)
    assert frac == 0.0 and when == pytest.approx(1 / 15)
    spike = [0] * 16
    spike[7] = 9
    assert peak_metrics(series(spike), N)[1] == pytest.approx(7 / 15)


def test_half_time_examples():
    assert math.isinf(half_time_norm(series([1] + [14] * T), N))
    I = [1, 8, 16] + [16] * 13
    assert half_time_norm(series(I), N) == pytest.approx(2 / 15)
    assert half_time_norm(series([15] + [15] * T), N) == 0.0


def test_horizon_required():
    with pytest.raises(ValueError):
        infection_rate(series([1]))


def test_distinct_examples():
    assert distinct_n(["a b", "a b"], 1) == 0.5
    assert distinct_n(["one two three four"], 1) == 1.0
    assert distinct_n([], 2) == 0.0
    # bigrams never span texts
    assert distinct_n(["a b", "c d"], 2) == 1.0
    assert tokenize("Hello, World! it's") == ["hello", "world", "it", "s"]
    with pytest.raises(ValueError):
        distinct_n(["a"], 0)


words = st.text(alphabet="abcde ,.", max_size=30)


@given(st.lists(words, max_size=12), st.randoms(use_true_random=False), st.integers(1, 2))
def test_distinct_order_invariant(texts, rnd, n):
    shuffled = list(texts)
    rnd.shuffle(shuffled)
    assert distinct_n(shuffled, n) == distinct_n(texts, n)
    assert 0.0 <= distinct_n(texts, n) <= 1.0


def test_half_sentinel_round_trip():
    rep = metrics_from_parts(series([1] + [2] * T), [1, 1] + [0] * 28, ["a b c"])
    rec = rep.as_record()
    assert rec["half_time_norm"] == HALF_NEVER
    assert MetricsReport.from_record(rec) == rep


def test_parts_validation():
    with pytest.raises(ValueError):
        metrics_from_parts(series([1, 2]), [1] + [0] * 29, [])
    with pytest.raises(ValueError):
        metrics_from_parts(series([1, 2]), [1, 2] + [0] * 28, [])


@pytest.mark.parametrize("seed", range(5))
def test_metric_identities_on_runs(seed):
    trace = run_simulation(SimulationConfig(topic="x", run_seed=seed, n_initially_infected=3))
    rep = compute_metrics(trace)
    last = trace.counts[-1]
    T_ = trace.horizon
    assert rep.infection_rate * T_ + rep.recovery_rate * T_ + last.S == pytest.approx(N)
    assert rep.peak_fraction >= last.I / N
    assert 0 <= rep.belief_average <= 1 and rep.belief_variance >= 0
    if not math.isinf(rep.half_time_norm) and rep.peak_fraction >= 0.5:
        assert rep.half_time_norm <= rep.peak_time_norm
    assert rep.belief_variance == pytest.approx(rep.belief_average * (1 - rep.belief_average))
    assert np.isclose(rep.belief_average, last.I / N)
