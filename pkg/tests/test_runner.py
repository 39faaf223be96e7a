import math

import numpy as np
import pytest

from cqlab.runner import binomial_stderr, mean_stderr, run_trials, trial_generators


def _draw(rng):
    return float(rng.random())


def test_trial_generators_depend_on_seed_only():
    a = [g.random() for g in trial_generators(5, 4)]
    b = [g.random() for g in trial_generators(5, 4)]
    assert a == b
    assert len(set(a)) == 4


def test_results_in_trial_order():
    expected = [g.random() for g in trial_generators(9, 16)]
    assert run_trials(_draw, 16, 9, max_concurrent=1) == expected
    assert run_trials(_draw, 16, 9, max_concurrent=8) == expected


def test_run_trials_rejects_zero():
    with pytest.raises(ValueError):
        run_trials(_draw, 0, 1)


def test_failing_trial_propagates():
    def boom(rng):
        raise RuntimeError("bad trial")

    with pytest.raises(RuntimeError, match="bad trial"):
        run_trials(boom, 2, 0, max_concurrent=1)


def test_mean_stderr():
    mean, err = mean_stderr([1.0, 2.0, 3.0, 4.0])
    assert mean == pytest.approx(2.5)
    assert err == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert mean_stderr([0.7]) == (0.7, 0.0)


def test_binomial_stderr():
    assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
    assert binomial_stderr(0.0, 10) == 0.0
    assert binomial_stderr(0.2, 4) == pytest.approx(math.sqrt(0.16 / 4))
