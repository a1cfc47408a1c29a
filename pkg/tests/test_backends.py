"""Kernel backends: selection rules and bit-identical dual implementations."""

import os
import subprocess
import sys

import numpy as np
import pytest

from _cases import case_params, case_policy
from newswarn import (
    StopRule,
    WarningPolicy,
    coupled_simulate,
    network_simulate,
    simulate,
)
from newswarn._backend import backend_name, get_backend


def _has_compiled() -> bool:
    try:
        get_backend("compiled")
        return True
    except ImportError:
        return False


needs_compiled = pytest.mark.skipif(
    not _has_compiled(), reason="compiled kernel extension not built"
)

_TRACE_FIELDS = ("t", "waker_is_x", "tag_fake", "offspring", "x", "y")


def _assert_identical(a, b):
    for name in _TRACE_FIELDS:
        left, right = getattr(a, name), getattr(b, name)
        assert np.array_equal(left, right), f"field {name} differs between backends"
    assert a.extinction_epoch == b.extinction_epoch


def test_backend_selection_rules():
    assert backend_name() in ("compiled", "python")
    assert get_backend(None) is get_backend("auto")
    assert get_backend("python").__name__.endswith("_kernels_py")
    with pytest.raises(ValueError):
        get_backend("fastest")


def test_environment_variable_forces_the_python_backend(tmp_path):
    env = dict(os.environ, NEWSWARN_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c",
         "from newswarn._backend import backend_name; print(backend_name())"],
        capture_output=True, text=True, env=env, timeout=120,
    )
    assert out.returncode == 0 and out.stdout.strip() == "python"

    bad = subprocess.run(
        [sys.executable, "-c", "import newswarn._backend"],
        capture_output=True, text=True,
        env=dict(os.environ, NEWSWARN_BACKEND="turbo"), timeout=120,
    )
    assert bad.returncode != 0 and "turbo" in bad.stderr


@needs_compiled
def test_chain_runs_are_bit_identical_across_backends():
    params, policy = case_params(1), case_policy(1)
    stop = StopRule(max_events=50000)
    fast = simulate(params, policy, stop, seed=101, init=(4, 96), backend="compiled")
    slow = simulate(params, policy, stop, seed=101, init=(4, 96), backend="python")
    _assert_identical(fast, slow)

    # also with a binomial degree law and tagging reluctance
    from newswarn import DegreeModel, ModelParams

    params2 = ModelParams(wake_rate=0.1, alpha_fake=0.9, alpha_real=0.45, eta=0.3,
                          eta_c=0.4, degree_model=DegreeModel.binomial(40, 0.7))
    stop2 = StopRule(max_events=20000)
    fast2 = simulate(params2, policy, stop2, seed=55, init=(4, 96), backend="compiled")
    slow2 = simulate(params2, policy, stop2, seed=55, init=(4, 96), backend="python")
    _assert_identical(fast2, slow2)


@needs_compiled
def test_coupled_runs_are_bit_identical_across_backends():
    params = case_params(1)
    strong = WarningPolicy(w=1.0, b=0.5, epsilon=0.05)
    weak = WarningPolicy(w=0.5, b=1.5, epsilon=0.05)
    stop = StopRule(max_events=20000)
    fast = coupled_simulate(params, strong, weak, stop, seed=7, init=(4, 96),
                            backend="compiled")
    slow = coupled_simulate(params, strong, weak, stop, seed=7, init=(4, 96),
                            backend="python")
    _assert_identical(fast.strong, slow.strong)
    _assert_identical(fast.weak, slow.weak)


@needs_compiled
def test_network_runs_are_bit_identical_across_backends(synthetic_graph):
    params, policy = case_params(1), case_policy(1)
    stop = StopRule(max_events=20000)
    fast = network_simulate(synthetic_graph, params, policy, stop, seed=40,
                            init=(4, 96), backend="compiled")
    slow = network_simulate(synthetic_graph, params, policy, stop, seed=40,
                            init=(4, 96), backend="python")
    _assert_identical(fast, slow)
