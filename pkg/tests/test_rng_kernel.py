import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicluster import _backend, model
from epicluster.rng import SplitMix64, fmix64, replicate_seed, stream_key
from epicluster.sim import StopCondition, simulate

needs_ext = pytest.mark.skipif("cython" not in _backend.backends, reason="compiled kernel not built")


def test_splitmix_reference_outputs():
    # the canonical SplitMix64 sequence from state 0; fmix64(0) == 0
    g = SplitMix64(0)
    assert [g.next_u64() for _ in range(3)] == [
        0xE220A8397B1DCDAF, 0x6E789E6AA1B965F4, 0x06C45D188009454F,
    ]


def test_random_in_unit_interval():
    g = SplitMix64(123)
    xs = [g.random() for _ in range(10_000)]
    assert 0.0 <= min(xs) and max(xs) < 1.0
    assert abs(np.mean(xs) - 0.5) < 0.02


def test_stream_key_and_replicates():
    assert stream_key(1) == fmix64(1)
    assert replicate_seed(10, 3) == 9
    assert len({replicate_seed(1234, i) for i in range(1000)}) == 1000


def test_first_event_time_uses_stream():
    params = model.validate(2.0, 0.5, 0.5)
    tr = simulate(params, 42, StopCondition(max_events=1))
    u1 = SplitMix64(42).random()
    assert tr.ev_time[0] == -math.log1p(-u1) / 2.5


CASES = [
    ((2.0, 0.5, 0.5), StopCondition(max_individuals=3000)),
    ((2.0, 0.5, 0.5), StopCondition(t_max=6.0)),
    ((1.0, 0.9, 0.5), StopCondition()),
    ((1.0, 0.5, 0.0), StopCondition(max_clusters=2000)),
    ((2.0, 1.0, 0.5), StopCondition()),
    ((2.0, 0.0, 0.5), StopCondition(max_events=5000)),
    ((2.0, 0.5, 0.5), StopCondition(max_generation=3)),
]


@needs_ext
@pytest.mark.parametrize("gpd, stop", CASES)
def test_backends_bit_identical(gpd, stop):
    params = model.validate(*gpd, detection_free=True)
    for seed in (0, 1, 2**63 + 5):
        a = simulate(params, seed, stop, backend="cython")
        b = simulate(params, seed, stop, backend="python")
        assert a.same_as(b)


@needs_ext
@settings(max_examples=25, deadline=None)
@given(
    st.floats(0.2, 3.0), st.floats(0.0, 1.0), st.floats(0.0, 2.0),
    st.integers(0, 2**64 - 1), st.integers(1, 400),
)
def test_backends_identical_property(gamma, p, delta, seed, cap):
    params = model.validate(gamma, p, delta, detection_free=True)
    stop = StopCondition(max_individuals=cap, t_max=20.0)
    assert simulate(params, seed, stop, backend="cython").same_as(
        simulate(params, seed, stop, backend="python")
    )


def test_same_seed_same_trace():
    params = model.validate(2.0, 0.5, 0.5)
    stop = StopCondition(max_individuals=2000)
    assert simulate(params, 9, stop).same_as(simulate(params, 9, stop))
    assert not simulate(params, 9, stop).same_as(simulate(params, 10, stop))


@needs_ext
def test_benchmark_smoke(capsys):
    import runpy
    from pathlib import Path

    bench = runpy.run_path(str(Path(__file__).parents[1] / "benchmarks" / "bench_kernel.py"))
    assert bench["main"](["--individuals", "2000", "--repeat", "1"]) == 0
    assert "speedup" in capsys.readouterr().out


def test_backend_switch_by_environment():
    import os
    import subprocess
    import sys

    env = {**os.environ, "EPICLUSTER_BACKEND": "python"}
    out = subprocess.run(
        [sys.executable, "-c", "from epicluster import _backend; print(_backend.BACKEND)"],
        capture_output=True, text=True, env=env,
    )
    assert out.stdout.strip() == "python"
