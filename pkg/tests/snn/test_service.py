"""
SNN 仿真与量化测试
"""
import math

import numpy as np
import pytest

from src.common.constants import Encoding, WeightScale
from src.snn.encoding import encode_batch, poisson_encode
from src.snn.exceptions import DimensionMismatch, QuantizationError
from src.snn.schemas import Image
from src.snn.service import (
    classify,
    quantize_binary,
    quantize_matrix,
    quantize_ternary,
    simulate,
    simulate_batch,
    trace_from_export,
    trace_to_export,
)
from tests.conftest import make_arch, make_sequence, random_arch


# ========== 量化 ==========

@pytest.mark.parametrize("w, expected", [(0.7, 1), (-0.2, 0), (0.0, 0), (1e-9, 1)])
def test_quantize_binary(w, expected):
    """测试二值量化"""
    assert quantize_binary(w) == expected


@pytest.mark.parametrize("w, expected", [(-0.3, -1), (0.0, 0), (2.5, 1)])
def test_quantize_ternary(w, expected):
    """测试三值量化"""
    assert quantize_ternary(w) == expected


@pytest.mark.parametrize("w", [math.nan, math.inf, -math.inf])
def test_quantize_rejects_non_finite(w):
    """测试非有限权重被拒绝"""
    with pytest.raises(QuantizationError):
        quantize_binary(w)
    with pytest.raises(QuantizationError):
        quantize_ternary(w)


def test_quantize_matrix_matches_scalar():
    """测试矩阵量化与逐元素量化一致"""
    weights = np.array([[0.5, -0.5, 0.0], [-2.0, 3.0, 1e-3]])
    binary = quantize_matrix(weights, WeightScale.BINARY)
    ternary = quantize_matrix(weights, WeightScale.TERNARY)
    assert binary.tolist() == [[quantize_binary(w) for w in row] for row in weights]
    assert ternary.tolist() == [[quantize_ternary(w) for w in row] for row in weights]


# ========== 动力学 ==========

def test_simulate_accumulates_and_resets(chain_arch):
    """测试电位累积、发放与复位"""
    trace = simulate(chain_arch, make_sequence([[1], [1], [1]]))

    assert trace.hidden_potential[:, 0].tolist() == [0, 1, 2, 1]
    assert trace.hidden_firing[:, 0].tolist() == [0, 0, 1, 0]
    assert trace.output_potential[:, 0].tolist() == [0, 0, 1, 0]
    assert trace.output_firing[:, 0].tolist() == [0, 0, 1, 0]


def test_simulate_time_zero_is_silent(tiny_arch):
    """测试 t = 0 时所有神经元静默且电位为 0"""
    trace = simulate(tiny_arch, make_sequence([[1, 1, 1, 1]]))
    assert not trace.hidden_firing[0].any()
    assert not trace.output_firing[0].any()
    assert not trace.hidden_potential[0].any()


def test_simulate_ternary_negative_weights(ternary_arch):
    """测试负权重抑制发放"""
    trace = simulate(ternary_arch, make_sequence([[1, 1, 0, 0]]))
    # h0 = 1 − 1 = 0 < 1，h1 = 1 ≥ 1；o0 = 0 − 1，o1 = 1
    assert trace.hidden_firing[1].tolist() == [0, 1]
    assert trace.output_firing[1].tolist() == [0, 1]
    assert trace.output_potential[1].tolist() == [-1, 1]


def test_simulate_rejects_wrong_width(tiny_arch):
    """测试输入数与网络不一致时报错"""
    with pytest.raises(DimensionMismatch):
        simulate(tiny_arch, make_sequence([[1, 0, 1]]))


def test_classify_tie_breaks_to_lowest(tiny_arch):
    """测试脉冲计数并列时取最小类别"""
    trace = simulate(tiny_arch, make_sequence([[0, 0, 0, 0]]))
    assert classify(trace) == 0
    trace = simulate(tiny_arch, make_sequence([[0, 0, 1, 0]]))
    assert classify(trace) == 1


def test_batch_matches_single(tiny_arch):
    """测试批量仿真与逐个仿真完全一致"""
    rng = np.random.default_rng(3)
    intensities = rng.random((5, 4))
    spikes = encode_batch(intensities, Encoding.POISSON, t_end=6, seed=11)
    batch = simulate_batch(tiny_arch, spikes)

    for b, row in enumerate(intensities):
        sequence = poisson_encode(Image(width=2, height=2, intensities=row), 6, seed=11, instance_index=b)
        trace = simulate(tiny_arch, sequence)
        assert np.array_equal(batch.hidden_firing[b], trace.hidden_firing)
        assert np.array_equal(batch.output_potential[b], trace.output_potential)


def test_trace_export_is_lossless(tiny_arch):
    """测试轨迹导出再导入后不变"""
    trace = simulate(tiny_arch, make_sequence([[1, 1, 0, 1], [0, 1, 1, 0]]))
    export = trace_to_export(trace)
    assert export.steps[1].input == "1101"

    restored = trace_from_export(export)
    assert np.array_equal(restored.hidden_potential, trace.hidden_potential)
    assert np.array_equal(restored.output_firing, trace.output_firing)


def test_architecture_rejects_out_of_scale_weights():
    """测试二值网络中出现 -1 权重时校验失败"""
    with pytest.raises(ValueError):
        make_arch(hidden=[[1, -1]], output=[[1]], thresholds=[1, 1])


def test_connected_inputs(tiny_arch):
    """测试无连接输入的识别"""
    assert tiny_arch.connected_inputs.tolist() == [True, True, True, False]
    assert tiny_arch.feature_xy(3) == (1, 1)


# ========== 性质 ==========

@pytest.mark.parametrize("seed", range(0, 40, 2))
def test_extra_stimulus_never_lowers_hidden_potential(seed):
    """测试二值网络中在时刻 t 额外加入输入脉冲不会降低该时刻的隐藏层膜电位"""
    arch = random_arch(seed)
    assert arch.weight_scale is WeightScale.BINARY
    rng = np.random.default_rng(seed)
    base = rng.integers(0, 2, size=(4, arch.input_count))
    before = simulate(arch, make_sequence(base))
    for t in range(1, 5):
        for i in np.flatnonzero(base[t - 1] == 0):
            stimulated = base.copy()
            stimulated[t - 1, i] = 1
            after = simulate(arch, make_sequence(stimulated))
            assert (after.hidden_potential[t] >= before.hidden_potential[t]).all()


@pytest.mark.parametrize("seed", range(40))
def test_potential_bounded_by_time_and_fan_in(seed):
    """测试 |A(X,t)| ≤ t·扇入 对两个层都成立"""
    arch = random_arch(seed)
    rng = np.random.default_rng(seed + 1000)
    trace = simulate(arch, make_sequence(rng.integers(0, 2, size=(6, arch.input_count))))
    times = np.arange(trace.t_end + 1)[:, np.newaxis]
    assert (np.abs(trace.hidden_potential) <= times * arch.input_count).all()
    assert (np.abs(trace.output_potential) <= times * arch.hidden_count).all()
