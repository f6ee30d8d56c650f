"""
SNN 模块 - 业务逻辑层
权重量化、积分发放动力学的精确整数仿真、分类读出
"""
import math

import numpy as np

from src.common.constants import WeightScale
from src.snn.exceptions import DimensionMismatch, QuantizationError
from src.snn.schemas import (
    BatchDynamics,
    DynamicsTrace,
    InputSequence,
    NetworkArchitecture,
    TraceExport,
    TraceStep,
)


def quantize_binary(w: float) -> int:
    """
    二值量化：0 ↦ 0，否则 (sign(w) + 1) / 2

    Raises:
        QuantizationError: 非有限输入
    """
    if not math.isfinite(w):
        raise QuantizationError(w)
    return 1 if w > 0 else 0


def quantize_ternary(w: float) -> int:
    """
    三值量化：sign(w)，sign(0) = 0

    Raises:
        QuantizationError: 非有限输入
    """
    if not math.isfinite(w):
        raise QuantizationError(w)
    return (w > 0) - (w < 0)


def quantize_matrix(weights: np.ndarray, scale: WeightScale) -> np.ndarray:
    """逐元素量化整个权重矩阵"""
    weights = np.asarray(weights, dtype=np.float64)
    if not np.isfinite(weights).all():
        raise QuantizationError(float(weights[~np.isfinite(weights)][0]))
    signs = np.sign(weights).astype(np.int64)
    if scale is WeightScale.BINARY:
        return (signs > 0).astype(np.int64)
    return signs


def _integrate_and_fire(arch: NetworkArchitecture, spikes: np.ndarray) -> BatchDynamics:
    """
    逐时刻递推：A(X,t) = A(X,t-1)·(1 - F_X(t-1)) + Σ W·F(t)，F_X(t) = [A(X,t) ≥ τ_X]

    Args:
        spikes: (批量, t_end + 1, 输入数) 的 0/1 数组
    """
    batch, rows, _ = spikes.shape
    spikes = spikes.astype(np.int64)
    w_hidden = arch.hidden_weights.astype(np.int64)
    w_output = arch.output_weights.astype(np.int64)
    tau_hidden = arch.hidden_thresholds
    tau_output = arch.output_thresholds

    hidden_firing = np.zeros((batch, rows, arch.hidden_count), dtype=np.int8)
    output_firing = np.zeros((batch, rows, arch.output_count), dtype=np.int8)
    hidden_potential = np.zeros((batch, rows, arch.hidden_count), dtype=np.int64)
    output_potential = np.zeros((batch, rows, arch.output_count), dtype=np.int64)

    for t in range(1, rows):
        hidden_potential[:, t] = (
            hidden_potential[:, t - 1] * (1 - hidden_firing[:, t - 1])
            + spikes[:, t] @ w_hidden.T
        )
        hidden_firing[:, t] = hidden_potential[:, t] >= tau_hidden
        output_potential[:, t] = (
            output_potential[:, t - 1] * (1 - output_firing[:, t - 1])
            + hidden_firing[:, t].astype(np.int64) @ w_output.T
        )
        output_firing[:, t] = output_potential[:, t] >= tau_output

    return BatchDynamics(hidden_firing, output_firing, hidden_potential, output_potential)


def simulate(arch: NetworkArchitecture, input: InputSequence) -> DynamicsTrace:
    """
    仿真单个输入序列

    Raises:
        DimensionMismatch: 输入数与网络不一致
    """
    if input.input_count != arch.input_count:
        raise DimensionMismatch("输入序列", arch.input_count, input.input_count)
    result = _integrate_and_fire(arch, input.spikes[np.newaxis])
    return DynamicsTrace(
        t_end=input.t_end,
        input_firing=input.spikes,
        hidden_firing=result.hidden_firing[0],
        output_firing=result.output_firing[0],
        hidden_potential=result.hidden_potential[0],
        output_potential=result.output_potential[0],
    )


def simulate_batch(arch: NetworkArchitecture, spikes: np.ndarray) -> BatchDynamics:
    """
    批量仿真，逐实例结果与 simulate 完全一致

    Args:
        spikes: (批量, t_end + 1, 输入数)，每个实例第 0 行为 0
    """
    spikes = np.asarray(spikes)
    if spikes.ndim != 3 or spikes.shape[2] != arch.input_count:
        raise DimensionMismatch("批量输入", f"(B, T+1, {arch.input_count})", spikes.shape)
    return _integrate_and_fire(arch, spikes)


def classify(trace: DynamicsTrace) -> int:
    """脉冲计数 argmax，并列取最小类别索引"""
    return int(np.argmax(trace.output_counts()))


def check_trace_shape(arch: NetworkArchitecture, trace: DynamicsTrace) -> None:
    """校验轨迹与网络结构维度一致"""
    shapes = {
        "input_firing": arch.input_count,
        "hidden_firing": arch.hidden_count,
        "output_firing": arch.output_count,
    }
    for name, width in shapes.items():
        actual = getattr(trace, name).shape[1]
        if actual != width:
            raise DimensionMismatch(f"轨迹 {name}", width, actual)


def _bits(row: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in row)


def trace_to_export(trace: DynamicsTrace) -> TraceExport:
    """轨迹 → 导出格式（逐时刻位图字符串 + 膜电位）"""
    steps = [
        TraceStep(
            t=t,
            input=_bits(trace.input_firing[t]),
            hidden=_bits(trace.hidden_firing[t]),
            output=_bits(trace.output_firing[t]),
            hidden_potential=trace.hidden_potential[t].tolist(),
            output_potential=trace.output_potential[t].tolist(),
        )
        for t in range(trace.t_end + 1)
    ]
    return TraceExport(t_end=trace.t_end, steps=steps)


def trace_from_export(export: TraceExport) -> DynamicsTrace:
    """导出格式 → 轨迹"""

    def bitmap(field: str) -> list[list[int]]:
        return [[int(c) for c in getattr(step, field)] for step in export.steps]

    return DynamicsTrace(
        t_end=export.t_end,
        input_firing=bitmap("input"),
        hidden_firing=bitmap("hidden"),
        output_firing=bitmap("output"),
        hidden_potential=[step.hidden_potential for step in export.steps],
        output_potential=[step.output_potential for step in export.steps],
    )
