"""
归因审计 - 业务逻辑层
联盟价值函数、精确 / 采样 Shapley 值、相关性阈值审计
"""
import time
from concurrent.futures import ThreadPoolExecutor
from math import comb

import numpy as np

from src.attribution.constants import (
    COLOR_RELEVANT,
    CONDITION_LIMIT,
    EXACT_MAX_FEATURES,
    RIDGE,
    SAMPLE_CHUNK_SIZE,
    VALUE_BATCH_SIZE,
)
from src.attribution.exceptions import (
    InvalidDelta,
    SampleSizeTooSmall,
    SingularRegression,
    TooManyFeatures,
)
from src.attribution.schemas import AttributionReport, ShapleyEstimate
from src.axp.service import connection_canvas
from src.common.config import settings
from src.common.constants import Encoding
from src.snn.constants import DEFAULT_THETA
from src.snn.encoding import encode
from src.snn.schemas import Image, NetworkArchitecture
from src.snn.service import classify, simulate, simulate_batch
from src.utils.logger import get_logger
from src.utils.ppm import encode_ppm
from src.utils.rng import substream

logger = get_logger("attribution")


class ValueFunction:
    """
    联盟价值函数 v(S)：只保留 S 中像素时，目标类别输出神经元在 1..t_end 的脉冲计数

    缺席像素强度置 0（全暗）。Poisson 编码下所有联盟共用同一组均匀随机数，
    强度为 0 的像素永不发放，因此 v(S) 等于在完整脉冲矩阵上屏蔽缺席列
    """

    def __init__(
        self,
        arch: NetworkArchitecture,
        image: Image,
        encoding: Encoding,
        t_end: int,
        target_class: int | None = None,
        seed: int = 0,
        instance_index: int = 0,
        features: list[int] | None = None,
        theta: float = DEFAULT_THETA,
    ):
        self.arch = arch
        self.sequence = encode(image, encoding, t_end, seed, instance_index, theta)
        if target_class is None:
            target_class = classify(simulate(arch, self.sequence))
        self.target_class = int(target_class)
        self.features = list(range(arch.input_count)) if features is None else list(features)

    @property
    def feature_count(self) -> int:
        return len(self.features)

    def __call__(self, masks: np.ndarray) -> np.ndarray:
        """
        Args:
            masks: (联盟数, 特征数) 的 0/1 数组

        Returns:
            np.ndarray: 每个联盟的价值（float64）
        """
        masks = np.atleast_2d(np.asarray(masks, dtype=np.int8))
        full = self.sequence.spikes
        values = np.empty(masks.shape[0], dtype=np.float64)
        for start in range(0, masks.shape[0], VALUE_BATCH_SIZE):
            chunk = masks[start : start + VALUE_BATCH_SIZE]
            spikes = np.repeat(full[np.newaxis], chunk.shape[0], axis=0)
            spikes[:, :, self.features] *= chunk[:, np.newaxis, :]
            dynamics = simulate_batch(self.arch, spikes)
            counts = dynamics.output_firing[:, 1:, self.target_class].sum(axis=1)
            values[start : start + chunk.shape[0]] = counts
        return values

    def empty_value(self) -> float:
        return float(self(np.zeros((1, self.feature_count)))[0])

    def full_value(self) -> float:
        return float(self(np.ones((1, self.feature_count)))[0])


def _all_coalitions(count: int) -> np.ndarray:
    """第 k 行是整数 k 的二进制位（第 i 位对应第 i 个特征）"""
    codes = np.arange(2**count, dtype=np.int64)
    return ((codes[:, np.newaxis] >> np.arange(count)) & 1).astype(np.int8)


def kernel_weight(count: int, size: int) -> float:
    """Shapley 核权重 (M − 1) / (C(M, s)·s·(M − s))，空联盟与全联盟为 0"""
    if size <= 0 or size >= count:
        return 0.0
    return (count - 1) / (comb(count, size) * size * (count - size))


# ========== 精确 ==========

def exact_shapley(v: ValueFunction) -> ShapleyEstimate:
    """
    枚举全部联盟的精确 Shapley 值

    φ_i = Σ_{S ∌ i} |S|!(M − |S| − 1)!/M! · (v(S ∪ {i}) − v(S))

    Raises:
        TooManyFeatures: 特征数超过 12
    """
    count = v.feature_count
    if count > EXACT_MAX_FEATURES:
        raise TooManyFeatures(count, EXACT_MAX_FEATURES)

    masks = _all_coalitions(count)
    values = v(masks)
    sizes = masks.sum(axis=1)
    codes = np.arange(2**count)

    scores = np.zeros(count, dtype=np.float64)
    for i in range(count):
        without = codes[(codes >> i) & 1 == 0]
        weights = np.array([1.0 / (count * comb(count - 1, int(s))) for s in sizes[without]])
        diffs = values[without | (1 << i)] - values[without]
        # 价值为整数计数，零玩家的差值处处为 0，得分严格为 0.0
        scores[i] = float(np.sum(weights * diffs)) if np.any(diffs) else 0.0

    return ShapleyEstimate(
        scores=scores,
        base_value=float(values[0]),
        full_value=float(values[-1]),
    )


# ========== 核回归采样 ==========

def _size_distribution(count: int) -> np.ndarray:
    """联盟大小 1..M−1 的抽样分布，按核权重乘以同大小联盟数"""
    mass = np.array([comb(count, s) * kernel_weight(count, s) for s in range(1, count)])
    return mass / mass.sum()


def sample_coalitions(count: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """先按核分布抽联盟大小，再均匀抽取该大小的特征子集"""
    sizes = rng.choice(np.arange(1, count), size=size, p=_size_distribution(count))
    keys = rng.random((size, count))
    ranks = np.argsort(np.argsort(keys, axis=1), axis=1)
    return (ranks < sizes[:, np.newaxis]).astype(np.int8)


def solve_constrained(
    coalitions: np.ndarray,
    weights: np.ndarray,
    values: np.ndarray,
    base_value: float,
    full_value: float,
) -> tuple[np.ndarray, bool]:
    """
    带效率约束 Σφ = v(全) − v(空) 的加权最小二乘

    A = ZᵀWZ，b = ZᵀW(y − v0)，φ = A⁻¹(b − 1·(1ᵀA⁻¹b − Δ) / 1ᵀA⁻¹1)

    Returns:
        (得分, 是否启用了岭项)

    Raises:
        SingularRegression: 求解失败或结果非有限
    """
    count = coalitions.shape[1]
    weighted = coalitions.T * weights
    a = weighted @ coalitions
    b = weighted @ (values - base_value)

    ridge_active = False
    condition = np.linalg.cond(a)
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        ridge_active = True
        logger.warning(f"回归系统病态（条件数 {condition:.3g}），启用岭项 {RIDGE}")
        a = a + RIDGE * np.eye(count)

    ones = np.ones(count)
    try:
        solved = np.linalg.solve(a, np.column_stack([b, ones]))
    except np.linalg.LinAlgError as e:
        raise SingularRegression(str(e)) from e
    a_inv_b, a_inv_1 = solved[:, 0], solved[:, 1]

    denominator = ones @ a_inv_1
    if not np.isfinite(denominator) or denominator == 0:
        raise SingularRegression(f"约束分母为 {denominator}")
    numerator = ones @ a_inv_b - (full_value - base_value)
    scores = a_inv_b - a_inv_1 * (numerator / denominator)
    if not np.isfinite(scores).all():
        raise SingularRegression("得分包含非有限值")
    return scores, ridge_active


def sampled_shapley(
    v: ValueFunction,
    sample_size: int,
    seed: int = 0,
    workers: int | None = None,
) -> ShapleyEstimate:
    """
    核回归 Shapley 估计

    采样数不小于 2^M − 2 时改为枚举全部非平凡联盟并使用精确核权重，结果即精确值；
    否则分块采样，第 c 块使用子流 (seed, c)，块可在线程池中并行求值

    Args:
        v: 价值函数
        sample_size: 联盟采样数（≥ 特征数）
        seed: 采样种子
        workers: 线程数，默认 settings.MAX_WORKERS

    Raises:
        SampleSizeTooSmall: 采样数小于特征数
        SingularRegression: 回归系统无法求解
    """
    count = v.feature_count
    if sample_size < count:
        raise SampleSizeTooSmall(sample_size, count)

    base_value, full_value = v.empty_value(), v.full_value()
    if count <= 1:
        return ShapleyEstimate(
            scores=np.full(count, full_value - base_value),
            base_value=base_value,
            full_value=full_value,
            sample_size=sample_size,
        )

    if count < 63 and sample_size >= 2**count - 2:
        coalitions = _all_coalitions(count)[1:-1]
        sizes = coalitions.sum(axis=1)
        weights = np.array([kernel_weight(count, int(s)) for s in sizes])
        values = v(coalitions)
        logger.info(f"采样数覆盖全部 {len(coalitions)} 个非平凡联盟，改为完整枚举")
    else:
        chunks = [
            (c, min(SAMPLE_CHUNK_SIZE, sample_size - start))
            for c, start in enumerate(range(0, sample_size, SAMPLE_CHUNK_SIZE))
        ]

        def evaluate(chunk: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
            index, size = chunk
            masks = sample_coalitions(count, size, substream(seed, index))
            return masks, v(masks)

        workers = min(workers or settings.MAX_WORKERS, len(chunks))
        if workers == 1:
            results = [evaluate(chunk) for chunk in chunks]
        else:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                results = list(executor.map(evaluate, chunks))
        coalitions = np.concatenate([masks for masks, _ in results])
        values = np.concatenate([vals for _, vals in results])
        weights = np.full(len(coalitions), 1.0 / len(coalitions))

    scores, ridge_active = solve_constrained(
        coalitions.astype(np.float64), weights, values, base_value, full_value
    )
    return ShapleyEstimate(
        scores=scores,
        base_value=base_value,
        full_value=full_value,
        sample_size=sample_size,
        ridge_active=ridge_active,
    )


# ========== 相关性审计 ==========

def default_delta(scores: np.ndarray) -> float:
    """最大绝对得分的 DEFAULT_DELTA_FRACTION 倍；全零得分时取该比例本身"""
    peak = float(np.max(np.abs(scores), initial=0.0))
    fraction = settings.DEFAULT_DELTA_FRACTION
    return fraction * peak if peak > 0 else fraction


def relevance_audit(
    scores: np.ndarray,
    delta: float | None,
    arch: NetworkArchitecture,
    features: list[int] | None = None,
) -> AttributionReport:
    """
    得分严格大于 δ 或严格小于 −δ 的特征为相关特征，
    其中与隐藏层没有任何非零连接的特征计为错误相关

    Args:
        scores: 与 features 对应的得分
        delta: 阈值（None 取默认比例）
        arch: 网络结构
        features: 特征索引（默认全部输入）

    Raises:
        InvalidDelta: δ ≤ 0
    """
    scores = np.asarray(scores, dtype=np.float64)
    features = list(range(arch.input_count)) if features is None else list(features)
    delta = default_delta(scores) if delta is None else float(delta)
    if delta <= 0:
        raise InvalidDelta(delta)

    connected = arch.connected_inputs
    relevant = [f for f, score in zip(features, scores) if score > delta or score < -delta]
    wrongly = [f for f in relevant if not connected[f]]
    pct = 100.0 * len(wrongly) / len(relevant) if relevant else 0.0
    return AttributionReport(
        scores=scores.tolist(),
        features=features,
        delta=delta,
        relevant=relevant,
        zero_connection_relevant=wrongly,
        wrongly_relevant_pct=pct,
    )


def attribute(
    arch: NetworkArchitecture,
    image: Image,
    encoding: Encoding,
    t_end: int,
    sample_size: int | None,
    seed: int = 0,
    delta: float | None = None,
    image_index: int | None = None,
    theta: float = DEFAULT_THETA,
    workers: int | None = None,
) -> AttributionReport:
    """
    完整流程：价值函数 → Shapley 估计 → 相关性审计

    Args:
        sample_size: 采样数；None 表示精确枚举（特征数 ≤ 12）
    """
    start_time = time.perf_counter()
    index = image_index or 0
    v = ValueFunction(arch, image, encoding, t_end, seed=seed, instance_index=index, theta=theta)
    if sample_size is None:
        estimate = exact_shapley(v)
    else:
        estimate = sampled_shapley(v, sample_size, seed, workers)

    report = relevance_audit(estimate.scores, delta, arch, v.features)
    elapsed = (time.perf_counter() - start_time) * 1000
    logger.info(
        f"Shapley 审计 图像={image_index} 类别={v.target_class} 采样数={sample_size}: "
        f"相关 {len(report.relevant)} 个, 其中无连接 {len(report.zero_connection_relevant)} 个 "
        f"({report.wrongly_relevant_pct:.2f}%), 耗时={elapsed:.1f}ms"
    )
    return report.model_copy(
        update={
            "sample_size": estimate.sample_size,
            "wall_time_ms": round(elapsed, 3),
            "ridge_active": estimate.ridge_active,
            "base_value": estimate.base_value,
            "full_value": estimate.full_value,
            "target_class": v.target_class,
            "image_index": image_index,
        }
    )


def render_relevance(report: AttributionReport, arch: NetworkArchitecture) -> bytes:
    """P6 图像：绿 = 有连接，紫 = 相关特征"""
    canvas = connection_canvas(arch)
    for index in report.relevant:
        x, y = arch.feature_xy(index)
        canvas[y, x] = COLOR_RELEVANT
    return encode_ppm(canvas)
