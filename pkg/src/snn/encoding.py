"""
SNN 模块 - 脉冲编码
图像 → 输入脉冲序列：Poisson 速率编码与单步阈值二值化编码
"""
import numpy as np

from src.common.constants import Encoding
from src.snn.constants import DEFAULT_THETA
from src.snn.exceptions import EncodingError, InvalidEncodingConfig
from src.snn.schemas import Image, InputSequence
from src.utils.rng import substream


def _check_intensities(img: Image) -> np.ndarray:
    values = img.intensities
    if not np.isfinite(values).all() or values.min(initial=0.0) < 0.0 or values.max(initial=0.0) > 1.0:
        raise EncodingError("像素强度必须位于 [0, 1] 区间")
    return values


def poisson_spikes(
    intensities: np.ndarray,
    t_end: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """
    Poisson 速率编码的脉冲矩阵

    Returns:
        np.ndarray: (t_end + 1, 像素数)，第 0 行为 0
    """
    spikes = np.zeros((t_end + 1, intensities.shape[0]), dtype=np.int8)
    spikes[1:] = rng.random((t_end, intensities.shape[0])) < intensities
    return spikes


def poisson_encode(img: Image, t_end: int, seed: int, instance_index: int = 0) -> InputSequence:
    """
    Poisson 速率编码：每个像素在每个时刻以其强度为概率独立发放

    Args:
        img: 输入图像
        t_end: 时间步数（≥ 1）
        seed: 主种子
        instance_index: 实例索引，用于派生独立子流

    Raises:
        EncodingError: t_end < 1 或强度越界
    """
    if t_end < 1:
        raise EncodingError(f"Poisson 编码要求 t_end ≥ 1，实际 {t_end}")
    values = _check_intensities(img)
    spikes = poisson_spikes(values, t_end, substream(seed, instance_index))
    return InputSequence(t_end=t_end, spikes=spikes)


def threshold_encode(img: Image, theta: float = DEFAULT_THETA) -> InputSequence:
    """
    阈值二值化编码：t = 1 时强度严格大于 θ 的像素发放

    Raises:
        EncodingError: θ 不在 (0, 1) 内
    """
    if not 0.0 < theta < 1.0:
        raise EncodingError(f"阈值 θ 必须位于 (0, 1)，实际 {theta}")
    values = _check_intensities(img)
    spikes = np.zeros((2, values.shape[0]), dtype=np.int8)
    spikes[1] = values > theta
    return InputSequence(t_end=1, spikes=spikes)


def encode(
    img: Image,
    encoding: Encoding,
    t_end: int,
    seed: int = 0,
    instance_index: int = 0,
    theta: float = DEFAULT_THETA,
) -> InputSequence:
    """
    按编码方式分派

    Raises:
        InvalidEncodingConfig: 阈值编码配合 t_end ≠ 1
    """
    if encoding is Encoding.THRESHOLDED:
        if t_end != 1:
            raise InvalidEncodingConfig(f"阈值编码只有一个时间步，t_end 必须为 1，实际 {t_end}")
        return threshold_encode(img, theta)
    return poisson_encode(img, t_end, seed, instance_index)


def encode_batch(
    intensities: np.ndarray,
    encoding: Encoding,
    t_end: int,
    seed: int = 0,
    first_index: int = 0,
    theta: float = DEFAULT_THETA,
) -> np.ndarray:
    """
    批量编码，第 b 个实例使用子流 (seed, first_index + b)，与逐个调用 encode 结果一致

    Args:
        intensities: (批量, 像素数)

    Returns:
        np.ndarray: (批量, t_end + 1, 像素数)
    """
    intensities = np.asarray(intensities, dtype=np.float64)
    if encoding is Encoding.THRESHOLDED:
        if t_end != 1:
            raise InvalidEncodingConfig(f"阈值编码只有一个时间步，t_end 必须为 1，实际 {t_end}")
        spikes = np.zeros((intensities.shape[0], 2, intensities.shape[1]), dtype=np.int8)
        spikes[:, 1] = intensities > theta
        return spikes
    return np.stack(
        [
            poisson_spikes(row, t_end, substream(seed, first_index + b))
            for b, row in enumerate(intensities)
        ]
    )
