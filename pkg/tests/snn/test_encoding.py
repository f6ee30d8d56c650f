"""
脉冲编码测试
"""
import numpy as np
import pytest

from src.common.constants import Encoding
from src.snn.encoding import encode, poisson_encode, threshold_encode
from src.snn.exceptions import EncodingError, InvalidEncodingConfig
from src.snn.schemas import Image


def test_threshold_encode_is_strict(tiny_image):
    """测试阈值编码严格大于 θ 才发放"""
    sequence = threshold_encode(tiny_image, theta=0.5)
    assert sequence.t_end == 1
    assert sequence.spikes.tolist() == [[0, 0, 0, 0], [1, 1, 0, 1]]

    exact = threshold_encode(Image.from_array(np.array([[0.5, 0.51]])), theta=0.5)
    assert exact.spikes[1].tolist() == [0, 1]


@pytest.mark.parametrize("theta", [0.0, 1.0, -0.1])
def test_threshold_encode_rejects_theta(tiny_image, theta):
    """测试 θ 必须位于 (0, 1)"""
    with pytest.raises(EncodingError):
        threshold_encode(tiny_image, theta)


def test_thresholded_requires_single_step(tiny_image):
    """测试阈值编码配合 t_end ≠ 1 被拒绝"""
    with pytest.raises(InvalidEncodingConfig):
        encode(tiny_image, Encoding.THRESHOLDED, t_end=4)


def test_poisson_extremes():
    """测试强度 0 永不发放、强度 1 每步发放"""
    image = Image.from_array(np.array([[0.0, 1.0]]))
    sequence = poisson_encode(image, t_end=20, seed=5)
    assert sequence.spikes[0].tolist() == [0, 0]
    assert not sequence.spikes[:, 0].any()
    assert sequence.spikes[1:, 1].all()


def test_poisson_is_reproducible(tiny_image):
    """测试相同种子与实例索引得到相同序列，不同实例索引得到不同子流"""
    first = poisson_encode(tiny_image, 32, seed=9, instance_index=4)
    second = poisson_encode(tiny_image, 32, seed=9, instance_index=4)
    other = poisson_encode(tiny_image, 32, seed=9, instance_index=5)
    assert np.array_equal(first.spikes, second.spikes)
    assert not np.array_equal(first.spikes, other.spikes)


def test_poisson_rate_matches_intensity():
    """测试长序列的发放率接近强度"""
    image = Image.from_array(np.full((1, 1), 0.3))
    sequence = poisson_encode(image, 4000, seed=1)
    assert abs(sequence.spikes[1:, 0].mean() - 0.3) < 0.03


def test_poisson_rejects_bad_input(tiny_image):
    """测试 t_end < 1 与越界强度被拒绝"""
    with pytest.raises(EncodingError):
        poisson_encode(tiny_image, 0, seed=0)
    with pytest.raises(EncodingError):
        poisson_encode(Image.from_array(np.array([[1.5]])), 3, seed=0)
