"""
测试配置和 Fixtures
"""
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from src.common.config import settings
from src.common.constants import WeightScale
from src.snn.constants import MNIST_FILES
from src.snn.dataset import write_idx
from src.snn.schemas import Image, InputSequence, NetworkArchitecture


def make_arch(hidden, output, thresholds, scale=WeightScale.BINARY, input_shape=None, class_labels=None):
    """按权重矩阵构造网络结构"""
    hidden = np.asarray(hidden)
    output = np.asarray(output)
    return NetworkArchitecture(
        weight_scale=scale,
        input_count=hidden.shape[1],
        hidden_count=hidden.shape[0],
        output_count=output.shape[0],
        hidden_weights=hidden,
        output_weights=output,
        thresholds=thresholds,
        input_shape=input_shape,
        class_labels=class_labels,
    )


def random_arch(seed: int) -> NetworkArchitecture:
    """随机微型网络：奇数种子为三值，至多 4 个输入、3 个隐藏、2 个输出，阈值 1..3"""
    rng = np.random.default_rng(seed)
    scale = WeightScale.TERNARY if seed % 2 else WeightScale.BINARY
    low = -1 if scale is WeightScale.TERNARY else 0
    inputs, hidden, outputs = rng.integers(1, 5), rng.integers(1, 4), rng.integers(1, 3)
    return make_arch(
        hidden=rng.integers(low, 2, size=(hidden, inputs)),
        output=rng.integers(low, 2, size=(outputs, hidden)),
        thresholds=rng.integers(1, 4, size=hidden + outputs),
        scale=scale,
    )


def make_sequence(rows):
    """由 1..t_end 的输入行构造序列（自动补上全零的第 0 行）"""
    rows = np.asarray(rows, dtype=np.int8)
    spikes = np.vstack([np.zeros((1, rows.shape[1]), dtype=np.int8), rows])
    return InputSequence(t_end=rows.shape[0], spikes=spikes)


@pytest.fixture
def tiny_arch() -> NetworkArchitecture:
    """
    2×2 图像、2 个隐藏神经元、2 个输出神经元的二值网络

    h0 = [i0 + i1 ≥ 2]，h1 = [i2 ≥ 1]，o0 = [h0 ≥ 1]，o1 = [h1 ≥ 1]；
    输入 i3 与隐藏层没有任何连接
    """
    return make_arch(
        hidden=[[1, 1, 0, 0], [0, 0, 1, 0]],
        output=[[1, 0], [0, 1]],
        thresholds=[2, 1, 1, 1],
        input_shape=(2, 2),
        class_labels=[1, 7],
    )


@pytest.fixture
def ternary_arch() -> NetworkArchitecture:
    """三值网络：h0 = [i0 − i1 ≥ 1]，h1 = [i1 + i2 − i3 ≥ 1]，o0 = [h0 − h1 ≥ 1]，o1 = [h1 ≥ 1]"""
    return make_arch(
        hidden=[[1, -1, 0, 0], [0, 1, 1, -1]],
        output=[[1, -1], [0, 1]],
        thresholds=[1, 1, 1, 1],
        scale=WeightScale.TERNARY,
        input_shape=(2, 2),
    )


@pytest.fixture
def chain_arch() -> NetworkArchitecture:
    """单输入单隐藏单输出，隐藏阈值 2，用于检查电位累积与复位"""
    return make_arch(hidden=[[1]], output=[[1]], thresholds=[2, 1])


@pytest.fixture
def tiny_image() -> Image:
    """阈值编码后 i0、i1、i3 发放，i2 静默"""
    return Image.from_array(np.array([[1.0, 0.9], [0.1, 0.8]]))


@pytest.fixture
def tiny_mnist(tmp_path: Path) -> Path:
    """
    写出 2×2 的迷你 IDX 数据集（train 与 test 各 6 张）

    图像 k 的像素取自下表，标签依次为 1, 7, 1, 7, 1, 9
    """
    pixels = np.array(
        [
            [[255, 230], [0, 200]],
            [[0, 0], [255, 0]],
            [[255, 255], [0, 0]],
            [[0, 30], [240, 255]],
            [[200, 255], [10, 0]],
            [[128, 128], [128, 128]],
        ],
        dtype=np.uint8,
    )
    labels = np.array([1, 7, 1, 7, 1, 9], dtype=np.uint8)
    directory = tmp_path / "mnist"
    for split, (image_file, label_file) in MNIST_FILES.items():
        write_idx(directory / f"{image_file}.gz", pixels)
        write_idx(directory / label_file, labels)
    return directory


@pytest.fixture
def network_file(tmp_path: Path, tiny_arch: NetworkArchitecture) -> Path:
    return tiny_arch.write_json(tmp_path / "network.json")


@pytest.fixture
def runner() -> CliRunner:
    """
    命令行测试客户端

    使用示例:
        def test_simulate(runner):
            result = runner.invoke(cli, ["simulate", ...])
            assert result.exit_code == 0
    """
    return CliRunner()


@pytest.fixture(scope="session")
def mnist_available() -> Path:
    """真实 MNIST 文件所在目录，缺失时跳过"""
    directory = settings.MNIST_DIR
    test_images = directory / MNIST_FILES["test"][0]
    if not (test_images.exists() or test_images.with_name(test_images.name + ".gz").exists()):
        pytest.skip(f"MNIST IDX 文件不在 {directory}")
    return directory
