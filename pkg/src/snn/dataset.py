"""
SNN 模块 - MNIST IDX 数据读写
支持原始文件与 .gz 压缩文件
"""
import gzip
import struct
from pathlib import Path
from typing import BinaryIO

import numpy as np

from src.common.exceptions import NotFoundException
from src.snn.constants import IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC, MNIST_FILES
from src.snn.exceptions import IdxFormatError
from src.snn.schemas import DigitDataset
from src.utils.logger import get_logger

logger = get_logger("snn.dataset")


def _open(path: Path) -> BinaryIO:
    if path.suffix == ".gz":
        return gzip.open(path, "rb")
    return path.open("rb")


def _resolve(path: str | Path) -> Path:
    """允许省略 .gz 后缀"""
    path = Path(path)
    if path.exists():
        return path
    gz = path.with_name(path.name + ".gz")
    if gz.exists():
        return gz
    raise NotFoundException(f"数据文件不存在: {path}")


def _read_header(f: BinaryIO, path: Path, magic: int, dims: int) -> tuple[int, ...]:
    header = f.read(4 * (dims + 1))
    if len(header) != 4 * (dims + 1):
        raise IdxFormatError(str(path), "文件头不完整")
    found, *shape = struct.unpack(f">{dims + 1}I", header)
    if found != magic:
        raise IdxFormatError(str(path), f"魔数 0x{found:08x}，期望 0x{magic:08x}")
    return tuple(shape)


def read_idx_images(path: str | Path) -> np.ndarray:
    """
    读取 IDX 图像文件

    Returns:
        np.ndarray: (数量, 行, 列) uint8
    """
    path = _resolve(path)
    with _open(path) as f:
        count, rows, cols = _read_header(f, path, IDX_IMAGES_MAGIC, 3)
        data = np.frombuffer(f.read(), dtype=np.uint8)
    if data.size != count * rows * cols:
        raise IdxFormatError(str(path), f"像素数 {data.size} 与文件头 {count}×{rows}×{cols} 不符")
    return data.reshape(count, rows, cols)


def read_idx_labels(path: str | Path) -> np.ndarray:
    """读取 IDX 标签文件"""
    path = _resolve(path)
    with _open(path) as f:
        (count,) = _read_header(f, path, IDX_LABELS_MAGIC, 1)
        data = np.frombuffer(f.read(), dtype=np.uint8)
    if data.size != count:
        raise IdxFormatError(str(path), f"标签数 {data.size} 与文件头 {count} 不符")
    return data.copy()


def write_idx(path: str | Path, array: np.ndarray) -> Path:
    """
    写出 IDX 文件（3 维为图像，1 维为标签），后缀 .gz 时压缩
    """
    path = Path(path)
    array = np.ascontiguousarray(array, dtype=np.uint8)
    if array.ndim == 3:
        header = struct.pack(">4I", IDX_IMAGES_MAGIC, *array.shape)
    elif array.ndim == 1:
        header = struct.pack(">2I", IDX_LABELS_MAGIC, array.shape[0])
    else:
        raise IdxFormatError(str(path), f"不支持 {array.ndim} 维数组")
    path.parent.mkdir(parents=True, exist_ok=True)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as f:
        f.write(header)
        f.write(array.tobytes())
    return path


def load_mnist(directory: str | Path, split: str = "test") -> DigitDataset:
    """
    加载 MNIST 的 train 或 test 划分，强度缩放到 [0, 1]

    Raises:
        NotFoundException: 文件缺失
        IdxFormatError: 格式错误或图像与标签数量不一致
    """
    if split not in MNIST_FILES:
        raise NotFoundException(f"未知的数据划分: {split}")
    image_file, label_file = MNIST_FILES[split]
    directory = Path(directory)
    images = read_idx_images(directory / image_file)
    labels = read_idx_labels(directory / label_file)
    if images.shape[0] != labels.shape[0]:
        raise IdxFormatError(str(directory), "图像与标签数量不一致")

    count, rows, cols = images.shape
    logger.info(f"已加载 MNIST {split}: {count} 张 {rows}×{cols} 图像")
    return DigitDataset(
        images=images.reshape(count, rows * cols).astype(np.float64) / 255.0,
        labels=labels.astype(np.int64),
        width=cols,
        height=rows,
    )


def select_digits(dataset: DigitDataset, digits: list[int]) -> DigitDataset:
    """
    筛选数字子集，标签替换为类别索引（数字在排序后列表中的位置）
    """
    ordered = sorted(set(digits))
    mask = np.isin(dataset.labels, ordered)
    lookup = np.full(max(10, max(ordered) + 1), -1, dtype=np.int64)
    lookup[ordered] = np.arange(len(ordered))
    return DigitDataset(
        images=dataset.images[mask],
        labels=lookup[dataset.labels[mask]],
        width=dataset.width,
        height=dataset.height,
    )
