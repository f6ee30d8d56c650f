"""
SNN 模块 - 依赖项
命令之间复用的加载与参数解析函数
"""
from functools import lru_cache
from pathlib import Path

from pydantic import ValidationError

from src.common.config import settings
from src.common.exceptions import ConfigException, DataException, NotFoundException
from src.snn.dataset import load_mnist
from src.snn.schemas import DigitDataset, Image, NetworkArchitecture


def load_architecture(path: str | Path) -> NetworkArchitecture:
    """
    读取网络文件

    Raises:
        NotFoundException: 文件不存在
        DataException: 内容不符合网络结构约束
    """
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"网络文件不存在: {path}")
    try:
        return NetworkArchitecture.read_json(path)
    except ValidationError as e:
        first = e.errors()[0]
        raise DataException(f"网络文件 {path} 无效: {first.get('msg', '格式错误')}") from e


@lru_cache
def cached_dataset(directory: Path, split: str) -> DigitDataset:
    """同一进程内只解析一次 IDX 文件"""
    return load_mnist(directory, split)


def load_instance(index: int, split: str = "test", directory: Path | None = None) -> tuple[Image, int]:
    """
    按位置取出一张图像及其原始数字标签

    Raises:
        NotFoundException: 索引越界
    """
    dataset = cached_dataset(Path(directory or settings.MNIST_DIR), split)
    if not 0 <= index < dataset.size:
        raise NotFoundException(f"图像索引 {index} 超出范围 [0, {dataset.size})")
    return dataset.image(index), int(dataset.labels[index])


def parse_indices(text: str) -> list[int]:
    """
    解析图像索引：单个 "7"、闭区间 "0..19" 或列表 "1,4,9"

    Raises:
        ConfigException: 格式错误
    """
    text = text.strip()
    try:
        if ".." in text:
            start, stop = (int(part) for part in text.split("..", 1))
            if stop < start:
                raise ConfigException(f"索引区间为空: {text}")
            return list(range(start, stop + 1))
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigException(f"无法解析索引: {text}") from e
