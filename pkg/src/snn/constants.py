"""
SNN 模块 - 常量定义
"""
from enum import Enum


class Layer(str, Enum):
    """神经元所在层"""
    INPUT = "i"
    HIDDEN = "h"
    OUTPUT = "o"


# 阈值二值化编码的默认阈值（严格大于才发放）
DEFAULT_THETA = 0.5

# MNIST 标准文件名（可带 .gz 后缀）
MNIST_FILES = {
    "train": ("train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    "test": ("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"),
}

# IDX 魔数
IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801
