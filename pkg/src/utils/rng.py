"""
可复现随机数工具
基于计数器的 Philox 生成器，按 (seed, 实例索引, ...) 派生独立子流
"""
import numpy as np


def substream(seed: int, *indices: int) -> np.random.Generator:
    """
    派生独立随机子流

    Args:
        seed: 主种子
        indices: 实例索引、工作线程索引等

    Returns:
        np.random.Generator: 与平台无关、可复现的生成器
    """
    sequence = np.random.SeedSequence([int(seed), *(int(i) for i in indices)])
    return np.random.Generator(np.random.Philox(sequence))
