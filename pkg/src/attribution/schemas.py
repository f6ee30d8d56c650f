"""
归因审计 - 类型定义
"""
from typing import NamedTuple

import numpy as np
from pydantic import Field

from src.common.schemas import CustomModel


class ShapleyEstimate(NamedTuple):
    """一次 Shapley 估计的结果"""
    scores: np.ndarray
    base_value: float
    full_value: float
    sample_size: int | None = None  # None 表示精确枚举
    ridge_active: bool = False


class AttributionReport(CustomModel):
    """
    归因审计报告

    relevant 为 |得分| 严格大于 δ 的特征；
    zero_connection_relevant 为其中与隐藏层没有任何非零连接的特征
    """
    scores: list[float]
    features: list[int] = Field(..., description="与 scores 一一对应的输入特征索引")
    delta: float
    sample_size: int | None = None
    relevant: list[int] = Field(default_factory=list)
    zero_connection_relevant: list[int] = Field(default_factory=list)
    wrongly_relevant_pct: float = 0.0
    wall_time_ms: float = 0.0
    ridge_active: bool = False
    base_value: float = 0.0
    full_value: float = 0.0
    target_class: int | None = None
    image_index: int | None = None
