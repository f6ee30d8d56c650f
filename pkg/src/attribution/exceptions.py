"""
归因审计 - 异常定义
"""
from src.common.exceptions import ConfigException, DataException


class TooManyFeatures(ConfigException):
    """精确 Shapley 值的特征数超出枚举上限"""

    def __init__(self, count: int, limit: int):
        super().__init__(detail=f"精确 Shapley 值最多支持 {limit} 个特征，实际 {count}")


class SampleSizeTooSmall(ConfigException):
    """采样数小于特征数"""

    def __init__(self, sample_size: int, feature_count: int):
        super().__init__(detail=f"采样数 {sample_size} 小于特征数 {feature_count}")


class InvalidDelta(ConfigException):
    def __init__(self, delta: float):
        super().__init__(detail=f"阈值 δ 必须大于 0，实际 {delta}")


class SingularRegression(DataException):
    """加权最小二乘系统奇异，无法求解"""

    def __init__(self, detail: str):
        super().__init__(detail=f"Shapley 回归系统奇异: {detail}")
