"""
SNN 模块 - 异常定义
"""
from src.common.exceptions import ConfigException, DataException


class DimensionMismatch(DataException):
    """输入或轨迹维度与网络结构不一致"""

    def __init__(self, what: str, expected: object, actual: object):
        super().__init__(detail=f"{what} 维度不一致: 期望 {expected}，实际 {actual}")


class QuantizationError(DataException):
    """量化输入非有限值"""

    def __init__(self, value: float):
        super().__init__(detail=f"无法量化非有限权重 {value!r}")


class EncodingError(DataException):
    """像素强度或编码参数非法"""

    def __init__(self, detail: str):
        super().__init__(detail=detail)


class InvalidEncodingConfig(ConfigException):
    """编码方式与时间步数组合非法"""

    def __init__(self, detail: str):
        super().__init__(detail=detail)


class IdxFormatError(DataException):
    """IDX 文件格式错误"""

    def __init__(self, path: str, detail: str):
        super().__init__(detail=f"IDX 文件 {path} 格式错误: {detail}")
