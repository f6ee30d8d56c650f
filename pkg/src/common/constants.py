"""
全局常量定义
"""
from enum import Enum, IntEnum


class Environment(str, Enum):
    """环境类型枚举"""
    DEVELOPMENT = "development"
    STAGING = "staging"
    PRODUCTION = "production"


class ExitCode(IntEnum):
    """命令行退出码"""
    OK = 0
    UNEXPECTED = 1
    CONFIG_ERROR = 2
    DATA_ERROR = 3
    SOLVER_FAILURE = 4
    CERTIFICATE_FAILURE = 5


class WeightScale(str, Enum):
    """权重量化刻度"""
    BINARY = "binary"  # {0, 1}
    TERNARY = "ternary"  # {-1, 0, 1}

    @property
    def values(self) -> frozenset[int]:
        if self is WeightScale.BINARY:
            return frozenset({0, 1})
        return frozenset({-1, 0, 1})


class Encoding(str, Enum):
    """脉冲编码方式"""
    POISSON = "poisson"
    THRESHOLDED = "thresholded"


class Backend(str, Enum):
    """蕴含检查后端"""
    CNF_SAT = "cnf"
    SMT_LIA = "smt"


# 与 MNIST 一致的默认图像尺寸
DEFAULT_IMAGE_SIDE = 28
