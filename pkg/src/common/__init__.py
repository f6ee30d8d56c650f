"""
通用模块
提供全局配置、异常、错误处理、命令日志与运行清单等通用功能
"""

# 配置管理
from src.common.config import Settings, get_settings, settings

# 常量定义
from src.common.constants import Backend, Encoding, Environment, ExitCode, WeightScale

# 异常定义
from src.common.exceptions import (
    AppException,
    CertificateException,
    ConfigException,
    DataException,
    NotFoundException,
    SolverException,
)

# 全局 Schema
from src.common.schemas import BitArray, CustomModel, ErrorResponse, FloatArray, IntArray

__all__ = [
    # 配置
    "Settings",
    "get_settings",
    "settings",
    # 常量
    "Environment",
    "ExitCode",
    "WeightScale",
    "Encoding",
    "Backend",
    # 异常
    "AppException",
    "ConfigException",
    "DataException",
    "NotFoundException",
    "SolverException",
    "CertificateException",
    # Schema
    "CustomModel",
    "ErrorResponse",
    "IntArray",
    "BitArray",
    "FloatArray",
]
