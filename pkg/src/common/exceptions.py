"""
全局异常定义
每个异常携带命令行退出码，由 error_handlers 统一转换
"""
from src.common.constants import ExitCode


class AppException(Exception):
    """应用基础异常"""

    def __init__(
        self,
        exit_code: int = ExitCode.UNEXPECTED,
        detail: str = "内部错误",
    ):
        super().__init__(detail)
        self.exit_code = int(exit_code)
        self.detail = detail


class ConfigException(AppException):
    """配置或参数组合错误"""

    def __init__(self, detail: str = "配置错误"):
        super().__init__(exit_code=ExitCode.CONFIG_ERROR, detail=detail)


class DataException(AppException):
    """输入数据错误（维度不符、格式错误等）"""

    def __init__(self, detail: str = "数据错误"):
        super().__init__(exit_code=ExitCode.DATA_ERROR, detail=detail)


class NotFoundException(DataException):
    """资源不存在异常"""

    def __init__(self, detail: str = "资源不存在"):
        super().__init__(detail=detail)


class SolverException(AppException):
    """求解器失败（超时、崩溃、输出无法解析）"""

    def __init__(self, detail: str = "求解器失败"):
        super().__init__(exit_code=ExitCode.SOLVER_FAILURE, detail=detail)


class CertificateException(AppException):
    """解释证书或兼容性检查未通过（产物已写出，outputs 记录其路径）"""

    def __init__(self, detail: str = "证书检查失败", outputs: list | None = None):
        super().__init__(exit_code=ExitCode.CERTIFICATE_FAILURE, detail=detail)
        self.outputs = list(outputs or [])
