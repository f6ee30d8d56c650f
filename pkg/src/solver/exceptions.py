"""
求解器编码 - 异常定义
外部求解器的失败以独立异常上抛，绝不当作判定结果
"""
from src.common.exceptions import DataException, SolverException


class SolverTimeout(SolverException):
    """外部求解器超时"""

    def __init__(self, command: str, timeout: float):
        super().__init__(detail=f"求解器 {command!r} 超过 {timeout:g}s 未返回")


class SolverCrash(SolverException):
    """外部求解器无法启动或异常退出"""

    def __init__(self, command: str, detail: str):
        super().__init__(detail=f"求解器 {command!r} 运行失败: {detail}")


class SolverOutputError(SolverException):
    """无法解析求解器输出"""

    def __init__(self, command: str, output: str):
        first = output.strip().splitlines()[0] if output.strip() else "<空>"
        super().__init__(detail=f"求解器 {command!r} 输出无法解析: {first[:200]}")


class DimacsFormatError(DataException):
    """DIMACS 文本格式错误"""

    def __init__(self, line_no: int, detail: str):
        super().__init__(detail=f"DIMACS 第 {line_no} 行: {detail}")
