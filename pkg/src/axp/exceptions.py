"""
溯因解释 - 异常定义
"""
from src.common.exceptions import CertificateException, DataException, SolverException


class TimeOutOfRange(DataException):
    """解释时刻超出 0..t_end"""

    def __init__(self, t: int, t_end: int):
        super().__init__(detail=f"时刻 {t} 不在 0..{t_end} 范围内")


class DuplicateVariable(DataException):
    """项中同一变量出现多次"""

    def __init__(self, variable: object):
        super().__init__(detail=f"项中变量 {variable} 重复出现")


class CertificateFailure(CertificateException):
    """解释未通过证书检查"""

    def __init__(self, detail: str, outputs: list | None = None):
        super().__init__(detail=detail, outputs=outputs)


class InitialTermNotEntailed(SolverException):
    """完整输入项不蕴含实际输出，说明编码与仿真不一致"""

    def __init__(self, t: int):
        super().__init__(detail=f"时刻 {t} 的完整输入项不蕴含实际输出")
