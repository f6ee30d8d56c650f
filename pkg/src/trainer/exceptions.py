"""
训练模块 - 异常定义
"""
from src.common.constants import ExitCode
from src.common.exceptions import AppException, DataException


class TrainingDiverged(AppException):
    """损失出现非有限值"""

    def __init__(self, epoch: int, step: int, loss: float):
        super().__init__(
            exit_code=ExitCode.UNEXPECTED,
            detail=f"训练发散: 第 {epoch} 轮第 {step} 步损失为 {loss}",
        )


class EmptyDataset(DataException):
    def __init__(self, what: str):
        super().__init__(detail=f"{what} 为空")


class LabelOutOfRange(DataException):
    """标签不是网络的类别索引"""

    def __init__(self, label: int, classes: int):
        super().__init__(detail=f"标签 {label} 超出类别范围 [0, {classes})")
