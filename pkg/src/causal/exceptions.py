"""
因果模型 - 异常定义
"""
from src.common.exceptions import ConfigException, DataException


class UnboundVariable(DataException):
    """求值时解释缺少变量"""

    def __init__(self, variable: object):
        super().__init__(detail=f"解释中缺少变量 {variable}")
        self.variable = variable


class SubsetFormUnavailable(ConfigException):
    """子集析取展开只支持二值权重与小扇入"""

    def __init__(self, detail: str):
        super().__init__(detail=detail)
