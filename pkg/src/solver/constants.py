"""
求解器编码 - 常量定义
"""
from enum import Enum


class Verdict(str, Enum):
    """求解结果"""
    SAT = "sat"
    UNSAT = "unsat"


# SMT-LIB2 逻辑
SMT_LOGIC = "QF_LIA"

# auto 基数编码：扇入不超过该值用顺序计数器，否则用基数网络
SEQCOUNTER_MAX_FANIN = 64

# DIMACS 注释中的变量名 / 常量前缀
DIMACS_VAR_PREFIX = "c var"
DIMACS_KNOWN_PREFIX = "c known"
