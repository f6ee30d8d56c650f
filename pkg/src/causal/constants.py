"""
因果模型 - 常量定义
"""

# 子集析取展开允许的最大扇入（2^16 个子集）
SUBSET_FORM_MAX_FANIN = 16
