"""
归因审计 - 常量定义
"""

# 法方程的岭项，仅在系统病态时启用并在报告中标记
RIDGE = 1e-10

# 条件数超过该值视为病态
CONDITION_LIMIT = 1e12

# 精确 Shapley 值最多枚举 2^12 个联盟
EXACT_MAX_FEATURES = 12

# 每个采样块的联盟数（每块一个独立随机子流）
SAMPLE_CHUNK_SIZE = 1024

# 价值函数单次批量仿真的联盟数
VALUE_BATCH_SIZE = 256

# 相关特征（紫色）
COLOR_RELEVANT = (160, 32, 240)
