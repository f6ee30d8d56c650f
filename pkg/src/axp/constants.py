"""
溯因解释 - 常量定义
"""
from enum import Enum


class LiteralOrder(str, Enum):
    """删除循环中处理文字的顺序"""
    SHUFFLE = "shuffle"  # 按 order_seed 打乱，可复现
    RASTER = "raster"  # 按像素行优先扫描


# 文字数不超过该值时，极小性再做全子集枚举
BRUTE_FORCE_MAX_LITERALS = 12

# 渲染颜色（RGB）
COLOR_BACKGROUND = (0, 0, 0)
COLOR_CONNECTED = (0, 160, 0)
COLOR_POSITIVE = (230, 0, 0)
COLOR_NEGATIVE = (240, 220, 0)
