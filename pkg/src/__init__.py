# BSNN 因果解释工具包
# 二值脉冲神经网络的训练、因果建模、溯因解释与归因审计

__version__ = "1.0.0"
