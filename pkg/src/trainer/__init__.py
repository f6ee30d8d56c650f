# 训练模块
# 替代梯度训练量化 BSNN
