# 训练 测试
