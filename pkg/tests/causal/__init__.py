# 因果模型 测试
