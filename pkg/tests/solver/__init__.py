# 求解器 测试
