# 溯因解释 测试
