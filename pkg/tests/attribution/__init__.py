# 归因审计 测试
