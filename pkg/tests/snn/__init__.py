# SNN 测试
