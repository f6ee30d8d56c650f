# 工具模块：日志、求解器日志、随机子流、Netpbm 编码
