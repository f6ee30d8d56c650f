# SNN 模块
# 网络结构、编码、仿真与 MNIST 读取
