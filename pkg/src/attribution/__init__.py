# 归因审计模块
# Shapley 归因与无连接特征审计
