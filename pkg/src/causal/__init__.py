# 因果模型模块
# 由仿真轨迹构造二值因果模型
