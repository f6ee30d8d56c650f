# 求解器编码模块
# CNF / SMT-LIB2 编码与蕴含检查会话
