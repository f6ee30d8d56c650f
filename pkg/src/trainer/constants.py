"""
训练模块 - 常量定义
"""

# arctan 替代梯度的斜率 a
SURROGATE_SLOPE = 2.0

# SGD 动量
MOMENTUM = 0.9

# 未校准时非输入神经元的阈值
DEFAULT_THRESHOLD = 1

# 阈值校准：每个神经元取单步输入电流的该分位数（约一半样本发放）
CALIBRATION_QUANTILE = 0.5

# 阈值校准使用的训练图像数
CALIBRATION_SAMPLES = 256

# 平均发放率乘以该系数后作为交叉熵的 logits
LOGIT_SCALE = 8.0

# 近端 L1 收缩系数（每步收缩 lr·λ）
L1_DECAY = 1e-3

# 代理权重初始化的标准差
INIT_STD = 0.01

# 每个配置最多使用的训练图像数
MAX_TRAIN_SAMPLES = 12000

# 从训练集划出的验证集比例
VALIDATION_FRACTION = 0.1

# 评估时单次批量仿真的图像数
EVAL_BATCH_SIZE = 512
