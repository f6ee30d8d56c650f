"""
训练模块 - Pydantic 模型（Schema）
"""
from pydantic import Field, PositiveFloat, PositiveInt, field_validator, model_validator

from src.common.constants import Encoding, WeightScale
from src.common.schemas import CustomModel, FloatArray, IntArray
from src.snn.constants import DEFAULT_THETA
from src.trainer.constants import L1_DECAY, MAX_TRAIN_SAMPLES, VALIDATION_FRACTION


class TrainConfig(CustomModel):
    """
    训练配置

    阈值编码只有一个时间步，要求 t_end = 1
    """
    digits: list[int] = Field(..., min_length=1, description="参与训练的数字，类别索引按升序排列")
    hidden_count: PositiveInt = Field(..., description="隐藏神经元数 k")
    weight_scale: WeightScale = WeightScale.BINARY
    encoding: Encoding = Encoding.THRESHOLDED
    t_end: PositiveInt = 1
    theta: float = DEFAULT_THETA
    epochs: PositiveInt = 10
    learning_rate: PositiveFloat = 0.1
    batch_size: PositiveInt = 64
    seed: int = 0
    hidden_threshold: PositiveInt | None = Field(None, description="统一的隐藏层阈值，为空时按训练数据逐神经元校准")
    output_threshold: PositiveInt | None = Field(None, description="统一的输出层阈值，为空时按训练数据逐神经元校准")
    l1_decay: float = Field(L1_DECAY, ge=0.0, description="近端 L1 收缩系数")
    max_train_samples: PositiveInt = MAX_TRAIN_SAMPLES
    validation_fraction: float = Field(VALIDATION_FRACTION, ge=0.0, lt=1.0)

    @field_validator("digits")
    @classmethod
    def check_digits(cls, digits: list[int]) -> list[int]:
        if any(d < 0 or d > 9 for d in digits):
            raise ValueError("数字必须位于 0..9")
        if len(set(digits)) != len(digits):
            raise ValueError("数字不能重复")
        return sorted(digits)

    @model_validator(mode="after")
    def check_encoding(self) -> "TrainConfig":
        if self.encoding is Encoding.THRESHOLDED and self.t_end != 1:
            raise ValueError(f"阈值编码要求 t_end = 1，实际 {self.t_end}")
        return self


class ProxyWeights(CustomModel):
    """训练时保留的全精度代理权重，以及训练前校准后固定的阈值"""
    hidden: FloatArray = Field(..., description="hidden_count × input_count")
    output: FloatArray = Field(..., description="output_count × hidden_count")
    hidden_thresholds: IntArray = Field(..., description="每个隐藏神经元的阈值")
    output_thresholds: IntArray = Field(..., description="每个输出神经元的阈值")


class EpochMetrics(CustomModel):
    epoch: int
    loss: float
    val_accuracy: float | None = None


class TrainMetrics(CustomModel):
    """训练指标旁路文件"""
    val_accuracy: float | None = None
    test_accuracy: float | None = None
    initial_loss: float | None = Field(None, description="校准后、第一步更新前的损失")
    epochs: int
    seed: int
    train_samples: int
    history: list[EpochMetrics] = Field(default_factory=list)
    config: TrainConfig | None = None
