"""
SNN 模块 - Pydantic 模型（Schema）
网络结构、输入脉冲序列、动力学轨迹与图像
"""
from typing import NamedTuple

import numpy as np
from pydantic import Field, PositiveInt, model_validator

from src.common.constants import DEFAULT_IMAGE_SIDE, WeightScale
from src.common.schemas import BitArray, CustomModel, FloatArray, IntArray
from src.snn.constants import Layer


class NeuronId(NamedTuple):
    """神经元标识：层标签 + 层内索引"""
    layer: Layer
    index: int

    def __str__(self) -> str:
        return f"{self.layer.value}{self.index}"


class NetworkArchitecture(CustomModel):
    """
    BSNN 网络结构
    输入层 → 隐藏层 → 输出层，全连接，权重取值于 weight_scale
    """
    weight_scale: WeightScale
    input_count: PositiveInt
    hidden_count: PositiveInt
    output_count: PositiveInt
    hidden_weights: IntArray = Field(..., description="hidden_count × input_count")
    output_weights: IntArray = Field(..., description="output_count × hidden_count")
    thresholds: IntArray = Field(..., description="先隐藏层后输出层的阈值 τ_X")
    input_shape: tuple[PositiveInt, PositiveInt] | None = Field(None, description="(宽, 高)")
    class_labels: list[int] | None = Field(None, description="输出神经元对应的数字")

    @model_validator(mode="after")
    def check_structure(self) -> "NetworkArchitecture":
        """校验矩阵形状、权重刻度与阈值数量"""
        expected = {
            "hidden_weights": (self.hidden_count, self.input_count),
            "output_weights": (self.output_count, self.hidden_count),
            "thresholds": (self.hidden_count + self.output_count,),
        }
        for name, shape in expected.items():
            actual = getattr(self, name).shape
            if actual != shape:
                raise ValueError(f"{name} 形状应为 {shape}，实际 {actual}")

        allowed = np.array(sorted(self.weight_scale.values))
        for name in ("hidden_weights", "output_weights"):
            if not np.isin(getattr(self, name), allowed).all():
                raise ValueError(f"{name} 含有不属于 {self.weight_scale.value} 刻度的权重")

        if self.input_shape is not None and self.input_shape[0] * self.input_shape[1] != self.input_count:
            raise ValueError("input_shape 的宽×高必须等于 input_count")
        if self.class_labels is not None and len(self.class_labels) != self.output_count:
            raise ValueError("class_labels 数量必须等于 output_count")
        return self

    @property
    def hidden_thresholds(self) -> np.ndarray:
        return self.thresholds[: self.hidden_count]

    @property
    def output_thresholds(self) -> np.ndarray:
        return self.thresholds[self.hidden_count :]

    @property
    def image_shape(self) -> tuple[int, int]:
        """(宽, 高)，784 个输入默认 28×28"""
        if self.input_shape is not None:
            return self.input_shape
        if self.input_count == DEFAULT_IMAGE_SIDE * DEFAULT_IMAGE_SIDE:
            return DEFAULT_IMAGE_SIDE, DEFAULT_IMAGE_SIDE
        return self.input_count, 1

    @property
    def connected_inputs(self) -> np.ndarray:
        """每个输入是否与隐藏层存在非零权重连接"""
        return np.any(self.hidden_weights != 0, axis=0)

    def threshold(self, neuron: NeuronId) -> int:
        if neuron.layer is Layer.HIDDEN:
            return int(self.thresholds[neuron.index])
        if neuron.layer is Layer.OUTPUT:
            return int(self.thresholds[self.hidden_count + neuron.index])
        raise ValueError("输入神经元没有阈值")

    def predecessors(self, neuron: NeuronId) -> tuple[list[NeuronId], list[NeuronId]]:
        """
        返回 (R⁺(X), R⁻(X))：权重为 +1 / -1 的前驱

        Args:
            neuron: 非输入神经元
        """
        if neuron.layer is Layer.HIDDEN:
            row, source = self.hidden_weights[neuron.index], Layer.INPUT
        elif neuron.layer is Layer.OUTPUT:
            row, source = self.output_weights[neuron.index], Layer.HIDDEN
        else:
            raise ValueError("输入神经元没有前驱")
        positive = [NeuronId(source, int(j)) for j in np.flatnonzero(row == 1)]
        negative = [NeuronId(source, int(j)) for j in np.flatnonzero(row == -1)]
        return positive, negative

    def neurons(self, layer: Layer) -> list[NeuronId]:
        count = {
            Layer.INPUT: self.input_count,
            Layer.HIDDEN: self.hidden_count,
            Layer.OUTPUT: self.output_count,
        }[layer]
        return [NeuronId(layer, i) for i in range(count)]

    def non_input_neurons(self) -> list[NeuronId]:
        return self.neurons(Layer.HIDDEN) + self.neurons(Layer.OUTPUT)

    def output_neurons(self) -> list[NeuronId]:
        """O：没有后继的非输入神经元"""
        # 连接关系 R 是全连接的（权重 0 也属于 R），隐藏层总有输出层后继
        return self.neurons(Layer.OUTPUT)

    def feature_xy(self, index: int) -> tuple[int, int]:
        """输入索引 → 像素坐标 (x, y)，行优先"""
        width, _ = self.image_shape
        return index % width, index // width


class Image(CustomModel):
    """灰度图像，强度按行优先展平"""
    width: PositiveInt
    height: PositiveInt
    intensities: FloatArray

    @model_validator(mode="after")
    def check_size(self) -> "Image":
        if self.intensities.shape != (self.width * self.height,):
            raise ValueError("intensities 长度必须等于 width × height")
        return self

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "Image":
        """从 (高, 宽) 数组构造"""
        pixels = np.asarray(pixels, dtype=np.float64)
        height, width = pixels.shape
        return cls(width=width, height=height, intensities=pixels.reshape(-1))


class InputSequence(CustomModel):
    """
    输入脉冲序列
    spikes 形状为 (t_end + 1, 输入数)，第 0 行恒为 0
    """
    t_end: int = Field(..., ge=0)
    spikes: BitArray

    @model_validator(mode="after")
    def check_shape(self) -> "InputSequence":
        if self.spikes.ndim != 2 or self.spikes.shape[0] != self.t_end + 1:
            raise ValueError(f"spikes 形状应为 (t_end + 1, 输入数)，实际 {self.spikes.shape}")
        if self.spikes[0].any():
            raise ValueError("时刻 0 的输入必须全为 0")
        return self

    @property
    def input_count(self) -> int:
        return int(self.spikes.shape[1])

    def at(self, t: int) -> np.ndarray:
        return self.spikes[t]


class DynamicsTrace(CustomModel):
    """
    动力学轨迹：各层在 0..t_end 的发放位与整数膜电位
    """
    t_end: int = Field(..., ge=0)
    input_firing: BitArray
    hidden_firing: BitArray
    output_firing: BitArray
    hidden_potential: IntArray
    output_potential: IntArray

    @model_validator(mode="after")
    def check_shape(self) -> "DynamicsTrace":
        rows = self.t_end + 1
        for name in (
            "input_firing",
            "hidden_firing",
            "output_firing",
            "hidden_potential",
            "output_potential",
        ):
            arr = getattr(self, name)
            if arr.ndim != 2 or arr.shape[0] != rows:
                raise ValueError(f"{name} 应有 {rows} 行，实际形状 {arr.shape}")
        if self.hidden_firing.shape != self.hidden_potential.shape:
            raise ValueError("隐藏层发放位与膜电位形状不一致")
        if self.output_firing.shape != self.output_potential.shape:
            raise ValueError("输出层发放位与膜电位形状不一致")
        return self

    def firing(self, t: int, neuron: NeuronId) -> int:
        table = {
            Layer.INPUT: self.input_firing,
            Layer.HIDDEN: self.hidden_firing,
            Layer.OUTPUT: self.output_firing,
        }[neuron.layer]
        return int(table[t, neuron.index])

    def potential(self, t: int, neuron: NeuronId) -> int:
        if neuron.layer is Layer.HIDDEN:
            return int(self.hidden_potential[t, neuron.index])
        if neuron.layer is Layer.OUTPUT:
            return int(self.output_potential[t, neuron.index])
        raise ValueError("输入神经元没有膜电位")

    def output_counts(self) -> np.ndarray:
        """每个输出神经元在整个序列中的脉冲总数"""
        return self.output_firing.sum(axis=0)

    @property
    def input_sequence(self) -> InputSequence:
        return InputSequence(t_end=self.t_end, spikes=self.input_firing)


class BatchDynamics(NamedTuple):
    """批量仿真结果，首维为实例"""
    hidden_firing: np.ndarray
    output_firing: np.ndarray
    hidden_potential: np.ndarray
    output_potential: np.ndarray


class TraceStep(CustomModel):
    """轨迹导出中的单个时刻"""
    t: int
    input: str
    hidden: str
    output: str
    hidden_potential: list[int]
    output_potential: list[int]


class TraceExport(CustomModel):
    """轨迹导出格式：逐时刻发放位图 + 整数膜电位"""
    t_end: int
    steps: list[TraceStep]


class DigitDataset(NamedTuple):
    """已加载的图像集：强度 (N, 像素数) ∈ [0, 1]，标签 (N,)"""
    images: np.ndarray
    labels: np.ndarray
    width: int
    height: int

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])

    def image(self, index: int) -> Image:
        return Image(width=self.width, height=self.height, intensities=self.images[index])
