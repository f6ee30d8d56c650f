"""
训练模块 - 业务逻辑层
替代梯度 + 直通估计器训练量化 BSNN，前向传播使用量化权重与精确整数动力学
"""
import math
import time
from typing import NamedTuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from src.common.constants import Encoding, WeightScale
from src.snn.constants import DEFAULT_THETA
from src.snn.encoding import encode_batch
from src.snn.schemas import DigitDataset, NetworkArchitecture
from src.snn.service import quantize_matrix, simulate_batch
from src.trainer.constants import (
    CALIBRATION_QUANTILE,
    CALIBRATION_SAMPLES,
    DEFAULT_THRESHOLD,
    EVAL_BATCH_SIZE,
    INIT_STD,
    LOGIT_SCALE,
    MOMENTUM,
    SURROGATE_SLOPE,
)
from src.trainer.exceptions import EmptyDataset, LabelOutOfRange, TrainingDiverged
from src.trainer.schemas import EpochMetrics, ProxyWeights, TrainConfig, TrainMetrics
from src.utils.logger import get_logger
from src.utils.rng import substream

logger = get_logger("trainer")


# ========== 替代梯度与量化 ==========

def arctan_surrogate(x: torch.Tensor, slope: float = SURROGATE_SLOPE) -> torch.Tensor:
    """平滑替代函数 arctan(π·a·x/2)/π + 1/2"""
    return torch.atan(math.pi * slope * x / 2) / math.pi + 0.5


def arctan_grad(x: torch.Tensor, slope: float = SURROGATE_SLOPE) -> torch.Tensor:
    """替代函数的导数 (a/2) / (1 + (π·a·x/2)²)"""
    return (slope / 2) / (1 + (math.pi * slope * x / 2) ** 2)


class ArcTanSpike(torch.autograd.Function):
    """前向为阶跃 Θ(x) = [x ≥ 0]，反向使用 arctan 替代梯度"""

    @staticmethod
    def forward(ctx, x: torch.Tensor, slope: float) -> torch.Tensor:
        ctx.save_for_backward(x)
        ctx.slope = slope
        return (x >= 0).to(x.dtype)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor):
        x, = ctx.saved_tensors
        return grad_output * arctan_grad(x, ctx.slope), None


class QuantizeSTE(torch.autograd.Function):
    """前向为二值 / 三值量化，反向梯度原样通过（不做截断）"""

    @staticmethod
    def forward(ctx, weights: torch.Tensor, ternary: bool) -> torch.Tensor:
        signs = torch.sign(weights)
        return signs if ternary else (signs > 0).to(weights.dtype)

    @staticmethod
    def backward(ctx, grad_output: torch.Tensor):
        return grad_output.clone(), None


# ========== 代理网络 ==========

def _quantile_thresholds(drive: torch.Tensor, quantile: float) -> torch.Tensor:
    """每个神经元取单步输入电流 (批量, 时刻, 神经元) 的分位数，向上取整且至少为 1"""
    flat = drive.reshape(-1, drive.shape[-1]).cpu().numpy()
    return torch.from_numpy(np.maximum(1.0, np.ceil(np.quantile(flat, quantile, axis=0)))).to(drive.dtype)


class BsnnProxy(nn.Module):
    """
    持有全精度代理权重的网络

    forward 使用量化权重逐层逐时刻递推；发放后的重置乘子不参与求导。
    阈值为缓冲区而非参数：训练前校准一次，之后保持不变
    """

    def __init__(self, cfg: TrainConfig, input_count: int, generator: torch.Generator):
        super().__init__()
        self.cfg = cfg
        classes = len(cfg.digits)
        self.hidden = nn.Parameter(torch.randn(cfg.hidden_count, input_count, generator=generator) * INIT_STD)
        self.output = nn.Parameter(torch.randn(classes, cfg.hidden_count, generator=generator) * INIT_STD)
        self.register_buffer(
            "hidden_threshold", torch.full((cfg.hidden_count,), float(cfg.hidden_threshold or DEFAULT_THRESHOLD))
        )
        self.register_buffer(
            "output_threshold", torch.full((classes,), float(cfg.output_threshold or DEFAULT_THRESHOLD))
        )

    def quantized(self) -> tuple[torch.Tensor, torch.Tensor]:
        ternary = self.cfg.weight_scale is WeightScale.TERNARY
        return QuantizeSTE.apply(self.hidden, ternary), QuantizeSTE.apply(self.output, ternary)

    @staticmethod
    def integrate(drive: torch.Tensor, threshold: torch.Tensor) -> torch.Tensor:
        """
        单层积分发放：A(t) = A(t-1)·(1 - F(t-1)) + drive(t)，F(t) = [A(t) ≥ τ]

        替代梯度作用在 (A - τ) / τ 上，前向判定与 A ≥ τ 相同

        Args:
            drive: (批量, 时刻, 神经元) 的加权输入
            threshold: (神经元,) 的阈值

        Returns:
            torch.Tensor: 与 drive 同形的发放
        """
        potential = drive.new_zeros(drive.shape[0], drive.shape[2])
        fired = torch.zeros_like(potential)
        spikes = []
        for t in range(drive.shape[1]):
            potential = potential * (1 - fired.detach()) + drive[:, t]
            fired = ArcTanSpike.apply((potential - threshold) / threshold, SURROGATE_SLOPE)
            spikes.append(fired)
        return torch.stack(spikes, dim=1)

    @torch.no_grad()
    def calibrate(self, spikes: torch.Tensor, quantile: float = CALIBRATION_QUANTILE) -> None:
        """未在配置中指定的层按数据校准阈值，使初始时约一半样本发放"""
        w_hidden, w_output = self.quantized()
        hidden_drive = spikes[:, 1:] @ w_hidden.T
        if self.cfg.hidden_threshold is None:
            self.hidden_threshold.copy_(_quantile_thresholds(hidden_drive, quantile))
        output_drive = self.integrate(hidden_drive, self.hidden_threshold) @ w_output.T
        if self.cfg.output_threshold is None:
            self.output_threshold.copy_(_quantile_thresholds(output_drive, quantile))
        logger.debug(
            f"阈值校准: 隐藏层={self.hidden_threshold.int().tolist()} 输出层={self.output_threshold.int().tolist()}"
        )

    def forward(self, spikes: torch.Tensor) -> torch.Tensor:
        """
        Args:
            spikes: (批量, t_end + 1, 输入数)，第 0 行为 0

        Returns:
            torch.Tensor: (批量, 类别数) 的平均发放率
        """
        w_hidden, w_output = self.quantized()
        hidden_fired = self.integrate(spikes[:, 1:] @ w_hidden.T, self.hidden_threshold)
        output_fired = self.integrate(hidden_fired @ w_output.T, self.output_threshold)
        return output_fired.mean(dim=1)

    @torch.no_grad()
    def shrink(self, amount: float) -> None:
        """近端 L1 步：|w| 减去 amount，越过 0 的权重精确置 0（量化后即无连接）"""
        if amount <= 0:
            return
        for weights in (self.hidden, self.output):
            weights.copy_(torch.sign(weights) * torch.clamp(weights.abs() - amount, min=0.0))

    def proxy_weights(self) -> ProxyWeights:
        return ProxyWeights(
            hidden=self.hidden.detach().cpu().numpy().astype(np.float64),
            output=self.output.detach().cpu().numpy().astype(np.float64),
            hidden_thresholds=self.hidden_threshold.cpu().numpy().astype(np.int64),
            output_thresholds=self.output_threshold.cpu().numpy().astype(np.int64),
        )


def export_architecture(
    proxy: ProxyWeights,
    cfg: TrainConfig,
    input_shape: tuple[int, int] | None = None,
) -> NetworkArchitecture:
    """导出时逐元素量化代理权重，阈值写入文件"""
    hidden = quantize_matrix(proxy.hidden, cfg.weight_scale)
    output = quantize_matrix(proxy.output, cfg.weight_scale)
    thresholds = [int(v) for v in proxy.hidden_thresholds] + [int(v) for v in proxy.output_thresholds]
    return NetworkArchitecture(
        weight_scale=cfg.weight_scale,
        input_count=hidden.shape[1],
        hidden_count=hidden.shape[0],
        output_count=output.shape[0],
        hidden_weights=hidden,
        output_weights=output,
        thresholds=thresholds,
        input_shape=input_shape,
        class_labels=list(cfg.digits),
    )


# ========== 数据划分 ==========

def _subset(dataset: DigitDataset, rows: np.ndarray) -> DigitDataset:
    return dataset._replace(images=dataset.images[rows], labels=dataset.labels[rows])


def split_validation(dataset: DigitDataset, cfg: TrainConfig) -> tuple[DigitDataset, DigitDataset]:
    """
    按种子打乱后截取至多 max_train_samples 张，再划出验证集

    Returns:
        (训练集, 验证集)
    """
    order = substream(cfg.seed).permutation(dataset.size)[: cfg.max_train_samples]
    val_count = int(round(len(order) * cfg.validation_fraction))
    return _subset(dataset, np.sort(order[val_count:])), _subset(dataset, np.sort(order[:val_count]))


def _check_labels(dataset: DigitDataset, classes: int) -> None:
    bad = dataset.labels[(dataset.labels < 0) | (dataset.labels >= classes)]
    if bad.size:
        raise LabelOutOfRange(int(bad[0]), classes)


# ========== 训练与评估 ==========

def _encode(
    dataset: DigitDataset, rows: np.ndarray, cfg: TrainConfig, seed: int, first_index: int = 0
) -> torch.Tensor:
    spikes = encode_batch(
        dataset.images[rows], cfg.encoding, cfg.t_end, seed=seed, first_index=first_index, theta=cfg.theta
    )
    return torch.from_numpy(spikes).to(torch.float32)


def _loss(rates: torch.Tensor, labels: np.ndarray) -> torch.Tensor:
    return F.cross_entropy(rates * LOGIT_SCALE, torch.from_numpy(labels).long())


class TrainResult(NamedTuple):
    arch: NetworkArchitecture
    proxy: ProxyWeights
    metrics: TrainMetrics


def train(cfg: TrainConfig, train_set: DigitDataset, val_set: DigitDataset | None = None) -> TrainResult:
    """
    小批量 SGD（动量 0.9）训练，损失为放大后平均发放率上的 softmax 交叉熵

    训练前按前 CALIBRATION_SAMPLES 张图像校准阈值；每步之后做一次近端 L1 收缩，
    从未发放的输入没有梯度，其权重被收缩到 0 后即与网络断开

    Args:
        cfg: 训练配置
        train_set: 标签为类别索引的训练集
        val_set: 验证集（可为空）

    Raises:
        EmptyDataset: 训练集为空
        LabelOutOfRange: 标签不在类别范围
        TrainingDiverged: 损失非有限
    """
    if train_set.size == 0:
        raise EmptyDataset("训练集")
    classes = len(cfg.digits)
    _check_labels(train_set, classes)
    if val_set is not None:
        _check_labels(val_set, classes)

    torch.use_deterministic_algorithms(True)
    generator = torch.Generator().manual_seed(cfg.seed)
    model = BsnnProxy(cfg, train_set.images.shape[1], generator)
    optimizer = torch.optim.SGD(model.parameters(), lr=cfg.learning_rate, momentum=MOMENTUM)
    input_shape = (train_set.width, train_set.height)

    calibration_rows = substream(cfg.seed, 0).permutation(train_set.size)[:CALIBRATION_SAMPLES]
    calibration = _encode(train_set, calibration_rows, cfg, cfg.seed)
    model.calibrate(calibration)
    with torch.no_grad():
        initial_loss = _loss(model(calibration), train_set.labels[calibration_rows]).item()

    logger.info(
        f"开始训练: 数字={cfg.digits} k={cfg.hidden_count} 刻度={cfg.weight_scale.value} "
        f"编码={cfg.encoding.value} t_end={cfg.t_end} 样本={train_set.size}"
    )
    history: list[EpochMetrics] = []
    for epoch in range(cfg.epochs):
        start_time = time.perf_counter()
        order = substream(cfg.seed, epoch + 1).permutation(train_set.size)
        losses = []
        for step, start in enumerate(range(0, train_set.size, cfg.batch_size)):
            rows = order[start : start + cfg.batch_size]
            spikes = _encode(train_set, rows, cfg, cfg.seed + epoch + 1, first_index=start)
            loss = _loss(model(spikes), train_set.labels[rows])
            if not torch.isfinite(loss):
                raise TrainingDiverged(epoch, step, loss.item())

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            model.shrink(cfg.learning_rate * cfg.l1_decay)
            losses.append(loss.item())

        val_accuracy = None
        if val_set is not None and val_set.size:
            arch = export_architecture(model.proxy_weights(), cfg, input_shape)
            val_accuracy = evaluate(arch, val_set, cfg.encoding, cfg.t_end, cfg.seed, cfg.theta)
        history.append(EpochMetrics(epoch=epoch, loss=float(np.mean(losses)), val_accuracy=val_accuracy))
        logger.info(
            f"第 {epoch} 轮: 损失={history[-1].loss:.4f} 验证准确率={val_accuracy} "
            f"耗时={(time.perf_counter() - start_time) * 1000:.0f}ms"
        )

    proxy = model.proxy_weights()
    metrics = TrainMetrics(
        val_accuracy=history[-1].val_accuracy if history else None,
        initial_loss=initial_loss,
        epochs=cfg.epochs,
        seed=cfg.seed,
        train_samples=train_set.size,
        history=history,
        config=cfg,
    )
    return TrainResult(export_architecture(proxy, cfg, input_shape), proxy, metrics)


def evaluate(
    arch: NetworkArchitecture,
    dataset: DigitDataset,
    encoding: Encoding,
    t_end: int,
    seed: int = 0,
    theta: float = DEFAULT_THETA,
) -> float:
    """
    classify(simulate(arch, encode(img))) 与标签一致的比例

    第 n 张图像使用编码子流 (seed, n)，与逐张调用 encode 一致
    """
    if dataset.size == 0:
        return 0.0
    correct = 0
    for start in range(0, dataset.size, EVAL_BATCH_SIZE):
        images = dataset.images[start : start + EVAL_BATCH_SIZE]
        spikes = encode_batch(images, encoding, t_end, seed=seed, first_index=start, theta=theta)
        counts = simulate_batch(arch, spikes).output_firing.sum(axis=1)
        predicted = np.argmax(counts, axis=1)
        correct += int(np.sum(predicted == dataset.labels[start : start + EVAL_BATCH_SIZE]))
    return correct / dataset.size
