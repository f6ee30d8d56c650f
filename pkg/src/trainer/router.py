"""
训练模块 - 命令定义
train：在 MNIST 数字子集上训练并导出网络文件与指标
"""
from pathlib import Path

import click

from src.common.config import settings
from src.common.constants import Encoding, WeightScale
from src.common.middleware import current_state, logged_command
from src.common.exceptions import ConfigException
from src.snn.constants import DEFAULT_THETA
from src.snn.dataset import load_mnist, select_digits
from src.trainer.constants import L1_DECAY, MAX_TRAIN_SAMPLES, VALIDATION_FRACTION
from src.trainer.schemas import TrainConfig
from src.trainer.service import evaluate, split_validation, train


def _parse_digits(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise ConfigException(f"无法解析数字列表: {text}") from e


@click.command("train", help="训练量化 BSNN 并导出网络文件")
@click.option("--digits", type=str, required=True, help="如 1,5,9")
@click.option("--k", "hidden_count", type=int, required=True, help="隐藏神经元数")
@click.option("--scale", type=click.Choice([s.value for s in WeightScale]), default=WeightScale.BINARY.value, show_default=True)
@click.option("--encoding", type=click.Choice([e.value for e in Encoding]), default=Encoding.THRESHOLDED.value, show_default=True)
@click.option("--t-end", type=int, default=1, show_default=True)
@click.option("--theta", type=float, default=DEFAULT_THETA, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--lr", "learning_rate", type=float, default=0.1, show_default=True)
@click.option("--batch-size", type=int, default=64, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--hidden-threshold", type=int, default=None, help="统一的隐藏层阈值（默认按数据校准）")
@click.option("--output-threshold", type=int, default=None, help="统一的输出层阈值（默认按数据校准）")
@click.option("--l1-decay", type=float, default=L1_DECAY, show_default=True, help="近端 L1 收缩系数")
@click.option("--max-train-samples", type=int, default=MAX_TRAIN_SAMPLES, show_default=True)
@click.option("--validation-fraction", type=float, default=VALIDATION_FRACTION, show_default=True)
@click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="IDX 文件目录")
@click.option("--name", type=str, default="network", show_default=True, help="输出文件名前缀")
@logged_command
def train_command(
    digits: str,
    hidden_count: int,
    scale: str,
    encoding: str,
    t_end: int,
    theta: float,
    epochs: int,
    learning_rate: float,
    batch_size: int,
    seed: int,
    hidden_threshold: int | None,
    output_threshold: int | None,
    l1_decay: float,
    max_train_samples: int,
    validation_fraction: float,
    mnist_dir: Path | None,
    name: str,
) -> list[Path]:
    """训练命令：非法参数组合（如阈值编码配合 t_end > 1）在读取数据前拒绝"""
    cfg = TrainConfig(
        digits=_parse_digits(digits),
        hidden_count=hidden_count,
        weight_scale=WeightScale(scale),
        encoding=Encoding(encoding),
        t_end=t_end,
        theta=theta,
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
        hidden_threshold=hidden_threshold,
        output_threshold=output_threshold,
        l1_decay=l1_decay,
        max_train_samples=max_train_samples,
        validation_fraction=validation_fraction,
    )
    directory = Path(mnist_dir or settings.MNIST_DIR)
    train_split = select_digits(load_mnist(directory, "train"), cfg.digits)
    test_split = select_digits(load_mnist(directory, "test"), cfg.digits)

    train_set, val_set = split_validation(train_split, cfg)
    result = train(cfg, train_set, val_set)
    test_accuracy = evaluate(result.arch, test_split, cfg.encoding, cfg.t_end, cfg.seed, cfg.theta)
    metrics = result.metrics.model_copy(update={"test_accuracy": test_accuracy})

    state = current_state()
    network_path = result.arch.write_json(state.output(f"{name}.json"))
    metrics_path = metrics.write_json(state.output(f"{name}.metrics.json"))
    return [network_path, metrics_path]
