"""
SNN 模块 - 命令定义
simulate：编码一张测试图像、仿真并导出轨迹
"""
from pathlib import Path

import click

from src.common.constants import Encoding
from src.common.middleware import current_state, logged_command
from src.snn.constants import DEFAULT_THETA
from src.snn.dependencies import load_architecture, load_instance
from src.snn.encoding import encode
from src.snn.service import classify, simulate, trace_to_export
from src.utils.logger import logger


@click.command("simulate", help="仿真一张测试图像并导出动力学轨迹")
@click.option("--network", type=click.Path(path_type=Path), required=True, help="网络 JSON 文件")
@click.option("--index", type=int, required=True, help="测试集中的图像位置")
@click.option("--split", type=click.Choice(["train", "test"]), default="test", show_default=True)
@click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="IDX 文件目录")
@click.option(
    "--encoding",
    type=click.Choice([e.value for e in Encoding]),
    default=Encoding.THRESHOLDED.value,
    show_default=True,
)
@click.option("--t-end", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--theta", type=float, default=DEFAULT_THETA, show_default=True)
@logged_command
def simulate_command(
    network: Path,
    index: int,
    split: str,
    mnist_dir: Path | None,
    encoding: str,
    t_end: int,
    seed: int,
    theta: float,
) -> list[Path]:
    """仿真命令"""
    arch = load_architecture(network)
    image, label = load_instance(index, split, mnist_dir)
    sequence = encode(image, Encoding(encoding), t_end, seed, index, theta)
    trace = simulate(arch, sequence)

    predicted = classify(trace)
    logger.info(
        f"图像 {index}: 标签={label} 预测类别={predicted} "
        f"输出脉冲计数={trace.output_counts().tolist()}"
    )
    path = trace_to_export(trace).write_json(current_state().output(f"trace_{index}.json"))
    return [path]
