"""
归因审计 - 命令定义
shap：对一张测试图像做 Shapley 归因并审计无连接特征
"""
from pathlib import Path

import click

from src.attribution.service import attribute, render_relevance
from src.common.constants import Encoding
from src.common.middleware import current_state, logged_command
from src.snn.constants import DEFAULT_THETA
from src.snn.dependencies import load_architecture, load_instance
from src.utils.logger import logger


@click.command("shap", help="Shapley 核回归归因与无连接特征审计")
@click.option("--network", type=click.Path(path_type=Path), required=True, help="网络 JSON 文件")
@click.option("--index", type=int, required=True, help="测试集中的图像位置")
@click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="IDX 文件目录")
@click.option(
    "--encoding",
    type=click.Choice([e.value for e in Encoding]),
    default=Encoding.THRESHOLDED.value,
    show_default=True,
)
@click.option("--t-end", type=int, default=1, show_default=True)
@click.option("--theta", type=float, default=DEFAULT_THETA, show_default=True)
@click.option("--sample-size", type=int, default=10000, show_default=True, help="联盟采样数")
@click.option("--exact", is_flag=True, help="精确枚举（特征数 ≤ 12 时可用）")
@click.option("--delta", type=float, default=None, help="相关性阈值 δ（默认按最大得分比例）")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=None, help="采样块并行线程数")
@logged_command
def shap_command(
    network: Path,
    index: int,
    mnist_dir: Path | None,
    encoding: str,
    t_end: int,
    theta: float,
    sample_size: int,
    exact: bool,
    delta: float | None,
    seed: int,
    workers: int | None,
) -> list[Path]:
    """归因命令"""
    arch = load_architecture(network)
    image, label = load_instance(index, "test", mnist_dir)

    report = attribute(
        arch,
        image,
        Encoding(encoding),
        t_end,
        None if exact else sample_size,
        seed=seed,
        delta=delta,
        image_index=index,
        theta=theta,
        workers=workers,
    )
    logger.info(f"图像 {index} (标签 {label}): 错误相关比例 {report.wrongly_relevant_pct:.2f}%")

    state = current_state()
    report_path = report.write_json(state.output(f"shap_{index}.json"))
    image_path = state.output(f"shap_{index}.ppm")
    image_path.write_bytes(render_relevance(report, arch))
    return [report_path, image_path]
