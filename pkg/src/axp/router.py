"""
溯因解释 - 命令定义
explain / verify / bench / render
"""
import json
from pathlib import Path

import click

from src.attribution.schemas import AttributionReport
from src.attribution.service import render_relevance
from src.axp.constants import LiteralOrder
from src.axp.exceptions import CertificateFailure
from src.axp.schemas import BenchReport, Explanation, ExplanationExport, VerifyItem, VerifyReport
from src.axp.service import (
    audit_connectivity,
    explain_batch,
    explanation_from_export,
    explanation_to_export,
    render_explanation,
    render_image,
    summarize,
    verify_axp,
)
from src.causal.service import find_violations
from src.common.constants import Backend, Encoding
from src.common.exceptions import ConfigException, DataException
from src.common.middleware import current_state, logged_command
from src.snn.constants import DEFAULT_THETA
from src.snn.dependencies import load_architecture, load_instance, parse_indices
from src.snn.schemas import Image, NetworkArchitecture, TraceExport
from src.snn.service import check_trace_shape, trace_from_export
from src.utils.logger import logger

# ========== 共用选项 ==========

_ENCODING_CHOICES = click.Choice([e.value for e in Encoding])
_BACKEND_CHOICES = click.Choice([b.value for b in Backend])
_ORDER_CHOICES = click.Choice([o.value for o in LiteralOrder])


def encoding_options(func):
    """编码相关选项（explain 与 bench 共用）"""
    for decorator in reversed(
        [
            click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="IDX 文件目录"),
            click.option("--encoding", type=_ENCODING_CHOICES, default=Encoding.THRESHOLDED.value, show_default=True),
            click.option("--t-end", type=int, default=1, show_default=True),
            click.option("--seed", type=int, default=0, show_default=True, help="编码种子"),
            click.option("--theta", type=float, default=DEFAULT_THETA, show_default=True),
        ]
    ):
        func = decorator(func)
    return func


def _load_images(indices: list[int], mnist_dir: Path | None) -> list[tuple[int, Image]]:
    return [(index, load_instance(index, "test", mnist_dir)[0]) for index in indices]


def _certify(expl: Explanation, arch: NetworkArchitecture) -> tuple[Explanation, list[int]]:
    """独立复核并附上连接审计结果"""
    expl.certificates = verify_axp(expl, arch, expl.input)
    return expl, audit_connectivity(expl, arch)


# ========== explain ==========

@click.command("explain", help="计算溯因解释并复核证书")
@click.option("--network", type=click.Path(path_type=Path), required=True, help="网络 JSON 文件")
@click.option("--index", type=int, default=None, help="单个测试图像位置")
@click.option("--indices", type=str, default=None, help="批量索引，如 0..19 或 1,4,9")
@click.option("--t", "t", type=int, required=True, help="解释时刻")
@click.option("--backend", type=_BACKEND_CHOICES, default=Backend.CNF_SAT.value, show_default=True)
@click.option("--order-seed", type=int, default=0, show_default=True)
@click.option("--order", type=_ORDER_CHOICES, default=LiteralOrder.SHUFFLE.value, show_default=True)
@click.option("--workers", type=int, default=None, help="批量模式的进程数")
@encoding_options
@logged_command
def explain_command(
    network: Path,
    index: int | None,
    indices: str | None,
    t: int,
    backend: str,
    order_seed: int,
    order: str,
    workers: int | None,
    mnist_dir: Path | None,
    encoding: str,
    t_end: int,
    seed: int,
    theta: float,
) -> list[Path]:
    """解释命令：证书任一条件失败或出现无连接特征时退出码为 5（产物仍会写出）"""
    if (index is None) == (indices is None):
        raise ConfigException("--index 与 --indices 必须且只能指定一个")
    targets = [index] if index is not None else parse_indices(indices)

    arch = load_architecture(network)
    explanations = explain_batch(
        arch,
        _load_images(targets, mnist_dir),
        t,
        Backend(backend),
        order_seed,
        LiteralOrder(order),
        Encoding(encoding),
        t_end,
        seed,
        theta,
        workers,
    )

    state = current_state()
    outputs: list[Path] = []
    failures: list[str] = []
    for expl in explanations:
        expl, disconnected = _certify(expl, arch)
        name = f"explanation_{expl.image_index}_t{t}"
        outputs.append(explanation_to_export(expl, arch).write_json(state.output(f"{name}.json")))
        image_path = state.output(f"{name}.ppm")
        image_path.write_bytes(render_explanation(expl, arch))
        outputs.append(image_path)

        if not expl.certificates.passed:
            failures.append(f"图像 {expl.image_index}: 证书 {expl.certificates.model_dump()}")
        if disconnected:
            failures.append(f"图像 {expl.image_index}: 含无连接特征 {disconnected}")

    if failures:
        raise CertificateFailure("; ".join(failures), outputs)
    return outputs


# ========== verify ==========

def _verify_trace(path: Path, arch: NetworkArchitecture) -> VerifyItem:
    trace = trace_from_export(TraceExport.read_json(path))
    check_trace_shape(arch, trace)
    violations = find_violations(arch, trace)
    return VerifyItem(
        file=path.name,
        kind="trace",
        passed=not violations,
        failures=[str(v) for v in violations],
    )


def _verify_explanation(path: Path, arch: NetworkArchitecture) -> VerifyItem:
    expl = explanation_from_export(ExplanationExport.read_json(path))
    expl, disconnected = _certify(expl, arch)
    failures = [name for name, ok in expl.certificates.model_dump().items() if not ok]
    failures += [f"无连接特征 {index}" for index in disconnected]
    return VerifyItem(file=path.name, kind="explanation", passed=not failures, failures=failures)


@click.command("verify", help="复核目录中的轨迹兼容性与解释证书")
@click.option("--network", type=click.Path(path_type=Path), required=True, help="网络 JSON 文件")
@click.option("--dir", "directory", type=click.Path(path_type=Path, file_okay=False), required=True)
@logged_command
def verify_command(network: Path, directory: Path) -> list[Path]:
    """复核命令：全部通过时退出码为 0"""
    arch = load_architecture(network)
    items = [_verify_trace(p, arch) for p in sorted(directory.glob("trace_*.json"))]
    items += [_verify_explanation(p, arch) for p in sorted(directory.glob("explanation_*.json"))]

    if not items:
        logger.warning(f"目录 {directory} 中没有可复核的轨迹或解释")
    report = VerifyReport(total=len(items), passed=sum(item.passed for item in items), items=items)
    for item in items:
        if not item.passed:
            logger.error(f"复核未通过 {item.file}: {', '.join(item.failures)}")

    path = report.write_json(current_state().output("verify_report.json"))
    if not report.all_passed:
        raise CertificateFailure(f"{report.total - report.passed}/{report.total} 项复核未通过", [path])
    return [path]


# ========== bench ==========

@click.command("bench", help="两个后端在同一批实例上的解释对比")
@click.option("--network", type=click.Path(path_type=Path), required=True, help="网络 JSON 文件")
@click.option("--indices", type=str, required=True, help="如 0..19 或 1,4,9")
@click.option("--t", "t", type=int, required=True, help="解释时刻")
@click.option("--order-seed", type=int, default=0, show_default=True)
@click.option("--workers", type=int, default=None)
@encoding_options
@logged_command
def bench_command(
    network: Path,
    indices: str,
    t: int,
    order_seed: int,
    workers: int | None,
    mnist_dir: Path | None,
    encoding: str,
    t_end: int,
    seed: int,
    theta: float,
) -> list[Path]:
    """对比命令：输出平均搜索时间、平均长度与后端一致率"""
    arch = load_architecture(network)
    targets = parse_indices(indices)
    images = _load_images(targets, mnist_dir)

    results = {
        backend: explain_batch(
            arch, images, t, backend, order_seed, LiteralOrder.SHUFFLE,
            Encoding(encoding), t_end, seed, theta, workers,
        )
        for backend in Backend
    }
    for explanations in results.values():
        for expl in explanations:
            _certify(expl, arch)
    cnf, smt = results[Backend.CNF_SAT], results[Backend.SMT_LIA]
    agreeing = sum(set(a.term.literals) == set(b.term.literals) for a, b in zip(cnf, smt))

    report = BenchReport(
        indices=targets,
        t=t,
        summaries=[summarize(results[backend], arch) for backend in Backend],
        agreement=agreeing / len(targets) if targets else 1.0,
    )
    for summary in report.summaries:
        logger.info(
            f"后端 {summary.backend.value}: 平均耗时 {summary.mean_search_time_ms:.1f}ms, "
            f"平均长度 {summary.mean_length:.2f} ({summary.mean_length_pct:.2f}%)"
        )
    return [report.write_json(current_state().output("bench_summary.json"))]


# ========== render ==========

@click.command("render", help="把解释、归因报告或原始图像渲染为 PPM/PGM")
@click.option("--artifact", type=click.Path(path_type=Path, dir_okay=False), default=None, help="解释或归因 JSON")
@click.option("--network", type=click.Path(path_type=Path), default=None, help="渲染 JSON 产物时需要")
@click.option("--index", type=int, default=None, help="渲染原始测试图像")
@click.option("--mnist-dir", type=click.Path(path_type=Path), default=None, help="IDX 文件目录")
@logged_command
def render_command(
    artifact: Path | None,
    network: Path | None,
    index: int | None,
    mnist_dir: Path | None,
) -> list[Path]:
    """渲染命令：同一产物重复渲染得到逐字节相同的图像"""
    state = current_state()
    if artifact is None:
        if index is None:
            raise ConfigException("需要 --artifact 或 --index")
        image, _ = load_instance(index, "test", mnist_dir)
        path = state.output(f"image_{index}.pgm")
        path.write_bytes(render_image(image))
        return [path]

    if network is None:
        raise ConfigException("渲染 JSON 产物需要 --network")
    arch = load_architecture(network)
    try:
        payload = json.loads(artifact.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DataException(f"无法读取产物 {artifact}: {e}") from e

    if isinstance(payload, dict) and "literals" in payload:
        expl = explanation_from_export(ExplanationExport.model_validate(payload))
        data = render_explanation(expl, arch)
    elif isinstance(payload, dict) and "scores" in payload:
        data = render_relevance(AttributionReport.model_validate(payload), arch)
    else:
        raise DataException(f"未知的产物类型: {artifact}")

    path = state.output(f"{artifact.name.split('.')[0]}.ppm")
    path.write_bytes(data)
    return [path]
