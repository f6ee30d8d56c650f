"""
中间件模块
为每个子命令提供运行日志（运行 ID、耗时）与运行清单写出
"""
import functools
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import click

from src.common.config import settings
from src.common.exceptions import CertificateException
from src.common.manifest import build_manifest, write_manifest
from src.utils.logger import logger


@dataclass
class CommandState:
    """根命令放入 ctx.obj 的共享状态"""
    out_dir: Path = field(default_factory=lambda: settings.OUT_DIR)
    run_id: str = ""

    def output(self, name: str) -> Path:
        """输出目录下的产物路径（目录按需创建）"""
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / name


def current_state() -> CommandState:
    ctx = click.get_current_context()
    state = ctx.find_object(CommandState)
    if state is None:
        state = ctx.ensure_object(CommandState)
    return state


def logged_command(func: Callable[..., list[Path] | None]) -> Callable[..., list[Path]]:
    """
    命令日志装饰器

    被装饰的回调返回其写出的产物路径列表；
    非空时在第一个产物旁写出 RunManifest
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs) -> list[Path]:
        ctx = click.get_current_context()
        state = current_state()
        state.run_id = uuid.uuid4().hex[:8]
        start_time = time.perf_counter()

        logger.info(f"[{state.run_id}] 命令开始: {ctx.command_path}")
        try:
            outputs = list(func(*args, **kwargs) or [])
        except Exception as e:
            elapsed = (time.perf_counter() - start_time) * 1000
            # 证书失败时产物已写出，清单照常写出
            if isinstance(e, CertificateException) and e.outputs:
                write_manifest(build_manifest(ctx, e.outputs, elapsed))
            logger.error(f"[{state.run_id}] 命令失败: {ctx.command_path} 耗时={elapsed:.2f}ms 错误={e}")
            raise

        process_time = (time.perf_counter() - start_time) * 1000
        if outputs:
            manifest = write_manifest(build_manifest(ctx, outputs, process_time))
            logger.info(f"[{state.run_id}] 运行清单: {manifest}")
        logger.info(
            f"[{state.run_id}] 命令完成: {ctx.command_path} "
            f"产物={len(outputs)} 耗时={process_time:.2f}ms"
        )
        return outputs

    return wrapper
