"""
运行清单（RunManifest）
每次命令输出产物时写出的旁路文件，记录完整参数以便重放
"""
from enum import Enum
from pathlib import Path
from typing import Any

import click
from pydantic import Field

from src.common.config import settings
from src.common.schemas import CustomModel

MANIFEST_SUFFIX = ".manifest.json"


class RunManifest(CustomModel):
    """命令运行清单"""
    command: str
    argv: list[str] = Field(..., description="可直接重放的完整参数列表")
    params: dict[str, Any]
    seeds: dict[str, int]
    inputs: list[str]
    outputs: list[str]
    version: str
    wall_time_ms: float


def _plain(value: Any) -> Any:
    """参数值转换为 JSON 可序列化形式"""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def params_to_argv(command: click.Command, params: dict[str, Any]) -> list[str]:
    """
    把已解析的参数还原为命令行参数

    Args:
        command: click 命令或命令组
        params: ctx.params
    """
    argv: list[str] = []
    for param in command.params:
        value = params.get(param.name)
        if value is None:
            continue
        if isinstance(param, click.Argument):
            argv.extend(str(_plain(v)) for v in (value if param.multiple else [value]))
            continue
        if not isinstance(param, click.Option):
            continue
        if param.is_flag and not param.count:
            if param.secondary_opts:
                argv.append(param.opts[0] if value else param.secondary_opts[0])
            elif value:
                argv.append(param.opts[0])
            continue
        for item in value if param.multiple else [value]:
            argv.extend([param.opts[0], str(_plain(item))])
    return argv


def build_manifest(
    ctx: click.Context,
    outputs: list[Path],
    wall_time_ms: float,
) -> RunManifest:
    """从当前 click 上下文构造清单（包含根命令的全局参数）"""
    root = ctx.find_root()
    argv = params_to_argv(root.command, root.params)
    argv.append(ctx.info_name or ctx.command.name or "")
    argv.extend(params_to_argv(ctx.command, ctx.params))

    params = {name: _plain(value) for name, value in ctx.params.items()}
    seeds = {
        name: int(value)
        for name, value in ctx.params.items()
        if "seed" in name and value is not None
    }
    inputs = [
        str(value)
        for value in ctx.params.values()
        if isinstance(value, Path) and value.is_file()
    ]
    return RunManifest(
        command=ctx.command.name or "",
        argv=argv,
        params=params,
        seeds=seeds,
        inputs=inputs,
        outputs=[str(p) for p in outputs],
        version=settings.APP_VERSION,
        wall_time_ms=round(wall_time_ms, 3),
    )


def manifest_path(first_output: Path) -> Path:
    """清单与第一个产物同目录同名"""
    return first_output.with_name(first_output.name.split(".")[0] + MANIFEST_SUFFIX)


def write_manifest(manifest: RunManifest) -> Path:
    return manifest.write_json(manifest_path(Path(manifest.outputs[0])))
