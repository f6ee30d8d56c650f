"""
命令行应用主入口
"""
import logging.config
from pathlib import Path

import click

from src.common.config import settings
from src.common.error_handlers import AppGroup, setup_exception_handlers
from src.common.exceptions import DataException, NotFoundException
from src.common.manifest import RunManifest
from src.common.middleware import CommandState
from src.utils.logger import logger, set_level

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def configure_logging(level: str) -> None:
    """
    读取 logging.ini（存在时），再按 --log-level 调整 app 记录器
    """
    if settings.LOG_CONFIG.is_file():
        settings.LOG_DIR.mkdir(parents=True, exist_ok=True)
        logging.config.fileConfig(settings.LOG_CONFIG, disable_existing_loggers=False)
    set_level(level)


def create_app() -> AppGroup:
    """
    创建根命令组
    """

    @click.group(cls=AppGroup, help=settings.APP_DESCRIPTION)
    @click.option(
        "--out-dir",
        type=click.Path(path_type=Path, file_okay=False),
        default=None,
        help="产物输出目录（默认 settings.OUT_DIR）",
    )
    @click.option("--log-level", type=click.Choice(LOG_LEVELS), default=None, help="日志级别")
    @click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
    @click.pass_context
    def cli(ctx: click.Context, out_dir: Path | None, log_level: str | None) -> None:
        configure_logging(log_level or settings.log_level_name)
        ctx.obj = CommandState(out_dir=out_dir or settings.OUT_DIR)
        logger.debug(f"配置: {settings.get_config_summary()}")

    # 设置全局异常处理器（必须在注册命令之前）
    setup_exception_handlers(cli)

    # 注册命令
    register_routers(cli)

    return cli


def register_routers(cli: AppGroup) -> None:
    """
    注册所有子命令
    """
    from src.attribution.router import shap_command
    from src.axp.router import bench_command, explain_command, render_command, verify_command
    from src.snn.router import simulate_command
    from src.trainer.router import train_command

    for command in (
        train_command,
        simulate_command,
        explain_command,
        verify_command,
        bench_command,
        shap_command,
        render_command,
    ):
        cli.add_command(command)

    @cli.command("replay", help="按运行清单重放一次命令")
    @click.argument("manifest", type=click.Path(path_type=Path, dir_okay=False))
    @click.option("--out-dir", type=click.Path(path_type=Path, file_okay=False), default=None, help="改写输出目录")
    @click.pass_context
    def replay_command(ctx: click.Context, manifest: Path, out_dir: Path | None) -> None:
        """重放：清单中的 argv 原样交给根命令"""
        if not manifest.is_file():
            raise NotFoundException(f"清单不存在: {manifest}")
        record = RunManifest.read_json(manifest)
        argv = list(record.argv)
        if out_dir is not None:
            command = record.command
            if command not in argv:
                raise DataException(f"清单 argv 中找不到命令 {command}")
            argv[argv.index(command) : argv.index(command)] = ["--out-dir", str(out_dir)]

        logger.info(f"重放: {' '.join(argv)}")
        code = cli.main(args=argv, prog_name=ctx.find_root().info_name, standalone_mode=False)
        # 成功时返回子命令的产物列表，失败时返回退出码
        if isinstance(code, int) and code:
            ctx.exit(code)


# 创建应用实例
cli = create_app()


if __name__ == "__main__":
    cli()
