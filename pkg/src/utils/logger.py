"""
日志工具模块
app 记录器与各业务模块的子记录器；stderr 留给错误 JSON，日志只写 stdout 与文件
"""
import logging
import sys
from logging.handlers import RotatingFileHandler

from src.common.config import settings

LOG_FORMAT = "%(asctime)s | %(levelname)-8s | %(name)s:%(funcName)s:%(lineno)d - %(message)s"
DATE_FORMAT = "%Y-%m-%d %H:%M:%S"
APP_LOGGER = "app"


def setup_logger(
    name: str = APP_LOGGER,
    level: int | str | None = None,
    log_file: str | None = None,
) -> logging.Logger:
    """
    设置日志记录器

    Args:
        name: 日志记录器名称
        level: 日志级别（默认按 settings.DEBUG）
        log_file: LOG_DIR 下的文件名，为空时只输出到控制台

    Returns:
        logging.Logger: 日志记录器
    """
    level = settings.log_level_name if level is None else level
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # logging.ini 已加载或重复调用时不再添加处理器
    if logger.handlers:
        return logger

    formatter = logging.Formatter(fmt=LOG_FORMAT, datefmt=DATE_FORMAT)
    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        settings.LOG_DIR.mkdir(parents=True, exist_ok=True)
        file_handler = RotatingFileHandler(
            settings.LOG_DIR / log_file,
            maxBytes=10 * 1024 * 1024,
            backupCount=5,
            encoding="utf-8",
            delay=True,
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    logger.propagate = False
    return logger


def set_level(level: int | str, name: str = APP_LOGGER) -> None:
    """同时调整记录器及其全部处理器的级别（--log-level）"""
    logger = logging.getLogger(name)
    logger.setLevel(level)
    for handler in logger.handlers:
        handler.setLevel(level)


def get_logger(module: str) -> logging.Logger:
    """获取 app 下的子记录器，如 get_logger("solver") → app.solver"""
    return logging.getLogger(f"{APP_LOGGER}.{module}")


# 默认日志记录器
logger = setup_logger()
