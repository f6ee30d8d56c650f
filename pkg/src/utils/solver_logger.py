"""
求解器日志记录模块
记录每一次蕴含查询（后端、结论、耗时）到按日期命名的文件
"""
import logging
from datetime import datetime
from logging.handlers import RotatingFileHandler

from src.common.config import settings


class SolverLogger:
    """求解器查询日志记录器"""

    def __init__(self):
        self.logger = self._setup_logger()

    def _setup_logger(self) -> logging.Logger:
        """设置求解器日志记录器（首次写入时才创建文件）"""
        logger = logging.getLogger("solver_logger")
        logger.setLevel(logging.DEBUG)
        logger.propagate = False

        # 避免重复添加处理器
        if logger.handlers:
            return logger

        log_dir = settings.LOG_DIR
        log_dir.mkdir(parents=True, exist_ok=True)

        # 按日期生成日志文件名（自动分割）
        log_file = log_dir / f"solver_{datetime.now().strftime('%Y-%m-%d')}.log"

        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=100 * 1024 * 1024,  # 100MB
            backupCount=30,
            encoding="utf-8",
            delay=True,
        )
        formatter = logging.Formatter(
            fmt="%(asctime)s | %(levelname)-8s | %(message)s",
            datefmt="%Y-%m-%d %H:%M:%S",
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

        return logger

    def log_query(
        self,
        backend: str,
        kind: str,
        verdict: str,
        execution_time: float = 0,
        size: int | None = None,
    ):
        """
        记录一次求解器查询

        Args:
            backend: 后端名称（cnf / smt）
            kind: 查询类型（entailment / script 等）
            verdict: sat / unsat
            execution_time: 执行时间（毫秒）
            size: 查询规模（假设文字数或脚本长度）
        """
        size_msg = f" | Size: {size}" if size is not None else ""
        self.logger.debug(
            f"Backend: {backend} | Kind: {kind} | Verdict: {verdict}{size_msg} | Time: {execution_time:.2f}ms"
        )

    def log_error(self, backend: str, error: Exception):
        """
        记录求解器错误

        Args:
            backend: 后端名称
            error: 异常信息
        """
        self.logger.error(f"Solver Error: {backend} | Exception: {error}")


# 全局求解器日志记录器实例
solver_logger = SolverLogger()
