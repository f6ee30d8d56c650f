"""
全局配置管理
使用 Pydantic BaseSettings 进行类型安全的配置管理
"""
from functools import lru_cache
from pathlib import Path
from typing import Any

from pydantic import model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.common.constants import Environment

# 可选的基数编码（auto 由编码器按规模挑选）
CARD_ENCODINGS = ("auto", "seqcounter", "sortnetwrk", "cardnetwrk", "totalizer", "mtotalizer")


class Settings(BaseSettings):
    """应用全局配置"""
    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # ========== 应用配置 ==========
    # 来自 .env 文件或环境变量
    APP_NAME: str = "BSNN Causal XAI"
    APP_VERSION: str = "1.0.0"
    APP_DESCRIPTION: str = "二值脉冲神经网络的因果模型与溯因解释工具集"
    DEBUG: bool = False
    ENVIRONMENT: Environment = Environment.DEVELOPMENT

    # ========== 日志配置 ==========
    LOG_DIR: Path = Path("logs")
    LOG_CONFIG: Path = Path("logging.ini")

    # ========== 数据与输出 ==========
    # MNIST IDX 文件所在目录（train-images-idx3-ubyte[.gz] 等标准文件名）
    MNIST_DIR: Path = Path("data/mnist")
    OUT_DIR: Path = Path("out")

    # ========== SAT 后端 ==========
    SAT_SOLVER: str = "glucose4"  # .env: SAT_SOLVER (pysat 内置 CDCL 引擎名)
    CARD_ENCODING: str = "auto"  # .env: CARD_ENCODING

    # ========== SMT 后端 ==========
    # 为空时使用进程内 Z3 读取同一份 SMT-LIB2 文本；否则作为外部命令（脚本经 stdin 输入）
    SMT_SOLVER_CMD: str = ""  # .env: SMT_SOLVER_CMD，例如 "z3 -in"
    SMT_TIMEOUT_S: float = 600.0
    SMT_PROCESS_CAP: int = 4

    # ========== 并发 ==========
    MAX_WORKERS: int = 4

    # ========== 归因审计 ==========
    # δ 默认取每个实例最大绝对得分的比例
    DEFAULT_DELTA_FRACTION: float = 0.01

    @property
    def log_level_name(self) -> str:
        return "DEBUG" if self.DEBUG else "INFO"

    @model_validator(mode="after")
    def validate_settings(self) -> "Settings":
        """
        验证配置的有效性

        检查项：
        1. 生产环境不允许开启 DEBUG 模式
        2. 基数编码名称必须已知
        3. 超时、进程数等必须为正

        抛出异常：
        - ValueError: 配置验证失败
        """
        if self.ENVIRONMENT == Environment.PRODUCTION and self.DEBUG:
            raise ValueError("生产环境不允许开启 DEBUG 模式")

        if self.CARD_ENCODING not in CARD_ENCODINGS:
            raise ValueError(
                f"未知的基数编码 {self.CARD_ENCODING!r}，可选: {', '.join(CARD_ENCODINGS)}"
            )

        if self.SMT_TIMEOUT_S <= 0:
            raise ValueError("SMT_TIMEOUT_S 必须大于 0")
        if self.SMT_PROCESS_CAP < 1 or self.MAX_WORKERS < 1:
            raise ValueError("SMT_PROCESS_CAP 与 MAX_WORKERS 必须至少为 1")
        if not 0 < self.DEFAULT_DELTA_FRACTION < 1:
            raise ValueError("DEFAULT_DELTA_FRACTION 必须位于 (0, 1)")

        return self

    def get_config_summary(self) -> dict[str, Any]:
        """
        获取配置摘要

        返回：
            用于日志和运行清单的配置字典
        """
        return {
            "app_name": self.APP_NAME,
            "app_version": self.APP_VERSION,
            "debug": self.DEBUG,
            "environment": self.ENVIRONMENT.value,
            "mnist_dir": str(self.MNIST_DIR),
            "sat_solver": self.SAT_SOLVER,
            "card_encoding": self.CARD_ENCODING,
            "smt_solver": self.SMT_SOLVER_CMD or "z3 (in-process)",
            "smt_timeout_s": self.SMT_TIMEOUT_S,
            "max_workers": self.MAX_WORKERS,
        }


@lru_cache
def get_settings() -> Settings:
    """获取配置单例"""
    return Settings()


# 导出配置实例
settings = get_settings()
