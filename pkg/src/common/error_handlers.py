"""
全局异常处理
把异常统一转换为退出码与 stderr 上的错误 JSON
"""
from typing import Callable

import click
from pydantic_core import ValidationError

from src.common.constants import ExitCode
from src.common.exceptions import AppException
from src.common.schemas import ErrorResponse
from src.utils.logger import logger


# 中文验证错误信息映射
VALIDATION_ERROR_MESSAGES = {
    "greater_than_equal": "必须大于等于 {ge}",
    "greater_than": "必须大于 {gt}",
    "less_than_equal": "必须小于等于 {le}",
    "less_than": "必须小于 {lt}",
    "int_parsing": "必须是整数",
    "float_parsing": "必须是数字",
    "list_type": "必须是列表",
    "enum": "必须是 {expected} 之一",
    "missing": "此字段必填",
    "extra_forbidden": "不允许的字段",
    "value_error": "{error}",
}


def get_chinese_error_message(error: dict) -> str:
    """
    将 Pydantic 验证错误转换为中文错误消息

    Args:
        error: Pydantic 验证错误字典

    Returns:
        中文错误消息
    """
    error_type = error.get("type", "")
    ctx = error.get("ctx", {})
    loc = error.get("loc") or ("unknown",)
    field = loc[-1]

    base_message = VALIDATION_ERROR_MESSAGES.get(error_type, error.get("msg", "参数错误"))
    for key, value in ctx.items():
        base_message = base_message.replace("{" + key + "}", str(value))

    return f"字段 '{field}': {base_message}"


ExceptionHandler = Callable[[Exception], int]


class AppGroup(click.Group):
    """
    支持按异常类型注册处理器的命令组

    使用示例:
        @cli.exception_handler(AppException)
        def handle(exc): ...
    """

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.exception_handlers: dict[type[Exception], ExceptionHandler] = {}

    def exception_handler(self, exc_type: type[Exception]) -> Callable[[ExceptionHandler], ExceptionHandler]:
        def decorator(handler: ExceptionHandler) -> ExceptionHandler:
            self.exception_handlers[exc_type] = handler
            return handler

        return decorator

    def _lookup(self, exc: Exception) -> ExceptionHandler | None:
        for klass in type(exc).__mro__:
            if klass in self.exception_handlers:
                return self.exception_handlers[klass]
        return None

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.exceptions.Abort, click.ClickException):
            raise
        except Exception as exc:
            handler = self._lookup(exc)
            if handler is None:
                raise
            ctx.exit(handler(exc))


def _emit(error_response: ErrorResponse) -> None:
    click.echo(error_response.model_dump_json(), err=True)


def setup_exception_handlers(cli: AppGroup) -> None:
    """
    设置全局异常处理器

    Args:
        cli: 根命令组
    """

    @cli.exception_handler(ValidationError)
    def validation_exception_handler(exc: ValidationError) -> int:
        """参数组合或配置文件验证失败，按配置错误处理"""
        errors = exc.errors()
        error_message = get_chinese_error_message(errors[0]) if errors else "参数验证失败"
        _emit(ErrorResponse(code=int(ExitCode.CONFIG_ERROR), errorMessage=error_message))
        return ExitCode.CONFIG_ERROR

    @cli.exception_handler(AppException)
    def app_exception_handler(exc: AppException) -> int:
        logger.error(f"{type(exc).__name__}: {exc.detail}")
        _emit(ErrorResponse(code=exc.exit_code, errorMessage=exc.detail))
        return exc.exit_code

    @cli.exception_handler(Exception)
    def general_exception_handler(exc: Exception) -> int:
        """处理未捕获的异常"""
        logger.exception(f"未处理的异常: {exc}")
        _emit(ErrorResponse(code=int(ExitCode.UNEXPECTED), errorMessage=str(exc) or "内部错误"))
        return ExitCode.UNEXPECTED
