"""
全局 Pydantic 模型（Schema）
提供通用的基础模型与 numpy 字段类型
"""
import json
from pathlib import Path
from typing import Annotated, Any

try:
    from typing import Self
except ImportError:  # Python < 3.11
    from typing_extensions import Self

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, PlainSerializer


def _as_int_array(value: Any) -> np.ndarray:
    arr = np.asarray(value)
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise ValueError("必须全部为整数")
    return arr.astype(np.int64)


def _as_bit_array(value: Any) -> np.ndarray:
    arr = _as_int_array(value)
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("取值必须为 0 或 1")
    return arr.astype(np.int8)


def _as_float_array(value: Any) -> np.ndarray:
    return np.asarray(value, dtype=np.float64)


# JSON 中保存为纯整数嵌套列表，内存中为 numpy 数组
IntArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_int_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
BitArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_bit_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]
FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_as_float_array),
    PlainSerializer(lambda a: a.tolist(), return_type=list),
]


class CustomModel(BaseModel):
    """
    自定义基础模型
    - 允许 numpy 等任意类型字段
    - 提供 JSON 文件读写方法
    """
    model_config = ConfigDict(
        from_attributes=True,
        populate_by_name=True,
        arbitrary_types_allowed=True,
    )

    def serializable_dict(self, **kwargs) -> dict[str, Any]:
        """返回可序列化的字典"""
        return self.model_dump(mode="json", **kwargs)

    def write_json(self, path: str | Path) -> Path:
        """写入 JSON 文件（键顺序固定，便于逐字节复现）"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(
            json.dumps(self.serializable_dict(), indent=2, sort_keys=False) + "\n",
            encoding="utf-8",
        )
        return path

    @classmethod
    def read_json(cls, path: str | Path) -> Self:
        """从 JSON 文件读取"""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


class ErrorResponse(CustomModel):
    """
    错误响应模型（统一输出到 stderr 的错误格式）

    使用示例:
        ErrorResponse(
            code=3,
            message="error",
            errorMessage="输入维度与网络不一致"
        )
    """
    code: int = 1
    message: str = "error"
    errorMessage: str = "请求处理失败"
