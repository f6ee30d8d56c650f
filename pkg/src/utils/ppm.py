"""
Netpbm 图像编码
P6（彩色）与 P5（灰度）二进制格式，无需图像编解码依赖
"""
import numpy as np


def encode_ppm(rgb: np.ndarray) -> bytes:
    """(高, 宽, 3) uint8 → P6 字节串"""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    height, width, _ = rgb.shape
    return f"P6\n{width} {height}\n255\n".encode("ascii") + rgb.tobytes()


def encode_pgm(gray: np.ndarray) -> bytes:
    """(高, 宽) uint8 → P5 字节串"""
    gray = np.ascontiguousarray(gray, dtype=np.uint8)
    height, width = gray.shape
    return f"P5\n{width} {height}\n255\n".encode("ascii") + gray.tobytes()


def decode_netpbm(data: bytes) -> np.ndarray:
    """解析本模块写出的 P5 / P6 字节串"""
    magic, dims, maxval, body = data.split(b"\n", 3)
    width, height = (int(v) for v in dims.split())
    if int(maxval) != 255:
        raise ValueError("只支持 maxval = 255")
    pixels = np.frombuffer(body, dtype=np.uint8)
    if magic == b"P6":
        return pixels.reshape(height, width, 3)
    if magic == b"P5":
        return pixels.reshape(height, width)
    raise ValueError(f"未知的 Netpbm 格式: {magic!r}")
