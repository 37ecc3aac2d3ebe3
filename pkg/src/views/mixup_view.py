#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
mixup输出视图

二进制格式（全部小端）:
    magic      8字节 b"ABSAMIX1"
    header     5个uint64: Q_l, Q_c, Q_r, d, N
    每条记录:
        λ          float64
        来源ID×2   uint32长度 + UTF-8字节
        label      3个float64 (positive, neutral, negative)
        left       d×Q_l 个float64，行优先
        target     d×Q_c 个float64
        right      d×Q_r 个float64

TSV审计格式只含 λ、α、来源ID和标签
"""

import struct
from dataclasses import dataclass
from typing import BinaryIO, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from src.models.mixup_model import MixupRecord
from src.utils.errors import MixupError


MAGIC = b"ABSAMIX1"
_HEADER = struct.Struct("<5Q")
_FLOAT = struct.Struct("<d")
_LENGTH = struct.Struct("<I")
TSV_COLUMNS = ("lambda", "alpha", "source_a", "source_b", "positive", "neutral", "negative")


def _matrix_bytes(matrix: np.ndarray) -> bytes:
    return np.ascontiguousarray(matrix, dtype="<f8").tobytes(order="C")


def render_mixup_bin(records: Sequence[MixupRecord]) -> bytes:
    """生成二进制mixup文件"""
    if records:
        d, q_l = records[0].left.shape
        q_c = records[0].target.shape[1]
        q_r = records[0].right.shape[1]
    else:
        d = q_l = q_c = q_r = 0

    chunks: List[bytes] = [MAGIC, _HEADER.pack(q_l, q_c, q_r, d, len(records))]
    for record in records:
        if (record.left.shape, record.target.shape, record.right.shape) != ((d, q_l), (d, q_c), (d, q_r)):
            raise MixupError(f"记录形状与文件头不一致: {record.sources}")
        chunks.append(_FLOAT.pack(record.lam))
        for source in record.sources:
            encoded = source.encode("utf-8")
            chunks.append(_LENGTH.pack(len(encoded)))
            chunks.append(encoded)
        chunks.append(_matrix_bytes(record.label))
        for matrix in record.parts:
            chunks.append(_matrix_bytes(matrix))
    return b"".join(chunks)


def write_mixup_bin(records: Sequence[MixupRecord], sink: Optional[BinaryIO] = None) -> bytes:
    data = render_mixup_bin(records)
    if sink is not None:
        sink.write(data)
    return data


@dataclass
class MixupFile:
    """读回的二进制mixup文件"""

    shape: Tuple[int, int, int, int]
    records: List[MixupRecord]


def read_mixup_bin(data: bytes) -> MixupFile:
    """
    解析二进制mixup文件（供下游训练或校验使用）

    Raises:
        MixupError: 文件头或长度不正确
    """
    if not data.startswith(MAGIC):
        raise MixupError("不是mixup二进制文件")
    offset = len(MAGIC)
    q_l, q_c, q_r, d, n = _HEADER.unpack_from(data, offset)
    offset += _HEADER.size

    def take_matrix(rows: int, cols: int) -> np.ndarray:
        nonlocal offset
        size = rows * cols * 8
        if offset + size > len(data):
            raise MixupError("mixup文件被截断")
        matrix = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=offset).reshape(rows, cols)
        offset += size
        return matrix.astype(np.float64)

    records = []
    for _ in range(n):
        (lam,) = _FLOAT.unpack_from(data, offset)
        offset += _FLOAT.size
        sources = []
        for _ in range(2):
            (length,) = _LENGTH.unpack_from(data, offset)
            offset += _LENGTH.size
            sources.append(data[offset:offset + length].decode("utf-8"))
            offset += length
        label = take_matrix(1, 3).reshape(3)
        left = take_matrix(d, q_l)
        target = take_matrix(d, q_c)
        right = take_matrix(d, q_r)
        records.append(MixupRecord(left, target, right, label, lam, (sources[0], sources[1])))
    if offset != len(data):
        raise MixupError("mixup文件末尾有多余数据")
    return MixupFile((q_l, q_c, q_r, d), records)


def render_mixup_tsv(records: Sequence[MixupRecord]) -> str:
    """生成TSV审计文本，浮点数用repr保证可精确还原"""
    lines = ["\t".join(TSV_COLUMNS)]
    for record in records:
        alpha = "" if record.alpha is None else repr(float(record.alpha))
        row = [repr(float(record.lam)), alpha, record.sources[0], record.sources[1]]
        row.extend(repr(float(v)) for v in record.label)
        lines.append("\t".join(row))
    return "".join(line + "\n" for line in lines)


def write_mixup_tsv(records: Sequence[MixupRecord], sink: Optional[TextIO] = None) -> str:
    text = render_mixup_tsv(records)
    if sink is not None:
        sink.write(text)
    return text
