#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
三行格式输出视图
每条记录三行：目标替换为 $T$ 的句子、目标、极性编码（1/0/-1）
"""

from typing import Iterable, List, Optional, TextIO

from src.models.record_model import AugmentedRecord, OpinionRecord
from src.utils.errors import RecordValidationError


TRIPLE_PLACEHOLDER = "$T$"


def render_triples(records: Iterable) -> str:
    """生成三行格式文本（LF换行，结尾带换行），隐式目标记录无法标出目标，不输出"""
    lines: List[str] = []
    for item in records:
        record: OpinionRecord = item.record if isinstance(item, AugmentedRecord) else item
        if record.is_implicit:
            continue
        start, end = record.target_from, record.target_to
        if record.text[start:end] != record.target:
            raise RecordValidationError("目标不在记录的偏移处", [record.id])
        lines.append(record.text[:start] + TRIPLE_PLACEHOLDER + record.text[end:])
        lines.append(record.target)
        lines.append(str(record.polarity.score))
    return "".join(line + "\n" for line in lines)


def write_triple_format(records: Iterable, sink: Optional[TextIO] = None) -> str:
    """
    写三行格式

    Args:
        records: 观点记录或增强记录
        sink: 可选的文本输出流

    Returns:
        写出的文本
    """
    text = render_triples(records)
    if sink is not None:
        sink.write(text)
    return text
