#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
XML输出视图
把观点记录和增强记录写回SemEval形状的XML
"""

import json
from itertools import groupby
from typing import BinaryIO, Iterable, Optional, Union

from lxml import etree

from src.models.record_model import AugmentedRecord, OpinionRecord


Writable = Union[OpinionRecord, AugmentedRecord]


def _unwrap(item: Writable) -> OpinionRecord:
    return item.record if isinstance(item, AugmentedRecord) else item


def render_xml(records: Iterable[Writable]) -> bytes:
    """
    生成XML字节串

    同一句子的连续记录合并为一个sentence元素；增强记录另带
    augmentation / sources / params 三个来源属性

    Args:
        records: 观点记录或增强记录

    Returns:
        UTF-8编码的XML
    """
    root = etree.Element("sentences")

    def sentence_key(item: Writable):
        record = _unwrap(item)
        return record.sentence_id or record.id, record.text

    for (sentence_id, text), group in groupby(records, key=sentence_key):
        group = list(group)
        first = _unwrap(group[0])
        sentence = etree.SubElement(root, "sentence", id=sentence_id)
        for key, value in first.sentence_attrs.items():
            sentence.set(key, value)
        etree.SubElement(sentence, "text").text = text
        opinions = etree.SubElement(sentence, "Opinions")

        for item in group:
            record = _unwrap(item)
            opinion = etree.SubElement(opinions, "Opinion")
            opinion.set("target", record.target)
            opinion.set("category", record.category)
            opinion.set("polarity", record.polarity.value)
            opinion.set("from", str(record.target_from))
            opinion.set("to", str(record.target_to))
            for key, value in record.opinion_attrs.items():
                opinion.set(key, value)
            if isinstance(item, AugmentedRecord):
                opinion.set("augmentation", item.method.value)
                opinion.set("sources", " ".join(item.sources))
                opinion.set("params", json.dumps(item.params, sort_keys=True, ensure_ascii=False))

    return etree.tostring(root, xml_declaration=True, encoding="UTF-8", pretty_print=True)


def write_xml(records: Iterable[Writable], sink: Optional[BinaryIO] = None) -> bytes:
    """
    写XML到sink（二进制文件对象），同时返回字节串

    Args:
        records: 记录
        sink: 可选的输出流

    Returns:
        写出的字节串
    """
    data = render_xml(records)
    if sink is not None:
        sink.write(data)
    return data
