#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
语料模型
解析SemEval 2015/2016风格的标注XML，并计算语料统计
"""

from collections import Counter
from pathlib import Path
from typing import List, Sequence, Union

from lxml import etree

from src.models.record_model import (
    IMPLICIT_TARGET,
    OpinionRecord,
    POLARITY_ORDER,
    Polarity,
    StatsReport,
)
from src.utils.errors import CorpusParseError, RecordValidationError
from src.utils.logger import LoggerMixin


# Opinion上由本模型解释的属性，其余属性原样保留
OPINION_FIELDS = ("target", "category", "polarity", "from", "to")
# 写回时由增强记录重新生成的属性
PROVENANCE_FIELDS = ("augmentation", "sources", "params")


class CorpusModel(LoggerMixin):
    """语料解析与统计"""

    def __init__(self, keep_implicit: bool = False):
        """
        初始化语料模型

        Args:
            keep_implicit: 是否保留 target="NULL" 的隐式观点（默认跳过）
        """
        self.keep_implicit = keep_implicit
        self.implicit_skipped = 0

    def parse(self, data: bytes) -> List[OpinionRecord]:
        """
        解析XML文档，每个Opinion生成一条记录

        Args:
            data: XML字节串

        Returns:
            按文档顺序排列的记录列表
        """
        parser = etree.XMLParser(resolve_entities=False, no_network=True)
        try:
            root = etree.fromstring(data, parser=parser)
        except etree.XMLSyntaxError as e:
            line, column = e.position if e.position else (e.lineno, None)
            raise CorpusParseError(f"XML格式错误: {e.msg}", line, column) from e

        records: List[OpinionRecord] = []
        invalid: List[str] = []
        reasons: List[str] = []
        self.implicit_skipped = 0

        for sentence in root.iter("sentence"):
            sentence_id = sentence.get("id", f"s{len(records)}")
            text_el = sentence.find("text")
            text = text_el.text if text_el is not None and text_el.text else ""
            sentence_attrs = {k: v for k, v in sentence.attrib.items() if k != "id"}

            index = 0
            for opinion in sentence.iter("Opinion"):
                target = opinion.get("target", "")
                if target == IMPLICIT_TARGET and not self.keep_implicit:
                    self.implicit_skipped += 1
                    continue

                record_id = f"{sentence_id}#{index}"
                index += 1
                try:
                    polarity = Polarity.parse(opinion.get("polarity", ""))
                    start = int(opinion.get("from", "-1"))
                    end = int(opinion.get("to", "-1"))
                except ValueError as e:
                    invalid.append(record_id)
                    reasons.append(str(e))
                    continue

                record = OpinionRecord(
                    id=record_id,
                    text=text,
                    target=target,
                    target_from=start,
                    target_to=end,
                    category=opinion.get("category", ""),
                    polarity=polarity,
                    sentence_id=sentence_id,
                    opinion_attrs={
                        k: v for k, v in opinion.attrib.items()
                        if k not in OPINION_FIELDS and k not in PROVENANCE_FIELDS
                    },
                    sentence_attrs=sentence_attrs,
                )
                if self.keep_implicit and target == IMPLICIT_TARGET:
                    records.append(record)
                    continue

                problems = record.problems()
                if problems:
                    invalid.append(record_id)
                    reasons.extend(problems)
                    continue
                records.append(record)

        if invalid:
            raise RecordValidationError(f"记录校验失败 ({'; '.join(sorted(set(reasons)))})", invalid)

        if self.implicit_skipped:
            self.logger.info(f"跳过隐式目标观点 {self.implicit_skipped} 条")
        self.logger.info(f"解析得到 {len(records)} 条观点记录")
        return records

    def load(self, path: Union[str, Path]) -> List[OpinionRecord]:
        """从文件读取并解析"""
        try:
            data = Path(path).read_bytes()
        except OSError as e:
            raise CorpusParseError(f"无法读取语料文件 {path}: {e.strerror or e}")
        return self.parse(data)


def parse_semeval_xml(data: bytes, keep_implicit: bool = False) -> List[OpinionRecord]:
    """解析SemEval XML字节串"""
    return CorpusModel(keep_implicit=keep_implicit).parse(data)


def load_corpus(path: Union[str, Path], keep_implicit: bool = False) -> List[OpinionRecord]:
    """从路径读取SemEval XML"""
    return CorpusModel(keep_implicit=keep_implicit).load(path)


def dataset_stats(records: Sequence[OpinionRecord]) -> StatsReport:
    """
    统计极性和类别分布

    Args:
        records: 观点记录

    Returns:
        StatsReport，百分比为四舍五入的整数
    """
    total = len(records)
    polarity = Counter(record.polarity for record in records)
    categories = Counter(record.category for record in records)

    report = StatsReport(total=total)
    for pol in POLARITY_ORDER:
        count = polarity.get(pol, 0)
        report.polarity_counts[pol.value] = count
        report.polarity_percentages[pol.value] = round(100 * count / total) if total else 0

    # 按数量降序，数量相同按名称
    for category, count in sorted(categories.items(), key=lambda item: (-item[1], item[0])):
        report.category_counts[category] = count
    return report
