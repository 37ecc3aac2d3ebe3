#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
记录数据模型
观点记录、增强记录与统计报告
"""

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Tuple

from src.utils.errors import RecordValidationError


CATEGORY_PATTERN = re.compile(r"^[A-Z_]+#[A-Z_]+$")

# 没有显式方面词的观点
IMPLICIT_TARGET = "NULL"


class Polarity(str, Enum):
    """情感极性，one-hot顺序固定为 (positive, neutral, negative)"""

    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"

    @property
    def position(self) -> int:
        return POLARITY_ORDER.index(self)

    @property
    def score(self) -> int:
        """三行格式中的编码 1/0/-1"""
        return {Polarity.POSITIVE: 1, Polarity.NEUTRAL: 0, Polarity.NEGATIVE: -1}[self]

    @classmethod
    def parse(cls, value: str) -> "Polarity":
        try:
            return cls(value.strip().lower())
        except (ValueError, AttributeError):
            raise ValueError(f"未知极性: {value!r}")


POLARITY_ORDER: Tuple[Polarity, ...] = (Polarity.POSITIVE, Polarity.NEUTRAL, Polarity.NEGATIVE)


class Method(str, Enum):
    """增强方法标签"""

    SR = "sr"
    RI = "ri"
    RS = "rs"
    RD = "rd"
    SR_WSD = "sr_wsd"
    RI_WSD = "ri_wsd"
    TS = "ts"
    BT_NL = "bt_nl"
    BT_ES = "bt_es"
    BT_JA = "bt_ja"
    MIXUP = "mixup"

    @property
    def pairwise(self) -> bool:
        """目标交换和mixup来源于两条记录"""
        return self in (Method.TS, Method.MIXUP)

    @classmethod
    def backtranslation(cls, lang: str) -> "Method":
        return cls(f"bt_{lang}")


EDA_METHODS = (Method.SR, Method.RI, Method.RS, Method.RD)
ADJUSTED_METHODS = (Method.SR_WSD, Method.RI_WSD, Method.TS)


@dataclass(frozen=True)
class OpinionRecord:
    """一条带标注的训练实例（一个句子中的一个观点）"""

    id: str
    text: str
    target: str
    target_from: int
    target_to: int
    category: str
    polarity: Polarity
    sentence_id: str = ""
    # 未识别的XML属性，写回时原样保留
    opinion_attrs: Dict[str, str] = field(default_factory=dict, compare=False)
    sentence_attrs: Dict[str, str] = field(default_factory=dict, compare=False)

    @property
    def is_implicit(self) -> bool:
        return self.target == IMPLICIT_TARGET

    def problems(self) -> List[str]:
        """返回不满足的约束描述，空列表表示合法"""
        issues = []
        if self.text[self.target_from:self.target_to] != self.target:
            issues.append("目标与偏移不一致")
        if not self.target:
            issues.append("目标为空")
        if not isinstance(self.polarity, Polarity):
            issues.append("未知极性")
        if not CATEGORY_PATTERN.match(self.category or ""):
            issues.append(f"类别格式错误: {self.category}")
        return issues

    def validate(self) -> "OpinionRecord":
        issues = self.problems()
        if issues:
            raise RecordValidationError("; ".join(issues), [self.id])
        return self

    def with_text(self, sentence_id: str, text: str, target: str, start: int, end: int) -> "OpinionRecord":
        """生成新句子的记录（单观点句子），类别和极性不变"""
        return replace(
            self,
            id=f"{sentence_id}#0",
            sentence_id=sentence_id,
            text=text,
            target=target,
            target_from=start,
            target_to=end,
        )


@dataclass(frozen=True)
class AugmentedRecord:
    """增强记录：新的观点记录加上来源信息"""

    record: OpinionRecord
    method: Method
    sources: Tuple[str, ...]
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not self.sources:
            raise RecordValidationError("来源列表为空", [self.record.id])
        if (len(self.sources) == 2) != self.method.pairwise:
            raise RecordValidationError(
                f"方法 {self.method.value} 的来源数量错误: {len(self.sources)}", [self.record.id]
            )

    @property
    def noop(self) -> bool:
        return bool(self.params.get("noop", False))


@dataclass
class StatsReport:
    """语料统计"""

    total: int = 0
    polarity_counts: Dict[str, int] = field(default_factory=dict)
    polarity_percentages: Dict[str, int] = field(default_factory=dict)
    category_counts: Dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "total": self.total,
            "polarity": {
                name: {"count": self.polarity_counts[name], "percent": self.polarity_percentages[name]}
                for name in self.polarity_counts
            },
            "categories": dict(self.category_counts),
        }


@dataclass
class RunReport:
    """一次运行的报告，emitted 恒等于各方法计数之和（原始记录计为 original）"""

    command: str = ""
    input_count: int = 0
    per_method: Dict[str, int] = field(default_factory=dict)
    noops: Dict[str, Dict[str, int]] = field(default_factory=dict)
    skips: Dict[str, Dict[str, int]] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)
    wall_time: float = 0.0
    exit_code: int = 0

    @property
    def emitted(self) -> int:
        return sum(self.per_method.values())

    @property
    def skipped(self) -> int:
        return sum(sum(reasons.values()) for reasons in self.skips.values())

    def count(self, method: str, amount: int = 1) -> None:
        self.per_method[method] = self.per_method.get(method, 0) + amount

    def count_noop(self, method: str, reason: str) -> None:
        reasons = self.noops.setdefault(method, {})
        reasons[reason] = reasons.get(reason, 0) + 1

    def count_skip(self, method: str, reason: str) -> None:
        reasons = self.skips.setdefault(method, {})
        reasons[reason] = reasons.get(reason, 0) + 1

    def to_dict(self, include_time: bool = True) -> Dict[str, Any]:
        data = {
            "command": self.command,
            "input_count": self.input_count,
            "emitted": self.emitted,
            "per_method": dict(sorted(self.per_method.items())),
            "noops": {k: dict(sorted(v.items())) for k, v in sorted(self.noops.items())},
            "skips": {k: dict(sorted(v.items())) for k, v in sorted(self.skips.items())},
            "errors": list(self.errors),
            "config": self.config,
            "exit_code": self.exit_code,
        }
        if include_time:
            data["wall_time"] = round(self.wall_time, 3)
        return data
