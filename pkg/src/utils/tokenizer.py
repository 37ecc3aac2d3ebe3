#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
分词与目标遮蔽
所有增强方法都在目标被替换为单个占位符 $t$ 的句子上操作
"""

import re
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, FrozenSet, List, Optional, Sequence, Tuple

from src.utils.errors import MaskingError

if TYPE_CHECKING:
    from src.models.record_model import OpinionRecord


PLACEHOLDER = "$t$"

STOPWORDS_FILE = Path(__file__).parent.parent.parent / "resources" / "stopwords.txt"

# 占位符优先匹配，保证它永远不会被拆开
_TOKEN_RE = re.compile(r"\$t\$|\w+(?:[-'’]\w+)*|[^\w\s]")

_NO_SPACE_BEFORE = {".", ",", "!", "?", ";", ":", ")", "]", "}", "%", "…"}
_NO_SPACE_AFTER = {"(", "[", "{", "$", "#"}


@dataclass(frozen=True)
class MaskedSentence:
    """目标被遮蔽的句子"""

    tokens: Tuple[str, ...]
    target: str

    @property
    def placeholder_index(self) -> int:
        return self.tokens.index(PLACEHOLDER)

    def with_tokens(self, tokens: Sequence[str]) -> "MaskedSentence":
        return MaskedSentence(tuple(tokens), self.target)


@dataclass(frozen=True)
class ContextTriple:
    """左上下文 / 目标 / 右上下文"""

    left: Tuple[str, ...]
    target: Tuple[str, ...]
    right: Tuple[str, ...]

    def tokens(self) -> List[str]:
        return [*self.left, *self.target, *self.right]


def tokenize(text: str) -> List[str]:
    """
    按空白切分并拆出标点，保留原大小写

    Args:
        text: 任意字符串

    Returns:
        token列表
    """
    return _TOKEN_RE.findall(text)


def detokenize_with_spans(tokens: Sequence[str]) -> Tuple[str, List[Tuple[int, int]]]:
    """
    拼接token并返回每个token在结果中的字符区间

    Returns:
        (文本, [(起, 止), ...])
    """
    parts: List[str] = []
    spans: List[Tuple[int, int]] = []
    position = 0
    previous: Optional[str] = None

    for token in tokens:
        if previous is not None and token not in _NO_SPACE_BEFORE and previous not in _NO_SPACE_AFTER:
            parts.append(" ")
            position += 1
        spans.append((position, position + len(token)))
        parts.append(token)
        position += len(token)
        previous = token

    return "".join(parts), spans


def detokenize(tokens: Sequence[str]) -> str:
    return detokenize_with_spans(tokens)[0]


def mask_target(record: "OpinionRecord") -> MaskedSentence:
    """
    用占位符替换目标后再分词

    Args:
        record: 观点记录

    Returns:
        MaskedSentence
    """
    start, end = record.target_from, record.target_to
    if record.text[start:end] != record.target or not record.target:
        raise MaskingError(f"目标不在记录的偏移处: id={record.id}, target={record.target!r}")

    masked = record.text[:start] + PLACEHOLDER + record.text[end:]
    tokens = tokenize(masked)
    if tokens.count(PLACEHOLDER) != 1:
        raise MaskingError(f"句子中已含有占位符 {PLACEHOLDER}: id={record.id}")

    return MaskedSentence(tuple(tokens), record.target)


def unmask_target(ms: MaskedSentence, new_target: Optional[str] = None) -> Tuple[str, int, int]:
    """
    把占位符换回目标表达

    Args:
        ms: 遮蔽后的句子
        new_target: 替换用的新目标，默认为原目标

    Returns:
        (文本, 目标起始偏移, 目标结束偏移)
    """
    count = ms.tokens.count(PLACEHOLDER)
    if count != 1:
        raise MaskingError(f"占位符数量应为1，实际为{count}")

    target = ms.target if new_target is None else new_target
    index = ms.placeholder_index
    tokens = list(ms.tokens)
    tokens[index] = target

    text, spans = detokenize_with_spans(tokens)
    start, end = spans[index]
    return text, start, end


def split_context(record: "OpinionRecord") -> ContextTriple:
    """把记录切分为左上下文、目标、右上下文三段token"""
    return ContextTriple(
        left=tuple(tokenize(record.text[:record.target_from])),
        target=tuple(tokenize(record.target)),
        right=tuple(tokenize(record.text[record.target_to:])),
    )


@lru_cache(maxsize=None)
def load_stopwords(path: Optional[str] = None) -> FrozenSet[str]:
    """读取停用词表（每行一个，#开头为注释）"""
    source = Path(path) if path else STOPWORDS_FILE
    words = set()
    with open(source, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return frozenset(words)


def is_punctuation(token: str) -> bool:
    return bool(token) and not any(ch.isalnum() for ch in token)


def is_stopword(token: str) -> bool:
    """停用词、占位符和纯标点都不参与替换"""
    if token == PLACEHOLDER or not token or is_punctuation(token):
        return True
    return token.lower() in load_stopwords()
