#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
简化Lesk词义消歧
选择签名（释义+例句）与句子上下文重叠最多的同义词集
"""

from dataclasses import dataclass
from typing import AbstractSet, FrozenSet, Iterable, Optional, Sequence

from src.models.tagger_model import TaggedToken
from src.models.wordnet_model import Synset, WnPos, WordNetDb, signature
from src.utils.errors import SenseNotFoundError
from src.utils.tokenizer import PLACEHOLDER, is_punctuation, is_stopword


@dataclass(frozen=True)
class LeskQuery:
    """消歧请求"""

    word: str
    context: FrozenSet[str]
    pos: Optional[WnPos] = None


@dataclass(frozen=True)
class SenseChoice:
    """消歧结果"""

    synset: Synset
    overlap: int
    fallback_used: bool
    lemma: str


def build_context(
    tokens: Iterable[str],
    word: Optional[str] = None,
    drop_stopwords: bool = True,
) -> FrozenSet[str]:
    """
    由整句构造上下文集合：小写，去标点、占位符和待消歧词本身

    Args:
        tokens: 原句token
        word: 待消歧的词
        drop_stopwords: 是否同时去停用词（与签名一致）

    Returns:
        上下文词集合
    """
    excluded = word.lower() if word else None
    context = set()
    for token in tokens:
        if token == PLACEHOLDER or is_punctuation(token) or token.lower() == excluded:
            continue
        if drop_stopwords and is_stopword(token):
            continue
        context.add(token.lower())
    return frozenset(context)


def overlap(sig: AbstractSet[str], context: AbstractSet[str]) -> int:
    """|signature ∩ context|"""
    return len(sig & context)


class LeskDisambiguator:
    """简化Lesk消歧器"""

    def __init__(self, db: WordNetDb, drop_stopwords: bool = True):
        """
        Args:
            db: WordNet数据库
            drop_stopwords: 签名和上下文是否去停用词（--lesk-stopwords drop/keep）
        """
        self.db = db
        self.drop_stopwords = drop_stopwords

    def disambiguate(
        self,
        query: LeskQuery,
        tagged: Optional[Sequence[TaggedToken]] = None,
    ) -> SenseChoice:
        """
        按重叠度选择义项

        初始为最常用义项、最大重叠为0，只有严格更大的重叠才替换，
        因此全零时回退到最常用义项，正重叠的平局由排名更靠前者获胜

        Args:
            query: 消歧请求
            tagged: 原句标注结果，query未给词性时从中取词性

        Returns:
            SenseChoice
        """
        pos = query.pos
        if pos is None and tagged:
            for item in tagged:
                if item.token.lower() == query.word.lower() and item.wn_pos is not None:
                    pos = item.wn_pos
                    break

        lemma, candidates = self.db.lookup(query.word, pos)
        pos_filtered = True
        if not candidates:
            # 没有同词性的义项时放宽词性
            lemma, candidates = self.db.lookup(query.word, None)
            pos_filtered = pos is None
        if not candidates:
            raise SenseNotFoundError(query.word)

        best = candidates[0]
        best_overlap = 0
        for synset in candidates:
            score = overlap(signature(synset, self.drop_stopwords), query.context)
            if score > best_overlap:
                best, best_overlap = synset, score

        return SenseChoice(
            synset=best,
            overlap=best_overlap,
            fallback_used=best_overlap == 0 or not pos_filtered,
            lemma=lemma,
        )


def disambiguate(
    db: WordNetDb,
    tagged: Optional[Sequence[TaggedToken]],
    query: LeskQuery,
    drop_stopwords: bool = True,
) -> SenseChoice:
    return LeskDisambiguator(db, drop_stopwords).disambiguate(query, tagged)
