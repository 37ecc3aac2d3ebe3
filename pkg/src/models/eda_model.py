#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
EDA增强模型
同义词替换、随机插入、随机交换、随机删除，全部在目标遮蔽后的句子上进行
"""

import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from src.models.base_model import BaseModel
from src.models.record_model import EDA_METHODS, AugmentedRecord, Method, OpinionRecord
from src.models.wordnet_model import WordNetDb, normalize_lemma, synonyms
from src.utils.errors import ConfigError
from src.utils.rng import record_stream
from src.utils.tokenizer import PLACEHOLDER, MaskedSentence, is_stopword, mask_target, unmask_target


@dataclass(frozen=True)
class EdaConfig:
    """EDA参数"""

    alpha: float = 0.1
    seed: int = 20200601
    methods: Tuple[Method, ...] = EDA_METHODS
    min_one: bool = True  # n = max(1, ⌊α·len⌋)
    single_swap: bool = False
    workers: int = 1
    pass_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha必须在[0,1]内: {self.alpha}")
        if not self.methods:
            raise ConfigError("至少需要启用一种EDA方法")
        unknown = [m for m in self.methods if m not in EDA_METHODS]
        if unknown:
            raise ConfigError(f"不是EDA方法: {', '.join(m.value for m in unknown)}")


def change_count(length: int, alpha: float, min_one: bool = True) -> int:
    """要改动的词数"""
    n = int(alpha * length)
    return max(1, n) if min_one else n


def eligible_positions(tokens: Sequence[str]) -> List[int]:
    """可替换的位置：非停用词、非标点、非占位符"""
    return [i for i, token in enumerate(tokens) if not is_stopword(token)]


def wordnet_synonyms(db: WordNetDb, word: str) -> List[str]:
    """所有词性、所有义项的同义词并集（保持义项顺序，去掉词本身和命中的词条）"""
    lemma, found = db.lookup(word)
    excluded = {normalize_lemma(word)}
    if lemma:
        excluded.add(normalize_lemma(lemma))
    result: List[str] = []
    for synset in found:
        for synonym in synonyms(synset, exclude=lemma):
            if normalize_lemma(synonym) not in excluded and synonym not in result:
                result.append(synonym)
    return result


def _flatten(slots: Sequence[Sequence[str]]) -> Tuple[str, ...]:
    return tuple(token for slot in slots for token in slot)


def synonym_replacement(
    ms: MaskedSentence,
    db: WordNetDb,
    alpha: float,
    rng: random.Random,
    min_one: bool = True,
) -> MaskedSentence:
    """
    同义词替换

    Args:
        ms: 遮蔽后的句子
        db: WordNet
        alpha: 改动比例
        rng: 随机流
        min_one: 是否至少改动一个词

    Returns:
        新句子；多词同义词原地展开
    """
    n = change_count(len(ms.tokens), alpha, min_one)
    if n == 0:
        return ms

    slots: List[List[str]] = [[token] for token in ms.tokens]
    candidates = eligible_positions(ms.tokens)
    rng.shuffle(candidates)

    replaced = 0
    for i in candidates:
        options = wordnet_synonyms(db, ms.tokens[i])
        if not options:
            continue
        slots[i] = rng.choice(options).split()
        replaced += 1
        if replaced >= n:
            break
    return ms.with_tokens(_flatten(slots))


def random_insertion(
    ms: MaskedSentence,
    db: WordNetDb,
    alpha: float,
    rng: random.Random,
    min_one: bool = True,
    synonym_source: Optional[Callable[[List[str], int], List[str]]] = None,
    max_tries: int = 10,
) -> MaskedSentence:
    """
    随机插入：随机选一个可替换词，取其随机同义词插到随机位置

    Args:
        synonym_source: (tokens, 位置) -> 同义词列表，默认为全部义项的同义词

    Returns:
        新句子，占位符保持为一个整体
    """
    n = change_count(len(ms.tokens), alpha, min_one)
    tokens = list(ms.tokens)
    source = synonym_source or (lambda toks, i: wordnet_synonyms(db, toks[i]))

    for _ in range(n):
        candidates = eligible_positions(tokens)
        if not candidates:
            break
        for _ in range(max_tries):
            options = source(tokens, rng.choice(candidates))
            if options:
                synonym = rng.choice(options).split()
                position = rng.randrange(len(tokens) + 1)
                tokens[position:position] = synonym
                break
    return ms.with_tokens(tokens)


def random_swap(
    ms: MaskedSentence,
    alpha: float,
    rng: random.Random,
    min_one: bool = True,
    single_swap: bool = False,
) -> MaskedSentence:
    """随机交换两个不同位置的token（占位符作为整体参与）"""
    tokens = list(ms.tokens)
    if len(tokens) < 2:
        return ms

    n = 1 if single_swap else change_count(len(tokens), alpha, min_one)
    for _ in range(n):
        i = rng.randrange(len(tokens))
        j = rng.randrange(len(tokens) - 1)
        if j >= i:
            j += 1
        tokens[i], tokens[j] = tokens[j], tokens[i]
    return ms.with_tokens(tokens)


def random_deletion(ms: MaskedSentence, alpha: float, rng: random.Random) -> MaskedSentence:
    """
    随机删除：每个非占位符token以概率alpha删除，占位符永不删除；
    若全部被删，随机保留一个
    """
    others = [i for i, token in enumerate(ms.tokens) if token != PLACEHOLDER]
    if not others or alpha <= 0:
        return ms

    kept = {i for i in others if rng.random() >= alpha}
    if not kept:
        kept = {rng.choice(others)}
    return ms.with_tokens(
        token for i, token in enumerate(ms.tokens) if token == PLACEHOLDER or i in kept
    )


def augmented_sentence_id(record: OpinionRecord, method: Method, pass_index: int = 0) -> str:
    suffix = f"~{method.value}"
    if pass_index:
        suffix += f"~p{pass_index}"
    return f"{record.id}{suffix}"


def build_augmented(
    record: OpinionRecord,
    method: Method,
    masked: MaskedSentence,
    result: MaskedSentence,
    params: Dict,
    pass_index: int = 0,
) -> AugmentedRecord:
    """把遮蔽句子还原为增强记录；未改动时保留原文并标记noop"""
    sentence_id = augmented_sentence_id(record, method, pass_index)
    params = dict(params)
    if result.tokens == masked.tokens:
        params["noop"] = True
        new_record = record.with_text(sentence_id, record.text, record.target,
                                      record.target_from, record.target_to)
    else:
        params["noop"] = False
        text, start, end = unmask_target(result)
        new_record = record.with_text(sentence_id, text, record.target, start, end)
    return AugmentedRecord(new_record.validate(), method, (record.id,), params)


class EdaAugmenter(BaseModel):
    """原始EDA（适配方面级情感分析）"""

    def __init__(self, db: Optional[WordNetDb], config: EdaConfig):
        super().__init__()
        self.db = db
        self.config = config
        if self.db is None and any(m in (Method.SR, Method.RI) for m in config.methods):
            raise ConfigError("同义词替换/随机插入需要WordNet")

    @property
    def methods(self) -> List[Method]:
        return [m for m in EDA_METHODS if m in self.config.methods]

    def apply(self, method: Method, ms: MaskedSentence, rng: random.Random) -> MaskedSentence:
        cfg = self.config
        if method is Method.SR:
            return synonym_replacement(ms, self.db, cfg.alpha, rng, cfg.min_one)
        if method is Method.RI:
            return random_insertion(ms, self.db, cfg.alpha, rng, cfg.min_one)
        if method is Method.RS:
            return random_swap(ms, cfg.alpha, rng, cfg.min_one, cfg.single_swap)
        return random_deletion(ms, cfg.alpha, rng)

    def augment_record(self, record: OpinionRecord) -> List[AugmentedRecord]:
        """单条记录按 sr, ri, rs, rd 顺序各生成一条"""
        cfg = self.config
        outputs = []
        for method in self.methods:
            def run(method=method):
                rng = record_stream(cfg.seed, record.id, method.value, cfg.pass_index)
                masked = mask_target(record)
                result = self.apply(method, masked, rng)
                params = {"alpha": cfg.alpha, "seed": cfg.seed, "pass": cfg.pass_index}
                return build_augmented(record, method, masked, result, params, cfg.pass_index)

            augmented = self.guarded(record.id, method.value, run)
            if augmented is not None:
                outputs.append(augmented)
        return outputs

    def augment(self, records: Sequence[OpinionRecord]) -> List[AugmentedRecord]:
        """
        对语料做EDA

        Returns:
            每条记录每种方法一条，全部启用时为 4·N 条
        """
        records = self.explicit_records(records, [m.value for m in self.methods])
        self.logger.info(f"EDA开始: {len(records)} 条记录, 方法 {[m.value for m in self.methods]}")
        per_record = self.map_records(self.augment_record, records, self.config.workers)
        outputs = [item for items in per_record for item in items]
        for item in outputs:
            self.emitted(item)
        self.logger.info(f"EDA完成: 生成 {len(outputs)} 条")
        return outputs


def eda_augment(records: Sequence[OpinionRecord], db: Optional[WordNetDb], config: EdaConfig) -> List[AugmentedRecord]:
    return EdaAugmenter(db, config).augment(records)
