#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
调整版EDA模型
基于词义消歧的同义词替换/随机插入，以及同类别记录之间的目标交换
"""

import random
from collections import OrderedDict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from src.models.base_model import BaseModel
from src.models.eda_model import (
    augmented_sentence_id,
    build_augmented,
    change_count,
    eligible_positions,
)
from src.models.lesk_model import LeskDisambiguator, LeskQuery, SenseChoice, build_context
from src.models.record_model import ADJUSTED_METHODS, AugmentedRecord, Method, OpinionRecord
from src.models.tagger_model import PerceptronTagger, TaggedToken
from src.models.wordnet_model import WordNetDb, normalize_lemma, synonyms
from src.utils.errors import ConfigError, SenseNotFoundError
from src.utils.rng import derive_seed, record_stream
from src.utils.tokenizer import MaskedSentence, mask_target


@dataclass(frozen=True)
class AdjustedEdaConfig:
    """调整版EDA参数"""

    alpha: float = 0.1
    seed: int = 20200601
    methods: Tuple[Method, ...] = ADJUSTED_METHODS
    min_one: bool = True
    shuffle_pairs: bool = False
    lesk_drop_stopwords: bool = True
    workers: int = 1
    pass_index: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ConfigError(f"alpha必须在[0,1]内: {self.alpha}")
        if not self.methods:
            raise ConfigError("至少需要启用一种调整版EDA方法")
        unknown = [m for m in self.methods if m not in ADJUSTED_METHODS]
        if unknown:
            raise ConfigError(f"不是调整版EDA方法: {', '.join(m.value for m in unknown)}")


class _SenseContext:
    """一条记录的标注结果、上下文和消歧缓存"""

    def __init__(self, masked: MaskedSentence, tagger: PerceptronTagger, lesk: LeskDisambiguator):
        self.masked = masked
        self.tagged: List[TaggedToken] = tagger.tag(masked.tokens)
        self.lesk = lesk
        self._cache: Dict[int, Optional[SenseChoice]] = {}

    def sense_at(self, i: int) -> Optional[SenseChoice]:
        """位置i的词义，查不到返回None"""
        if i not in self._cache:
            word = self.masked.tokens[i]
            context = build_context(self.masked.tokens, word, self.lesk.drop_stopwords)
            query = LeskQuery(word, context, self.tagged[i].wn_pos)
            try:
                self._cache[i] = self.lesk.disambiguate(query, self.tagged)
            except SenseNotFoundError:
                self._cache[i] = None
        return self._cache[i]

    def synonyms_at(self, i: int) -> List[str]:
        """位置i的词在所选义项中的同义词（不含词本身）"""
        choice = self.sense_at(i)
        if choice is None:
            return []
        word = normalize_lemma(self.masked.tokens[i])
        return [
            s for s in synonyms(choice.synset, exclude=choice.lemma)
            if normalize_lemma(s) != word
        ]


def _sense_log(ctx: _SenseContext, i: int, synonym: str) -> Dict[str, object]:
    choice = ctx.sense_at(i)
    return {
        "word": ctx.masked.tokens[i],
        "synset": choice.synset.id,
        "synonym": synonym,
        "overlap": choice.overlap,
        "fallback": choice.fallback_used,
    }


def _replace_with_senses(
    ctx: _SenseContext, alpha: float, rng: random.Random, min_one: bool
) -> Tuple[MaskedSentence, List[Dict[str, object]]]:
    tokens = ctx.masked.tokens
    n = change_count(len(tokens), alpha, min_one)
    slots: List[List[str]] = [[token] for token in tokens]
    log: List[Dict[str, object]] = []
    if n == 0:
        return ctx.masked, log

    candidates = eligible_positions(tokens)
    rng.shuffle(candidates)
    for i in candidates:
        options = ctx.synonyms_at(i)
        if not options:
            continue
        synonym = rng.choice(options)
        slots[i] = synonym.split()
        log.append(_sense_log(ctx, i, synonym))
        if len(log) >= n:
            break
    return ctx.masked.with_tokens(tuple(t for slot in slots for t in slot)), log


def _insert_with_senses(
    ctx: _SenseContext, alpha: float, rng: random.Random, min_one: bool, max_tries: int = 10
) -> Tuple[MaskedSentence, List[Dict[str, object]]]:
    tokens = list(ctx.masked.tokens)
    n = change_count(len(tokens), alpha, min_one)
    candidates = eligible_positions(ctx.masked.tokens)
    log: List[Dict[str, object]] = []
    if not candidates:
        return ctx.masked, log

    for _ in range(n):
        # 选中的词没有可用同义词时换一个词重试
        for _ in range(max_tries):
            i = rng.choice(candidates)
            options = ctx.synonyms_at(i)
            if not options:
                continue
            synonym = rng.choice(options)
            position = rng.randrange(len(tokens) + 1)
            tokens[position:position] = synonym.split()
            log.append(_sense_log(ctx, i, synonym))
            break
    return ctx.masked.with_tokens(tokens), log


def swap_target(record: OpinionRecord, partner: OpinionRecord, sentence_id: str) -> OpinionRecord:
    """把record中的目标替换为partner的目标，保持原大小写"""
    start = record.target_from
    text = record.text[:start] + partner.target + record.text[record.target_to:]
    return record.with_text(sentence_id, text, partner.target, start, start + len(partner.target))


def target_swap(
    records: Sequence[OpinionRecord],
    shuffle_pairs: bool = False,
    seed: int = 20200601,
    pass_index: int = 0,
) -> List[AugmentedRecord]:
    """
    同类别目标交换

    每个类别内按记录ID排序（或按种子打乱）后两两配对，每对互换目标；
    奇数剩余的一条与该类别第一条交换，单条类别与自身交换（标记noop）
    隐式目标记录既不作为交换对象，也不生成输出

    Args:
        records: 语料
        shuffle_pairs: 是否按种子打乱配对顺序
        seed: 打乱用种子

    Returns:
        与输入的显式目标记录一一对应、顺序一致的增强记录
    """
    records = [r for r in records if not r.is_implicit]
    categories: "OrderedDict[str, List[OpinionRecord]]" = OrderedDict()
    for record in records:
        categories.setdefault(record.category, []).append(record)

    partner_of: Dict[str, OpinionRecord] = {}
    for category, members in categories.items():
        members = sorted(members, key=lambda r: r.id)
        if shuffle_pairs:
            random.Random(derive_seed(seed, "ts", category, pass_index)).shuffle(members)
        for k in range(0, len(members) - 1, 2):
            a, b = members[k], members[k + 1]
            partner_of[a.id] = b
            partner_of[b.id] = a
        if len(members) % 2:
            partner_of[members[-1].id] = members[0]

    outputs = []
    for record in records:
        partner = partner_of[record.id]
        sentence_id = augmented_sentence_id(record, Method.TS, pass_index)
        params = {"seed": seed, "pass": pass_index, "shuffle_pairs": shuffle_pairs}
        if partner.id == record.id:
            params.update(noop=True, noop_reason="singleton_category")
        else:
            params["noop"] = False
        swapped = swap_target(record, partner, sentence_id).validate()
        outputs.append(AugmentedRecord(swapped, Method.TS, (record.id, partner.id), params))
    return outputs


class AdjustedEdaAugmenter(BaseModel):
    """调整版EDA"""

    def __init__(
        self,
        db: Optional[WordNetDb],
        tagger: Optional[PerceptronTagger],
        config: AdjustedEdaConfig,
    ):
        super().__init__()
        self.db = db
        self.tagger = tagger
        self.config = config
        needs_wsd = any(m in (Method.SR_WSD, Method.RI_WSD) for m in config.methods)
        if needs_wsd and (db is None or tagger is None):
            raise ConfigError("词义消歧方法需要WordNet和词性标注模型")
        self.lesk = LeskDisambiguator(db, config.lesk_drop_stopwords) if db is not None else None

    @property
    def methods(self) -> List[Method]:
        return [m for m in ADJUSTED_METHODS if m in self.config.methods]

    def _sense_method(self, record: OpinionRecord, method: Method) -> AugmentedRecord:
        cfg = self.config
        rng = record_stream(cfg.seed, record.id, method.value, cfg.pass_index)
        masked = mask_target(record)
        ctx = _SenseContext(masked, self.tagger, self.lesk)
        if method is Method.SR_WSD:
            result, log = _replace_with_senses(ctx, cfg.alpha, rng, cfg.min_one)
        else:
            result, log = _insert_with_senses(ctx, cfg.alpha, rng, cfg.min_one)
        params = {"alpha": cfg.alpha, "seed": cfg.seed, "pass": cfg.pass_index, "senses": log}
        augmented = build_augmented(record, method, masked, result, params, cfg.pass_index)
        if augmented.noop:
            augmented.params["noop_reason"] = "no_synonyms"
        return augmented

    def adjusted_synonym_replacement(self, record: OpinionRecord) -> AugmentedRecord:
        return self._sense_method(record, Method.SR_WSD)

    def adjusted_random_insertion(self, record: OpinionRecord) -> AugmentedRecord:
        return self._sense_method(record, Method.RI_WSD)

    def augment(self, records: Sequence[OpinionRecord]) -> List[AugmentedRecord]:
        """
        对语料做调整版EDA

        Returns:
            每条记录按 sr_wsd, ri_wsd, ts 顺序各一条，全部启用时为 3·N 条
        """
        cfg = self.config
        methods = self.methods
        records = self.explicit_records(records, [m.value for m in methods])
        self.logger.info(f"调整版EDA开始: {len(records)} 条记录, 方法 {[m.value for m in methods]}")

        swaps: Dict[str, AugmentedRecord] = {}
        if Method.TS in methods:
            # 目标交换需要整个类别的视图，不能逐记录并行
            for item in target_swap(records, cfg.shuffle_pairs, cfg.seed, cfg.pass_index):
                swaps[item.sources[0]] = item

        def per_record(record: OpinionRecord) -> List[AugmentedRecord]:
            outputs = []
            for method in methods:
                if method is Method.TS:
                    outputs.append(swaps[record.id])
                    continue
                augmented = self.guarded(record.id, method.value, lambda m=method: self._sense_method(record, m))
                if augmented is not None:
                    outputs.append(augmented)
            return outputs

        results = self.map_records(per_record, records, cfg.workers)
        outputs = [item for items in results for item in items]
        for item in outputs:
            self.emitted(item)
        self.logger.info(f"调整版EDA完成: 生成 {len(outputs)} 条")
        return outputs


def adjusted_synonym_replacement(
    record: OpinionRecord,
    db: WordNetDb,
    tagger: PerceptronTagger,
    alpha: float,
    rng: random.Random,
    drop_stopwords: bool = True,
) -> AugmentedRecord:
    """用给定随机流做一次基于消歧的同义词替换"""
    masked = mask_target(record)
    ctx = _SenseContext(masked, tagger, LeskDisambiguator(db, drop_stopwords))
    result, log = _replace_with_senses(ctx, alpha, rng, True)
    return build_augmented(record, Method.SR_WSD, masked, result, {"alpha": alpha, "senses": log})


def adjusted_random_insertion(
    record: OpinionRecord,
    db: WordNetDb,
    tagger: PerceptronTagger,
    alpha: float,
    rng: random.Random,
    drop_stopwords: bool = True,
) -> AugmentedRecord:
    """用给定随机流做一次基于消歧的随机插入"""
    masked = mask_target(record)
    ctx = _SenseContext(masked, tagger, LeskDisambiguator(db, drop_stopwords))
    result, log = _insert_with_senses(ctx, alpha, rng, True)
    return build_augmented(record, Method.RI_WSD, masked, result, {"alpha": alpha, "senses": log})


def adjusted_eda_augment(
    records: Sequence[OpinionRecord],
    db: Optional[WordNetDb],
    tagger: Optional[PerceptronTagger],
    config: AdjustedEdaConfig,
) -> List[AugmentedRecord]:
    return AdjustedEdaAugmenter(db, tagger, config).augment(records)
