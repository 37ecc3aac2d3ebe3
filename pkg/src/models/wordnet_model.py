#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
WordNet词库模型
直接解析WordNet 3.x的数据库文件（index.* / data.*），提供词条到同义词集的查询

数据文件格式（每行一个同义词集）:
    synset_offset lex_filenum ss_type w_cnt word lex_id [word lex_id...] p_cnt [ptr...] [frames...] | gloss
索引文件格式（每行一个词条）:
    lemma pos synset_cnt p_cnt [ptr_symbol...] sense_cnt tagsense_cnt synset_offset [synset_offset...]
索引中的offset按义项频率排列，第一个即最常用义项
"""

import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple, Union

from src.utils.errors import WordNetLoadError
from src.utils.logger import LoggerMixin
from src.utils.tokenizer import is_punctuation, load_stopwords, tokenize


class WnPos(str, Enum):
    """WordNet词性"""

    NOUN = "noun"
    VERB = "verb"
    ADJECTIVE = "adjective"
    ADVERB = "adverb"

    @property
    def file_suffix(self) -> str:
        return {"noun": "noun", "verb": "verb", "adjective": "adj", "adverb": "adv"}[self.value]

    @property
    def order(self) -> int:
        return POS_ORDER.index(self)


POS_ORDER: Tuple[WnPos, ...] = (WnPos.NOUN, WnPos.VERB, WnPos.ADJECTIVE, WnPos.ADVERB)

_SS_TYPES = {"n": WnPos.NOUN, "v": WnPos.VERB, "a": WnPos.ADJECTIVE, "s": WnPos.ADJECTIVE, "r": WnPos.ADVERB}
_ADJ_MARKER = re.compile(r"\((?:a|p|ip)\)$")
_EXAMPLE = re.compile(r'"([^"]*)"')


@dataclass(frozen=True)
class Synset:
    """同义词集"""

    id: str
    pos: WnPos
    lemmas: Tuple[str, ...]
    gloss: str
    examples: Tuple[str, ...] = ()
    # 词条 -> 义项频率排名（1为最常用）
    sense_rank: Dict[str, int] = field(default_factory=dict, compare=False, hash=False)

    def rank_of(self, lemma: str) -> int:
        return self.sense_rank.get(normalize_lemma(lemma), len(self.sense_rank) + 1)


def normalize_lemma(lemma: str) -> str:
    """索引键：小写，空格转下划线"""
    return lemma.strip().lower().replace(" ", "_")


def _split_gloss(gloss: str) -> Tuple[str, Tuple[str, ...]]:
    """拆分释义和例句"""
    definition = gloss.split('; "', 1)[0]
    if definition.startswith('"'):
        definition = ""
    examples = tuple(example.strip() for example in _EXAMPLE.findall(gloss[len(definition):]))
    return definition.strip().rstrip(";").strip(), examples


class WordNetDb(LoggerMixin):
    """WordNet数据库（加载后只读）"""

    INDEX_FILES = ("index.noun", "index.verb", "index.adj", "index.adv")
    DATA_FILES = ("data.noun", "data.verb", "data.adj", "data.adv")

    def __init__(self, index: Dict[Tuple[str, WnPos], List[Synset]], path: Optional[Path] = None):
        self._index = index
        self.path = path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WordNetDb":
        """
        从数据库目录加载

        Args:
            path: 含 index.* 与 data.* 文件的目录

        Returns:
            WordNetDb
        """
        directory = Path(path)
        if not directory.is_dir():
            raise WordNetLoadError("WordNet目录不存在", str(directory))

        missing = [name for name in cls.INDEX_FILES + cls.DATA_FILES if not (directory / name).is_file()]
        if missing:
            raise WordNetLoadError(f"缺少WordNet数据文件: {', '.join(missing)}", str(directory))

        raw: Dict[Tuple[WnPos, str], Tuple[str, Tuple[str, ...], str, Tuple[str, ...]]] = {}
        for pos in POS_ORDER:
            raw.update(cls._parse_data(directory / f"data.{pos.file_suffix}", pos))

        entries: Dict[Tuple[str, WnPos], List[str]] = {}
        ranks: Dict[Tuple[WnPos, str], Dict[str, int]] = {}
        for pos in POS_ORDER:
            index_file = directory / f"index.{pos.file_suffix}"
            for lemma, offsets, line_no in cls._parse_index(index_file):
                for rank, offset in enumerate(offsets, start=1):
                    if (pos, offset) not in raw:
                        raise WordNetLoadError(f"索引指向不存在的同义词集 {offset}", str(index_file), line_no)
                    ranks.setdefault((pos, offset), {})[lemma] = rank
                entries[(lemma, pos)] = offsets

        synsets: Dict[Tuple[WnPos, str], Synset] = {}
        for key, (synset_id, lemmas, gloss, examples) in raw.items():
            synsets[key] = Synset(
                id=synset_id,
                pos=key[0],
                lemmas=lemmas,
                gloss=gloss,
                examples=examples,
                sense_rank=ranks.get(key, {}),
            )

        index = {
            (lemma, pos): [synsets[(pos, offset)] for offset in offsets]
            for (lemma, pos), offsets in entries.items()
        }
        db = cls(index, directory)
        db.logger.info(f"WordNet加载完成: {len(index)} 个词条, {len(synsets)} 个同义词集")
        return db

    @staticmethod
    def _parse_data(path: Path, pos: WnPos) -> Dict[Tuple[WnPos, str], tuple]:
        result = {}
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if line.startswith("  ") or not line.strip():
                    continue  # 许可证头
                try:
                    head, _, gloss = line.rstrip("\n").partition(" | ")
                    fields = head.split()
                    offset, ss_type = fields[0], fields[2]
                    word_count = int(fields[3], 16)
                    lemmas = tuple(
                        _ADJ_MARKER.sub("", fields[4 + 2 * i]) for i in range(word_count)
                    )
                    if ss_type not in _SS_TYPES or not lemmas or not all(lemmas):
                        raise ValueError(f"ss_type={ss_type}")
                except (IndexError, ValueError) as e:
                    raise WordNetLoadError(f"数据行格式错误: {e}", str(path), line_no) from e

                definition, examples = _split_gloss(gloss.strip())
                if not definition:
                    raise WordNetLoadError("同义词集缺少释义", str(path), line_no)
                result[(pos, offset)] = (f"{offset}-{ss_type}", lemmas, definition, examples)
        return result

    @staticmethod
    def _parse_index(path: Path) -> Iterable[Tuple[str, List[str], int]]:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if line.startswith("  ") or not line.strip():
                    continue
                fields = line.split()
                try:
                    lemma = fields[0]
                    synset_cnt = int(fields[2])
                    offsets = fields[-synset_cnt:] if synset_cnt else []
                    if synset_cnt < 1 or len(fields) < 4 + synset_cnt or not all(o.isdigit() for o in offsets):
                        raise ValueError(f"synset_cnt={synset_cnt}")
                except (IndexError, ValueError) as e:
                    raise WordNetLoadError(f"索引行格式错误: {e}", str(path), line_no) from e
                yield lemma.lower(), offsets, line_no

    def synsets(self, lemma: str, pos: Optional[WnPos] = None) -> List[Synset]:
        """
        查询词条的同义词集

        Args:
            lemma: 词条（大小写不敏感，空格与下划线等价）
            pos: 词性过滤，为空时返回所有词性

        Returns:
            按义项排名排列的同义词集；不指定词性时按 (排名, 词性顺序) 排列
        """
        key = normalize_lemma(lemma)
        if pos is not None:
            return list(self._index.get((key, pos), []))

        ranked = []
        for p in POS_ORDER:
            for rank, synset in enumerate(self._index.get((key, p), []), start=1):
                ranked.append((rank, p.order, synset))
        ranked.sort(key=lambda item: (item[0], item[1]))
        return [synset for _, _, synset in ranked]

    def lookup(self, word: str, pos: Optional[WnPos] = None) -> Tuple[Optional[str], List[Synset]]:
        """
        带词形回退的查询：先查原词，再依次去掉 -s/-es/-ed/-ing 等后缀

        Returns:
            (命中的词条, 同义词集列表)；都没命中时返回 (None, [])
        """
        for candidate in morphological_candidates(word):
            found = self.synsets(candidate, pos)
            if found:
                return candidate, found
        return None, []

    def __len__(self) -> int:
        return len(self._index)


def morphological_candidates(word: str) -> List[str]:
    """原词及去后缀后的候选词条，保持顺序去重"""
    w = normalize_lemma(word)
    candidates = [w]

    def undouble(stem: str) -> List[str]:
        if len(stem) > 2 and stem[-1] == stem[-2] and stem[-1] not in "aeiouls":
            return [stem[:-1]]
        return []

    if w.endswith("ies") and len(w) > 4:
        candidates.append(w[:-3] + "y")
    if w.endswith("es") and len(w) > 3:
        candidates.append(w[:-2])
    if w.endswith("s") and not w.endswith("ss") and len(w) > 1:
        candidates.append(w[:-1])
    if w.endswith("ed") and len(w) > 3:
        stem = w[:-2]
        candidates.extend([stem, w[:-1], *undouble(stem)])
    if w.endswith("ing") and len(w) > 4:
        stem = w[:-3]
        candidates.extend([stem, stem + "e", *undouble(stem)])

    seen = set()
    return [c for c in candidates if c and not (c in seen or seen.add(c))]


def load(path: Union[str, Path]) -> WordNetDb:
    return WordNetDb.load(path)


def synsets(db: WordNetDb, lemma: str, pos: Optional[WnPos] = None) -> List[Synset]:
    return db.synsets(lemma, pos)


def synonyms(synset: Synset, exclude: Optional[str] = None) -> List[str]:
    """
    同义词集中除exclude以外的词条，下划线替换为空格

    Args:
        synset: 同义词集
        exclude: 要排除的词（大小写不敏感）

    Returns:
        去重后的同义词列表
    """
    excluded = normalize_lemma(exclude) if exclude else None
    result: List[str] = []
    for lemma in synset.lemmas:
        if excluded is not None and normalize_lemma(lemma) == excluded:
            continue
        surface = lemma.replace("_", " ")
        if surface not in result:
            result.append(surface)
    return result


def signature(synset: Synset, drop_stopwords: bool = True) -> FrozenSet[str]:
    """
    简化Lesk的签名：释义和例句的词集合（小写，去标点，默认去停用词）
    """
    stopwords = load_stopwords() if drop_stopwords else frozenset()
    words = set()
    for text in (synset.gloss, *synset.examples):
        for token in tokenize(text.lower()):
            if not token or is_punctuation(token) or token in stopwords:
                continue
            words.add(token)
    return frozenset(words)
