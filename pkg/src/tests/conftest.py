#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
测试公共夹具
迷你WordNet数据库、示例记录和合成语料
"""

import random
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import pytest

from src.models.record_model import IMPLICIT_TARGET, OpinionRecord, Polarity
from src.models.tagger_model import PerceptronTagger
from src.models.wordnet_model import WordNetDb
from src.views.xml_view import render_xml


LICENSE_LINE = "  1 This software and database is being provided to you, the LICENSEE, by Princeton University\n"
_POS_SUFFIX = {"n": "noun", "v": "verb", "a": "adj", "r": "adv"}

# (词性, 同义词集词条, 释义) ；同一词条在列表中出现的先后即义项排名
MINI_LEXICON: List[Tuple[str, Tuple[str, ...], str]] = [
    ("n", ("food", "nutrient", "nourishment"),
     "any substance that can be metabolized by an animal to give energy and build tissue"),
    ("n", ("food", "solid_food"),
     'any solid substance (as opposed to liquid) that is used as a source of nourishment; '
     '"eating solid food for the first time"'),
    ("n", ("food", "food_for_thought", "intellectual_nourishment"),
     "anything that provides mental stimulus for thinking"),
    ("n", ("staff", "faculty"), "the body of teachers and administrators at a school"),
    ("n", ("staff",),
     'personnel who assist their superior in carrying out an assigned task; '
     '"the hospital has an excellent nursing staff"'),
    ("n", ("point",), "a geometric element that has position but no extension"),
    ("n", ("point", "detail", "item"),
     'an isolated fact that is considered separately from the whole; "several of the details are similar"'),
    ("n", ("post", "station"), "the position where someone stands or is assigned to stand; military guard duty"),
    ("n", ("post", "posting", "message"),
     'a message sent to an online forum or social media site; "previous posts on the forum"'),
    ("n", ("place", "spot"), 'a point located with respect to surface features; "a nice place for a picnic"'),
    ("n", ("judgment", "judgement", "judging"), "the act of judging or assessing a person or situation or event"),
    ("a", ("rude", "impolite"), 'socially incorrect in behavior; "resentment at the rude remarks"'),
    ("a", ("crude", "primitive", "rude"), "belonging to an early stage of technical development"),
    ("a", ("ill-mannered", "bad-mannered", "rude", "unmannerly", "uncivil"),
     'lacking civility or good manners; "an offensive and rude reply"'),
    ("a", ("offensive", "violative"), "tending to violate a rule or agreement"),
    ("a", ("offensive", "unsavory", "distasteful"),
     'unpleasant or disgusting especially to the senses; "rude and offensive remarks"'),
    ("a", ("good",), 'having desirable or positive qualities; "good news from the hospital"'),
    ("a", ("good", "well"), "in good health especially after having suffered illness"),
    ("a", ("great", "outstanding"), "very good"),
    ("a", ("phenomenal", "remarkable", "extraordinary"), "exceedingly or unbelievably great"),
    ("a", ("patient", "long-suffering"), "enduring trying circumstances with even temper"),
    ("v", ("eat",), 'take in solid food; "she was eating a banana"'),
    ("v", ("serve", "function"), "serve a purpose or role or function"),
    ("v", ("serve", "serve_up", "dish_out"), "provide food usually at a restaurant"),
    ("v", ("judge", "estimate", "gauge"), "judge tentatively or form an estimate of"),
    ("r", ("very", "really", "real"), 'used as intensifiers; "very happy"'),
]

# 消歧比对用的小词库（不超过10个同义词集）
LESK_LEXICON = [entry for entry in MINI_LEXICON if entry[1][0] in ("food", "staff") or "rude" in entry[1]] + [
    entry for entry in MINI_LEXICON if entry[1][0] == "good"
]


def write_wndb(directory: Path, lexicon: Sequence[Tuple[str, Tuple[str, ...], str]]) -> Path:
    """
    按WordNet数据库格式写出 index.* / data.*，offset为真实字节偏移

    Args:
        directory: 输出目录
        lexicon: (词性, 词条, 释义) 列表

    Returns:
        目录路径
    """
    directory.mkdir(parents=True, exist_ok=True)
    data_lines: Dict[str, List[str]] = {pos: [] for pos in _POS_SUFFIX}
    sizes: Dict[str, int] = {pos: len(LICENSE_LINE.encode("utf-8")) for pos in _POS_SUFFIX}
    senses: Dict[str, Dict[str, List[str]]] = {pos: {} for pos in _POS_SUFFIX}

    for pos, lemmas, gloss in lexicon:
        offset = f"{sizes[pos]:08d}"
        words = " ".join(f"{lemma} 0" for lemma in lemmas)
        line = f"{offset} 00 {pos} {len(lemmas):02x} {words} 000 | {gloss}  \n"
        data_lines[pos].append(line)
        sizes[pos] += len(line.encode("utf-8"))
        for lemma in lemmas:
            senses[pos].setdefault(lemma.lower(), []).append(offset)

    for pos, suffix in _POS_SUFFIX.items():
        (directory / f"data.{suffix}").write_text(LICENSE_LINE + "".join(data_lines[pos]), encoding="utf-8")
        index_lines = [
            f"{lemma} {pos} {len(offsets)} 0 {len(offsets)} 0 {' '.join(offsets)}  \n"
            for lemma, offsets in sorted(senses[pos].items())
        ]
        (directory / f"index.{suffix}").write_text(LICENSE_LINE + "".join(index_lines), encoding="utf-8")
    return directory


@pytest.fixture
def wndb_dir(tmp_path):
    """迷你WordNet目录"""
    return write_wndb(tmp_path / "wordnet", MINI_LEXICON)


@pytest.fixture
def wordnet(wndb_dir):
    return WordNetDb.load(wndb_dir)


@pytest.fixture(scope="session")
def seed_tagger():
    """用内置语料训练的标注器（整个会话共用）"""
    return PerceptronTagger.from_seed_corpus()


def make_record(
    record_id: str,
    text: str,
    target: str,
    category: str = "SERVICE#GENERAL",
    polarity: Polarity = Polarity.POSITIVE,
    start: int = None,
) -> OpinionRecord:
    """按目标在句中第一次出现的位置构造记录"""
    start = text.index(target) if start is None else start
    return OpinionRecord(
        id=record_id,
        text=text,
        target=target,
        target_from=start,
        target_to=start + len(target),
        category=category,
        polarity=polarity,
        sentence_id=record_id.split("#")[0],
    )


def make_implicit(record_id: str, text: str, category: str = "SERVICE#GENERAL") -> OpinionRecord:
    """没有显式方面词的记录（target="NULL"，偏移0/0）"""
    return OpinionRecord(
        id=record_id,
        text=text,
        target=IMPLICIT_TARGET,
        target_from=0,
        target_to=0,
        category=category,
        polarity=Polarity.POSITIVE,
        sentence_id=record_id.split("#")[0],
    )


@pytest.fixture
def hostess():
    return make_record(
        "1004293:0#0",
        "the hostess is rude to the point of being offensive",
        "hostess",
        polarity=Polarity.NEGATIVE,
    )


@pytest.fixture
def waitress():
    return make_record(
        "1004293:1#0",
        "The waitress was very patient with us and the food is phenomenal!",
        "waitress",
    )


_TARGETS = ["food", "service", "staff", "wine list", "pizza", "hostess", "waitress", "ambience", "price", "dessert"]
_CATEGORIES = ["FOOD#QUALITY", "SERVICE#GENERAL", "AMBIENCE#GENERAL", "RESTAURANT#PRICES", "DRINKS#QUALITY"]
_TEMPLATES = [
    ("the ", " was rude and the food is good"),
    ("I think the ", " is great!"),
    ("", " was very patient with us."),
    ("we loved the ", ", but the point is offensive"),
    ("the ", " here is phenomenal and good"),
    ("honestly, the ", ""),
]


def synthetic_records(n: int = 20, seed: int = 7) -> List[OpinionRecord]:
    """合成语料：每句一个观点"""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        target = _TARGETS[i % len(_TARGETS)]
        prefix, suffix = _TEMPLATES[i % len(_TEMPLATES)]
        if not prefix:
            target = target.capitalize()
        records.append(OpinionRecord(
            id=f"syn{i:03d}#0",
            text=prefix + target + suffix,
            target=target,
            target_from=len(prefix),
            target_to=len(prefix) + len(target),
            category=_CATEGORIES[rng.randrange(len(_CATEGORIES))],
            polarity=rng.choice(list(Polarity)),
            sentence_id=f"syn{i:03d}",
        ))
    return records


_FUZZ_WORDS = [
    "the", "food", "was", "rude", "good", "great", "point", "staff", "very", "patient", "we", "us",
    "offensive", "place", "eat", "served", "judging", "posts", "and", "but", "really", "phenomenal",
    "(", ")", ",", ".", "!", "?", "don't", "well-known", "3", "%",
]
_FUZZ_TARGETS = ["food", "wine list", "staff", "the hostess", "Pizza", "service", "sea bass"]


def fuzz_records(n: int = 200, seed: int = 11) -> List[OpinionRecord]:
    """随机语料：目标可在句首、句中、句尾，上下文可为空"""
    rng = random.Random(seed)
    records = []
    for i in range(n):
        left = [rng.choice(_FUZZ_WORDS) for _ in range(rng.choice([0, 0, 1, 3, 6, 10]))]
        right = [rng.choice(_FUZZ_WORDS) for _ in range(rng.choice([0, 1, 4, 8, 12]))]
        target = rng.choice(_FUZZ_TARGETS)
        prefix = " ".join(left) + (" " if left else "")
        suffix = (" " if right else "") + " ".join(right)
        records.append(OpinionRecord(
            id=f"fz{i:03d}#0",
            text=prefix + target + suffix,
            target=target,
            target_from=len(prefix),
            target_to=len(prefix) + len(target),
            category=rng.choice(_CATEGORIES),
            polarity=rng.choice(list(Polarity)),
            sentence_id=f"fz{i:03d}",
        ))
    return records


@pytest.fixture
def corpus20():
    return synthetic_records(20)


@pytest.fixture
def corpus_file(tmp_path, corpus20):
    """合成语料写成SemEval XML"""
    path = tmp_path / "train.xml"
    path.write_bytes(render_xml(corpus20))
    return path


SEMEVAL_SAMPLE = b"""<?xml version="1.0" encoding="UTF-8" standalone="yes"?>
<Reviews>
  <Review rid="1004293">
    <sentences>
      <sentence id="1004293:0">
        <text>the hostess is rude to the point of being offensive</text>
        <Opinions>
          <Opinion target="hostess" category="SERVICE#GENERAL" polarity="negative" from="4" to="11"/>
        </Opinions>
      </sentence>
      <sentence id="1004293:1">
        <text>The waitress was very patient with us and the food is phenomenal!</text>
        <Opinions>
          <Opinion target="waitress" category="SERVICE#GENERAL" polarity="positive" from="4" to="12"/>
          <Opinion target="food" category="FOOD#QUALITY" polarity="positive" from="46" to="50"/>
          <Opinion target="NULL" category="RESTAURANT#GENERAL" polarity="positive" from="0" to="0"/>
        </Opinions>
      </sentence>
      <sentence id="1004293:2" OutOfScope="TRUE">
        <text>Judging from previous posts this used to be a good place, but not any longer.</text>
        <Opinions>
          <Opinion target="place" category="RESTAURANT#GENERAL" polarity="negative" from="51" to="56"/>
        </Opinions>
      </sentence>
      <sentence id="1004293:3">
        <text>Nothing to say.</text>
      </sentence>
    </sentences>
  </Review>
</Reviews>
"""
