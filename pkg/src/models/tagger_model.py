#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
词性标注模型
贪心平均感知机：从左到右逐词预测，特征包含前两个已预测标签、词形、前后缀和邻近词

模型文件格式（UTF-8文本头 + JSON负载）:
    ABSA-POS-MODEL
    version 1
    sha256 <负载的十六进制摘要>
    <JSON负载: {"classes": [...], "tagdict": {...}, "weights": {特征: {标签: 权重}}}>
"""

import hashlib
import json
import random
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from src.models.wordnet_model import WnPos
from src.utils.errors import TaggerModelError
from src.utils.logger import LoggerMixin
from src.utils.tokenizer import PLACEHOLDER


MAGIC = "ABSA-POS-MODEL"
FORMAT_VERSION = 1
SEED_CORPUS = Path(__file__).parent.parent.parent / "resources" / "pos_seed_corpus.txt"

_START = ("-START-", "-START2-")
_END = ("-END-", "-END2-")

TaggedSentence = Tuple[Sequence[str], Sequence[str]]


@dataclass(frozen=True)
class TaggedToken:
    """带词性的token"""

    token: str
    tag: str

    @property
    def wn_pos(self) -> Optional[WnPos]:
        return wordnet_pos(self.tag)


def wordnet_pos(tag: str) -> Optional[WnPos]:
    """Penn标签前缀到WordNet词性: NN*->noun, VB*->verb, JJ*->adjective, RB*->adverb"""
    if tag.startswith("NN"):
        return WnPos.NOUN
    if tag.startswith("VB"):
        return WnPos.VERB
    if tag.startswith("JJ"):
        return WnPos.ADJECTIVE
    if tag.startswith("RB"):
        return WnPos.ADVERB
    return None


def _normalize(word: str) -> str:
    if "-" in word and word[0] != "-":
        return "!HYPHEN"
    if word.isdigit() and len(word) == 4:
        return "!YEAR"
    if word and word[0].isdigit():
        return "!DIGITS"
    return word.lower()


def _shape(word: str) -> str:
    """压缩词形：Xx、x、d、符号"""
    shape = []
    for ch in word:
        code = "X" if ch.isupper() else "x" if ch.isalpha() else "d" if ch.isdigit() else ch
        if not shape or shape[-1] != code:
            shape.append(code)
    return "".join(shape)


def _features(i: int, word: str, context: Sequence[str], prev: str, prev2: str) -> Dict[str, int]:
    """第i个词的特征（i已含两个起始符偏移）"""
    features: Dict[str, int] = defaultdict(int)

    def add(name: str, *args: str) -> None:
        features[" ".join((name,) + args)] += 1

    add("bias")
    add("i suffix", word[-3:])
    add("i pref1", word[:1])
    add("i shape", _shape(word))
    add("i-1 tag", prev)
    add("i-2 tag", prev2)
    add("i tag+i-2 tag", prev, prev2)
    add("i word", context[i])
    add("i-1 tag+i word", prev, context[i])
    add("i-1 word", context[i - 1])
    add("i-1 suffix", context[i - 1][-3:])
    add("i-2 word", context[i - 2])
    add("i+1 word", context[i + 1])
    add("i+1 suffix", context[i + 1][-3:])
    add("i+2 word", context[i + 2])
    return features


@dataclass
class PerceptronModel:
    """平均后的感知机权重（不保存训练计数器）"""

    weights: Dict[str, Dict[str, float]] = field(default_factory=dict)
    tagdict: Dict[str, str] = field(default_factory=dict)
    classes: Tuple[str, ...] = ()
    accuracy: Optional[float] = None

    def predict(self, features: Dict[str, int]) -> str:
        scores: Dict[str, float] = defaultdict(float)
        for feat, value in features.items():
            if feat not in self.weights or value == 0:
                continue
            for label, weight in self.weights[feat].items():
                scores[label] += value * weight
        # 分数相同按标签名，保证确定性
        return max(self.classes, key=lambda label: (scores[label], label))

    def to_payload(self) -> Dict:
        return {
            "classes": list(self.classes),
            "tagdict": self.tagdict,
            "weights": self.weights,
        }


class PerceptronTagger(LoggerMixin):
    """贪心平均感知机标注器"""

    def __init__(self, model: PerceptronModel):
        self.model = model

    def tag(self, tokens: Sequence[str]) -> List[TaggedToken]:
        """
        逐词贪心标注

        Args:
            tokens: token序列

        Returns:
            TaggedToken列表；占位符 $t$ 固定为NN
        """
        prev, prev2 = _START
        context = list(_START) + [_normalize(w) for w in tokens] + list(_END)
        tagged: List[TaggedToken] = []
        for i, word in enumerate(tokens):
            if word == PLACEHOLDER:
                tag = "NN"
            else:
                tag = self.model.tagdict.get(word)
                if tag is None:
                    tag = self.model.predict(_features(i + 2, word, context, prev, prev2))
            tagged.append(TaggedToken(word, tag))
            prev2, prev = prev, tag
        return tagged

    @classmethod
    def load(cls, path: Union[str, Path]) -> "PerceptronTagger":
        return cls(load_model(path))

    @classmethod
    def from_seed_corpus(cls, iterations: int = 8, seed: int = 0) -> "PerceptronTagger":
        """用随包附带的小语料训练（无模型文件时的默认行为）"""
        return cls(train(read_tagged_corpus(SEED_CORPUS), iterations=iterations, seed=seed))


class _AveragedPerceptron:
    """训练期的权重与累加器"""

    def __init__(self, classes: Iterable[str]):
        self.classes = tuple(sorted(set(classes)))
        self.weights: Dict[str, Dict[str, float]] = {}
        self._totals: Dict[Tuple[str, str], float] = defaultdict(float)
        self._tstamps: Dict[Tuple[str, str], int] = defaultdict(int)
        self.i = 0

    def predict(self, features: Dict[str, int]) -> str:
        return PerceptronModel(self.weights, {}, self.classes).predict(features)

    def update(self, truth: str, guess: str, features: Dict[str, int]) -> None:
        self.i += 1
        if truth == guess:
            return
        for feat in features:
            weights = self.weights.setdefault(feat, {})
            self._update_feat(feat, weights, truth, 1.0)
            self._update_feat(feat, weights, guess, -1.0)

    def _update_feat(self, feat: str, weights: Dict[str, float], label: str, value: float) -> None:
        param = (feat, label)
        current = weights.get(label, 0.0)
        self._totals[param] += (self.i - self._tstamps[param]) * current
        self._tstamps[param] = self.i
        weights[label] = current + value

    def average(self) -> Dict[str, Dict[str, float]]:
        averaged: Dict[str, Dict[str, float]] = {}
        for feat, weights in self.weights.items():
            new_weights = {}
            for label, weight in weights.items():
                param = (feat, label)
                total = self._totals[param] + (self.i - self._tstamps[param]) * weight
                value = round(total / self.i, 3) if self.i else 0.0
                if value:
                    new_weights[label] = value
            if new_weights:
                averaged[feat] = new_weights
        return averaged


def _build_tagdict(sentences: Sequence[TaggedSentence], freq_threshold: int, ambiguity: float) -> Dict[str, str]:
    counts: Dict[str, Dict[str, int]] = defaultdict(lambda: defaultdict(int))
    for words, tags in sentences:
        for word, tag in zip(words, tags):
            counts[word][tag] += 1
    tagdict = {}
    for word, tag_freqs in counts.items():
        tag, mode = max(tag_freqs.items(), key=lambda item: (item[1], item[0]))
        n = sum(tag_freqs.values())
        if n >= freq_threshold and mode / n >= ambiguity:
            tagdict[word] = tag
    return tagdict


def evaluate(tagger: PerceptronTagger, sentences: Sequence[TaggedSentence]) -> float:
    """token级准确率"""
    correct = total = 0
    for words, tags in sentences:
        for predicted, gold in zip(tagger.tag(words), tags):
            correct += predicted.tag == gold
            total += 1
    return correct / total if total else 0.0


def train(
    corpus: Sequence[TaggedSentence],
    iterations: int = 5,
    seed: int = 0,
    holdout: float = 0.0,
    freq_threshold: int = 5,
    ambiguity: float = 0.97,
) -> PerceptronModel:
    """
    训练平均感知机

    Args:
        corpus: [(tokens, tags), ...]
        iterations: 迭代轮数，0时只有词典
        seed: 每轮打乱顺序用的种子
        holdout: 留出评估的比例
        freq_threshold: 进入词典的最低词频
        ambiguity: 进入词典的最低主标签占比

    Returns:
        平均后的模型，accuracy为留出集（或无留出时训练集）准确率
    """
    sentences = [(list(words), list(tags)) for words, tags in corpus if words]
    if not sentences:
        raise TaggerModelError("训练语料为空")
    for words, tags in sentences:
        if len(words) != len(tags):
            raise TaggerModelError(f"词与标签数量不一致: {' '.join(words)}")

    n_holdout = int(len(sentences) * holdout)
    train_set = sentences[:len(sentences) - n_holdout] if n_holdout else sentences
    held_out = sentences[len(sentences) - n_holdout:] if n_holdout else []

    tagdict = _build_tagdict(train_set, freq_threshold, ambiguity)
    perceptron = _AveragedPerceptron(tag for _, tags in train_set for tag in tags)
    rng = random.Random(seed)
    order = list(train_set)

    for _ in range(iterations):
        for words, tags in order:
            prev, prev2 = _START
            context = list(_START) + [_normalize(w) for w in words] + list(_END)
            for i, word in enumerate(words):
                guess = tagdict.get(word)
                if guess is None:
                    feats = _features(i + 2, word, context, prev, prev2)
                    guess = perceptron.predict(feats)
                    perceptron.update(tags[i], guess, feats)
                prev2, prev = prev, guess
        rng.shuffle(order)

    model = PerceptronModel(perceptron.average(), tagdict, perceptron.classes)
    model.accuracy = evaluate(PerceptronTagger(model), held_out or train_set)
    PerceptronTagger(model).logger.info(
        f"词性标注模型训练完成: {len(train_set)} 句, {iterations} 轮, "
        f"{'留出集' if held_out else '训练集'}准确率 {model.accuracy:.3f}"
    )
    return model


def read_tagged_corpus(path: Union[str, Path]) -> List[TaggedSentence]:
    """
    读取 token/TAG 格式语料（每行一句，#开头为注释）
    """
    sentences: List[TaggedSentence] = []
    if not Path(path).is_file():
        raise TaggerModelError(f"语料文件不存在: {path}")
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            words, tags = [], []
            for item in line.split():
                word, sep, tag = item.rpartition("/")
                if not sep or not word or not tag:
                    raise TaggerModelError(f"语料格式错误 {path}:{line_no}: {item}")
                words.append(word)
                tags.append(tag)
            sentences.append((words, tags))
    return sentences


def _checksum(payload: bytes) -> str:
    return hashlib.sha256(payload).hexdigest()


def save_model(model: PerceptronModel, path: Union[str, Path]) -> None:
    """保存模型（带魔数、版本和校验和）"""
    payload = json.dumps(model.to_payload(), sort_keys=True, ensure_ascii=False).encode("utf-8")
    header = f"{MAGIC}\nversion {FORMAT_VERSION}\nsha256 {_checksum(payload)}\n".encode("utf-8")
    Path(path).write_bytes(header + payload)


def load_model(path: Union[str, Path]) -> PerceptronModel:
    """
    加载模型

    Raises:
        TaggerModelError: 文件缺失、魔数/版本不符或校验和不一致
    """
    path = Path(path)
    if not path.is_file():
        raise TaggerModelError(f"模型文件不存在: {path}")

    data = path.read_bytes()
    parts = data.split(b"\n", 3)
    if len(parts) != 4 or parts[0].decode("utf-8", "replace") != MAGIC:
        raise TaggerModelError(f"不是词性标注模型文件: {path}")

    version_line = parts[1].decode("utf-8", "replace")
    if version_line != f"version {FORMAT_VERSION}":
        raise TaggerModelError(f"模型版本不符: {version_line} (需要 version {FORMAT_VERSION})")

    checksum_line = parts[2].decode("utf-8", "replace")
    payload = parts[3]
    if checksum_line != f"sha256 {_checksum(payload)}":
        raise TaggerModelError(f"模型文件校验失败: {path}")

    try:
        content = json.loads(payload.decode("utf-8"))
        return PerceptronModel(
            weights={feat: dict(weights) for feat, weights in content["weights"].items()},
            tagdict=dict(content["tagdict"]),
            classes=tuple(content["classes"]),
        )
    except (ValueError, KeyError, TypeError) as e:
        raise TaggerModelError(f"模型负载损坏: {e}") from e


def tag(model: PerceptronModel, tokens: Sequence[str]) -> List[TaggedToken]:
    return PerceptronTagger(model).tag(tokens)
