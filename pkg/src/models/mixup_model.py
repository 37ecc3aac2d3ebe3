#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
词向量空间混合插值（mixup）
左/目标/右三段分别按语料最大长度右侧补零，成对记录按Beta(α,α)采样的λ线性插值，
极性one-hot向量同样插值
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.models.base_model import BaseModel, ModelEventType
from src.models.record_model import POLARITY_ORDER, Method, OpinionRecord
from src.utils.errors import ConfigError, EmbeddingLoadError, MixupError
from src.utils.rng import derive_seed
from src.utils.tokenizer import split_context


OOV_POLICIES = ("zero", "random")
PAIRING_POLICIES = ("random", "length")
# 随机OOV向量的取值范围
OOV_SCALE = 0.25


class EmbeddingTable:
    """词 → d维向量"""

    def __init__(
        self,
        vectors: Dict[str, np.ndarray],
        dims: int,
        oov_policy: str = "zero",
        seed: int = 20200601,
    ):
        if oov_policy not in OOV_POLICIES:
            raise ConfigError(f"未知的OOV策略: {oov_policy}")
        self.vectors = vectors
        self.dims = dims
        self.oov_policy = oov_policy
        self.seed = seed
        self._oov: Dict[str, np.ndarray] = {}
        self.oov_hits = 0

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors or word.lower() in self.vectors

    def lookup(self, word: str) -> np.ndarray:
        """
        查词向量，先查原词再查小写

        Returns:
            长度为d的向量；OOV时按策略返回零向量或按词派生种子的随机向量
        """
        vector = self.vectors.get(word)
        if vector is None:
            vector = self.vectors.get(word.lower())
        if vector is not None:
            return vector
        self.oov_hits += 1
        if self.oov_policy == "zero":
            return np.zeros(self.dims)
        if word not in self._oov:
            gen = np.random.default_rng(derive_seed(self.seed, "oov", word))
            self._oov[word] = gen.uniform(-OOV_SCALE, OOV_SCALE, self.dims)
        return self._oov[word]


def load_embeddings(
    path: Union[str, Path],
    dims: Optional[int] = None,
    oov_policy: str = "zero",
    seed: int = 20200601,
) -> EmbeddingTable:
    """
    读取GloVe格式文本词向量：每行一个词后跟d个空格分隔的小数

    Args:
        path: 文件路径
        dims: 声明的维度，None时取第一行的维度
        oov_policy: zero / random
        seed: 随机OOV向量的种子

    Returns:
        EmbeddingTable
    """
    path = Path(path)
    if not path.is_file():
        raise EmbeddingLoadError("词向量文件不存在", str(path))

    vectors: Dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            parts = line.rstrip("\n").rstrip().split(" ")
            if len(parts) < 2:
                continue
            word, values = parts[0], parts[1:]
            if dims is None:
                dims = len(values)
            if len(values) != dims:
                raise EmbeddingLoadError(
                    f"维度不符: 期望 {dims}, 实际 {len(values)}", str(path), line_no
                )
            try:
                vectors[word] = np.asarray(values, dtype=np.float64)
            except ValueError as e:
                raise EmbeddingLoadError(f"无法解析数值: {e}", str(path), line_no)

    if dims is None:
        raise EmbeddingLoadError("词向量文件为空", str(path))
    return EmbeddingTable(vectors, dims, oov_policy, seed)


def one_hot(record: OpinionRecord) -> np.ndarray:
    """极性one-hot，顺序为 (positive, neutral, negative)"""
    label = np.zeros(len(POLARITY_ORDER))
    label[record.polarity.position] = 1.0
    return label


@dataclass
class EmbeddedTriple:
    """补零后的左/目标/右矩阵，形状均为 (d, Q)"""

    record_id: str
    left: np.ndarray
    target: np.ndarray
    right: np.ndarray
    lengths: Tuple[int, int, int]
    label: np.ndarray

    @property
    def parts(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.left, self.target, self.right

    @property
    def shape(self) -> Tuple[Tuple[int, int], ...]:
        return tuple(m.shape for m in self.parts)


def _embed(tokens: Sequence[str], table: EmbeddingTable, width: int) -> np.ndarray:
    matrix = np.zeros((table.dims, width))
    for j, token in enumerate(tokens):
        matrix[:, j] = table.lookup(token)
    return matrix


def embed_and_pad(records: Sequence[OpinionRecord], table: EmbeddingTable) -> List[EmbeddedTriple]:
    """
    三段分别嵌入，并补零到语料中各段的最大长度

    Args:
        records: 观点记录
        table: 词向量表

    Returns:
        与输入顺序一致的EmbeddedTriple列表
    """
    if not records:
        raise MixupError("语料为空，无法做mixup")

    splits = [split_context(record) for record in records]
    q_left = max(len(s.left) for s in splits)
    q_target = max(len(s.target) for s in splits)
    q_right = max(len(s.right) for s in splits)

    triples = []
    for record, split in zip(records, splits):
        triples.append(EmbeddedTriple(
            record_id=record.id,
            left=_embed(split.left, table, q_left),
            target=_embed(split.target, table, q_target),
            right=_embed(split.right, table, q_right),
            lengths=(len(split.left), len(split.target), len(split.right)),
            label=one_hot(record),
        ))
    return triples


def embedding_coverage(records: Sequence[OpinionRecord], table: EmbeddingTable) -> float:
    """语料token中有词向量的比例"""
    tokens = [token for record in records for token in split_context(record).tokens()]
    if not tokens:
        return 0.0
    return sum(token in table for token in tokens) / len(tokens)


def sample_lambda(alpha: float, rng: np.random.Generator) -> float:
    """
    从Beta(α,α)采样：X~Gamma(α), Y~Gamma(α), λ = X/(X+Y)

    α很小时λ可能在浮点上恰为0或1，此时重新采样，保证 λ ∈ (0,1)
    """
    if alpha <= 0:
        raise MixupError(f"alpha必须大于0: {alpha}")
    while True:
        x = rng.gamma(alpha)
        y = rng.gamma(alpha)
        total = x + y
        if total <= 0:
            continue
        lam = float(x / total)
        if 0.0 < lam < 1.0:
            return lam


@dataclass
class MixupRecord:
    """插值结果"""

    left: np.ndarray
    target: np.ndarray
    right: np.ndarray
    label: np.ndarray
    lam: float
    sources: Tuple[str, str]
    alpha: Optional[float] = None
    params: Dict[str, object] = field(default_factory=dict)

    method = Method.MIXUP

    @property
    def parts(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.left, self.target, self.right


def mixup_pair(a: EmbeddedTriple, b: EmbeddedTriple, lam: float) -> MixupRecord:
    """
    λ·a + (1−λ)·b，三段矩阵和标签同时插值

    Raises:
        MixupError: 两条记录形状不一致
    """
    if a.shape != b.shape:
        raise MixupError(f"形状不一致: {a.record_id} {a.shape} vs {b.record_id} {b.shape}")
    mixed = [lam * x + (1.0 - lam) * y for x, y in zip(a.parts, b.parts)]
    label = lam * a.label + (1.0 - lam) * b.label
    return MixupRecord(mixed[0], mixed[1], mixed[2], label, lam, (a.record_id, b.record_id))


@dataclass(frozen=True)
class MixupConfig:
    """mixup参数"""

    alpha: float = 0.2
    seed: int = 20200601
    pairing: str = "random"
    pass_index: int = 0

    def __post_init__(self):
        if self.alpha <= 0:
            raise ConfigError(f"mixup的alpha必须大于0: {self.alpha}")
        if self.pairing not in PAIRING_POLICIES:
            raise ConfigError(f"未知的配对策略: {self.pairing}")


def pair_order(triples: Sequence[EmbeddedTriple], config: MixupConfig, gen: np.random.Generator) -> List[int]:
    """配对顺序：第k条与第k+1条（循环）配对"""
    if config.pairing == "length":
        return sorted(range(len(triples)), key=lambda i: (triples[i].lengths, triples[i].record_id))
    return [int(i) for i in gen.permutation(len(triples))]


class MixupAugmenter(BaseModel):
    """mixup增强"""

    def __init__(self, table: EmbeddingTable, config: MixupConfig):
        super().__init__()
        self.table = table
        self.config = config

    def augment(self, records: Sequence[OpinionRecord]) -> List[MixupRecord]:
        """
        对语料做mixup，每条输入记录恰好参与生成一条输出

        Returns:
            N条MixupRecord
        """
        cfg = self.config
        records = self.explicit_records(records, [Method.MIXUP.value])
        if len(records) < 2:
            raise MixupError(f"mixup至少需要2条记录，实际 {len(records)} 条")

        self.logger.info(
            f"mixup开始: {len(records)} 条记录, α={cfg.alpha}, 配对策略 {cfg.pairing}, "
            f"词向量覆盖率 {embedding_coverage(records, self.table):.1%}"
        )
        triples = embed_and_pad(records, self.table)
        gen = np.random.default_rng(derive_seed(cfg.seed, Method.MIXUP.value, cfg.alpha, cfg.pass_index))
        order = pair_order(triples, cfg, gen)
        # 先顺序采完全部λ，插值本身与顺序无关
        lambdas = [sample_lambda(cfg.alpha, gen) for _ in order]

        outputs = []
        for k, i in enumerate(order):
            j = order[(k + 1) % len(order)]
            mixed = mixup_pair(triples[i], triples[j], lambdas[k])
            mixed.alpha = cfg.alpha
            mixed.params = {"alpha": cfg.alpha, "seed": cfg.seed, "pass": cfg.pass_index, "lambda": mixed.lam}
            outputs.append(mixed)
            self.notify_observers(ModelEventType.RECORD_EMITTED, {"method": Method.MIXUP.value})

        if self.table.oov_hits:
            self.logger.debug(f"OOV查询 {self.table.oov_hits} 次")
        self.logger.info(f"mixup完成: 生成 {len(outputs)} 条")
        return outputs


def mixup_augment(
    records: Sequence[OpinionRecord],
    table: EmbeddingTable,
    config: MixupConfig,
) -> List[MixupRecord]:
    return MixupAugmenter(table, config).augment(records)
