#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
回译模型
左、右上下文分别翻译到中间语言再译回英文，目标表达保持不变
"""

import json
import threading
import time
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

import httpx

from src.models.base_model import BaseModel, ModelEventType
from src.models.eda_model import augmented_sentence_id
from src.models.record_model import AugmentedRecord, Method, OpinionRecord
from src.utils.errors import ConfigError, MaskingError, TranslationError, UnsupportedLanguageError
from src.utils.logger import LoggerMixin
from src.utils.tokenizer import detokenize, tokenize


PIVOT_LANGUAGES = ("nl", "es", "ja")
SOURCE_LANGUAGE = "en"


class TranslationClient(ABC, LoggerMixin):
    """翻译后端接口"""

    name = "abstract"
    supported_languages: FrozenSet[str] = frozenset({SOURCE_LANGUAGE, *PIVOT_LANGUAGES})
    # 每秒请求数上限，None表示不限
    rate_limit: Optional[float] = None

    def __init__(self):
        self.calls = 0
        self._calls_lock = threading.Lock()

    def translate(self, text: str, source_lang: str, target_lang: str) -> str:
        """
        翻译一段文本

        Args:
            text: 原文，空串直接返回空串
            source_lang: 源语言
            target_lang: 目标语言

        Returns:
            译文
        """
        if not text:
            return ""
        for lang in (source_lang, target_lang):
            if lang not in self.supported_languages:
                raise UnsupportedLanguageError(lang)
        with self._calls_lock:
            self.calls += 1
        return self._translate(text, source_lang, target_lang)

    @abstractmethod
    def _translate(self, text: str, source_lang: str, target_lang: str) -> str:
        pass

    def check(self) -> Tuple[bool, str]:
        """可用性检查（selfcheck用）"""
        return True, f"{self.name} 后端可用"

    def close(self) -> None:
        pass


# 玩具双语词典：en -> 中间语言；反向表里有意放入不对称的译法，
# 使回译结果与原文可区分
_TOY_LEXICON: Dict[str, Dict[str, str]] = {
    "es": {
        "the": "el", "food": "comida", "is": "es", "was": "era", "rude": "grosero",
        "good": "bueno", "great": "genial", "very": "muy", "and": "y", "with": "con",
        "service": "servicio", "patient": "paciente", "phenomenal": "fenomenal", "point": "punto",
    },
    "nl": {
        "the": "de", "food": "eten", "is": "is", "was": "was", "rude": "onbeleefd",
        "good": "goed", "great": "geweldig", "very": "erg", "and": "en", "with": "met",
        "service": "bediening", "patient": "geduldig", "phenomenal": "fenomenaal", "point": "punt",
    },
    "ja": {
        "the": "その", "food": "料理", "is": "です", "was": "でした", "rude": "失礼",
        "good": "良い", "great": "素晴らしい", "very": "とても", "and": "と", "with": "と一緒に",
        "service": "サービス", "patient": "辛抱強い", "phenomenal": "驚異的", "point": "点",
    },
}
_TOY_BACK_OVERRIDES: Dict[str, Dict[str, str]] = {
    "es": {"grosero": "impolite", "genial": "awesome", "fenomenal": "amazing"},
    "nl": {"onbeleefd": "impolite", "erg": "really", "geweldig": "awesome"},
    "ja": {"その": "of", "失礼": "impolite", "とても": "really", "驚異的": "amazing", "と": "and"},
}


class StubTranslationClient(TranslationClient):
    """
    确定性的测试后端

    identity: 原样返回
    marker: 去程给每个词加 "<lang>:" 前缀，回程去掉前缀并在句首加 "[<lang>]"
    dictionary: 查玩具双语词典，词典外的词原样通过
    """

    MODES = ("identity", "marker", "dictionary")

    def __init__(self, mode: str = "identity"):
        super().__init__()
        if mode not in self.MODES:
            raise ConfigError(f"未知的stub模式: {mode}")
        self.mode = mode
        self.name = f"stub-{mode}"

    def _translate(self, text: str, source_lang: str, target_lang: str) -> str:
        if self.mode == "identity" or source_lang == target_lang:
            return text
        if self.mode == "marker":
            if source_lang == SOURCE_LANGUAGE:
                return " ".join(f"{target_lang}:{word}" for word in text.split())
            prefix = f"{source_lang}:"
            words = [w[len(prefix):] if w.startswith(prefix) else w for w in text.split()]
            return f"[{source_lang}] " + " ".join(words)
        return self._dictionary(text, source_lang, target_lang)

    @staticmethod
    def _dictionary(text: str, source_lang: str, target_lang: str) -> str:
        if source_lang == SOURCE_LANGUAGE:
            table = _TOY_LEXICON.get(target_lang, {})
        else:
            table = {v: k for k, v in _TOY_LEXICON.get(source_lang, {}).items()}
            table.update(_TOY_BACK_OVERRIDES.get(source_lang, {}))
        return detokenize([table.get(token.lower(), token) for token in tokenize(text)])


def stub_backend(mode: str) -> TranslationClient:
    return StubTranslationClient(mode)


class HttpTranslationClient(TranslationClient):
    """
    通用HTTP翻译后端

    请求: POST endpoint, JSON {"q": 文本, "source": 源语言, "target": 目标语言, "format": "text"}
    响应: {"translatedText": ...} 或 {"data": {"translations": [{"translatedText": ...}]}}
    """

    name = "http"

    def __init__(
        self,
        endpoint: str,
        api_key: Optional[str] = None,
        timeout: float = 30.0,
        retries: int = 3,
        backoff_seconds: float = 1.0,
        rate_limit: Optional[float] = None,
        transport: Optional[httpx.BaseTransport] = None,
        sleep=time.sleep,
        clock=time.monotonic,
    ):
        super().__init__()
        if not endpoint:
            raise ConfigError("未配置翻译服务地址 (ABSA_TRANSLATE_ENDPOINT)")
        self.endpoint = endpoint
        self.retries = max(1, retries)
        self.backoff_seconds = backoff_seconds
        self._sleep = sleep
        self.rate_limit = rate_limit
        self._clock = clock
        self._rate_lock = threading.Lock()
        self._next_slot = 0.0
        headers = {"Authorization": f"Bearer {api_key}"} if api_key else {}
        self._client = httpx.Client(timeout=timeout, headers=headers, transport=transport)

    def _throttle(self) -> None:
        """按 rate_limit 排队，相邻两次请求至少间隔 1/rate_limit 秒"""
        if not self.rate_limit:
            return
        with self._rate_lock:
            now = self._clock()
            wait = self._next_slot - now
            if wait > 0:
                self._sleep(wait)
                now += wait
            self._next_slot = now + 1.0 / self.rate_limit

    def _translate(self, text: str, source_lang: str, target_lang: str) -> str:
        payload = {"q": text, "source": source_lang, "target": target_lang, "format": "text"}
        last_error: Optional[Exception] = None
        for attempt in range(self.retries):
            try:
                self._throttle()
                response = self._client.post(self.endpoint, json=payload)
                response.raise_for_status()
                return self._extract(response.json())
            except (httpx.HTTPError, ValueError, KeyError, IndexError, TypeError) as e:
                last_error = e
                self.logger.warning(f"翻译请求失败 (第{attempt + 1}次): {e}")
                if attempt + 1 < self.retries:
                    self._sleep(self.backoff_seconds * (2 ** attempt))
        raise TranslationError(f"翻译失败，已重试{self.retries}次: {last_error}")

    @staticmethod
    def _extract(body: Dict) -> str:
        if "translatedText" in body:
            return body["translatedText"]
        return body["data"]["translations"][0]["translatedText"]

    def check(self) -> Tuple[bool, str]:
        try:
            self.translate("hello", SOURCE_LANGUAGE, PIVOT_LANGUAGES[0])
            return True, f"翻译服务可达: {self.endpoint}"
        except Exception as e:
            return False, f"翻译服务不可达: {self.endpoint} ({e})"

    def close(self) -> None:
        self._client.close()


class TranslationCache(LoggerMixin):
    """
    持久化翻译缓存

    文件为JSON Lines，每行 {"src_lang", "dst_lang", "input", "output"}；
    新条目在锁内追加写入
    """

    def __init__(self, path: Optional[Union[str, Path]] = None):
        self.path = Path(path) if path else None
        self._entries: Dict[Tuple[str, str, str], str] = {}
        self._lock = threading.Lock()
        self.hits = 0
        self.misses = 0
        if self.path is not None and self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    entry = json.loads(line)
                    key = (entry["input"], entry["src_lang"], entry["dst_lang"])
                    self._entries[key] = entry["output"]
                except (ValueError, KeyError) as e:
                    self.logger.warning(f"忽略损坏的缓存行 {self.path}:{line_no}: {e}")
        self.logger.info(f"载入翻译缓存 {len(self._entries)} 条: {self.path}")

    def get(self, text: str, source_lang: str, target_lang: str) -> Optional[str]:
        with self._lock:
            value = self._entries.get((text, source_lang, target_lang))
            if value is None:
                self.misses += 1
            else:
                self.hits += 1
            return value

    def put(self, text: str, source_lang: str, target_lang: str, output: str) -> None:
        with self._lock:
            key = (text, source_lang, target_lang)
            if self._entries.get(key) == output:
                return
            self._entries[key] = output
            if self.path is not None:
                self.path.parent.mkdir(parents=True, exist_ok=True)
                with open(self.path, "a", encoding="utf-8") as f:
                    f.write(json.dumps(
                        {"src_lang": source_lang, "dst_lang": target_lang, "input": text, "output": output},
                        ensure_ascii=False,
                    ) + "\n")

    def __len__(self) -> int:
        return len(self._entries)


def _split_whitespace(text: str) -> Tuple[str, str, str]:
    """(前导空白, 正文, 尾随空白)"""
    core = text.strip()
    if not core:
        return text, "", ""
    lead = text[:len(text) - len(text.lstrip())]
    trail = text[len(text.rstrip()):]
    return lead, core, trail


class Backtranslator(BaseModel):
    """回译增强"""

    def __init__(
        self,
        client: TranslationClient,
        cache: Optional[TranslationCache] = None,
        languages: Sequence[str] = PIVOT_LANGUAGES,
        max_in_flight: int = 4,
        pass_index: int = 0,
    ):
        super().__init__()
        for lang in languages:
            if lang not in PIVOT_LANGUAGES or lang not in client.supported_languages:
                raise UnsupportedLanguageError(lang)
        self.client = client
        self.cache = cache if cache is not None else TranslationCache()
        self.languages = list(languages)
        self.max_in_flight = max(1, max_in_flight)
        self.pass_index = pass_index

    def _translate(self, text: str, source_lang: str, target_lang: str) -> str:
        if not text:
            return ""
        cached = self.cache.get(text, source_lang, target_lang)
        if cached is not None:
            return cached
        self.notify_observers(ModelEventType.BACKEND_CALL, {"source": source_lang, "target": target_lang})
        output = self.client.translate(text, source_lang, target_lang)
        self.cache.put(text, source_lang, target_lang, output)
        return output

    def _round_trip(self, context: str, lang: str) -> str:
        lead, core, trail = _split_whitespace(context)
        if not core:
            return context
        pivot = self._translate(core, SOURCE_LANGUAGE, lang)
        back = self._translate(pivot, lang, SOURCE_LANGUAGE).strip()
        return f"{lead}{back}{trail}"

    def backtranslate(self, record: OpinionRecord, lang: str) -> AugmentedRecord:
        """
        回译一条记录

        Args:
            record: 观点记录
            lang: 中间语言

        Returns:
            增强记录，method为 bt_<lang>
        """
        if lang not in self.languages:
            raise UnsupportedLanguageError(lang)
        if record.is_implicit:
            raise MaskingError(f"隐式目标记录没有可保持的方面词: id={record.id}")
        left = self._round_trip(record.text[:record.target_from], lang)
        right = self._round_trip(record.text[record.target_to:], lang)
        text = left + record.target + right
        start = len(left)

        method = Method.backtranslation(lang)
        sentence_id = augmented_sentence_id(record, method, self.pass_index)
        new_record = record.with_text(sentence_id, text, record.target, start, start + len(record.target))
        params = {"lang": lang, "backend": self.client.name, "pass": self.pass_index, "noop": text == record.text}
        return AugmentedRecord(new_record.validate(), method, (record.id,), params)

    def augment(self, records: Sequence[OpinionRecord]) -> List[AugmentedRecord]:
        """
        回译整个语料，每条记录每种语言一条，顺序与输入一致

        Returns:
            |langs|·N 条减去失败跳过的记录
        """
        records = self.explicit_records(records, [Method.backtranslation(lang).value for lang in self.languages])
        tasks = [(record, lang) for record in records for lang in self.languages]
        self.logger.info(f"回译开始: {len(records)} 条记录 × {self.languages}")

        def run(task: Tuple[OpinionRecord, str]) -> Optional[AugmentedRecord]:
            record, lang = task
            return self.guarded(record.id, f"bt_{lang}", lambda: self.backtranslate(record, lang))

        if self.max_in_flight > 1 and len(tasks) > 1:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                results = list(pool.map(run, tasks))
        else:
            results = [run(task) for task in tasks]

        outputs = [item for item in results if item is not None]
        for item in outputs:
            self.emitted(item)
        self.logger.info(
            f"回译完成: 生成 {len(outputs)} 条, 缓存命中 {self.cache.hits}, 后端调用 {self.client.calls}"
        )
        return outputs


def backtranslate(
    record: OpinionRecord,
    lang: str,
    client: TranslationClient,
    cache: Optional[TranslationCache] = None,
) -> AugmentedRecord:
    return Backtranslator(client, cache, [lang], max_in_flight=1).backtranslate(record, lang)


def backtranslate_corpus(
    records: Sequence[OpinionRecord],
    langs: Sequence[str],
    client: TranslationClient,
    cache: Optional[TranslationCache] = None,
    max_in_flight: int = 4,
    pass_index: int = 0,
) -> List[AugmentedRecord]:
    return Backtranslator(client, cache, langs, max_in_flight, pass_index).augment(records)
