#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
异常定义
所有模型层抛出的异常都继承自AugmentationError，控制器负责捕获并映射为退出码
"""

from typing import Iterable, Optional


class AugmentationError(Exception):
    """增强工具包异常基类"""

    # 控制器据此映射退出码
    exit_code = 3


class ConfigError(AugmentationError):
    """配置或参数组合错误"""

    exit_code = 1


class ResourceError(AugmentationError):
    """外部资源（WordNet、模型、词向量）不可用"""

    exit_code = 2


class CorpusParseError(AugmentationError):
    """XML格式错误"""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        location = f" (行 {line}, 列 {column})" if line is not None else ""
        super().__init__(f"{message}{location}")


class RecordValidationError(AugmentationError):
    """记录级校验失败，列出所有出错的记录ID"""

    exit_code = 1

    def __init__(self, reason: str, record_ids: Iterable[str] = ()):
        self.record_ids = list(record_ids)
        self.reason = reason
        ids = ", ".join(self.record_ids)
        super().__init__(f"{reason}: [{ids}]" if ids else reason)


class MaskingError(AugmentationError):
    """目标占位符数量不为1，或目标不在记录的偏移处"""


class WordNetLoadError(ResourceError):
    """WordNet数据文件缺失或格式错误"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(f"{message}{where}")


class SenseNotFoundError(AugmentationError):
    """词条在WordNet中不存在（含词形回退）"""

    def __init__(self, word: str):
        self.word = word
        super().__init__(f"WordNet中找不到词条: {word}")


class TaggerModelError(ResourceError):
    """词性标注模型损坏、版本不符或训练语料为空"""


class EmbeddingLoadError(ResourceError):
    """词向量文件维度不符"""

    def __init__(self, message: str, path: Optional[str] = None, line: Optional[int] = None):
        self.path = path
        self.line = line
        where = f" [{path}:{line}]" if line is not None else ""
        super().__init__(f"{message}{where}")


class MixupError(AugmentationError):
    """混合插值参数或形状错误"""


class TranslationError(AugmentationError):
    """翻译后端重试后仍然失败"""


class UnsupportedLanguageError(ConfigError):
    """不支持的中间语言"""

    def __init__(self, lang: str):
        self.lang = lang
        super().__init__(f"不支持的中间语言: {lang}")
