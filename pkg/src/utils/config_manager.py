#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
配置管理器
负责加载和管理增强工具的配置（config.ini + 环境变量）
"""

import configparser
import os
from pathlib import Path
from typing import Any, Dict, List, Optional


# 环境变量 -> (配置段, 配置键)
ENV_OVERRIDES = {
    'ABSA_WORDNET_DIR': ('resources', 'wordnet_dir'),
    'ABSA_TRANSLATE_ENDPOINT': ('backtranslation', 'endpoint'),
    'ABSA_TRANSLATE_KEY': ('backtranslation', 'api_key'),
}

DEFAULT_SEED = 20200601

DEFAULTS: Dict[str, Dict[str, str]] = {
    'app': {
        'name': 'absa-augment',
        'version': '1.0.0',
    },
    'logging': {
        'level': 'INFO',
        'file': '',
    },
    'resources': {
        'wordnet_dir': '',
        'pos_model': '',
        'embeddings': '',
        'embedding_dims': '',
        'oov_policy': 'zero',
    },
    'eda': {
        'alpha': '0.1',
        'methods': 'sr,ri,rs,rd',
        'single_swap': 'false',
    },
    'eda_adjusted': {
        'alpha': '0.1',
        'methods': 'sr_wsd,ri_wsd,ts',
        'shuffle_pairs': 'false',
        'lesk_stopwords': 'drop',
    },
    'backtranslation': {
        'languages': 'nl,es,ja',
        'cache': '',
        'endpoint': '',
        'api_key': '',
        'max_in_flight': '4',
        'retries': '3',
        'backoff_seconds': '1.0',
        'timeout_seconds': '30',
        'rate_limit': '0',
    },
    'mixup': {
        'alpha': '0.2',
        'pairing': 'random',
    },
    'run': {
        'seed': str(DEFAULT_SEED),
        'ratio': '1:1',
        'workers': '1',
        'progress': 'true',
    },
}


class ConfigManager:
    """配置管理器类"""

    def __init__(self, config_file: Optional[str] = None, environ: Optional[Dict[str, str]] = None):
        """
        初始化配置管理器

        Args:
            config_file: 配置文件路径，默认为项目根目录下的config.ini
            environ: 环境变量映射，默认为os.environ
        """
        self.config = configparser.ConfigParser()
        self.config.read_dict(DEFAULTS)

        if config_file is None:
            project_root = Path(__file__).parent.parent.parent
            config_file = project_root / "config.ini"

        self.config_file = Path(config_file)
        self.environ = os.environ if environ is None else environ
        self.load_config()

    def load_config(self) -> None:
        """加载配置文件，再叠加环境变量"""
        if self.config_file.exists():
            self.config.read(self.config_file, encoding='utf-8')

        for env_key, (section, key) in ENV_OVERRIDES.items():
            value = self.environ.get(env_key)
            if value:
                self.set(section, key, value)

    def get(self, section: str, key: str, fallback: Any = None) -> Any:
        """
        获取配置值

        Args:
            section: 配置段名
            key: 配置键名
            fallback: 默认值

        Returns:
            配置值，空字符串视为未配置
        """
        try:
            value = self.config.get(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError):
            return fallback
        return value if value != '' else fallback

    def getint(self, section: str, key: str, fallback: int = 0) -> int:
        """获取整数配置值"""
        try:
            return self.config.getint(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
            return fallback

    def getfloat(self, section: str, key: str, fallback: float = 0.0) -> float:
        """获取浮点数配置值"""
        try:
            return self.config.getfloat(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
            return fallback

    def getboolean(self, section: str, key: str, fallback: bool = False) -> bool:
        """获取布尔值配置"""
        try:
            return self.config.getboolean(section, key)
        except (configparser.NoSectionError, configparser.NoOptionError, ValueError):
            return fallback

    def getlist(self, section: str, key: str, fallback: Optional[List[str]] = None) -> List[str]:
        """获取逗号分隔的列表配置"""
        value = self.get(section, key)
        if value is None:
            return list(fallback or [])
        return [item.strip() for item in value.split(',') if item.strip()]

    def set(self, section: str, key: str, value: Any) -> None:
        """
        设置配置值

        Args:
            section: 配置段名
            key: 配置键名
            value: 配置值
        """
        if not self.config.has_section(section):
            self.config.add_section(section)

        self.config.set(section, key, str(value))

    def save_config(self, path: Optional[str] = None) -> None:
        """保存配置到文件"""
        target = Path(path) if path else self.config_file
        with open(target, 'w', encoding='utf-8') as f:
            self.config.write(f)

    def as_dict(self) -> Dict[str, Dict[str, str]]:
        """导出配置（api_key不回显）"""
        result = {}
        for section in self.config.sections():
            result[section] = {
                key: ('***' if key == 'api_key' and value else value)
                for key, value in self.config.items(section)
            }
        return result
