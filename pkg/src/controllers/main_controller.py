#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
主控制器
合并命令行与配置，加载资源，分派子命令，输出产物和运行报告
"""

import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Union

from src.controllers.augment_controller import AugmentController, parse_ratio
from src.controllers.base_controller import BaseController
from src.models.corpus_model import CorpusModel, dataset_stats
from src.models.eda_adjusted_model import AdjustedEdaAugmenter, AdjustedEdaConfig
from src.models.eda_model import EdaAugmenter, EdaConfig
from src.models.mixup_model import (
    OOV_POLICIES,
    PAIRING_POLICIES,
    EmbeddingTable,
    MixupAugmenter,
    MixupConfig,
    load_embeddings,
)
from src.models.record_model import ADJUSTED_METHODS, EDA_METHODS, Method, OpinionRecord, RunReport
from src.models.tagger_model import PerceptronTagger, read_tagged_corpus, save_model, train
from src.models.translation_model import (
    PIVOT_LANGUAGES,
    Backtranslator,
    HttpTranslationClient,
    TranslationCache,
    TranslationClient,
    stub_backend,
)
from src.models.wordnet_model import WordNetDb
from src.utils.config_manager import DEFAULT_SEED, ConfigManager
from src.utils.errors import AugmentationError, ConfigError
from src.views.mixup_view import write_mixup_bin, write_mixup_tsv
from src.views.report_view import render_stats_json, render_stats_table, write_report
from src.views.triple_view import write_triple_format
from src.views.xml_view import write_xml


AUGMENT_COMMANDS = ("eda", "eda-adj", "backtranslate", "mixup")
COMMANDS = ("stats", *AUGMENT_COMMANDS, "selfcheck", "train-tagger")
TEXT_FORMATS = ("xml", "triple")
MIXUP_FORMATS = ("mixup-bin", "mixup-tsv")

# 子命令 -> 配置段
_SECTIONS = {"eda": "eda", "eda-adj": "eda_adjusted", "mixup": "mixup"}
_METHOD_FAMILIES = {"eda": EDA_METHODS, "eda-adj": ADJUSTED_METHODS}


@dataclass
class RunConfig:
    """一次运行的完整参数（命令行 > 环境变量 > config.ini > 内置默认）"""

    command: str
    input: Optional[str] = None
    output: str = "-"
    format: Optional[str] = None
    methods: Tuple[str, ...] = ()
    alphas: Tuple[float, ...] = ()
    seed: int = DEFAULT_SEED
    ratio: str = "1:1"
    wordnet_dir: Optional[str] = None
    pos_model: Optional[str] = None
    embeddings: Optional[str] = None
    dims: Optional[int] = None
    oov_policy: str = "zero"
    pairing: str = "random"
    languages: Tuple[str, ...] = PIVOT_LANGUAGES
    stub: Optional[str] = None
    cache: Optional[str] = None
    endpoint: Optional[str] = None
    api_key: Optional[str] = field(default=None, repr=False)
    max_in_flight: int = 4
    retries: int = 3
    backoff_seconds: float = 1.0
    timeout_seconds: float = 30.0
    rate_limit: float = 0.0
    workers: int = 1
    single_swap: bool = False
    min_one: bool = True
    shuffle_pairs: bool = False
    lesk_stopwords: str = "drop"
    keep_implicit: bool = False
    report: Optional[str] = None
    progress: bool = True
    as_json: bool = False
    top: Optional[int] = None
    corpus: Optional[str] = None
    model_out: Optional[str] = None
    iterations: int = 5
    holdout: float = 0.0

    @classmethod
    def from_options(cls, command: str, options: Mapping[str, Any], config: ConfigManager) -> "RunConfig":
        """
        由命令行选项和配置合成运行参数

        Args:
            command: 子命令
            options: 命令行选项（未给出的为None）
            config: 配置管理器（已叠加环境变量）

        Returns:
            RunConfig
        """
        def pick(name: str, section: str, key: str, getter: str = "get", fallback: Any = None) -> Any:
            value = options.get(name)
            if value is not None:
                return value
            return getattr(config, getter)(section, key, fallback)

        section = _SECTIONS.get(command)
        alphas = options.get("alpha")
        if alphas is None and section:
            alphas = config.get(section, "alpha")
        methods = options.get("methods")
        if methods is None and section in ("eda", "eda_adjusted"):
            methods = config.get(section, "methods")
        languages = options.get("lang") or config.getlist("backtranslation", "languages", list(PIVOT_LANGUAGES))
        dims = pick("dims", "resources", "embedding_dims")

        run = cls(
            command=command,
            input=options.get("input"),
            output=options.get("output") or "-",
            format=options.get("format"),
            methods=_split(methods),
            alphas=tuple(_to_float(a, "alpha") for a in _split(alphas)),
            seed=int(pick("seed", "run", "seed", "getint", DEFAULT_SEED)),
            ratio=pick("ratio", "run", "ratio", fallback="1:1"),
            wordnet_dir=pick("wordnet", "resources", "wordnet_dir"),
            pos_model=pick("pos_model", "resources", "pos_model"),
            embeddings=pick("embeddings", "resources", "embeddings"),
            dims=int(_to_float(dims, "dims")) if dims not in (None, "") else None,
            oov_policy=pick("oov", "resources", "oov_policy", fallback="zero"),
            pairing=pick("pairing", "mixup", "pairing", fallback="random"),
            languages=_split(languages),
            stub=options.get("stub"),
            cache=pick("cache", "backtranslation", "cache"),
            endpoint=config.get("backtranslation", "endpoint"),
            api_key=config.get("backtranslation", "api_key"),
            max_in_flight=int(pick("max_in_flight", "backtranslation", "max_in_flight", "getint", 4)),
            retries=config.getint("backtranslation", "retries", 3),
            backoff_seconds=config.getfloat("backtranslation", "backoff_seconds", 1.0),
            timeout_seconds=config.getfloat("backtranslation", "timeout_seconds", 30.0),
            rate_limit=float(pick("rate_limit", "backtranslation", "rate_limit", "getfloat", 0.0)),
            workers=int(pick("workers", "run", "workers", "getint", 1)),
            single_swap=bool(pick("single_swap", "eda", "single_swap", "getboolean", False)),
            min_one=not options.get("no_min_one", False),
            shuffle_pairs=bool(pick("shuffle_pairs", "eda_adjusted", "shuffle_pairs", "getboolean", False)),
            lesk_stopwords=pick("lesk_stopwords", "eda_adjusted", "lesk_stopwords", fallback="drop"),
            keep_implicit=bool(options.get("keep_implicit", False)),
            report=options.get("report"),
            progress=bool(pick("progress", "run", "progress", "getboolean", True)),
            as_json=bool(options.get("json", False)),
            top=options.get("top"),
            corpus=options.get("corpus"),
            model_out=options.get("out"),
            iterations=5 if options.get("iterations") is None else int(options["iterations"]),
            holdout=float(options.get("holdout") or 0.0),
        )
        return run.validate()

    def validate(self) -> "RunConfig":
        """
        检查参数组合

        Raises:
            ConfigError: 参数缺失或取值非法
        """
        if self.command not in COMMANDS:
            raise ConfigError(f"未知子命令: {self.command}")
        if self.command in ("stats", *AUGMENT_COMMANDS) and not self.input:
            raise ConfigError(f"{self.command} 需要输入文件")
        if self.workers < 1:
            raise ConfigError(f"workers必须至少为1: {self.workers}")
        parse_ratio(self.ratio)

        if self.command in AUGMENT_COMMANDS:
            allowed = MIXUP_FORMATS if self.command == "mixup" else TEXT_FORMATS
            self.format = self.format or allowed[0]
            if self.format not in allowed:
                raise ConfigError(f"{self.command} 不支持输出格式 {self.format}，可选 {', '.join(allowed)}")

        if self.command in _METHOD_FAMILIES:
            family = {m.value for m in _METHOD_FAMILIES[self.command]}
            unknown = [m for m in self.methods if m not in family]
            if unknown or not self.methods:
                raise ConfigError(f"{self.command} 的方法必须取自 {', '.join(sorted(family))}: {', '.join(unknown)}")
            if len(self.alphas) != 1:
                raise ConfigError(f"{self.command} 只接受一个alpha")
            if self.lesk_stopwords not in ("keep", "drop"):
                raise ConfigError(f"--lesk-stopwords 只能是 keep 或 drop: {self.lesk_stopwords}")

        if self.command == "mixup":
            if not self.alphas or any(a <= 0 for a in self.alphas):
                raise ConfigError(f"mixup的alpha必须大于0: {self.alphas}")
            if not self.embeddings:
                raise ConfigError("mixup需要词向量文件 (--embeddings)")
            if self.oov_policy not in OOV_POLICIES:
                raise ConfigError(f"未知的OOV策略: {self.oov_policy}")
            if self.pairing not in PAIRING_POLICIES:
                raise ConfigError(f"未知的配对策略: {self.pairing}")

        if self.command == "backtranslate":
            if not self.stub and not self.endpoint:
                raise ConfigError("回译需要 --stub 或翻译服务地址 (ABSA_TRANSLATE_ENDPOINT)")
            if not self.languages:
                raise ConfigError("至少需要一种中间语言")
            if self.rate_limit < 0:
                raise ConfigError(f"rate_limit不能为负: {self.rate_limit}")

        if self.command == "train-tagger" and not (self.corpus and self.model_out):
            raise ConfigError("train-tagger 需要 --corpus 和 --out")
        return self

    @property
    def ratio_pair(self) -> Tuple[int, int]:
        return parse_ratio(self.ratio)

    def echo(self) -> Dict[str, Any]:
        """报告中回显的配置（不含密钥）"""
        data = asdict(self)
        data.pop("api_key", None)
        return {key: list(value) if isinstance(value, tuple) else value for key, value in data.items()}


def _split(value: Any) -> Tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        items: List[str] = []
        for item in value:
            items.extend(_split(item))
        return tuple(items)
    return tuple(item.strip() for item in str(value).split(",") if item.strip())


def _to_float(value: str, name: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{name} 不是数字: {value}")


@dataclass
class SelfCheckItem:
    """自检项"""

    name: str
    ok: bool
    message: str


class MainController(BaseController):
    """主控制器"""

    def __init__(self, config: ConfigManager, run_config: RunConfig):
        """
        初始化主控制器

        Args:
            config: 配置管理器
            run_config: 本次运行参数
        """
        super().__init__()
        self.config = config
        self.run_config = run_config
        self.report = RunReport(command=run_config.command, config=run_config.echo())
        self.augment_controller = AugmentController(self.report, run_config.progress)
        self.client: Optional[TranslationClient] = None
        self.selfcheck_items: List[SelfCheckItem] = []

        # 清理状态标志，防止重复调用
        self._is_cleaning_up = False

        self.logger.info(f"主控制器初始化完成: {run_config.command}")

    # ---- 资源 ----

    def load_records(self) -> List[OpinionRecord]:
        records = CorpusModel(self.run_config.keep_implicit).load(self.run_config.input)
        self.report.input_count = len(records)
        return records

    def load_wordnet(self) -> WordNetDb:
        if not self.run_config.wordnet_dir:
            raise ConfigError("需要WordNet目录: --wordnet 或环境变量 ABSA_WORDNET_DIR")
        return WordNetDb.load(self.run_config.wordnet_dir)

    def load_tagger(self) -> PerceptronTagger:
        if self.run_config.pos_model:
            return PerceptronTagger.load(self.run_config.pos_model)
        self.logger.info("未指定词性标注模型，使用内置语料训练")
        return PerceptronTagger.from_seed_corpus()

    def load_embeddings(self) -> EmbeddingTable:
        cfg = self.run_config
        return load_embeddings(cfg.embeddings, cfg.dims, cfg.oov_policy, cfg.seed)

    def make_client(self) -> TranslationClient:
        cfg = self.run_config
        if cfg.stub:
            return stub_backend(cfg.stub)
        return HttpTranslationClient(
            cfg.endpoint,
            cfg.api_key,
            timeout=cfg.timeout_seconds,
            retries=cfg.retries,
            backoff_seconds=cfg.backoff_seconds,
            rate_limit=cfg.rate_limit or None,
        )

    # ---- 运行 ----

    def run(self) -> RunReport:
        """
        执行子命令

        Returns:
            运行报告，exit_code已填写
        """
        cfg = self.run_config
        self.log_method_call("run", command=cfg.command, input=cfg.input, output=cfg.output)
        handlers = {
            "stats": self._run_stats,
            "eda": self._run_eda,
            "eda-adj": self._run_eda_adjusted,
            "backtranslate": self._run_backtranslate,
            "mixup": self._run_mixup,
            "selfcheck": self._run_selfcheck,
            "train-tagger": self._run_train_tagger,
        }
        started = time.perf_counter()
        try:
            handlers[cfg.command]()
            if self.report.skipped and not self.report.exit_code:
                self.report.exit_code = 3
        except AugmentationError as e:
            self.log_error(e, f"{cfg.command} 失败")
            self.report.errors.append(str(e))
            self.report.exit_code = e.exit_code
        finally:
            self.report.wall_time = time.perf_counter() - started

        if cfg.command in AUGMENT_COMMANDS or cfg.report:
            write_report(self.report, cfg.report)
        self.logger.info(f"{cfg.command} 结束: 输出 {self.report.emitted} 条, 退出码 {self.report.exit_code}")
        return self.report

    def _write_output(self, payload: Union[str, bytes]) -> None:
        data = payload.encode("utf-8") if isinstance(payload, str) else payload
        if self.run_config.output in ("-", ""):
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
        else:
            path = Path(self.run_config.output)
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
            self.logger.info(f"已写出: {path}")

    def _write_text_records(self, outputs: List[Any]) -> None:
        if self.run_config.format == "triple":
            self._write_output(write_triple_format(outputs))
        else:
            self._write_output(write_xml(outputs))

    def _run_stats(self) -> None:
        stats = dataset_stats(self.load_records())
        if self.run_config.as_json:
            self._write_output(render_stats_json(stats))
        else:
            self._write_output(render_stats_table(stats, self.run_config.top))

    def _run_eda(self) -> None:
        cfg = self.run_config
        methods = tuple(Method(m) for m in cfg.methods)
        records = self.load_records()
        needs_db = any(m in (Method.SR, Method.RI) for m in methods)
        db = self.load_wordnet() if needs_db else None

        def factory(pass_index: int) -> EdaAugmenter:
            return EdaAugmenter(db, EdaConfig(
                alpha=cfg.alphas[0],
                seed=cfg.seed,
                methods=methods,
                min_one=cfg.min_one,
                single_swap=cfg.single_swap,
                workers=cfg.workers,
                pass_index=pass_index,
            ))

        outputs = self.augment_controller.run_passes(
            records, factory, cfg.ratio_pair, expected_per_pass=len(methods) * len(records)
        )
        self._write_text_records(outputs)

    def _run_eda_adjusted(self) -> None:
        cfg = self.run_config
        methods = tuple(Method(m) for m in cfg.methods)
        records = self.load_records()
        needs_wsd = any(m in (Method.SR_WSD, Method.RI_WSD) for m in methods)
        db = self.load_wordnet() if needs_wsd else None
        tagger = self.load_tagger() if needs_wsd else None

        def factory(pass_index: int) -> AdjustedEdaAugmenter:
            return AdjustedEdaAugmenter(db, tagger, AdjustedEdaConfig(
                alpha=cfg.alphas[0],
                seed=cfg.seed,
                methods=methods,
                min_one=cfg.min_one,
                shuffle_pairs=cfg.shuffle_pairs,
                lesk_drop_stopwords=cfg.lesk_stopwords == "drop",
                workers=cfg.workers,
                pass_index=pass_index,
            ))

        outputs = self.augment_controller.run_passes(
            records, factory, cfg.ratio_pair, expected_per_pass=len(methods) * len(records)
        )
        self._write_text_records(outputs)

    def _run_backtranslate(self) -> None:
        cfg = self.run_config
        records = self.load_records()
        self.client = self.make_client()
        cache = TranslationCache(cfg.cache)

        def factory(pass_index: int) -> Backtranslator:
            return Backtranslator(self.client, cache, cfg.languages, cfg.max_in_flight, pass_index)

        outputs = self.augment_controller.run_passes(
            records, factory, cfg.ratio_pair, expected_per_pass=len(cfg.languages) * len(records)
        )
        self.logger.info(f"后端调用 {self.augment_controller.backend_calls} 次, 缓存 {len(cache)} 条")
        self._write_text_records(outputs)

    def _run_mixup(self) -> None:
        cfg = self.run_config
        records = self.load_records()
        table = self.load_embeddings()
        _, passes = cfg.ratio_pair

        outputs = []
        for alpha in cfg.alphas:
            def factory(pass_index: int, alpha: float = alpha) -> MixupAugmenter:
                return MixupAugmenter(table, MixupConfig(alpha, cfg.seed, cfg.pairing, pass_index))

            outputs.extend(self.augment_controller.run_passes(
                records, factory, (0, passes), include_originals=False, expected_per_pass=len(records)
            ))

        if cfg.format == "mixup-tsv":
            self._write_output(write_mixup_tsv(outputs))
        else:
            self._write_output(write_mixup_bin(outputs))

    def selfcheck(self) -> List[SelfCheckItem]:
        """
        检查WordNet、词性标注模型、词向量和翻译后端

        Returns:
            自检项列表
        """
        cfg = self.run_config
        items = []

        def check(name: str, action) -> None:
            try:
                items.append(SelfCheckItem(name, True, action()))
            except Exception as e:
                items.append(SelfCheckItem(name, False, str(e)))

        if cfg.wordnet_dir:
            check("wordnet", lambda: f"{cfg.wordnet_dir}: {len(self.load_wordnet())} 个词条")
        else:
            items.append(SelfCheckItem("wordnet", False, "未配置WordNet目录 (--wordnet / ABSA_WORDNET_DIR)"))

        check("pos_model", lambda: f"{cfg.pos_model or '内置语料'}: {len(self.load_tagger().model.classes)} 个标签")

        if cfg.embeddings:
            def embeddings() -> str:
                table = self.load_embeddings()
                return f"{cfg.embeddings}: {len(table)} 个词, d={table.dims}"
            check("embeddings", embeddings)
        else:
            items.append(SelfCheckItem("embeddings", True, "未配置，跳过"))

        if cfg.stub:
            items.append(SelfCheckItem("translation", True, f"stub-{cfg.stub} 后端"))
        elif cfg.endpoint:
            self.client = self.make_client()
            ok, message = self.client.check()
            items.append(SelfCheckItem("translation", ok, message))
        else:
            items.append(SelfCheckItem("translation", True, "未配置，跳过"))
        return items

    def _run_selfcheck(self) -> None:
        self.selfcheck_items = self.selfcheck()
        lines = [f"[{'OK' if item.ok else 'FAIL'}] {item.name}: {item.message}" for item in self.selfcheck_items]
        self._write_output("\n".join(lines) + "\n")
        failed = [item.name for item in self.selfcheck_items if not item.ok]
        if failed:
            self.report.errors.extend(f"{item.name}: {item.message}" for item in self.selfcheck_items if not item.ok)
            self.report.exit_code = 1
            self.logger.error(f"自检失败: {', '.join(failed)}")

    def _run_train_tagger(self) -> None:
        cfg = self.run_config
        corpus = read_tagged_corpus(cfg.corpus)
        model = train(corpus, iterations=cfg.iterations, seed=cfg.seed, holdout=cfg.holdout)
        Path(cfg.model_out).parent.mkdir(parents=True, exist_ok=True)
        save_model(model, cfg.model_out)
        self.report.input_count = len(corpus)
        self.logger.info(f"模型已保存: {cfg.model_out} (准确率 {model.accuracy:.3f})")

    def cleanup(self) -> None:
        """清理资源"""
        if self._is_cleaning_up:
            self.logger.debug("正在清理中，跳过重复调用")
            return
        self._is_cleaning_up = True

        try:
            self.augment_controller.cleanup()
        except Exception as e:
            self.logger.error(f"清理控制器失败，忽略: {e}")

        try:
            if self.client is not None:
                self.client.close()
        except Exception as e:
            self.logger.error(f"关闭翻译客户端失败，忽略: {e}")

        super().cleanup()
