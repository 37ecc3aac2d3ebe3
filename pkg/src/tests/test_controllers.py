#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
控制器与命令行测试
"""

import json
import shutil

import pytest

from main import build_parser, main
from src.controllers.augment_controller import AugmentController, parse_ratio
from src.controllers.base_controller import BaseController
from src.controllers.main_controller import MainController, RunConfig
from src.models.base_model import BaseModel, ModelEventType
from src.models.corpus_model import parse_semeval_xml
from src.models.record_model import RunReport
from src.models.tagger_model import SEED_CORPUS, PerceptronTagger
from src.models.translation_model import TranslationClient
from src.tests.conftest import SEMEVAL_SAMPLE
from src.utils.config_manager import ConfigManager
from src.utils.errors import ConfigError, TranslationError
from src.utils.logger import LoggerMixin, setup_logger
from src.views.mixup_view import read_mixup_bin


N = 20


class EchoModel(BaseModel):
    """每条记录输出一个字符串的假模型"""

    def __init__(self, tag):
        super().__init__()
        self.tag = tag

    def augment(self, records):
        outputs = [f"{self.tag}:{r.id}" for r in records]
        for _ in outputs:
            self.notify_observers(ModelEventType.RECORD_EMITTED, {"method": "echo"})
        return outputs


class FailingClient(TranslationClient):
    """上下文含有 rude 时失败的翻译后端"""

    name = "failing"

    def _translate(self, text, source_lang, target_lang):
        if "rude" in text:
            raise TranslationError("服务不可用")
        return text


@pytest.fixture
def config(tmp_path):
    """不读取项目配置和环境变量的配置管理器"""
    return ConfigManager(str(tmp_path / "absent.ini"), environ={})


@pytest.fixture
def embeddings_file(tmp_path):
    path = tmp_path / "vectors.txt"
    path.write_text("the 0.1 0.2 0.3\nfood 1 0 0\nrude 0 1 0\n", encoding="utf-8")
    return path


def run(command, config, **options):
    """构造运行参数并执行一次子命令"""
    options.setdefault("progress", False)
    controller = MainController(config, RunConfig.from_options(command, options, config))
    try:
        return controller.run()
    finally:
        controller.cleanup()


class TestAugmentController:
    """测试比例控制和报告汇总"""

    @pytest.mark.parametrize("value, expected", [("1:1", (1, 1)), ("3:1", (3, 1)), (" 1:3 ", (1, 3))])
    def test_parse_ratio(self, value, expected):
        assert parse_ratio(value) == expected

    def test_parse_ratio_invalid(self):
        with pytest.raises(ConfigError):
            parse_ratio("2:1")

    def test_run_passes(self, corpus20):
        """测试原始记录先复制r_o份，再运行r_a轮"""
        report = RunReport(command="test")
        controller = AugmentController(report)
        models = []

        def factory(pass_index):
            models.append(EchoModel(pass_index))
            return models[-1]

        outputs = controller.run_passes(corpus20, factory, (1, 3))
        assert len(outputs) == N + 3 * N
        assert outputs[:N] == corpus20
        assert outputs[N] == f"0:{corpus20[0].id}"
        assert outputs[-1] == f"2:{corpus20[-1].id}"
        assert report.per_method == {"original": N, "echo": 3 * N}
        assert report.emitted == 4 * N
        assert all(not m._observers for m in models)

    def test_without_originals(self, corpus20):
        report = RunReport()
        outputs = AugmentController(report).run_passes(corpus20, EchoModel, (3, 2), include_originals=False)
        assert len(outputs) == 2 * N
        assert "original" not in report.per_method

    def test_noop_and_skip_events(self):
        report = RunReport()
        controller = AugmentController(report)
        controller.handle_model_event(ModelEventType.RECORD_NOOP, {"method": "sr", "reason": "unchanged"})
        controller.handle_model_event(ModelEventType.RECORD_SKIPPED, {"method": "bt_nl", "reason": "TranslationError"})
        controller.handle_model_event(ModelEventType.RECORD_SKIPPED, {"method": "bt_nl", "reason": "TranslationError"})
        assert report.noops == {"sr": {"unchanged": 1}}
        assert report.skips == {"bt_nl": {"TranslationError": 2}}
        assert report.skipped == 2

    def test_handler_errors_are_contained(self):
        """测试处理器异常不会影响模型"""
        class Controller(BaseController):
            def setup_event_handlers(self):
                self.register_event_handler("boom", lambda data: 1 / 0)

        controller = Controller()
        controller.init_controller()
        controller.handle_model_event("boom", None)


class TestLogger:
    """测试日志配置"""

    def test_file_sinks(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        logger = setup_logger("DEBUG", log_file, colorize=False)
        try:
            logger.info("普通日志")
            logger.error("错误日志")
            assert "普通日志" in log_file.read_text(encoding="utf-8")
            error_log = (tmp_path / "logs" / "error.log").read_text(encoding="utf-8")
            assert "错误日志" in error_log
            assert "普通日志" not in error_log
        finally:
            setup_logger("WARNING")

    def test_log_error_binds_class_name(self):
        class Worker(LoggerMixin):
            pass

        messages = []
        logger = setup_logger("WARNING", colorize=False)
        sink_id = logger.add(lambda message: messages.append(message.record), level="ERROR")
        try:
            Worker().log_error(ValueError("坏数据"), "处理失败")
        finally:
            logger.remove(sink_id)
        assert messages[0]["message"] == "处理失败: 坏数据"
        assert messages[0]["extra"]["name"] == "Worker"


class TestConfigManager:
    """测试配置文件与环境变量"""

    def test_defaults_without_file(self, config):
        assert config.getint("run", "seed") == 20200601
        assert config.getlist("backtranslation", "languages") == ["nl", "es", "ja"]
        assert config.get("resources", "wordnet_dir") is None
        assert config.getboolean("run", "progress") is True

    def test_bad_values_fall_back(self, tmp_path):
        ini = tmp_path / "config.ini"
        ini.write_text("[run]\nworkers = many\n", encoding="utf-8")
        config = ConfigManager(str(ini), environ={})
        assert config.getint("run", "workers", 1) == 1
        assert config.getfloat("nowhere", "x", 0.5) == 0.5

    def test_save_and_reload(self, config, tmp_path):
        config.set("eda", "alpha", "0.3")
        path = tmp_path / "saved.ini"
        config.save_config(str(path))
        reloaded = ConfigManager(str(path), environ={})
        assert reloaded.getfloat("eda", "alpha") == 0.3

    def test_as_dict_masks_key(self, tmp_path):
        config = ConfigManager(str(tmp_path / "absent.ini"), environ={"ABSA_TRANSLATE_KEY": "secret"})
        assert config.get("backtranslation", "api_key") == "secret"
        assert config.as_dict()["backtranslation"]["api_key"] == "***"


class TestRunConfig:
    """测试参数合成与校验"""

    def test_defaults(self, config):
        cfg = RunConfig.from_options("eda", {"input": "train.xml"}, config)
        assert cfg.methods == ("sr", "ri", "rs", "rd")
        assert cfg.alphas == (0.1,)
        assert cfg.seed == 20200601
        assert cfg.format == "xml"
        assert cfg.languages == ("nl", "es", "ja")

    def test_precedence(self, tmp_path):
        """测试 命令行 > 环境变量 > config.ini"""
        ini = tmp_path / "config.ini"
        ini.write_text("[run]\nseed = 7\n\n[resources]\nwordnet_dir = /from/ini\n", encoding="utf-8")
        config = ConfigManager(str(ini), environ={"ABSA_WORDNET_DIR": "/from/env"})

        cfg = RunConfig.from_options("eda", {"input": "train.xml"}, config)
        assert cfg.seed == 7
        assert cfg.wordnet_dir == "/from/env"

        cfg = RunConfig.from_options("eda", {"input": "train.xml", "seed": 11, "wordnet": "/cli"}, config)
        assert cfg.seed == 11
        assert cfg.wordnet_dir == "/cli"

    def test_echo_hides_key(self, tmp_path):
        config = ConfigManager(str(tmp_path / "absent.ini"), environ={"ABSA_TRANSLATE_KEY": "secret"})
        cfg = RunConfig.from_options("backtranslate", {"input": "a.xml", "stub": "marker"}, config)
        assert cfg.api_key == "secret"
        assert "api_key" not in cfg.echo()
        assert "secret" not in json.dumps(cfg.echo())

    @pytest.mark.parametrize("command, options", [
        ("eda", {}),
        ("eda", {"input": "a.xml", "alpha": "0.1,0.2"}),
        ("eda", {"input": "a.xml", "alpha": "lots"}),
        ("eda", {"input": "a.xml", "methods": "sr,ts"}),
        ("eda", {"input": "a.xml", "format": "mixup-bin"}),
        ("eda", {"input": "a.xml", "ratio": "2:1"}),
        ("eda", {"input": "a.xml", "workers": 0}),
        ("mixup", {"input": "a.xml"}),
        ("mixup", {"input": "a.xml", "embeddings": "v.txt", "alpha": "0"}),
        ("backtranslate", {"input": "a.xml"}),
        ("backtranslate", {"input": "a.xml", "stub": "marker", "rate_limit": -1}),
        ("bogus", {"input": "a.xml"}),
    ])
    def test_invalid(self, config, command, options):
        with pytest.raises(ConfigError):
            RunConfig.from_options(command, options, config)


class TestAugmentCommands:
    """测试增强子命令的输出数量和可复现性"""

    def test_eda_counts(self, config, corpus_file, wndb_dir, tmp_path):
        out, report_path = tmp_path / "eda.xml", tmp_path / "report.json"
        report = run("eda", config, input=str(corpus_file), output=str(out),
                     wordnet=str(wndb_dir), report=str(report_path))
        assert report.exit_code == 0
        assert len(parse_semeval_xml(out.read_bytes())) == N + 4 * N
        assert report.per_method == {"original": N, "sr": N, "ri": N, "rs": N, "rd": N}

        data = json.loads(report_path.read_text(encoding="utf-8"))
        assert data["emitted"] == sum(data["per_method"].values()) == 5 * N
        assert data["input_count"] == N
        assert "wall_time" in data

    @pytest.mark.parametrize("ratio, originals, augmented", [("1:1", 1, 1), ("3:1", 3, 1), ("1:3", 1, 3)])
    def test_eda_adjusted_ratios(self, config, corpus_file, wndb_dir, tmp_path, ratio, originals, augmented):
        out = tmp_path / "adj.xml"
        report = run("eda-adj", config, input=str(corpus_file), output=str(out),
                     wordnet=str(wndb_dir), ratio=ratio, report=str(tmp_path / "r.json"))
        assert report.exit_code == 0
        records = parse_semeval_xml(out.read_bytes())
        assert len(records) == originals * N + augmented * 3 * N
        assert report.per_method["original"] == originals * N
        assert report.per_method["ts"] == augmented * N
        augmented_ids = [r.id for r in records if "~" in r.id]
        assert len(set(augmented_ids)) == len(augmented_ids)

    def test_backtranslate_counts(self, config, corpus_file, tmp_path):
        out = tmp_path / "bt.txt"
        report = run("backtranslate", config, input=str(corpus_file), output=str(out), format="triple",
                     stub="marker", cache=str(tmp_path / "cache.jsonl"), report=str(tmp_path / "r.json"))
        assert report.exit_code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 3 * (N + 3 * N)
        assert all("$T$" in line for line in lines[::3])

    def test_mixup_counts(self, config, corpus_file, embeddings_file, tmp_path):
        """测试每个α每轮输出N条"""
        out = tmp_path / "mix.bin"
        report = run("mixup", config, input=str(corpus_file), output=str(out), alpha="0.1,0.2",
                     embeddings=str(embeddings_file), ratio="1:3", report=str(tmp_path / "r.json"))
        assert report.exit_code == 0
        parsed = read_mixup_bin(out.read_bytes())
        assert len(parsed.records) == 2 * 3 * N
        assert parsed.shape[3] == 3
        assert report.per_method == {"mixup": 6 * N}

    def test_mixup_tsv(self, config, corpus_file, embeddings_file, tmp_path):
        out = tmp_path / "mix.tsv"
        run("mixup", config, input=str(corpus_file), output=str(out), format="mixup-tsv",
            embeddings=str(embeddings_file), report=str(tmp_path / "r.json"))
        assert len(out.read_text(encoding="utf-8").splitlines()) == N + 1

    @pytest.mark.parametrize("fmt", ["xml", "triple"])
    def test_reproducible_and_worker_independent(self, config, corpus_file, wndb_dir, tmp_path, fmt):
        """测试同一种子多次运行、不同线程数输出逐字节一致"""
        outputs = []
        for workers in (1, 1, 4):
            out = tmp_path / f"eda_{len(outputs)}.{fmt}"
            run("eda", config, input=str(corpus_file), output=str(out), wordnet=str(wndb_dir), format=fmt,
                workers=workers, seed=99, report=str(tmp_path / "r.json"))
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

        other = tmp_path / f"other.{fmt}"
        run("eda", config, input=str(corpus_file), output=str(other), wordnet=str(wndb_dir), format=fmt,
            seed=100, report=str(tmp_path / "r.json"))
        assert other.read_bytes() != outputs[0]

    def test_mixup_bin_reproducible(self, config, corpus_file, embeddings_file, tmp_path):
        outputs = []
        for workers in (1, 1, 4):
            out = tmp_path / f"mix_{len(outputs)}.bin"
            run("mixup", config, input=str(corpus_file), output=str(out), embeddings=str(embeddings_file),
                workers=workers, seed=99, ratio="1:3", report=str(tmp_path / "r.json"))
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

        other = tmp_path / "other.bin"
        run("mixup", config, input=str(corpus_file), output=str(other), embeddings=str(embeddings_file),
            seed=100, ratio="1:3", report=str(tmp_path / "r.json"))
        assert other.read_bytes() != outputs[0]

    @pytest.mark.parametrize("fmt, expected_lines", [("xml", None), ("triple", 3 * (4 + 3 * 4))])
    def test_keep_implicit(self, config, tmp_path, fmt, expected_lines):
        """测试保留的隐式目标观点只随原始记录输出，不进入回译"""
        source = tmp_path / "sample.xml"
        source.write_bytes(SEMEVAL_SAMPLE)
        out = tmp_path / f"bt.{fmt}"
        report = run("backtranslate", config, input=str(source), output=str(out), format=fmt, stub="marker",
                     keep_implicit=True, cache=str(tmp_path / "cache.jsonl"), report=str(tmp_path / "r.json"))
        assert report.exit_code == 0
        assert report.input_count == 5
        assert report.per_method == {"original": 5, "bt_nl": 4, "bt_es": 4, "bt_ja": 4}
        assert report.noops == {lang: {"implicit_target": 1} for lang in ("bt_es", "bt_ja", "bt_nl")}

        if expected_lines is None:
            records = parse_semeval_xml(out.read_bytes(), keep_implicit=True)
            augmented = [r for r in records if "~" in r.sentence_id]
            assert len(records) == 5 + 12
            assert len(augmented) == 12
            assert all(r.target != "NULL" for r in augmented)
        else:
            lines = out.read_text(encoding="utf-8").splitlines()
            assert len(lines) == expected_lines
            assert "NULL" not in lines[1::3]


class TestExitCodes:
    """测试退出码"""

    def test_missing_wordnet_config(self, config, corpus_file, tmp_path):
        report = run("eda", config, input=str(corpus_file), output=str(tmp_path / "o.xml"),
                     report=str(tmp_path / "r.json"))
        assert report.exit_code == 1
        assert report.errors

    def test_broken_wordnet(self, config, corpus_file, tmp_path):
        report = run("eda", config, input=str(corpus_file), output=str(tmp_path / "o.xml"),
                     wordnet=str(tmp_path), report=str(tmp_path / "r.json"))
        assert report.exit_code == 2

    def test_missing_input(self, config, tmp_path):
        report = run("eda", config, input=str(tmp_path / "none.xml"), methods="rs,rd",
                     report=str(tmp_path / "r.json"))
        assert report.exit_code == 1

    def test_partial_failure(self, config, corpus_file, tmp_path, monkeypatch):
        """测试有记录被跳过时退出码为3，其余记录照常输出"""
        monkeypatch.setattr(MainController, "make_client", lambda self: FailingClient())
        out = tmp_path / "bt.xml"
        report = run("backtranslate", config, input=str(corpus_file), output=str(out),
                     stub="identity", lang=["nl"], report=str(tmp_path / "r.json"))
        assert report.exit_code == 3
        assert report.skipped > 0
        assert report.per_method["bt_nl"] == N - report.skipped
        assert len(parse_semeval_xml(out.read_bytes())) == 2 * N - report.skipped


class TestSelfCheck:
    """测试自检"""

    def test_all_resources(self, config, wndb_dir, embeddings_file, tmp_path):
        out = tmp_path / "check.txt"
        report = run("selfcheck", config, wordnet=str(wndb_dir), embeddings=str(embeddings_file),
                     stub="marker", output=str(out))
        assert report.exit_code == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 4
        assert all(line.startswith("[OK]") for line in lines)

    def test_missing_wordnet(self, config, tmp_path):
        out = tmp_path / "check.txt"
        report = run("selfcheck", config, output=str(out))
        assert report.exit_code == 1
        assert "[FAIL] wordnet" in out.read_text(encoding="utf-8")

    def test_broken_embeddings(self, config, wndb_dir, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("a 1 2\nb 1\n", encoding="utf-8")
        out = tmp_path / "check.txt"
        report = run("selfcheck", config, wordnet=str(wndb_dir), embeddings=str(bad), output=str(out))
        assert report.exit_code == 1
        assert "[FAIL] embeddings" in out.read_text(encoding="utf-8")


class TestTrainTagger:
    """测试模型训练子命令"""

    def test_train_and_use(self, config, tmp_path):
        corpus = tmp_path / "tagged.txt"
        shutil.copy(SEED_CORPUS, corpus)
        model_path = tmp_path / "models" / "pos.model"
        report = run("train-tagger", config, corpus=str(corpus), out=str(model_path), iterations=2)
        assert report.exit_code == 0
        assert report.input_count > 0
        tagged = PerceptronTagger.load(model_path).tag(["the", "food", "is", "phenomenal", "!"])
        assert tagged[1].tag == "NN"

    def test_bad_corpus(self, config, tmp_path):
        corpus = tmp_path / "tagged.txt"
        corpus.write_text("no tags here\n", encoding="utf-8")
        report = run("train-tagger", config, corpus=str(corpus), out=str(tmp_path / "pos.model"))
        assert report.exit_code == 2


class TestCommandLine:
    """测试命令行入口"""

    @pytest.fixture
    def no_env(self, monkeypatch):
        for name in ("ABSA_WORDNET_DIR", "ABSA_TRANSLATE_ENDPOINT", "ABSA_TRANSLATE_KEY"):
            monkeypatch.delenv(name, raising=False)

    def test_parser_flags(self):
        args = build_parser().parse_args(["backtranslate", "in.xml", "--lang", "nl", "--lang", "es", "--no-progress"])
        assert args.lang == ["nl", "es"]
        assert args.progress is False
        assert args.keep_implicit is None

    def test_stats(self, no_env, corpus_file, tmp_path):
        out = tmp_path / "stats.json"
        code = main(["--config", str(tmp_path / "absent.ini"), "--log-level", "WARNING",
                     "stats", str(corpus_file), "--json", "-o", str(out)])
        assert code == 0
        assert json.loads(out.read_text(encoding="utf-8"))["total"] == N

    def test_eda_without_wordnet(self, no_env, corpus_file, tmp_path):
        code = main(["--config", str(tmp_path / "absent.ini"), "--log-level", "WARNING",
                     "eda", str(corpus_file), "-o", str(tmp_path / "o.xml"), "--report", str(tmp_path / "r.json")])
        assert code == 1

    def test_invalid_combination(self, no_env, corpus_file, tmp_path):
        code = main(["--config", str(tmp_path / "absent.ini"), "--log-level", "WARNING",
                     "mixup", str(corpus_file)])
        assert code == 1

    def test_no_command(self, no_env):
        assert main([]) == 1
