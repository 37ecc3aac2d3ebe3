#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
回译测试
"""

import json

import httpx
import pytest

from src.models.record_model import Method
from src.models.translation_model import (
    Backtranslator,
    HttpTranslationClient,
    StubTranslationClient,
    TranslationCache,
    TranslationClient,
    backtranslate,
    backtranslate_corpus,
    stub_backend,
)
from src.tests.conftest import fuzz_records, make_implicit, make_record
from src.utils.errors import ConfigError, MaskingError, TranslationError, UnsupportedLanguageError
from src.views.xml_view import render_xml


class FlakyClient(TranslationClient):
    """含有某个词时翻译失败的后端"""

    name = "flaky"

    def __init__(self, poison: str):
        super().__init__()
        self.poison = poison

    def _translate(self, text, source_lang, target_lang):
        if self.poison in text:
            raise TranslationError(f"无法翻译: {text}")
        return text


class TestStubClient:
    """测试确定性后端"""

    def test_identity(self):
        client = StubTranslationClient("identity")
        assert client.translate("the food", "en", "nl") == "the food"
        assert client.calls == 1

    def test_empty_text_is_free(self):
        client = StubTranslationClient("marker")
        assert client.translate("", "en", "ja") == ""
        assert client.calls == 0

    def test_stub_backend(self):
        client = stub_backend("dictionary")
        assert isinstance(client, StubTranslationClient)
        assert client.name == "stub-dictionary"

    def test_unknown_mode(self):
        with pytest.raises(ConfigError):
            StubTranslationClient("fancy")

    def test_unsupported_language(self):
        with pytest.raises(UnsupportedLanguageError):
            StubTranslationClient().translate("hello", "en", "fr")


class TestBacktranslate:
    """测试单条回译"""

    def test_marker_round_trip(self, hostess):
        """测试左右上下文各自回译，目标原样保留"""
        output = backtranslate(hostess, "ja", StubTranslationClient("marker"))
        record = output.record
        assert record.text == "[ja] the hostess [ja] is rude to the point of being offensive"
        assert (record.target_from, record.target_to) == (9, 16)
        assert output.method is Method.BT_JA
        assert output.sources == (hostess.id,)
        assert output.params == {"lang": "ja", "backend": "stub-marker", "pass": 0, "noop": False}

    def test_dictionary_round_trip(self, hostess):
        """测试玩具词典的不对称译法"""
        output = backtranslate(hostess, "ja", StubTranslationClient("dictionary"))
        assert output.record.text == "of hostess is impolite to of point of being offensive"
        assert output.record.target_from == 3

    def test_identity_is_noop(self, hostess):
        output = backtranslate(hostess, "nl", StubTranslationClient("identity"))
        assert output.record.text == hostess.text
        assert output.noop

    def test_empty_contexts(self):
        """测试没有上下文时不调用后端"""
        record = make_record("x#0", "pizza", "pizza")
        client = StubTranslationClient("marker")
        output = backtranslate(record, "es", client)
        assert output.record.text == "pizza"
        assert client.calls == 0

    def test_whitespace_preserved(self):
        record = make_record("x#0", "  great  pizza  here ", "pizza")
        output = backtranslate(record, "es", StubTranslationClient("marker"))
        assert output.record.text == "  [es] great  pizza  [es] here "
        assert output.record.target_from == len("  [es] great  ")

    def test_unsupported_pivot(self):
        with pytest.raises(UnsupportedLanguageError):
            Backtranslator(StubTranslationClient(), languages=["fr"])


class TestBacktranslator:
    """测试整个语料的回译"""

    def test_three_languages(self, corpus20):
        """测试每条记录按 nl, es, ja 各一条"""
        outputs = backtranslate_corpus(corpus20, ["nl", "es", "ja"], StubTranslationClient("marker"))
        assert len(outputs) == 3 * len(corpus20)
        assert [o.method.value for o in outputs[:3]] == ["bt_nl", "bt_es", "bt_ja"]
        assert outputs[0].record.id == f"{corpus20[0].id}~bt_nl#0"
        for output in outputs:
            record = output.record
            assert record.text[record.target_from:record.target_to] == record.target

    def test_parallel_matches_serial(self, corpus20):
        client = StubTranslationClient("dictionary")
        serial = backtranslate_corpus(corpus20, ["nl", "es", "ja"], client, max_in_flight=1)
        parallel = backtranslate_corpus(corpus20, ["nl", "es", "ja"], client, max_in_flight=8)
        assert render_xml(serial) == render_xml(parallel)

    def test_warm_cache_skips_backend(self, corpus20, tmp_path):
        """测试缓存命中时不再调用后端，输出一致"""
        path = tmp_path / "cache.jsonl"
        cold_client = StubTranslationClient("marker")
        cold = backtranslate_corpus(corpus20, ["nl", "es", "ja"], cold_client, TranslationCache(path))
        assert cold_client.calls > 0

        warm_client = StubTranslationClient("marker")
        warm_cache = TranslationCache(path)
        warm = backtranslate_corpus(corpus20, ["nl", "es", "ja"], warm_client, warm_cache)
        assert warm_client.calls == 0
        assert warm_cache.misses == 0
        assert render_xml(warm) == render_xml(cold)

    def test_failures_are_skipped(self, corpus20):
        """测试后端失败的记录被跳过，其余照常输出"""
        translator = Backtranslator(FlakyClient("rude"), languages=["nl"], max_in_flight=2)
        events = []

        class Recorder:
            def handle_model_event(self, event_type, data):
                events.append((event_type, data))

        translator.add_observer(Recorder())
        outputs = translator.augment(corpus20)
        failing = [r for r in corpus20 if "rude" in r.text]
        assert failing
        assert len(outputs) == len(corpus20) - len(failing)
        skipped = [data for event, data in events if event == "record_skipped"]
        assert sorted(d["record_id"] for d in skipped) == sorted(r.id for r in failing)
        assert {d["reason"] for d in skipped} == {"TranslationError"}

    def test_implicit_records_pass_through(self, hostess):
        """测试隐式目标记录不回译，按语言各记一次noop"""
        implicit = make_implicit("n#0", "loved it here")
        translator = Backtranslator(StubTranslationClient("marker"), languages=["nl", "es"])
        events = []

        class Recorder:
            def handle_model_event(self, event_type, data):
                events.append((event_type, data))

        translator.add_observer(Recorder())
        outputs = translator.augment([implicit, hostess])
        assert [o.sources for o in outputs] == [(hostess.id,), (hostess.id,)]
        assert all("NULL" not in o.record.text for o in outputs)
        noops = [data for event, data in events if event == "record_noop"]
        assert noops == [
            {"method": "bt_nl", "reason": "implicit_target"},
            {"method": "bt_es", "reason": "implicit_target"},
        ]
        with pytest.raises(MaskingError):
            translator.backtranslate(implicit, "nl")


class TestTargetPreservation:
    """随机语料上的回译目标保持检查"""

    @pytest.mark.parametrize("mode", ["marker", "dictionary"])
    def test_every_output_keeps_target(self, mode):
        fuzz = fuzz_records(200)
        by_id = {r.id: r for r in fuzz}
        outputs = backtranslate_corpus(fuzz, ["nl", "es", "ja"], StubTranslationClient(mode))
        assert len(outputs) == 3 * len(fuzz)
        for output in outputs:
            record = output.record
            source = by_id[output.sources[0]]
            assert record.target == source.target
            assert record.text[record.target_from:record.target_to] == source.target


class TestTranslationCache:
    """测试持久化缓存"""

    def test_put_and_reload(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = TranslationCache(path)
        cache.put("the food", "en", "nl", "het eten")
        cache.put("the food", "en", "nl", "het eten")

        lines = path.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0]) == {"src_lang": "en", "dst_lang": "nl", "input": "the food", "output": "het eten"}

        reloaded = TranslationCache(path)
        assert reloaded.get("the food", "en", "nl") == "het eten"
        assert reloaded.get("the food", "en", "es") is None
        assert (reloaded.hits, reloaded.misses) == (1, 1)

    def test_corrupt_lines_ignored(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        path.write_text(
            '{"src_lang": "en", "dst_lang": "es", "input": "a", "output": "b"}\nnot json\n{"input": "x"}\n',
            encoding="utf-8",
        )
        assert len(TranslationCache(path)) == 1

    def test_in_memory(self):
        cache = TranslationCache()
        cache.put("a", "en", "ja", "b")
        assert cache.get("a", "en", "ja") == "b"


class TestHttpClient:
    """测试HTTP后端（使用MockTransport，不访问网络）"""

    def make_client(self, handler, sleeps=None, retries=3):
        return HttpTranslationClient(
            "http://translate.test/translate",
            api_key="secret",
            retries=retries,
            backoff_seconds=0.5,
            transport=httpx.MockTransport(handler),
            sleep=(sleeps.append if sleeps is not None else lambda _: None),
        )

    def test_request_shape(self):
        """测试请求体和鉴权头"""
        seen = []

        def handler(request):
            seen.append(request)
            return httpx.Response(200, json={"translatedText": "het eten"})

        client = self.make_client(handler)
        assert client.translate("the food", "en", "nl") == "het eten"
        body = json.loads(seen[0].content)
        assert body == {"q": "the food", "source": "en", "target": "nl", "format": "text"}
        assert seen[0].headers["Authorization"] == "Bearer secret"

    def test_nested_response(self):
        def handler(request):
            return httpx.Response(200, json={"data": {"translations": [{"translatedText": "la comida"}]}})

        assert self.make_client(handler).translate("the food", "en", "es") == "la comida"

    def test_retry_with_backoff(self):
        """测试失败后指数退避重试"""
        responses = iter([httpx.Response(503), httpx.Response(500), httpx.Response(200, json={"translatedText": "ok"})])
        sleeps = []
        client = self.make_client(lambda request: next(responses), sleeps)
        assert client.translate("hello", "en", "ja") == "ok"
        assert sleeps == [0.5, 1.0]

    def test_gives_up(self):
        sleeps = []
        client = self.make_client(lambda request: httpx.Response(500), sleeps)
        with pytest.raises(TranslationError):
            client.translate("hello", "en", "ja")
        assert sleeps == [0.5, 1.0]

    def test_check(self):
        ok_client = self.make_client(lambda request: httpx.Response(200, json={"translatedText": "hallo"}))
        assert ok_client.check()[0]
        bad_client = self.make_client(lambda request: httpx.Response(500), retries=1)
        assert not bad_client.check()[0]

    def test_rate_limit_spaces_requests(self):
        """测试每秒2次的上限下，过早的请求等到上次请求0.5秒之后"""
        times = iter([10.0, 10.1, 10.9, 20.0])
        sleeps = []
        client = HttpTranslationClient(
            "http://translate.test/translate",
            rate_limit=2.0,
            transport=httpx.MockTransport(lambda request: httpx.Response(200, json={"translatedText": "ok"})),
            sleep=sleeps.append,
            clock=lambda: next(times),
        )
        for _ in range(4):
            client.translate("hello", "en", "nl")
        assert sleeps == pytest.approx([0.4, 0.1])
        assert client.calls == 4

    def test_missing_endpoint(self):
        with pytest.raises(ConfigError):
            HttpTranslationClient("")
