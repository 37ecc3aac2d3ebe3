#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
增强流程控制器
按比例复制原始记录、多轮运行增强模型，并把模型事件汇总到运行报告
"""

import sys
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from src.controllers.base_controller import BaseController
from src.models.base_model import BaseModel, ModelEventType
from src.models.record_model import OpinionRecord, RunReport
from src.utils.errors import ConfigError


# 比例 -> (原始记录复制次数 r_o, 增强轮数 r_a)
RATIOS: Dict[str, Tuple[int, int]] = {
    "1:1": (1, 1),
    "3:1": (3, 1),
    "1:3": (1, 3),
}

ORIGINAL = "original"


def parse_ratio(value: str) -> Tuple[int, int]:
    """
    解析 --ratio

    Raises:
        ConfigError: 不是 1:1 / 3:1 / 1:3
    """
    try:
        return RATIOS[value.strip()]
    except (KeyError, AttributeError):
        raise ConfigError(f"不支持的比例: {value}，可选 {', '.join(RATIOS)}")


class AugmentController(BaseController):
    """增强流程控制器"""

    def __init__(self, report: RunReport, progress: bool = False):
        """
        Args:
            report: 要填写的运行报告
            progress: 是否显示进度条（stderr不是终端时总是关闭）
        """
        super().__init__()
        self.report = report
        self.progress = progress
        self.backend_calls = 0
        self._bar: Optional[tqdm] = None
        self.init_controller()

    def setup_event_handlers(self) -> None:
        self.register_event_handler(ModelEventType.RECORD_EMITTED, self._on_emitted)
        self.register_event_handler(ModelEventType.RECORD_NOOP, self._on_noop)
        self.register_event_handler(ModelEventType.RECORD_SKIPPED, self._on_skipped)
        self.register_event_handler(ModelEventType.BACKEND_CALL, self._on_backend_call)

    def _on_emitted(self, data: Dict[str, Any]) -> None:
        self.report.count(data["method"])
        if self._bar is not None:
            self._bar.update(1)

    def _on_noop(self, data: Dict[str, Any]) -> None:
        self.report.count_noop(data["method"], data.get("reason", "unchanged"))

    def _on_skipped(self, data: Dict[str, Any]) -> None:
        self.report.count_skip(data["method"], data.get("reason", "error"))

    def _on_backend_call(self, data: Any) -> None:
        self.backend_calls += 1

    def _open_progress(self, total: Optional[int]) -> None:
        enabled = self.progress and sys.stderr.isatty()
        self._bar = tqdm(
            total=total,
            desc=self.report.command,
            unit="rec",
            file=sys.stderr,
            disable=not enabled,
            leave=False,
        )

    def _close_progress(self) -> None:
        if self._bar is not None:
            self._bar.close()
            self._bar = None

    def run_passes(
        self,
        records: Sequence[OpinionRecord],
        factory: Callable[[int], BaseModel],
        ratio: Tuple[int, int] = (1, 1),
        include_originals: bool = True,
        expected_per_pass: Optional[int] = None,
    ) -> List[Any]:
        """
        运行一个增强族

        先输出 r_o 份原始记录，再运行 r_a 轮增强；第p轮的模型由 factory(p) 构造，
        各轮的随机流由轮次派生，因此不会重复上一轮的结果

        Args:
            records: 输入语料
            factory: 轮次 -> 增强模型
            ratio: (r_o, r_a)
            include_originals: mixup不输出原始记录
            expected_per_pass: 每轮预期输出数（进度条总数）

        Returns:
            原始记录与增强结果，顺序固定
        """
        r_o, r_a = ratio
        outputs: List[Any] = []
        total = None
        if expected_per_pass is not None:
            total = expected_per_pass * r_a + (len(records) * r_o if include_originals else 0)
        self._open_progress(total)
        try:
            if include_originals:
                for _ in range(r_o):
                    outputs.extend(records)
                    self.report.count(ORIGINAL, len(records))
                    if self._bar is not None:
                        self._bar.update(len(records))

            for pass_index in range(r_a):
                model = factory(pass_index)
                self.add_model(f"pass{pass_index}", model)
                try:
                    outputs.extend(model.augment(records))
                finally:
                    model.remove_observer(self)
                self.logger.debug(f"第 {pass_index + 1}/{r_a} 轮完成")
        finally:
            self._close_progress()
        return outputs

    def cleanup(self) -> None:
        self._close_progress()
        super().cleanup()
