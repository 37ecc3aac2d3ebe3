#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
基础模型类
所有增强模型的基类，提供观察者通知和逐记录容错的通用流程
"""

from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Iterable, List, Optional, Sequence, TypeVar

from src.utils.errors import AugmentationError
from src.utils.logger import LoggerMixin


T = TypeVar("T")
R = TypeVar("R")

IMPLICIT_REASON = "implicit_target"


class ModelEventType:
    """模型事件类型常量"""

    # 记录级事件
    RECORD_EMITTED = "record_emitted"
    RECORD_NOOP = "record_noop"
    RECORD_SKIPPED = "record_skipped"

    # 流水线事件
    PIPELINE_STARTED = "pipeline_started"
    PIPELINE_FINISHED = "pipeline_finished"

    # 翻译后端
    BACKEND_CALL = "backend_call"


class BaseModel(ABC, LoggerMixin):
    """基础模型抽象类"""

    def __init__(self):
        self._observers = []  # 观察者列表

    def add_observer(self, observer):
        """添加观察者"""
        if observer not in self._observers:
            self._observers.append(observer)
            self.logger.debug(f"添加观察者: {observer}")

    def remove_observer(self, observer):
        """移除观察者"""
        if observer in self._observers:
            self._observers.remove(observer)
            self.logger.debug(f"移除观察者: {observer}")

    def notify_observers(self, event_type: str, data: Any = None):
        """通知所有观察者"""
        for observer in self._observers:
            try:
                observer.handle_model_event(event_type, data)
            except Exception as e:
                self.logger.error(f"通知观察者失败: {e}")

    @abstractmethod
    def augment(self, records: Sequence[Any]) -> List[Any]:
        """
        对整个语料做增强

        Args:
            records: 观点记录列表

        Returns:
            增强结果列表
        """
        pass

    def emitted(self, augmented) -> None:
        """记录一条输出并通知观察者"""
        method = getattr(augmented, "method", None)
        payload = {"method": getattr(method, "value", method)}
        params = getattr(augmented, "params", {}) or {}
        if params.get("noop"):
            payload["reason"] = params.get("noop_reason", "unchanged")
            self.notify_observers(ModelEventType.RECORD_NOOP, payload)
        self.notify_observers(ModelEventType.RECORD_EMITTED, payload)

    def explicit_records(self, records: Sequence[Any], methods: Iterable[str]) -> List[Any]:
        """
        去掉隐式目标的记录，它们没有可保持的方面词，只随原始记录输出

        每条被去掉的记录对每种方法发一次 noop 事件（原因 implicit_target）
        """
        methods = list(methods)
        kept = []
        dropped = 0
        for record in records:
            if getattr(record, "is_implicit", False):
                dropped += 1
                for method in methods:
                    self.notify_observers(ModelEventType.RECORD_NOOP, {
                        "method": method,
                        "reason": IMPLICIT_REASON,
                    })
            else:
                kept.append(record)
        if dropped:
            self.logger.info(f"隐式目标记录 {dropped} 条不参与增强")
        return kept

    def skipped(self, record_id: str, method: str, error: Exception) -> None:
        """记录一条被跳过的记录"""
        self.logger.warning(f"跳过记录 {record_id} ({method}): {error}")
        self.notify_observers(ModelEventType.RECORD_SKIPPED, {
            "record_id": record_id,
            "method": method,
            "reason": type(error).__name__,
        })

    def map_records(
        self,
        func: Callable[[T], R],
        items: Iterable[T],
        workers: int = 1,
    ) -> List[R]:
        """
        逐记录执行，可选线程并行，结果顺序与输入一致

        Args:
            func: 单条处理函数
            items: 输入
            workers: 并行线程数

        Returns:
            结果列表
        """
        items = list(items)
        if workers <= 1 or len(items) < 2:
            return [func(item) for item in items]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(func, items))

    def guarded(self, record_id: str, method: str, func: Callable[[], R]) -> Optional[R]:
        """执行单条增强，模型层异常转为跳过事件"""
        try:
            return func()
        except AugmentationError as e:
            self.skipped(record_id, method, e)
            return None
