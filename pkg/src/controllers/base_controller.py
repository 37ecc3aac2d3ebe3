#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
基础控制器类
所有控制器的基类，提供模型管理和事件处理接口
"""

import threading
from abc import ABC
from typing import Any, Callable, Dict, List

from src.utils.logger import LoggerMixin


class BaseController(ABC, LoggerMixin):
    """基础控制器抽象类"""

    def __init__(self):
        """初始化基础控制器"""
        self._models = {}  # 关联的模型字典
        self._event_handlers: Dict[str, List[Callable[[Any], None]]] = {}
        # 跳过事件可能来自工作线程
        self._event_lock = threading.Lock()
        self._initialized = False

    def add_model(self, name: str, model) -> None:
        """
        添加模型，并把自己注册为模型的观察者

        Args:
            name: 模型名称
            model: 模型实例
        """
        previous = self._models.get(name)
        if previous is not None and previous is not model and hasattr(previous, 'remove_observer'):
            previous.remove_observer(self)

        self._models[name] = model
        if hasattr(model, 'add_observer'):
            model.add_observer(self)

        self.logger.debug(f"添加模型: {name}")

    def register_event_handler(self, event_type: str, handler: Callable[[Any], None]) -> None:
        """
        注册事件处理器

        Args:
            event_type: 事件类型
            handler: 处理函数
        """
        self._event_handlers.setdefault(event_type, []).append(handler)
        self.logger.debug(f"注册事件处理器: {event_type}")

    def handle_model_event(self, event_type: str, data: Any = None) -> None:
        """
        处理模型事件

        Args:
            event_type: 事件类型
            data: 事件数据
        """
        with self._event_lock:
            for handler in self._event_handlers.get(event_type, []):
                try:
                    handler(data)
                except Exception as e:
                    self.log_error(e, f"处理事件失败: {event_type}")

    def init_controller(self) -> None:
        """初始化控制器（只执行一次）"""
        if not self._initialized:
            self.setup_event_handlers()
            self._initialized = True
            self.logger.debug(f"{self.__class__.__name__} 初始化完成")

    def setup_event_handlers(self) -> None:
        """设置事件处理器（子类可重写）"""

    def cleanup(self) -> None:
        """清理资源"""
        try:
            for model in self._models.values():
                if hasattr(model, 'remove_observer'):
                    model.remove_observer(self)

            self._models.clear()
            self._event_handlers.clear()
            self._initialized = False

            self.logger.debug(f"{self.__class__.__name__} 清理完成")

        except Exception as e:
            self.log_error(e, "控制器清理失败")
