#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
可复现随机流
每条记录、每种方法各自一条 random.Random 流（Mersenne Twister），
种子由 sha256(seed, record_id, method, extra...) 派生，与语料顺序和并行方式无关
"""

import hashlib
import random
from typing import Union


def derive_seed(seed: int, *parts: Union[str, int]) -> int:
    """从主种子和任意标识派生64位子种子"""
    payload = ":".join([str(seed), *[str(part) for part in parts]]).encode("utf-8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "little")


def record_stream(seed: int, record_id: str, method: str, *extra: Union[str, int]) -> random.Random:
    """
    为单条记录创建随机流

    Args:
        seed: 主种子
        record_id: 记录ID
        method: 增强方法标签
        extra: 其他区分量（如第几轮）

    Returns:
        random.Random实例
    """
    return random.Random(derive_seed(seed, record_id, method, *extra))
