#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
报告视图
运行报告JSON和语料统计表
"""

import json
import sys
from pathlib import Path
from typing import Optional, TextIO, Union

from src.models.record_model import RunReport, StatsReport


def render_report(report: RunReport, include_time: bool = True) -> str:
    return json.dumps(report.to_dict(include_time), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def write_report(
    report: RunReport,
    path: Optional[Union[str, Path]] = None,
    stream: Optional[TextIO] = None,
) -> str:
    """
    输出运行报告

    Args:
        report: 运行报告
        path: 报告文件，未给出时写到stream（默认stderr）

    Returns:
        报告文本
    """
    text = render_report(report)
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        (stream or sys.stderr).write(text)
    return text


def render_stats_table(stats: StatsReport, top: Optional[int] = None) -> str:
    """
    统计表：极性行（数量、百分比），然后按数量排序的类别

    Args:
        stats: 统计结果
        top: 只列出前top个类别
    """
    lines = [f"{'polarity':<12}{'count':>8}{'%':>6}"]
    for name, count in stats.polarity_counts.items():
        lines.append(f"{name:<12}{count:>8}{stats.polarity_percentages[name]:>6}")
    lines.append(f"{'total':<12}{stats.total:>8}{100 if stats.total else 0:>6}")
    lines.append("")

    categories = list(stats.category_counts.items())
    if top is not None:
        categories = categories[:top]
    width = max([len("category")] + [len(name) for name, _ in categories]) + 2
    lines.append(f"{'category':<{width}}{'count':>8}")
    for name, count in categories:
        lines.append(f"{name:<{width}}{count:>8}")
    return "\n".join(lines) + "\n"


def render_stats_json(stats: StatsReport) -> str:
    return json.dumps(stats.to_dict(), ensure_ascii=False, indent=2) + "\n"
