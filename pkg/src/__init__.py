"""
面向方面级情感分析语料的目标保持型数据增强工具
"""

__version__ = "1.0.0"
