#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
面向方面级情感分析语料的目标保持型数据增强工具
命令行入口

退出码: 0 成功, 1 用法/配置错误, 2 资源不可用, 3 部分失败
"""

import argparse
import signal
import sys
from typing import List, Optional

from src.controllers.main_controller import COMMANDS, MIXUP_FORMATS, TEXT_FORMATS, MainController, RunConfig
from src.models.translation_model import StubTranslationClient
from src.utils.config_manager import ConfigManager
from src.utils.errors import ConfigError
from src.utils.logger import setup_logger


def signal_handler(signum, frame):
    """信号处理函数"""
    sys.stderr.write(f"\n接收到信号 {signum}，正在退出...\n")
    sys.exit(130)


def _add_common(parser: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        parser.add_argument("input", help="SemEval XML语料")
    parser.add_argument("--seed", type=int, help="主随机种子（默认20200601）")
    parser.add_argument("--wordnet", help="WordNet数据库目录（或环境变量 ABSA_WORDNET_DIR）")
    parser.add_argument("--report", help="运行报告JSON文件（默认写到stderr）")
    parser.add_argument("--keep-implicit", action="store_true", default=None,
                        help="保留 target=\"NULL\" 的隐式观点")


def _add_output(parser: argparse.ArgumentParser, formats) -> None:
    parser.add_argument("-o", "--output", default="-", help="输出文件，- 为stdout")
    parser.add_argument("--format", choices=formats, help=f"输出格式（默认 {formats[0]}）")
    parser.add_argument("--ratio", choices=("1:1", "3:1", "1:3"), help="原始记录:增强记录 比例")
    parser.add_argument("--workers", type=int, help="并行线程数")
    parser.add_argument("--no-progress", dest="progress", action="store_false", default=None,
                        help="不显示进度条")


def build_parser() -> argparse.ArgumentParser:
    """构建命令行解析器"""
    parser = argparse.ArgumentParser(
        prog="absa-augment",
        description="面向方面级情感分析语料的目标保持型数据增强工具",
    )
    parser.add_argument("--config", help="配置文件（默认项目根目录config.ini）")
    parser.add_argument("--log-level", help="日志级别 DEBUG/INFO/WARNING/ERROR")
    sub = parser.add_subparsers(dest="command", metavar="command")

    stats = sub.add_parser("stats", help="语料统计（极性、类别分布）")
    _add_common(stats)
    stats.add_argument("-o", "--output", default="-", help="输出文件，- 为stdout")
    stats.add_argument("--json", action="store_true", default=None, help="输出JSON")
    stats.add_argument("--top", type=int, help="只列出前N个类别")

    eda = sub.add_parser("eda", help="EDA: sr, ri, rs, rd")
    _add_common(eda)
    _add_output(eda, TEXT_FORMATS)
    eda.add_argument("--alpha", help="改动比例α")
    eda.add_argument("--methods", help="逗号分隔，如 sr,ri,rs,rd")
    eda.add_argument("--single-swap", action="store_true", default=None, help="随机交换只做一次")
    eda.add_argument("--no-min-one", action="store_true", default=None, help="允许 ⌊α·len⌋=0 时不改动")

    adjusted = sub.add_parser("eda-adj", help="调整版EDA: sr_wsd, ri_wsd, ts")
    _add_common(adjusted)
    _add_output(adjusted, TEXT_FORMATS)
    adjusted.add_argument("--alpha", help="改动比例α")
    adjusted.add_argument("--methods", help="逗号分隔，如 sr_wsd,ri_wsd,ts")
    adjusted.add_argument("--pos-model", help="词性标注模型（默认用内置语料训练）")
    adjusted.add_argument("--shuffle-pairs", action="store_true", default=None, help="目标交换按种子打乱配对")
    adjusted.add_argument("--lesk-stopwords", choices=("keep", "drop"), help="Lesk签名是否去停用词")
    adjusted.add_argument("--no-min-one", action="store_true", default=None, help="允许 ⌊α·len⌋=0 时不改动")

    backtranslate = sub.add_parser("backtranslate", help="回译: bt_nl, bt_es, bt_ja")
    _add_common(backtranslate)
    _add_output(backtranslate, TEXT_FORMATS)
    backtranslate.add_argument("--lang", action="append", help="中间语言，可重复或逗号分隔（默认 nl,es,ja）")
    backtranslate.add_argument("--cache", help="JSON Lines翻译缓存文件")
    backtranslate.add_argument("--stub", choices=StubTranslationClient.MODES, help="使用确定性的测试后端")
    backtranslate.add_argument("--max-in-flight", type=int, help="并发请求数")
    backtranslate.add_argument("--rate-limit", type=float, help="每秒请求数上限（0为不限）")

    mixup = sub.add_parser("mixup", help="词向量空间mixup")
    _add_common(mixup)
    _add_output(mixup, MIXUP_FORMATS)
    mixup.add_argument("--alpha", help="Beta(α,α)参数，逗号分隔可做多值扫描")
    mixup.add_argument("--embeddings", help="GloVe格式词向量文件")
    mixup.add_argument("--dims", type=int, help="词向量维度")
    mixup.add_argument("--oov", choices=("zero", "random"), help="未登录词策略")
    mixup.add_argument("--pairing", choices=("random", "length"), help="配对策略")

    selfcheck = sub.add_parser("selfcheck", help="检查资源与后端可用性")
    _add_common(selfcheck, with_input=False)
    selfcheck.add_argument("--pos-model", help="词性标注模型")
    selfcheck.add_argument("--embeddings", help="GloVe格式词向量文件")
    selfcheck.add_argument("--dims", type=int, help="词向量维度")
    selfcheck.add_argument("--stub", choices=StubTranslationClient.MODES, help="使用测试后端")

    trainer = sub.add_parser("train-tagger", help="训练词性标注模型")
    trainer.add_argument("--corpus", required=True, help="token/TAG 格式语料")
    trainer.add_argument("--out", required=True, help="模型输出路径")
    trainer.add_argument("--iterations", type=int, default=5, help="训练轮数")
    trainer.add_argument("--holdout", type=float, default=0.0, help="留出评估比例")
    trainer.add_argument("--seed", type=int, help="打乱顺序的种子")
    trainer.add_argument("--report", help="运行报告JSON文件")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    signal.signal(signal.SIGINT, signal_handler)
    if hasattr(signal, "SIGTERM"):
        signal.signal(signal.SIGTERM, signal_handler)

    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command not in COMMANDS:
        parser.print_help(sys.stderr)
        return 1

    # 加载配置
    config = ConfigManager(args.config)

    # 初始化日志系统
    logger = setup_logger(
        args.log_level or config.get('logging', 'level', 'INFO'),
        config.get('logging', 'file'),
    )
    logger.info(f"启动: {args.command}")
    logger.debug(f"配置: {config.as_dict()}")

    controller = None
    try:
        run_config = RunConfig.from_options(args.command, vars(args), config)
        controller = MainController(config, run_config)
        report = controller.run()
        return report.exit_code

    except ConfigError as e:
        logger.error(f"参数错误: {e}")
        return e.exit_code

    except Exception as e:
        logger.opt(exception=e).error(f"运行出错: {e}")
        return 3

    finally:
        # 清理资源
        try:
            if controller is not None:
                controller.cleanup()
        except Exception as e:
            logger.error(f"清理资源失败: {e}")


if __name__ == "__main__":
    sys.exit(main())
