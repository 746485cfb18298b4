#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
収束衝撃波ソルバー起動スクリプト

config.yml と .env から実行時設定を読み込み、ロギングを構成して
システム情報を表示したあと、scenarios_io.cli_main にコマンドライン引数を渡します。

使用方法:
    python run_shock.py --scenario ratio4
    python run_shock.py --scenario sod --output-dir ./out/sod
    python run_shock.py --config scenarios/ratio20.cfg --cells 1600 --log-level DEBUG

    既定シナリオ: ratio4 / ratio10 / ratio20 / ratio100 / ratio1000 / sod / strong_tube
"""

import logging
import platform
import sys

import numpy as np
import scipy

from runtime_settings import RuntimeSettings, load_runtime_settings, setup_logging
from scenarios_io import cli_main

logger = logging.getLogger("run_shock")


def print_system_info(settings: RuntimeSettings):
    """
    システム情報を表示する
    """
    logger.info("=== 収束衝撃波ソルバー システム情報 ===")
    logger.info(f"OS: {platform.system()} ({platform.platform()})")
    logger.info(f"Python: {platform.python_version()}")
    logger.info(f"numpy: {np.__version__} / scipy: {scipy.__version__}")
    logger.info(f"既定の出力ディレクトリ: {settings.output_directory}")
    if settings.log_file:
        logger.info(f"ログファイル: {settings.log_file}")
    logger.info("========================================")


def main(argv=None) -> int:
    settings = load_runtime_settings()
    setup_logging(settings)
    print_system_info(settings)
    return cli_main(argv, settings=settings)


if __name__ == "__main__":
    sys.exit(main())
