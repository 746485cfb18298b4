#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
実行時設定モジュール

config.yml（ログと出力先の設定）と .env / 環境変数を読み込み、
ロギングを一度だけ構成します。シナリオ設定（key = value 形式）は
scenarios_io が扱います。

環境変数:
    SHOCK_LOG_LEVEL: ログレベル（config.yml の logging.level より優先）
    SHOCK_OUTPUT_DIR: 出力ディレクトリ（config.yml の output.directory より優先）
"""

import logging
import os
import sys
from dataclasses import dataclass
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger("runtime_settings")

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DEFAULT_CONFIG_PATH = "config.yml"


@dataclass(frozen=True)
class RuntimeSettings:
    """
    実行時設定

    属性:
        log_level (str): ログレベル名
        log_file (str): ログファイル（None ならファイル出力なし）
        output_directory (str): 既定の出力ディレクトリ
        progress_every (int): 進捗ログのステップ間隔
    """

    log_level: str = "INFO"
    log_file: Optional[str] = None
    output_directory: str = "./out"
    progress_every: int = 200


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    value = data.get(name) or {}
    return value if isinstance(value, dict) else {}


def load_runtime_settings(config_path: Optional[str] = None) -> RuntimeSettings:
    """
    config.yml と環境変数から実行時設定を読み込む

    ファイルが存在しない、または読み込めない場合はデフォルト設定を使用します。

    引数:
        config_path (str): 設定ファイルのパス（省略時は ./config.yml）

    戻り値:
        RuntimeSettings: 実行時設定
    """
    load_dotenv()
    path = config_path or DEFAULT_CONFIG_PATH
    data: Dict[str, Any] = {}
    try:
        if os.path.exists(path):
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        else:
            logger.warning(f"設定ファイル {path} が見つかりません。デフォルト設定を使用します。")
    except (OSError, yaml.YAMLError) as e:
        logger.error(f"設定ファイル読み込み中にエラーが発生しました: {str(e)}")
        data = {}

    defaults = RuntimeSettings()
    logging_section = _section(data, "logging")
    output_section = _section(data, "output")

    level = os.environ.get("SHOCK_LOG_LEVEL") or logging_section.get("level") or defaults.log_level
    output_directory = os.environ.get("SHOCK_OUTPUT_DIR") or output_section.get("directory") \
        or defaults.output_directory
    try:
        progress_every = int(output_section.get("progress_every", defaults.progress_every))
    except (TypeError, ValueError):
        logger.warning("output.progress_every が整数ではありません。デフォルト値を使用します。")
        progress_every = defaults.progress_every

    return RuntimeSettings(
        log_level=str(level).upper(),
        log_file=logging_section.get("file") or None,
        output_directory=str(output_directory),
        progress_every=progress_every,
    )


def setup_logging(settings: RuntimeSettings, level_override: Optional[str] = None) -> None:
    """
    ロギングを構成する（出力は標準エラーと、指定があればログファイル）

    引数:
        settings (RuntimeSettings): 実行時設定
        level_override (str): コマンドラインで指定されたログレベル
    """
    level_name = (level_override or settings.log_level).upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.INFO
    handlers = [logging.StreamHandler(sys.stderr)]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding="utf-8"))
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
    if level_name != logging.getLevelName(level):
        logger.warning(f"未知のログレベル {level_name} です。INFO を使用します。")
