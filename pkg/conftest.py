#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
テスト共通設定

golden/ 以下の回帰用ファイルとの比較を golden フィクスチャで提供します。
SHOCK_UPDATE_GOLDEN=1 を指定すると比較せずに書き直してスキップします。
ファイルが存在しない場合は失敗します。
"""

import os
from pathlib import Path

import pytest

UPDATE_GOLDEN = os.environ.get("SHOCK_UPDATE_GOLDEN", "") == "1"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


def check_golden(name: str, text: str) -> None:
    """text を golden/name と比較する"""
    path = GOLDEN_DIR / name
    if UPDATE_GOLDEN:
        _write(path, text)
        pytest.skip(f"golden ファイルを書き出しました: {path}")
    if not path.exists():
        pytest.fail(f"golden ファイルがありません: {path}（SHOCK_UPDATE_GOLDEN=1 で生成してください）")
    with open(path, "r", encoding="utf-8", newline="") as f:
        expected = f.read()
    assert text == expected, f"{name} が golden ファイルと一致しません"


@pytest.fixture
def golden():
    """golden(name, text): check_golden を返す"""
    return check_golden
