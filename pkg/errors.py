#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
例外定義モジュール

ソルバー全体で共有する例外クラスを定義します。
ライブラリ側は例外を送出するだけで、終了コードへの変換は
scenarios_io.cli_main のみが行います。
"""

from typing import Any, Optional, Sequence


class ShockSolverError(Exception):
    """ソルバー例外の基底クラス"""


class NonPhysicalState(ShockSolverError):
    """
    非物理状態（密度・圧力が非正、または Roe 平均の音速二乗が非正）

    時間発展ループはこの例外で即座に停止します。ループ側で
    time / step / last_state が付与され、CLI はそれを使ってクラッシュ
    スナップショットを書き出します。
    """

    def __init__(self, message: str, cells: Optional[Sequence[int]] = None):
        super().__init__(message)
        self.reason = message
        self.cells = list(cells) if cells is not None else []
        self.time: Optional[float] = None
        self.step: Optional[int] = None
        self.last_state: Any = None

    def with_context(self, time: float, step: int, last_state: Any) -> "NonPhysicalState":
        """
        時間発展ループの診断情報を付与する

        引数:
            time (float): 最後に受理された状態の時刻
            step (int): 失敗したステップ番号
            last_state: 最後に受理された SimulationState

        戻り値:
            NonPhysicalState: 自分自身
        """
        self.time = time
        self.step = step
        self.last_state = last_state
        return self

    def __str__(self) -> str:
        parts = [self.reason]
        if self.cells:
            shown = ", ".join(str(i) for i in self.cells[:8])
            more = " ..." if len(self.cells) > 8 else ""
            parts.append(f"セル: [{shown}{more}]")
        if self.time is not None:
            parts.append(f"t={self.time:.17g}")
        if self.step is not None:
            parts.append(f"step={self.step}")
        return " / ".join(parts)


class SingularRadius(ShockSolverError):
    """alpha > 0 で r <= 0 の点に幾何ソース項を評価しようとした（格子の実装ミス）"""


class VacuumFormation(ShockSolverError):
    """厳密リーマン解法: 初期条件が真空を生成する"""


class NoConvergence(ShockSolverError):
    """厳密リーマン解法: Newton 反復が収束しなかった（オラクル側の不具合）"""


class ConfigError(ShockSolverError):
    """
    設定エラー

    引数:
        reason (str): エラー理由
        line (int): 設定ファイルの行番号（不明な場合は None）
    """

    def __init__(self, reason: str, line: Optional[int] = None):
        self.reason = reason
        self.line = line
        message = f"{line}行目: {reason}" if line is not None else reason
        super().__init__(message)
