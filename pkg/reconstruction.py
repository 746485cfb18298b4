#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
MUSCL 再構成モジュール

セル平均から原始変数 (ρ, u, P) の区分線形再構成を行い、TVD リミッタで
勾配を制限してセル両面の値を求めます。

主な機能:
- superbee リミッタ（既定）、minmod リミッタ、リミッタなし（一次精度）
- 3 セルのステンシルからの面値 (FacePair) の計算
- 面値が正値性を破る場合はセル全体を勾配ゼロに戻す

ステンシルの各状態は float でも配列でも構いません（配列なら全セルを一括処理）。
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Tuple

import numpy as np

from errors import ConfigError
from gasdynamics_core import PrimitiveState, Scalar

logger = logging.getLogger("reconstruction")

# 前進差分がこの相対値未満なら平坦とみなす
FLAT_TOLERANCE = 1.0e-12


class LimiterKind(Enum):
    """
    勾配リミッタの種類

    NONE は勾配ゼロ（一次精度）、UNLIMITED は φ ≡ 1（前進差分をそのまま使う）。
    """

    SUPERBEE = "superbee"
    MINMOD = "minmod"
    NONE = "none"
    UNLIMITED = "unlimited"

    @classmethod
    def from_name(cls, name: str) -> "LimiterKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ConfigError(f"未知のリミッタ: {name}")


@dataclass(frozen=True)
class FacePair:
    """
    セル両面の再構成値

    属性:
        minus (PrimitiveState): セル内側の面（r の小さい側）
        plus (PrimitiveState): セル外側の面（r の大きい側）
    """

    minus: PrimitiveState
    plus: PrimitiveState


def limiter_superbee(r: Scalar) -> Scalar:
    """
    superbee リミッタ φ(r) = max(0, min(2r, 1), min(r, 2))

    引数:
        r: 勾配比

    戻り値:
        リミッタ値 φ（0 <= φ <= 2）
    """
    return np.maximum(0.0, np.maximum(np.minimum(2.0 * r, 1.0), np.minimum(r, 2.0)))


def limiter_minmod(r: Scalar) -> Scalar:
    """
    minmod リミッタ φ(r) = max(0, min(r, 1))

    引数:
        r: 勾配比

    戻り値:
        リミッタ値 φ（0 <= φ <= 1）
    """
    return np.maximum(0.0, np.minimum(r, 1.0))


def limiter_unlimited(r: Scalar) -> Scalar:
    """φ ≡ 1（線形データでは厳密、TVD ではない）"""
    return np.ones_like(np.asarray(r, dtype=np.float64))


LIMITERS: Dict[LimiterKind, Callable[[Scalar], Scalar]] = {
    LimiterKind.SUPERBEE: limiter_superbee,
    LimiterKind.MINMOD: limiter_minmod,
    LimiterKind.UNLIMITED: limiter_unlimited,
}


def limited_slope(back: Scalar, center: Scalar, forward: Scalar, limiter: LimiterKind) -> Scalar:
    """
    1 成分の制限付き勾配 Δ = φ(r)·(W_{i+1} - W_i)

    前進差分が |W_{i+1} - W_i| < 1e-12·max(1, |W_i|) のときは Δ = 0。
    limiter = NONE の場合は一次精度（Δ = 0）。

    引数:
        back: W_{i-1}
        center: W_i
        forward: W_{i+1}
        limiter (LimiterKind): リミッタ

    戻り値:
        勾配 Δ
    """
    d_back = np.asarray(center - back, dtype=np.float64)
    d_fwd = np.asarray(forward - center, dtype=np.float64)
    if limiter is LimiterKind.NONE:
        return np.zeros_like(d_fwd)
    flat = np.abs(d_fwd) < FLAT_TOLERANCE * np.maximum(1.0, np.abs(center))
    safe = np.where(flat, 1.0, d_fwd)
    phi = LIMITERS[limiter](d_back / safe)
    return np.where(flat, 0.0, phi * d_fwd)


def muscl_reconstruct(stencil: Tuple[PrimitiveState, PrimitiveState, PrimitiveState],
                      limiter: LimiterKind) -> FacePair:
    """
    3 セルのステンシル (W_{i-1}, W_i, W_{i+1}) からセル i の面値を求める

    原始変数の各成分ごとに勾配を制限し、面値 W_i ∓ Δ_i/2 を返します。
    どちらかの面で ρ または P が非正になるセルは、全成分とも勾配ゼロに戻します。

    引数:
        stencil (tuple): 連続する 3 セルの原始変数
        limiter (LimiterKind): リミッタ

    戻り値:
        FacePair: セル i の内側面と外側面
    """
    back, center, forward = stencil
    slopes = [limited_slope(getattr(back, name), getattr(center, name), getattr(forward, name), limiter)
              for name in ("rho", "u", "p")]
    d_rho, d_u, d_p = slopes

    rho = np.asarray(center.rho, dtype=np.float64)
    p = np.asarray(center.p, dtype=np.float64)
    positive = ((rho - 0.5 * np.abs(d_rho)) > 0.0) & ((p - 0.5 * np.abs(d_p)) > 0.0)
    if not np.all(positive):
        logger.debug(f"正値性のため {int(np.size(positive) - np.count_nonzero(positive))} セルを一次精度に戻します")
        d_rho = np.where(positive, d_rho, 0.0)
        d_u = np.where(positive, d_u, 0.0)
        d_p = np.where(positive, d_p, 0.0)

    u = np.asarray(center.u, dtype=np.float64)
    return FacePair(
        minus=PrimitiveState(rho - 0.5 * d_rho, u - 0.5 * d_u, p - 0.5 * d_p),
        plus=PrimitiveState(rho + 0.5 * d_rho, u + 0.5 * d_u, p + 0.5 * d_p),
    )
