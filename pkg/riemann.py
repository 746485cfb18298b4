#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
リーマン解法モジュール

セル境界の数値流束を Roe の近似リーマン解法（Harten 型エントロピー修正付き）で
計算します。あわせて、検証用オラクルとして平面の厳密リーマン解法
（減衰付き Newton 反復）を提供します。厳密解法は本番の時間発展ループからは
呼び出されません。

主な機能:
- roe_average: √ρ 重み付きの Roe 平均
- roe_flux: 3 波分解による Roe 流束
- exact_riemann_solve: 自己相似解を射線 ξ = x/t 上で評価する
- sample_exact_solution: 複数点での厳密解（検証・CSV 出力用）
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from errors import NoConvergence, NonPhysicalState, VacuumFormation
from gasdynamics_core import (
    GasModel,
    PrimitiveState,
    Scalar,
    flux_from_primitive,
    sound_speed,
    total_energy,
)

logger = logging.getLogger("riemann")

# エントロピー修正の幅 δ = ENTROPY_FIX_FRACTION * ĉ
ENTROPY_FIX_FRACTION = 0.1

NEWTON_TOLERANCE = 1.0e-12
NEWTON_MAX_ITERATIONS = 100
PRESSURE_FLOOR = 1.0e-8


@dataclass(frozen=True)
class RoeAverages:
    """
    Roe 平均状態

    属性:
        rho_hat: Roe 平均密度 sqrt(ρL ρR)
        u_hat: Roe 平均速度
        h_hat: Roe 平均全エンタルピー
        c_hat: Roe 平均音速
    """

    rho_hat: Scalar
    u_hat: Scalar
    h_hat: Scalar
    c_hat: Scalar


class WaveKind(Enum):
    SHOCK = "shock"
    RAREFACTION = "rarefaction"


@dataclass(frozen=True)
class WavePattern:
    left: WaveKind
    right: WaveKind


@dataclass(frozen=True)
class StarRegion:
    """
    厳密解の中間（スター）領域

    属性:
        p_star (float): 中間領域の圧力
        u_star (float): 中間領域の速度（接触不連続の速度）
        iterations (int): Newton 反復回数
        residual (float): p_star における圧力関数の値
    """

    p_star: float
    u_star: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class RiemannFanSample:
    """
    厳密解を射線 ξ = x/t 上で評価した結果

    属性:
        state (PrimitiveState): 射線上の原始変数
        wave_pattern (WavePattern): 左右の波の種類
        star (StarRegion): 中間領域
    """

    state: PrimitiveState
    wave_pattern: WavePattern
    star: StarRegion


def _enthalpy(prim: PrimitiveState, gas: GasModel) -> Scalar:
    return total_energy(prim, gas) + prim.p / prim.rho


def roe_average(left: PrimitiveState, right: PrimitiveState, gas: GasModel) -> RoeAverages:
    """
    Roe 平均を計算する

    û と Ĥ は √ρ 重み付き平均、ĉ² = (γ-1)(Ĥ - û²/2)。

    引数:
        left (PrimitiveState): 左状態
        right (PrimitiveState): 右状態
        gas (GasModel): 気体モデル

    戻り値:
        RoeAverages: Roe 平均

    例外:
        NonPhysicalState: ĉ² <= 0 の場合
    """
    sqrt_l = np.sqrt(left.rho)
    sqrt_r = np.sqrt(right.rho)
    weight = sqrt_l + sqrt_r
    u_hat = (sqrt_l * left.u + sqrt_r * right.u) / weight
    h_hat = (sqrt_l * _enthalpy(left, gas) + sqrt_r * _enthalpy(right, gas)) / weight
    c2 = (gas.gamma - 1.0) * (h_hat - 0.5 * u_hat * u_hat)
    bad = np.flatnonzero(~(np.atleast_1d(c2) > 0.0))
    if bad.size:
        raise NonPhysicalState("Roe 平均の音速二乗が非正です", cells=bad.tolist())
    return RoeAverages(sqrt_l * sqrt_r, u_hat, h_hat, np.sqrt(c2))


def entropy_fixed_speed(speed: Scalar, delta: Scalar) -> Scalar:
    """
    Harten 型エントロピー修正

    |λ| < δ の範囲で |λ| を λ²/(2δ) + δ/2 に置き換えます。

    引数:
        speed: 固有値 λ
        delta: 修正幅 δ

    戻り値:
        修正後の |λ|
    """
    magnitude = np.abs(speed)
    return np.where(magnitude < delta, 0.5 * (speed * speed / delta + delta), magnitude)


def roe_flux(left: PrimitiveState, right: PrimitiveState, gas: GasModel) -> np.ndarray:
    """
    Roe 流束 F = (F(U_L) + F(U_R))/2 - Σ |λ̃_k| α_k r̃_k / 2

    特性分解（Roe 平均状態まわり）:
        λ1 = û - ĉ,  α1 = (Δp - ρ̂ ĉ Δu) / (2ĉ²),  r1 = (1, û - ĉ, Ĥ - û ĉ)
        λ2 = û,      α2 = Δρ - Δp / ĉ²,           r2 = (1, û, û²/2)
        λ3 = û + ĉ,  α3 = (Δp + ρ̂ ĉ Δu) / (2ĉ²),  r3 = (1, û + ĉ, Ĥ + û ĉ)
    音響波 (k = 1, 3) のみエントロピー修正を適用します。

    引数:
        left (PrimitiveState): 境界左側の状態
        right (PrimitiveState): 境界右側の状態
        gas (GasModel): 気体モデル

    戻り値:
        np.ndarray: (3, ...) の境界流束

    例外:
        NonPhysicalState: Roe 平均が非物理的な場合
    """
    avg = roe_average(left, right, gas)
    rho_hat, u_hat, h_hat, c_hat = avg.rho_hat, avg.u_hat, avg.h_hat, avg.c_hat
    c2 = c_hat * c_hat

    d_rho = right.rho - left.rho
    d_u = right.u - left.u
    d_p = right.p - left.p

    alpha1 = (d_p - rho_hat * c_hat * d_u) / (2.0 * c2)
    alpha2 = d_rho - d_p / c2
    alpha3 = (d_p + rho_hat * c_hat * d_u) / (2.0 * c2)

    delta = ENTROPY_FIX_FRACTION * c_hat
    speed1 = entropy_fixed_speed(u_hat - c_hat, delta)
    speed2 = np.abs(u_hat)
    speed3 = entropy_fixed_speed(u_hat + c_hat, delta)

    w1 = speed1 * alpha1
    w2 = speed2 * alpha2
    w3 = speed3 * alpha3
    dissipation = np.stack(np.broadcast_arrays(
        w1 + w2 + w3,
        w1 * (u_hat - c_hat) + w2 * u_hat + w3 * (u_hat + c_hat),
        w1 * (h_hat - u_hat * c_hat) + w2 * (0.5 * u_hat * u_hat) + w3 * (h_hat + u_hat * c_hat),
    ))

    return 0.5 * (flux_from_primitive(left, gas) + flux_from_primitive(right, gas)) - 0.5 * dissipation


# --- 厳密リーマン解法（検証用オラクル） ---


def _wave_function(p: float, state: PrimitiveState, c: float, gas: GasModel) -> Tuple[float, float]:
    """片側の波の圧力関数 f_K(p) とその導関数"""
    g = gas.gamma
    if p > state.p:
        a_k = 2.0 / ((g + 1.0) * state.rho)
        b_k = (g - 1.0) / (g + 1.0) * state.p
        root = np.sqrt(a_k / (b_k + p))
        return (p - state.p) * root, (1.0 - 0.5 * (p - state.p) / (b_k + p)) * root
    ratio = p / state.p
    value = 2.0 * c / (g - 1.0) * (ratio ** ((g - 1.0) / (2.0 * g)) - 1.0)
    derivative = ratio ** (-(g + 1.0) / (2.0 * g)) / (state.rho * c)
    return value, derivative


def pressure_function(p: float, left: PrimitiveState, right: PrimitiveState, gas: GasModel) -> float:
    """
    二波の圧力関数 f(p) = f_L(p) + f_R(p) + (u_R - u_L)

    根が中間領域の圧力 p* です。
    """
    f_l, _ = _wave_function(p, left, float(sound_speed(left, gas)), gas)
    f_r, _ = _wave_function(p, right, float(sound_speed(right, gas)), gas)
    return f_l + f_r + (right.u - left.u)


def solve_star_region(left: PrimitiveState, right: PrimitiveState, gas: GasModel) -> StarRegion:
    """
    中間領域の圧力と速度を減衰付き Newton 反復で求める

    初期値は線形化 (PVRS) 推定値を 1e-8 で下から打ち切ったもの。
    更新で p が非正になる場合はステップを半分にします。

    引数:
        left (PrimitiveState): 左状態
        right (PrimitiveState): 右状態
        gas (GasModel): 気体モデル

    戻り値:
        StarRegion: 中間領域

    例外:
        VacuumFormation: (u_R - u_L) >= 2(c_L + c_R)/(γ-1) の場合
        NoConvergence: 100 回以内に収束しない場合
    """
    left = PrimitiveState(float(left.rho), float(left.u), float(left.p)).check()
    right = PrimitiveState(float(right.rho), float(right.u), float(right.p)).check()
    c_l = float(sound_speed(left, gas))
    c_r = float(sound_speed(right, gas))
    d_u = right.u - left.u
    if d_u >= 2.0 * (c_l + c_r) / (gas.gamma - 1.0):
        raise VacuumFormation(
            f"初期状態が真空を生成します: u_R - u_L = {d_u:.6g} >= {2.0 * (c_l + c_r) / (gas.gamma - 1.0):.6g}"
        )

    pvrs = 0.5 * (left.p + right.p) - 0.125 * d_u * (left.rho + right.rho) * (c_l + c_r)
    p = max(pvrs, PRESSURE_FLOOR)

    for iteration in range(1, NEWTON_MAX_ITERATIONS + 1):
        f_l, df_l = _wave_function(p, left, c_l, gas)
        f_r, df_r = _wave_function(p, right, c_r, gas)
        step = (f_l + f_r + d_u) / (df_l + df_r)
        p_new = p - step
        while p_new <= 0.0:
            step *= 0.5
            p_new = p - step
        change = abs(p_new - p) / p_new
        p = p_new
        if change < NEWTON_TOLERANCE:
            f_l, _ = _wave_function(p, left, c_l, gas)
            f_r, _ = _wave_function(p, right, c_r, gas)
            u_star = 0.5 * (left.u + right.u) + 0.5 * (f_r - f_l)
            logger.debug(f"厳密解: p*={p:.15g}, u*={u_star:.15g}, 反復 {iteration} 回")
            return StarRegion(p, u_star, iteration, f_l + f_r + d_u)

    raise NoConvergence(f"Newton 反復が {NEWTON_MAX_ITERATIONS} 回以内に収束しませんでした")


def _sample(star: StarRegion, left: PrimitiveState, right: PrimitiveState,
            gas: GasModel, xi: float) -> PrimitiveState:
    """中間領域が既知のとき、射線 ξ 上の状態を返す"""
    g = gas.gamma
    gm = (g - 1.0) / (g + 1.0)
    p_star, u_star = star.p_star, star.u_star

    if xi <= u_star:
        state, c, sign = left, float(sound_speed(left, gas)), 1.0
    else:
        state, c, sign = right, float(sound_speed(right, gas)), -1.0
    # sign = +1 は左向きの波、-1 は右向きの波（右側は鏡像で同じ式を使う）
    s = sign * xi
    u_k = sign * state.u
    u_s = sign * u_star

    if p_star > state.p:
        ratio = p_star / state.p
        shock_speed = u_k - c * np.sqrt((g + 1.0) / (2.0 * g) * ratio + (g - 1.0) / (2.0 * g))
        if s <= shock_speed:
            return state
        rho = state.rho * (ratio + gm) / (gm * ratio + 1.0)
        return PrimitiveState(rho, u_star, p_star)

    head = u_k - c
    c_star = c * (p_star / state.p) ** ((g - 1.0) / (2.0 * g))
    tail = u_s - c_star
    if s <= head:
        return state
    if s >= tail:
        return PrimitiveState(state.rho * (p_star / state.p) ** (1.0 / g), u_star, p_star)
    c_fan = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * (u_k - s))
    u_fan = 2.0 / (g + 1.0) * (c + 0.5 * (g - 1.0) * u_k + s)
    rho = state.rho * (c_fan / c) ** (2.0 / (g - 1.0))
    p = state.p * (c_fan / c) ** (2.0 * g / (g - 1.0))
    return PrimitiveState(rho, sign * u_fan, p)


def _pattern(star: StarRegion, left: PrimitiveState, right: PrimitiveState) -> WavePattern:
    return WavePattern(WaveKind.SHOCK if star.p_star > float(left.p) else WaveKind.RAREFACTION,
                       WaveKind.SHOCK if star.p_star > float(right.p) else WaveKind.RAREFACTION)


def exact_riemann_solve(left: PrimitiveState, right: PrimitiveState, gas: GasModel,
                        xi: float) -> RiemannFanSample:
    """
    平面リーマン問題の厳密解を射線 ξ = x/t 上で評価する

    引数:
        left (PrimitiveState): 左状態
        right (PrimitiveState): 右状態
        gas (GasModel): 気体モデル
        xi (float): 射線の傾き x/t

    戻り値:
        RiemannFanSample: 射線上の状態と波の構造
    """
    star = solve_star_region(left, right, gas)
    state = _sample(star, left, right, gas, float(xi))
    return RiemannFanSample(state, _pattern(star, left, right), star)


def sample_exact_solution(left: PrimitiveState, right: PrimitiveState, gas: GasModel,
                          x: np.ndarray, time: float, x0: float) -> PrimitiveState:
    """
    時刻 time における厳密解を点列 x 上で評価する

    中間領域は一度だけ解きます。time = 0 では初期の不連続をそのまま返します。

    引数:
        left, right (PrimitiveState): 左右の初期状態
        gas (GasModel): 気体モデル
        x (np.ndarray): 評価点
        time (float): 時刻
        x0 (float): 初期不連続の位置

    戻り値:
        PrimitiveState: 各点の原始変数（配列）
    """
    x = np.asarray(x, dtype=np.float64)
    if time <= 0.0:
        inside = x < x0
        return PrimitiveState(np.where(inside, left.rho, right.rho) * 1.0,
                              np.where(inside, left.u, right.u) * 1.0,
                              np.where(inside, left.p, right.p) * 1.0)
    star = solve_star_region(left, right, gas)
    left = PrimitiveState(float(left.rho), float(left.u), float(left.p))
    right = PrimitiveState(float(right.rho), float(right.u), float(right.p))
    samples = [_sample(star, left, right, gas, (xx - x0) / time) for xx in x]
    return PrimitiveState(np.array([s.rho for s in samples], dtype=np.float64),
                          np.array([s.u for s in samples], dtype=np.float64),
                          np.array([s.p for s in samples], dtype=np.float64))
