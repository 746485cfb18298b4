#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
幾何ソース項モジュール

断面積 A = r^alpha の対称流れで生じるソース項
    G = -(alpha/r) (ρu, ρu², u(ρE + P))
を評価し、演算子分割の 1 ステップとして常微分方程式 dU/dt = G を
2 次の Runge-Kutta 法（Heun 法）で進めます。

セル中心半径 r はサブステップ中も固定です（オイラー格子）。
"""

import logging
from dataclasses import dataclass

import numpy as np

from errors import NonPhysicalState, SingularRadius
from gasdynamics_core import (
    ConservedState,
    GasModel,
    Geometry,
    Scalar,
    conserved_to_primitive,
)

logger = logging.getLogger("geometry_source")


@dataclass(frozen=True)
class SourceTerm:
    """
    ソース項 G（ConservedState と同じ成分順の時間変化率）

    属性:
        mass: 質量の変化率
        momentum: 運動量の変化率
        energy: エネルギーの変化率
    """

    mass: Scalar
    momentum: Scalar
    energy: Scalar

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(np.asarray(self.mass, dtype=np.float64),
                                            np.asarray(self.momentum, dtype=np.float64),
                                            np.asarray(self.energy, dtype=np.float64)))


def geometric_source(cons: ConservedState, r: Scalar, geometry: Geometry, gas: GasModel) -> SourceTerm:
    """
    幾何ソース項 G = -(alpha/r)(ρu, ρu², u(ρE + P)) を評価する

    引数:
        cons (ConservedState): 保存変数
        r: セル中心半径
        geometry (Geometry): 対称性
        gas (GasModel): 気体モデル

    戻り値:
        SourceTerm: ソース項

    例外:
        SingularRadius: alpha > 0 かつ r <= 0 の場合
        NonPhysicalState: 状態が非物理的な場合
    """
    alpha = Geometry(geometry).alpha
    zero = np.zeros_like(np.asarray(cons.mass, dtype=np.float64))
    if alpha == 0:
        return SourceTerm(zero, zero, zero)
    if np.any(np.asarray(r) <= 0.0):
        raise SingularRadius(f"alpha={alpha} では r > 0 が必要です（セル中心格子を使ってください）")

    prim = conserved_to_primitive(cons, gas)
    factor = -alpha / np.asarray(r, dtype=np.float64)
    return SourceTerm(factor * cons.momentum,
                      factor * cons.momentum * prim.u,
                      factor * prim.u * (cons.energy + prim.p))


def rk2_source_step(cons: ConservedState, r: Scalar, geometry: Geometry, gas: GasModel,
                    dt: float) -> ConservedState:
    """
    ソース項の常微分方程式を Heun 法で dt だけ進める

        k1 = G(U), k2 = G(U + dt k1), U' = U + (dt/2)(k1 + k2)

    引数:
        cons (ConservedState): 保存変数
        r: セル中心半径
        geometry (Geometry): 対称性
        gas (GasModel): 気体モデル
        dt (float): 時間刻み

    戻り値:
        ConservedState: 更新後の保存変数

    例外:
        NonPhysicalState: 更新後の密度または圧力が非正の場合（軸近傍で dt が大きすぎる）
    """
    if Geometry(geometry).alpha == 0:
        return cons
    u0 = cons.as_array()
    k1 = geometric_source(cons, r, geometry, gas).as_array()
    stage = ConservedState.from_array(u0 + dt * k1)
    k2 = geometric_source(stage, r, geometry, gas).as_array()
    updated = ConservedState.from_array(u0 + 0.5 * dt * (k1 + k2))
    try:
        conserved_to_primitive(updated, gas)
    except NonPhysicalState as exc:
        raise NonPhysicalState(f"ソース項の更新で非物理状態になりました (dt={dt:.6g})", cells=exc.cells)
    return updated


def subcycled_source_step(cons: ConservedState, r: Scalar, geometry: Geometry, gas: GasModel,
                          dt: float, substeps: int = 2) -> ConservedState:
    """
    Heun 法を substeps 回に分けて dt だけ進める（軸近傍セル用）

    引数:
        cons (ConservedState): 保存変数
        r: セル中心半径
        geometry (Geometry): 対称性
        gas (GasModel): 気体モデル
        dt (float): 時間刻み
        substeps (int): 分割数

    戻り値:
        ConservedState: 更新後の保存変数
    """
    sub_dt = dt / substeps
    for _ in range(substeps):
        cons = rk2_source_step(cons, r, geometry, gas, sub_dt)
    return cons
