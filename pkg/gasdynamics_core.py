#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
気体力学コアモジュール

理想気体モデル、原始変数・保存変数の表現と相互変換、物理流束、
音速・温度などの導出量を提供します。他の全モジュールが共有します。

主な機能:
- GasModel / PrimitiveState / ConservedState / Geometry / RadialGrid
- 原始変数 <-> 保存変数の変換
- 物理流束 F(U) = (ρu, ρu² + P, u(ρE + P))
- 音速 c = sqrt(γP/ρ)、温度 T = γP/ρ

無次元化:
    密度は ρ0、圧力は γP0、速度は未攪乱音速 c0、長さは r0、時間は r0/c0 で
    無次元化されます。未攪乱状態 (ρ=1, P=1/γ) では c=1, T=1 になります。

各状態量は float でも numpy 配列でも構いません（配列の場合は
セルごとの値を並べた「配列の構造体」として扱います）。
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from typing import Union

import numpy as np

from errors import ConfigError, NonPhysicalState

logger = logging.getLogger("gasdynamics_core")

Scalar = Union[float, np.ndarray]


@dataclass(frozen=True)
class GasModel:
    """
    理想気体モデル

    属性:
        gamma (float): 比熱比（1.0 より大きい定数）
    """

    gamma: float = 1.4

    def __post_init__(self):
        if not float(self.gamma) > 1.0:
            raise ConfigError(f"比熱比 gamma は 1.0 より大きい必要があります: {self.gamma}")


@dataclass(frozen=True)
class PrimitiveState:
    """
    原始変数 (ρ, u, P)

    属性:
        rho: 無次元密度
        u: 無次元速度
        p: 無次元圧力
    """

    rho: Scalar
    u: Scalar
    p: Scalar

    def __getitem__(self, index) -> "PrimitiveState":
        return PrimitiveState(self.rho[index], self.u[index], self.p[index])

    def __len__(self) -> int:
        return int(np.size(self.rho))

    def as_array(self) -> np.ndarray:
        """(3, ...) の配列として返す"""
        return _stack(self.rho, self.u, self.p)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "PrimitiveState":
        return cls(values[0], values[1], values[2])

    def mirrored(self) -> "PrimitiveState":
        """速度の符号を反転した状態"""
        return PrimitiveState(self.rho, -self.u, self.p)

    def check(self) -> "PrimitiveState":
        """
        不変条件 ρ > 0, P > 0 を確認する

        戻り値:
            PrimitiveState: 自分自身

        例外:
            NonPhysicalState: 密度または圧力が非正の場合
        """
        bad = np.flatnonzero(~((np.atleast_1d(self.rho) > 0.0) & (np.atleast_1d(self.p) > 0.0)))
        if bad.size:
            raise NonPhysicalState("密度または圧力が非正です", cells=bad.tolist())
        return self


@dataclass(frozen=True)
class ConservedState:
    """
    保存変数 U = (ρ, ρu, ρE)

    属性:
        mass: ρ
        momentum: ρu
        energy: ρE
    """

    mass: Scalar
    momentum: Scalar
    energy: Scalar

    def __getitem__(self, index) -> "ConservedState":
        return ConservedState(self.mass[index], self.momentum[index], self.energy[index])

    def __len__(self) -> int:
        return int(np.size(self.mass))

    def as_array(self) -> np.ndarray:
        """(3, ...) の配列として返す"""
        return _stack(self.mass, self.momentum, self.energy)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "ConservedState":
        return cls(values[0], values[1], values[2])


class Geometry(IntEnum):
    """
    対称性の指数 alpha（断面積 A(r) = r^alpha）
    """

    PLANAR = 0
    CYLINDRICAL = 1
    SPHERICAL = 2

    @property
    def alpha(self) -> int:
        return int(self)

    @classmethod
    def from_name(cls, name: str) -> "Geometry":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            raise ConfigError(f"未知の幾何形状: {name}（planar / cylindrical / spherical）")


@dataclass(frozen=True)
class RadialGrid:
    """
    セル中心の一様格子

    セル中心は r_i = r_min + (i + 1/2) dr なので、r_min = 0 でも
    r = 0 の特異点上には状態を置きません。

    属性:
        n_cells (int): セル数
        dr (float): セル幅
        r_min (float): 計算領域の内側端
    """

    n_cells: int
    dr: float
    r_min: float = 0.0

    def __post_init__(self):
        if self.n_cells < 4:
            raise ConfigError(f"セル数は 4 以上が必要です: {self.n_cells}")
        if not self.dr > 0.0:
            raise ConfigError(f"セル幅は正である必要があります: {self.dr}")

    @classmethod
    def from_extent(cls, r_max: float, n_cells: int, r_min: float = 0.0) -> "RadialGrid":
        """
        領域 [r_min, r_max] を n_cells 個に等分した格子を作る

        引数:
            r_max (float): 外側端
            n_cells (int): セル数
            r_min (float): 内側端

        戻り値:
            RadialGrid: 格子
        """
        if not r_max > r_min:
            raise ConfigError(f"r_max ({r_max}) は r_min ({r_min}) より大きい必要があります")
        return cls(int(n_cells), (r_max - r_min) / n_cells, r_min)

    @property
    def r_max(self) -> float:
        return self.r_min + self.n_cells * self.dr

    @property
    def centers(self) -> np.ndarray:
        return self.r_min + (np.arange(self.n_cells) + 0.5) * self.dr

    @property
    def faces(self) -> np.ndarray:
        return self.r_min + np.arange(self.n_cells + 1) * self.dr

    def check_geometry(self, geometry: Geometry) -> None:
        """alpha > 0 の場合、全セル中心が r > 0 であることを確認する"""
        if geometry.alpha > 0 and self.r_min + 0.5 * self.dr <= 0.0:
            raise ConfigError("alpha > 0 では全セル中心が r > 0 である必要があります")


def _stack(a: Scalar, b: Scalar, c: Scalar) -> np.ndarray:
    return np.stack(np.broadcast_arrays(np.asarray(a, dtype=np.float64),
                                        np.asarray(b, dtype=np.float64),
                                        np.asarray(c, dtype=np.float64)))


def total_energy(prim: PrimitiveState, gas: GasModel) -> Scalar:
    """
    比全エネルギー E = P/(ρ(γ-1)) + u²/2

    引数:
        prim (PrimitiveState): 原始変数
        gas (GasModel): 気体モデル

    戻り値:
        比全エネルギー E
    """
    return prim.p / (prim.rho * (gas.gamma - 1.0)) + 0.5 * prim.u * prim.u


def primitive_to_conserved(prim: PrimitiveState, gas: GasModel) -> ConservedState:
    """
    原始変数を保存変数 (ρ, ρu, ρE) に変換する

    引数:
        prim (PrimitiveState): 原始変数
        gas (GasModel): 気体モデル

    戻り値:
        ConservedState: 保存変数
    """
    return ConservedState(prim.rho, prim.rho * prim.u, prim.rho * total_energy(prim, gas))


def conserved_to_primitive(cons: ConservedState, gas: GasModel) -> PrimitiveState:
    """
    保存変数を原始変数に変換する

    引数:
        cons (ConservedState): 保存変数
        gas (GasModel): 気体モデル

    戻り値:
        PrimitiveState: 原始変数

    例外:
        NonPhysicalState: 質量または回復した圧力が非正の場合
    """
    mass = cons.mass
    with np.errstate(divide="ignore", invalid="ignore"):
        u = cons.momentum / mass
        p = (gas.gamma - 1.0) * (cons.energy - 0.5 * cons.momentum * u)
    valid = (np.atleast_1d(mass) > 0.0) & (np.atleast_1d(p) > 0.0)
    if not np.all(valid):
        bad = np.flatnonzero(~valid)
        raise NonPhysicalState("保存変数から非物理的な状態が回復されました（ρ <= 0 または P <= 0）",
                               cells=bad.tolist())
    return PrimitiveState(mass, u, p)


def sound_speed(prim: PrimitiveState, gas: GasModel) -> Scalar:
    """
    音速 c = sqrt(γP/ρ)

    引数:
        prim (PrimitiveState): 原始変数
        gas (GasModel): 気体モデル

    戻り値:
        音速 c
    """
    return np.sqrt(gas.gamma * prim.p / prim.rho)


def temperature(prim: PrimitiveState, gas: GasModel) -> Scalar:
    """
    無次元温度 T = γP/ρ

    圧力は γP0 で無次元化されているため、γ を掛けると未攪乱状態で T = 1 になり、
    初期の内外二領域が等温 (T = 1) になります。文字通りの P/ρ とは定数 γ 倍だけ
    異なります。

    引数:
        prim (PrimitiveState): 原始変数
        gas (GasModel): 気体モデル

    戻り値:
        温度 T
    """
    return gas.gamma * prim.p / prim.rho


def mach_number(prim: PrimitiveState, gas: GasModel) -> Scalar:
    """局所マッハ数 |u|/c"""
    return np.abs(prim.u) / sound_speed(prim, gas)


def flux_from_primitive(prim: PrimitiveState, gas: GasModel) -> np.ndarray:
    """
    原始変数から直接、物理流束を計算する

    戻り値:
        np.ndarray: (3, ...) の流束 (ρu, ρu² + P, u(ρE + P))
    """
    momentum = prim.rho * prim.u
    energy = prim.rho * total_energy(prim, gas)
    return _stack(momentum, momentum * prim.u + prim.p, prim.u * (energy + prim.p))


def physical_flux(cons: ConservedState, gas: GasModel) -> np.ndarray:
    """
    物理流束 F(U) = (ρu, ρu² + P, u(ρE + P))

    引数:
        cons (ConservedState): 保存変数
        gas (GasModel): 気体モデル

    戻り値:
        np.ndarray: (3, ...) の流束

    例外:
        NonPhysicalState: 変換で非物理状態になった場合
    """
    prim = conserved_to_primitive(cons, gas)
    return _stack(cons.momentum,
                  cons.momentum * prim.u + prim.p,
                  prim.u * (cons.energy + prim.p))
