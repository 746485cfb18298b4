#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
時間発展ソルバーモジュール

対称座標系の一次元オイラー方程式を演算子分割で時間発展させます。

主な機能:
- ゴーストセル境界条件（反射 / 固定 / 透過 / 周期）
- CFL 条件による時間刻み（スナップショット時刻にちょうど一致するよう切り詰め）
- MUSCL-Hancock 法による同次系（平面オイラー方程式）の更新
- 幾何ソース項との Godunov 分割 / Strang 分割（既定）
- 軸上の速度の符号反転による収束時刻 t_c の検出
- 収束衝撃波の追跡と収束指数のフィッティング
- 幾何重み付き保存量の台帳

非物理状態 (NonPhysicalState) が発生した場合は、時刻・ステップ・
最後に受理された状態を付与して即座に中断します。
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.optimize import curve_fit

from errors import ConfigError, NonPhysicalState
from gasdynamics_core import (
    ConservedState,
    GasModel,
    Geometry,
    PrimitiveState,
    RadialGrid,
    conserved_to_primitive,
    flux_from_primitive,
    mach_number,
    primitive_to_conserved,
    sound_speed,
    temperature,
)
from geometry_source import rk2_source_step, subcycled_source_step
from reconstruction import FacePair, LimiterKind, muscl_reconstruct
from riemann import roe_flux

logger = logging.getLogger("solver")

GHOST_CELLS = 2
# 収束判定: |u_axis| がこの値を一度超えてから符号反転を数える
CONVERGENCE_GUARD = 0.01
# 軸近傍でソース項をサブサイクルするセル数
SUBCYCLED_CELLS = 5
# 衝撃波とみなす隣接セル間の圧力上昇（相対値）
SHOCK_DETECTION_THRESHOLD = 1.0e-2


class BoundaryKind(Enum):
    """ゴーストセル境界条件の種類"""

    REFLECTIVE = "reflective"
    FIXED = "fixed"
    TRANSMISSIVE = "transmissive"
    PERIODIC = "periodic"


class SplittingMode(Enum):
    """演算子分割の方式"""

    GODUNOV = "godunov"
    STRANG = "strang"

    @classmethod
    def from_name(cls, name: str) -> "SplittingMode":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise ConfigError(f"未知の分割方式: {name}（strang / godunov）")


@dataclass(frozen=True)
class Boundaries:
    """
    両端の境界条件

    属性:
        inner (BoundaryKind): 内側（r の小さい側、軸側）
        outer (BoundaryKind): 外側
    """

    inner: BoundaryKind
    outer: BoundaryKind

    @classmethod
    def for_geometry(cls, geometry: Geometry) -> "Boundaries":
        """幾何形状の既定: 収束問題は軸で反射・外側は固定、平面は両端透過"""
        if Geometry(geometry).alpha > 0:
            return cls(BoundaryKind.REFLECTIVE, BoundaryKind.FIXED)
        return cls(BoundaryKind.TRANSMISSIVE, BoundaryKind.TRANSMISSIVE)


@dataclass(frozen=True, eq=False)
class SimulationState:
    """
    時間発展の状態

    属性:
        time (float): 現在の無次元時刻
        cells (ConservedState): 内部セルの保存変数（配列）
        step_count (int): 受理したステップ数
        boundary_outflow (np.ndarray): 境界から流出した保存量の時間積分（面積重み付き）
    """

    time: float
    cells: ConservedState
    step_count: int = 0
    boundary_outflow: np.ndarray = field(default_factory=lambda: np.zeros(3))


class InitialCondition(Protocol):
    """初期条件のインターフェース（scenarios_io の各初期条件クラスが実装）"""

    def build(self, grid: RadialGrid, gas: GasModel) -> SimulationState:
        ...

    def inner_state(self, gas: GasModel) -> PrimitiveState:
        ...

    def outer_state(self, gas: GasModel) -> PrimitiveState:
        ...


@dataclass(frozen=True)
class SimulationConfig:
    """
    シミュレーション設定

    属性:
        geometry (Geometry): 対称性
        gas (GasModel): 気体モデル
        r_max (float): 計算領域の外側端
        n_cells (int): セル数
        cfl (float): クーラン数 ν
        t_end (float): 終了時刻
        limiter (LimiterKind): リミッタ
        splitting (SplittingMode): 分割方式
        snapshot_times (tuple): 記録時刻（昇順）
        initial_condition (InitialCondition): 初期条件
        r_min (float): 計算領域の内側端
        boundaries (Boundaries): 境界条件（None なら幾何形状から決定）
        source_subcycling (bool): 軸近傍 5 セルのソース項を 2 回に分割する
        output_dir (str): 出力ディレクトリ（None なら既定値）
    """

    geometry: Geometry
    gas: GasModel
    r_max: float
    n_cells: int
    cfl: float
    t_end: float
    limiter: LimiterKind
    splitting: SplittingMode
    snapshot_times: Tuple[float, ...]
    initial_condition: InitialCondition
    r_min: float = 0.0
    boundaries: Optional[Boundaries] = None
    source_subcycling: bool = False
    output_dir: Optional[str] = None

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid.from_extent(self.r_max, self.n_cells, self.r_min)

    @property
    def resolved_boundaries(self) -> Boundaries:
        return self.boundaries if self.boundaries is not None else Boundaries.for_geometry(self.geometry)

    @property
    def recorded_times(self) -> Tuple[float, ...]:
        """記録時刻（未指定なら終了時刻のみ）"""
        return tuple(self.snapshot_times) if self.snapshot_times else (float(self.t_end),)

    def validate(self) -> "SimulationConfig":
        """
        設定の不変条件を確認する

        戻り値:
            SimulationConfig: 自分自身

        例外:
            ConfigError: 不変条件を満たさない場合
        """
        if not 0.0 < self.cfl <= 1.0:
            raise ConfigError(f"cfl は 0 < cfl <= 1 である必要があります: {self.cfl}")
        if not self.t_end >= 0.0:
            raise ConfigError(f"t_end は非負である必要があります: {self.t_end}")
        times = list(self.snapshot_times)
        if times != sorted(times):
            raise ConfigError("snapshots は昇順で指定してください")
        if any(t < 0.0 or t > self.t_end for t in times):
            raise ConfigError(f"snapshots は [0, t_end={self.t_end}] の範囲に収める必要があります")
        grid = self.grid
        grid.check_geometry(self.geometry)
        bounds = self.resolved_boundaries
        if (bounds.inner is BoundaryKind.PERIODIC) != (bounds.outer is BoundaryKind.PERIODIC):
            raise ConfigError("周期境界は両端に指定する必要があります")
        return self


@dataclass(frozen=True)
class ConvergenceEvent:
    """
    収束時刻（衝撃波が軸に到達した時刻）

    属性:
        t_c (float): 収束時刻（未検出なら None）
        detected (bool): 検出できたか
    """

    t_c: Optional[float]
    detected: bool


@dataclass(frozen=True, eq=False)
class Snapshot:
    """
    記録時刻における全セルの原始変数と導出量

    属性:
        time (float): 時刻
        r, rho, u, p, temperature, mach (np.ndarray): r の昇順に並んだ各セルの値
    """

    time: float
    r: np.ndarray
    rho: np.ndarray
    u: np.ndarray
    p: np.ndarray
    temperature: np.ndarray
    mach: np.ndarray

    COLUMNS = ("r", "rho", "u", "p", "T", "mach")

    def rows(self):
        """(r, rho, u, p, T, mach) の行を r の昇順で返す"""
        return zip(self.r, self.rho, self.u, self.p, self.temperature, self.mach)

    def __len__(self) -> int:
        return int(self.r.size)


@dataclass(frozen=True, eq=False)
class ConservationLedger:
    """
    幾何重み付き保存量 Σ U_i r_i^alpha Δr の台帳

    属性:
        initial (np.ndarray): 初期の総量 (質量, 運動量, エネルギー)
        final (np.ndarray): 最終の総量
        boundary_outflow (np.ndarray): 境界からの流出量の累計
        drift (np.ndarray): (final + outflow - initial) / max(|initial|, |final|)
            （初期値が 0 の成分は初期の総エネルギーで割る）
    """

    initial: np.ndarray
    final: np.ndarray
    boundary_outflow: np.ndarray
    drift: np.ndarray

    def as_dict(self) -> Dict[str, float]:
        return {
            "mass_drift": float(self.drift[0]),
            "momentum_drift": float(self.drift[1]),
            "energy_drift": float(self.drift[2]),
        }


@dataclass(frozen=True, eq=False)
class StepHistory:
    """
    各ステップの記録（初期状態を含む）

    属性:
        times (np.ndarray): 時刻
        axis_velocity (np.ndarray): 最内セル（r = Δr/2）の速度
        peak_pressure (np.ndarray): 領域内の最大圧力
    """

    times: np.ndarray
    axis_velocity: np.ndarray
    peak_pressure: np.ndarray

    def axis_samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.times.tolist(), self.axis_velocity.tolist()))


@dataclass(frozen=True)
class ShockSample:
    """
    収束衝撃波の位置と強さ

    属性:
        time (float): 時刻
        radius (float): 衝撃波面の半径（圧力の中間値を横切る位置、セル内補間）
        pressure_ahead (float): 衝撃波前方（内側）の圧力
        post_shock_pressure (float): 衝撃波直後の圧力
        peak_pressure (float): 領域内の最大圧力
        mach (float): 圧力比から求めた衝撃波マッハ数
    """

    time: float
    radius: float
    pressure_ahead: float
    post_shock_pressure: float
    peak_pressure: float
    mach: float


@dataclass(frozen=True)
class FocusingFit:
    """
    R_s = A (t_f - t)^n のフィッティング結果

    属性:
        exponent (float): 収束指数 n
        focus_time (float): 収束時刻 t_f
        amplitude (float): 係数 A
        samples (int): 使用したサンプル数
    """

    exponent: float
    focus_time: float
    amplitude: float
    samples: int


@dataclass(frozen=True, eq=False)
class SimulationResult:
    """run_simulation の結果一式"""

    snapshots: List[Snapshot]
    convergence: ConvergenceEvent
    ledger: ConservationLedger
    final_state: SimulationState
    history: StepHistory
    shock_track: List[ShockSample]


# --- 時間刻みと境界 ---


def compute_dt(state: SimulationState, grid: RadialGrid, gas: GasModel, cfl: float,
               stop_time: Optional[float] = None) -> float:
    """
    CFL 条件 max(|u| + c) Δt/Δr <= ν を満たす時間刻み

    引数:
        state (SimulationState): 現在の状態
        grid (RadialGrid): 格子
        gas (GasModel): 気体モデル
        cfl (float): クーラン数 ν
        stop_time (float): 次に到達すべき時刻（スナップショットまたは終了時刻）

    戻り値:
        float: 時間刻み
    """
    prim = conserved_to_primitive(state.cells, gas)
    max_speed = float(np.max(np.abs(prim.u) + sound_speed(prim, gas)))
    dt = cfl * grid.dr / max_speed
    if stop_time is not None:
        dt = min(dt, stop_time - state.time)
    return dt


def _fixed_state(config: SimulationConfig, side: str) -> PrimitiveState:
    condition = config.initial_condition
    if side == "inner":
        return condition.inner_state(config.gas)
    return condition.outer_state(config.gas)


def _ghosts(kind: BoundaryKind, side: str, prim: PrimitiveState,
            config: SimulationConfig) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """片側 2 個のゴーストセル（r の昇順）"""
    if kind is BoundaryKind.FIXED:
        state = _fixed_state(config, side)
        ones = np.ones(GHOST_CELLS)
        return state.rho * ones, state.u * ones, state.p * ones

    sign = 1.0
    if side == "inner":
        if kind is BoundaryKind.REFLECTIVE:
            index, sign = np.array([1, 0]), -1.0
        elif kind is BoundaryKind.TRANSMISSIVE:
            index = np.array([0, 0])
        else:
            index = np.array([-2, -1])
    else:
        if kind is BoundaryKind.REFLECTIVE:
            index, sign = np.array([-1, -2]), -1.0
        elif kind is BoundaryKind.TRANSMISSIVE:
            index = np.array([-1, -1])
        else:
            index = np.array([0, 1])
    return prim.rho[index], sign * prim.u[index], prim.p[index]


def apply_boundaries(state: SimulationState, config: SimulationConfig) -> PrimitiveState:
    """
    両端に 2 個ずつゴーストセルを付けた原始変数配列を返す

    反射境界では内部セルを鏡像の順に写し、速度の符号を反転します
    （ゴースト k は内部セル k の鏡像）。固定境界は初期条件の外側（内側）状態、
    透過境界は端のセルの値（勾配ゼロ）、周期境界は反対側のセルです。

    引数:
        state (SimulationState): 現在の状態
        config (SimulationConfig): 設定

    戻り値:
        PrimitiveState: 長さ n_cells + 4 の原始変数
    """
    prim = conserved_to_primitive(state.cells, config.gas)
    prim = PrimitiveState(np.asarray(prim.rho), np.asarray(prim.u), np.asarray(prim.p))
    bounds = config.resolved_boundaries
    inner = _ghosts(bounds.inner, "inner", prim, config)
    outer = _ghosts(bounds.outer, "outer", prim, config)
    return PrimitiveState(np.concatenate([inner[0], prim.rho, outer[0]]),
                          np.concatenate([inner[1], prim.u, outer[1]]),
                          np.concatenate([inner[2], prim.p, outer[2]]))


# --- 同次系（平面オイラー方程式）の MUSCL-Hancock 更新 ---


def _recover_faces(values: np.ndarray, gas: GasModel) -> Tuple[PrimitiveState, np.ndarray]:
    """予測子の保存変数を原始変数に戻し、物理的かどうかのマスクも返す"""
    rho = values[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        u = values[1] / rho
        p = (gas.gamma - 1.0) * (values[2] - 0.5 * values[1] * u)
    ok = (rho > 0.0) & (p > 0.0) & np.isfinite(u) & np.isfinite(p)
    return PrimitiveState(rho, u, p), ok


def hancock_predictor(faces: FacePair, center: PrimitiveState, gas: GasModel,
                      half_ratio: float) -> FacePair:
    """
    各セルの面値を自セルの流束差で dt/2 だけ進める

        U± ← U± + (dt / 2Δr)(F(U-) - F(U+))

    予測後に非物理的な面を持つセルは、面値をセル平均（一次精度）に戻します。

    引数:
        faces (FacePair): 再構成した面値
        center (PrimitiveState): セル平均
        gas (GasModel): 気体モデル
        half_ratio (float): dt / (2Δr)

    戻り値:
        FacePair: 予測後の面値
    """
    flux_difference = flux_from_primitive(faces.minus, gas) - flux_from_primitive(faces.plus, gas)
    minus = primitive_to_conserved(faces.minus, gas).as_array() + half_ratio * flux_difference
    plus = primitive_to_conserved(faces.plus, gas).as_array() + half_ratio * flux_difference
    minus_prim, ok_minus = _recover_faces(minus, gas)
    plus_prim, ok_plus = _recover_faces(plus, gas)
    ok = ok_minus & ok_plus
    if not np.all(ok):
        logger.debug(f"予測子で {int(ok.size - np.count_nonzero(ok))} セルを一次精度に戻します")
        minus_prim = PrimitiveState(*(np.where(ok, a, b) for a, b in zip(
            (minus_prim.rho, minus_prim.u, minus_prim.p), (center.rho, center.u, center.p))))
        plus_prim = PrimitiveState(*(np.where(ok, a, b) for a, b in zip(
            (plus_prim.rho, plus_prim.u, plus_prim.p), (center.rho, center.u, center.p))))
    return FacePair(minus_prim, plus_prim)


def interface_fluxes(extended: PrimitiveState, gas: GasModel, limiter: LimiterKind,
                     dt: float, dr: float) -> np.ndarray:
    """
    ゴースト付き配列から全セル境界 (n_cells + 1 個) の Roe 流束を計算する

    戻り値:
        np.ndarray: (3, n_cells + 1) の流束。列 j は r_min + j Δr の面
    """
    back, center, forward = extended[:-2], extended[1:-1], extended[2:]
    faces = muscl_reconstruct((back, center, forward), limiter)
    evolved = hancock_predictor(faces, center, gas, 0.5 * dt / dr)
    return roe_flux(evolved.plus[:-1], evolved.minus[1:], gas)


def _face_areas(grid: RadialGrid, geometry: Geometry) -> Tuple[float, float]:
    alpha = Geometry(geometry).alpha
    return grid.r_min ** alpha, grid.r_max ** alpha


def hyperbolic_step(state: SimulationState, config: SimulationConfig, dt: float) -> SimulationState:
    """
    同次系 (ソース項なし) を MUSCL-Hancock 法で dt だけ進める

    (1) 面値の再構成、(2) 自セルの流束差で dt/2 の予測、
    (3) 隣接する予測面値から Roe 流束、(4) 保存形の更新
        U_i' = U_i - (dt/Δr)(F_{i+1/2} - F_{i-1/2})
    各境界の流束は隣接する両セルで同じ値を使います。

    引数:
        state (SimulationState): 現在の状態
        config (SimulationConfig): 設定（格子・気体・リミッタ・境界）
        dt (float): 時間刻み

    戻り値:
        SimulationState: 時刻と step_count を進めた新しい状態

    例外:
        NonPhysicalState: 更新後に非物理的なセルがある場合（セル番号付き）
    """
    grid = config.grid
    extended = apply_boundaries(state, config)
    fluxes = interface_fluxes(extended, config.gas, config.limiter, dt, grid.dr)
    updated = state.cells.as_array() - (dt / grid.dr) * (fluxes[:, 1:] - fluxes[:, :-1])
    cells = ConservedState.from_array(updated)
    try:
        conserved_to_primitive(cells, config.gas)
    except NonPhysicalState as exc:
        raise NonPhysicalState("同次系の更新で非物理状態になりました", cells=exc.cells)

    area_in, area_out = _face_areas(grid, config.geometry)
    outflow = state.boundary_outflow + dt * (area_out * fluxes[:, -1] - area_in * fluxes[:, 0])
    return SimulationState(state.time + dt, cells, state.step_count + 1, outflow)


# --- 演算子分割 ---


def source_step(state: SimulationState, config: SimulationConfig, dt: float) -> SimulationState:
    """
    全セルのソース項を Heun 法で dt だけ進める（時刻は進めない）

    config.source_subcycling が有効なら、最内 5 セルは 2 回に分割します。
    """
    if config.geometry.alpha == 0:
        return state
    grid = config.grid
    r = grid.centers
    cells = state.cells
    if not config.source_subcycling:
        updated = rk2_source_step(cells, r, config.geometry, config.gas, dt)
        return replace(state, cells=updated)

    k = min(SUBCYCLED_CELLS, grid.n_cells)
    inner = subcycled_source_step(cells[:k], r[:k], config.geometry, config.gas, dt, substeps=2)
    try:
        outer = rk2_source_step(cells[k:], r[k:], config.geometry, config.gas, dt)
    except NonPhysicalState as exc:
        raise NonPhysicalState(exc.reason, cells=[i + k for i in exc.cells])
    merged = np.concatenate([inner.as_array(), outer.as_array()], axis=1)
    return replace(state, cells=ConservedState.from_array(merged))


def split_step(state: SimulationState, config: SimulationConfig, dt: float) -> SimulationState:
    """
    演算子分割の 1 ステップ

    godunov: 同次系 dt → ソース dt
    strang:  ソース dt/2 → 同次系 dt → ソース dt/2

    引数:
        state (SimulationState): 現在の状態
        config (SimulationConfig): 設定
        dt (float): 時間刻み

    戻り値:
        SimulationState: dt 後の状態
    """
    if config.splitting is SplittingMode.GODUNOV:
        state = hyperbolic_step(state, config, dt)
        return source_step(state, config, dt)
    state = source_step(state, config, 0.5 * dt)
    state = hyperbolic_step(state, config, dt)
    return source_step(state, config, 0.5 * dt)


# --- 収束判定・衝撃波追跡・台帳 ---


def detect_convergence(history: Sequence[Tuple[float, float]],
                       guard: float = CONVERGENCE_GUARD) -> ConvergenceEvent:
    """
    軸上の速度の符号反転から収束時刻を求める

    |u| が guard を一度超えた後、u < 0 から u >= 0 への最初の変化を
    線形補間した時刻を t_c とします。

    引数:
        history: 時刻順の (t, u_axis) の列
        guard (float): 判定を有効にする速度のしきい値

    戻り値:
        ConvergenceEvent: 収束時刻
    """
    armed = False
    previous = None
    for t, u in history:
        if previous is not None and armed and previous[1] < 0.0 <= u:
            t0, u0 = previous
            return ConvergenceEvent(t0 + (t - t0) * (-u0) / (u - u0), True)
        if abs(u) > guard:
            armed = True
        previous = (t, u)
    return ConvergenceEvent(None, False)


def geometry_weighted_totals(cells: ConservedState, grid: RadialGrid, geometry: Geometry) -> np.ndarray:
    """幾何重み付きの総量 Σ U_i r_i^alpha Δr（中点則）"""
    weights = grid.centers ** Geometry(geometry).alpha * grid.dr
    return cells.as_array() @ weights


def conservation_ledger(initial: SimulationState, final: SimulationState,
                        grid: RadialGrid, geometry: Geometry) -> ConservationLedger:
    """
    保存量台帳を作る

    alpha > 0 では分割スキームがこの総和を厳密には保存しないため、
    誤差をそのまま報告します。初期値が 0 の成分（静止状態から始まる運動量など）は
    初期の総エネルギーで割った値を報告します。
    """
    start = geometry_weighted_totals(initial.cells, grid, geometry)
    end = geometry_weighted_totals(final.cells, grid, geometry)
    outflow = np.asarray(final.boundary_outflow, dtype=np.float64)
    scale = np.where(start != 0.0, np.maximum(np.abs(start), np.abs(end)), abs(start[2]))
    scale = np.maximum(scale, np.finfo(np.float64).tiny)
    return ConservationLedger(start, end, outflow, (end + outflow - start) / scale)


def make_snapshot(state: SimulationState, grid: RadialGrid, gas: GasModel) -> Snapshot:
    """現在の状態から Snapshot を作る"""
    prim = conserved_to_primitive(state.cells, gas)
    return Snapshot(
        time=float(state.time),
        r=grid.centers,
        rho=np.array(prim.rho, dtype=np.float64),
        u=np.array(prim.u, dtype=np.float64),
        p=np.array(prim.p, dtype=np.float64),
        temperature=np.asarray(temperature(prim, gas), dtype=np.float64),
        mach=np.asarray(mach_number(prim, gas), dtype=np.float64),
    )


def locate_shock(prim: PrimitiveState, grid: RadialGrid, gas: GasModel, time: float) -> Optional[ShockSample]:
    """
    内向きの衝撃波（外側ほど圧力が高い最も急な圧力上昇）の位置を求める

    半径は、前方圧力と衝撃波直後の圧力の中間値を横切る位置をセル間で線形補間します。

    引数:
        prim (PrimitiveState): 原始変数（配列）
        grid (RadialGrid): 格子
        gas (GasModel): 気体モデル
        time (float): 時刻

    戻り値:
        ShockSample: 衝撃波が見つからなければ None
    """
    p = np.asarray(prim.p, dtype=np.float64)
    jumps = np.diff(p)
    k = int(np.argmax(jumps))
    if jumps[k] <= SHOCK_DETECTION_THRESHOLD * p[k]:
        return None
    lo = max(k - 3, 0)
    hi = min(k + 5, p.size)
    ahead = float(p[lo])
    behind = float(np.max(p[k + 1:hi]))
    level = 0.5 * (ahead + behind)
    centers = grid.centers
    radius = float(grid.faces[k + 1])
    for i in range(lo, hi - 1):
        if p[i] < level <= p[i + 1]:
            radius = float(centers[i] + (level - p[i]) / (p[i + 1] - p[i]) * grid.dr)
            break
    g = gas.gamma
    mach = math.sqrt(1.0 + (g + 1.0) / (2.0 * g) * (behind / ahead - 1.0))
    return ShockSample(float(time), radius, ahead, behind, float(np.max(p)), mach)


def shock_at_radius(track: Sequence[ShockSample], radius: float) -> Optional[ShockSample]:
    """衝撃波面が初めて radius 以下に達したサンプル"""
    for sample in track:
        if sample.radius <= radius:
            return sample
    return None


def fit_focusing_exponent(track: Sequence[ShockSample],
                          window: Tuple[float, float] = (0.05, 0.3)) -> FocusingFit:
    """
    衝撃波の軌跡を R_s = A (t_f - t)^n でフィッティングする

    引数:
        track: 衝撃波サンプルの列
        window (tuple): 使用する半径の範囲 [下限, 上限]

    戻り値:
        FocusingFit: フィッティング結果

    例外:
        ValueError: 範囲内のサンプルが 5 個未満の場合
    """
    lo, hi = window
    selected = [s for s in track if lo <= s.radius <= hi]
    if len(selected) < 5:
        raise ValueError(f"半径 [{lo}, {hi}] のサンプルが不足しています: {len(selected)} 個")
    t = np.array([s.time for s in selected])
    radius = np.array([s.radius for s in selected])

    tail = min(5, t.size - 1)
    speed = abs((radius[-1] - radius[-1 - tail]) / (t[-1] - t[-1 - tail]))
    focus_guess = t[-1] + 0.8 * radius[-1] / max(speed, 1e-12)
    amplitude_guess = radius[-1] / (focus_guess - t[-1]) ** 0.8

    def model(tt, amplitude, focus_time, exponent):
        return amplitude * np.clip(focus_time - tt, 1e-12, None) ** exponent

    params, _ = curve_fit(
        model, t, radius,
        p0=(amplitude_guess, focus_guess, 0.8),
        bounds=([0.0, t[-1] + 1e-9, 0.1], [np.inf, t[-1] + 10.0, 3.0]),
    )
    amplitude, focus_time, exponent = (float(v) for v in params)
    logger.info(f"収束指数フィッティング: n={exponent:.4f}, t_f={focus_time:.5f}, サンプル {t.size} 個")
    return FocusingFit(exponent, focus_time, amplitude, int(t.size))


# --- 時間発展ループ ---


def run_simulation(config: SimulationConfig,
                   on_snapshot: Optional[Callable[[Snapshot], None]] = None,
                   progress_every: int = 200) -> SimulationResult:
    """
    t = 0 から t_end まで時間発展させる

    各ステップで compute_dt と split_step を呼び、記録時刻には dt を切り詰めて
    ちょうど到達します（時間方向の補間はしません）。

    引数:
        config (SimulationConfig): 設定
        on_snapshot (callable): スナップショット記録時に呼ばれる関数
        progress_every (int): 進捗を DEBUG 出力するステップ間隔

    戻り値:
        SimulationResult: スナップショット、収束時刻、保存量台帳など

    例外:
        NonPhysicalState: 時刻・ステップ・最後の状態を付与して送出
    """
    config.validate()
    grid = config.grid
    gas = config.gas
    logger.info(
        f"シミュレーション開始: 幾何={config.geometry.name.lower()}, セル数={grid.n_cells}, "
        f"Δr={grid.dr:.6g}, ν={config.cfl}, t_end={config.t_end}, "
        f"リミッタ={config.limiter.value}, 分割={config.splitting.value}"
    )

    initial = config.initial_condition.build(grid, gas)
    state = initial
    record_times = sorted(set(float(t) for t in config.recorded_times))
    stops = sorted(set(t for t in record_times if t > 0.0) | {float(config.t_end)})
    stops = [t for t in stops if t > 0.0]
    snapshots: List[Snapshot] = []
    tracking = config.geometry.alpha > 0
    track: List[ShockSample] = []

    times: List[float] = []
    axis_velocity: List[float] = []
    peak_pressure: List[float] = []

    def observe(current: SimulationState):
        nonlocal tracking
        prim = conserved_to_primitive(current.cells, gas)
        times.append(float(current.time))
        axis_velocity.append(float(np.asarray(prim.u)[0]))
        peak_pressure.append(float(np.max(prim.p)))
        if tracking:
            sample = locate_shock(prim, grid, gas, current.time)
            if sample is None or sample.radius < grid.r_min + 2.0 * grid.dr:
                tracking = False
            else:
                track.append(sample)

    def record(current: SimulationState):
        snapshot = make_snapshot(current, grid, gas)
        snapshots.append(snapshot)
        logger.info(f"スナップショットを記録: t={snapshot.time:.6g} (step {current.step_count})")
        if on_snapshot is not None:
            on_snapshot(snapshot)

    observe(state)
    if record_times and record_times[0] == 0.0:
        record(state)

    for stop in stops:
        while state.time < stop:
            dt_cfl = compute_dt(state, grid, gas, config.cfl)
            clipped = dt_cfl >= stop - state.time
            dt = stop - state.time if clipped else dt_cfl
            try:
                new_state = split_step(state, config, dt)
            except NonPhysicalState as exc:
                logger.error(f"非物理状態のため中断します: {exc} (t={state.time:.17g}, step={state.step_count + 1})")
                raise exc.with_context(state.time, state.step_count + 1, state)
            if clipped:
                new_state = replace(new_state, time=stop)
            state = new_state
            observe(state)
            if progress_every and state.step_count % progress_every == 0:
                logger.debug(f"step {state.step_count}: t={state.time:.6g}, dt={dt:.3e}")
        if stop in record_times:
            record(state)

    history = StepHistory(np.array(times), np.array(axis_velocity), np.array(peak_pressure))
    convergence = detect_convergence(history.axis_samples()) if config.geometry.alpha > 0 \
        else ConvergenceEvent(None, False)
    if convergence.detected:
        logger.info(f"収束時刻を検出しました: t_c={convergence.t_c:.6f}")
    elif config.geometry.alpha > 0:
        logger.warning("t_end までに収束時刻を検出できませんでした")

    ledger = conservation_ledger(initial, state, grid, config.geometry)
    logger.info(
        f"シミュレーション終了: {state.step_count} ステップ, 保存量の誤差 "
        f"質量={ledger.drift[0]:.3e}, 運動量={ledger.drift[1]:.3e}, エネルギー={ledger.drift[2]:.3e}"
    )
    return SimulationResult(snapshots, convergence, ledger, state, history, track)
