#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""
シナリオ・入出力モジュール

シナリオ設定（key = value 形式）の解析と書き出し、初期条件の構築、
スナップショット CSV の読み書き、コマンドラインのエントリポイントを提供します。

主な機能:
- 隔膜問題 (DiaphragmSpec): 静止した等温の二領域を r0 の隔膜で分ける
- 平面衝撃波管 (ShockTubeSpec): 厳密リーマン解との比較用
- 周期箱内を移流する滑らかなパルス (AdvectedPulseSpec)
- 既定シナリオ: ratio4 / ratio10 / ratio20 / ratio100 / ratio1000 / sod / strong_tube
- CSV 出力（各値は 64bit 浮動小数点の最短往復表現、LF 改行、UTF-8）
- summary.txt（収束時刻、保存量の誤差、ステップ数、実行時間）

終了コード:
    0: 正常終了
    1: 設定エラー（ConfigError、設定ファイルなし、書き込み失敗）
    2: 非物理状態による中断（crash.csv を書き出す）

使用方法:
    python run_shock.py --scenario ratio4
    python run_shock.py --config scenarios/ratio10.cfg --cells 800 --output-dir ./out
"""

import argparse
import difflib
import logging
import math
import os
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from errors import ConfigError, NonPhysicalState
from gasdynamics_core import (
    GasModel,
    Geometry,
    PrimitiveState,
    RadialGrid,
    primitive_to_conserved,
)
from reconstruction import LimiterKind
from riemann import sample_exact_solution
from runtime_settings import RuntimeSettings, load_runtime_settings, setup_logging
from solver import (
    Boundaries,
    BoundaryKind,
    SimulationConfig,
    SimulationResult,
    SimulationState,
    Snapshot,
    SplittingMode,
    make_snapshot,
    run_simulation,
)

logger = logging.getLogger("scenarios_io")

Destination = Union[str, os.PathLike, TextIO]

DEFAULT_T_END = 0.7
SNAPSHOT_INTERVAL = 0.1
CSV_HEADER = ",".join(Snapshot.COLUMNS)


# --- 初期条件 ---


@dataclass(frozen=True)
class DiaphragmSpec:
    """
    円筒（球・平面）隔膜問題

    内側 (ρ=1, u=0, P=1/γ)、外側 (ρ=N, u=0, P=N/γ) の静止した等温二領域。

    属性:
        ratio (float): 外側/内側の圧力比・密度比 N（> 1）
        r0 (float): 隔膜の半径
    """

    ratio: float
    r0: float = 1.0

    def __post_init__(self):
        if not self.ratio > 1.0:
            raise ConfigError(f"ratio は 1 より大きい必要があります: {self.ratio}")
        if not self.r0 > 0.0:
            raise ConfigError(f"r0 は正である必要があります: {self.r0}")

    def inner_state(self, gas: GasModel) -> PrimitiveState:
        return PrimitiveState(1.0, 0.0, 1.0 / gas.gamma)

    def outer_state(self, gas: GasModel) -> PrimitiveState:
        return PrimitiveState(float(self.ratio), 0.0, self.ratio / gas.gamma)

    def build(self, grid: RadialGrid, gas: GasModel) -> SimulationState:
        return build_initial_condition(self, grid, gas)


@dataclass(frozen=True)
class ShockTubeSpec:
    """
    平面衝撃波管（x0 の不連続で左右の一様状態を分ける）

    属性:
        left (PrimitiveState): 左状態
        right (PrimitiveState): 右状態
        x0 (float): 初期不連続の位置
    """

    left: PrimitiveState
    right: PrimitiveState
    x0: float = 0.5

    def inner_state(self, gas: GasModel) -> PrimitiveState:
        return self.left

    def outer_state(self, gas: GasModel) -> PrimitiveState:
        return self.right

    def build(self, grid: RadialGrid, gas: GasModel) -> SimulationState:
        if not grid.r_min < self.x0 < grid.r_max:
            raise ConfigError(f"x0={self.x0} が計算領域 ({grid.r_min}, {grid.r_max}) の外にあります")
        self.left.check()
        self.right.check()
        return _two_state(grid.centers < self.x0, self.left, self.right, gas)

    def exact(self, x: np.ndarray, time: float, gas: GasModel) -> PrimitiveState:
        """時刻 time の厳密解"""
        return sample_exact_solution(self.left, self.right, gas, x, time, self.x0)


@dataclass(frozen=True)
class AdvectedPulseSpec:
    """
    一様流で移流するガウス型の密度パルス（圧力・速度は一定）

    ρ(x) = base + amplitude·exp(-((x - center)/width)²)

    属性:
        amplitude (float): パルスの振幅
        width (float): パルス幅
        center (float): 初期中心位置
        velocity (float): 流速
        pressure (float): 圧力
        base (float): 背景密度
    """

    amplitude: float = 0.5
    width: float = 0.2
    center: float = 0.5
    velocity: float = 1.0
    pressure: float = 1.0
    base: float = 1.0

    def inner_state(self, gas: GasModel) -> PrimitiveState:
        return PrimitiveState(self.base, self.velocity, self.pressure)

    def outer_state(self, gas: GasModel) -> PrimitiveState:
        return PrimitiveState(self.base, self.velocity, self.pressure)

    def density(self, x: np.ndarray, time: float, r_min: float, r_max: float) -> np.ndarray:
        """周期領域 [r_min, r_max) 上の厳密な密度"""
        length = r_max - r_min
        shifted = np.mod(np.asarray(x) - self.velocity * time - r_min, length) + r_min
        offset = shifted - self.center
        offset = offset - length * np.round(offset / length)
        return self.base + self.amplitude * np.exp(-(offset / self.width) ** 2)

    def build(self, grid: RadialGrid, gas: GasModel) -> SimulationState:
        rho = self.density(grid.centers, 0.0, grid.r_min, grid.r_max)
        ones = np.ones(grid.n_cells)
        prim = PrimitiveState(rho, self.velocity * ones, self.pressure * ones)
        return SimulationState(0.0, primitive_to_conserved(prim, gas))


def _two_state(inside: np.ndarray, first: PrimitiveState, second: PrimitiveState,
               gas: GasModel) -> SimulationState:
    prim = PrimitiveState(np.where(inside, first.rho, second.rho).astype(np.float64),
                          np.where(inside, first.u, second.u).astype(np.float64),
                          np.where(inside, first.p, second.p).astype(np.float64))
    return SimulationState(0.0, primitive_to_conserved(prim, gas))


def build_initial_condition(spec: DiaphragmSpec, grid: RadialGrid, gas: GasModel) -> SimulationState:
    """
    隔膜問題の初期状態を構築する

    セル中心 r_i < r0 のセルに内側状態、それ以外に外側状態を与えます。

    引数:
        spec (DiaphragmSpec): 隔膜問題
        grid (RadialGrid): 格子
        gas (GasModel): 気体モデル

    戻り値:
        SimulationState: 時刻 0 の状態

    例外:
        ConfigError: r0 が (r_min, r_max) の外にある場合
    """
    if not grid.r_min < spec.r0 < grid.r_max:
        raise ConfigError(f"r0={spec.r0} が計算領域 ({grid.r_min}, {grid.r_max}) の外にあります")
    return _two_state(grid.centers < spec.r0, spec.inner_state(gas), spec.outer_state(gas), gas)


# --- 既定シナリオ ---


def default_snapshot_times(t_end: float, interval: float = SNAPSHOT_INTERVAL) -> Tuple[float, ...]:
    """interval ごとの記録時刻（t_end まで）"""
    count = int(math.floor(t_end / interval + 1e-9))
    return tuple(round(k * interval, 12) for k in range(1, count + 1))


def diaphragm_config(ratio: float, geometry: Geometry = Geometry.CYLINDRICAL, n_cells: int = 400,
                     t_end: float = DEFAULT_T_END,
                     snapshot_times: Optional[Sequence[float]] = None) -> SimulationConfig:
    """隔膜問題の設定（r0 = 1, r_max = 2, ν = 0.5, superbee, strang）"""
    times = default_snapshot_times(t_end) if snapshot_times is None else tuple(snapshot_times)
    return SimulationConfig(
        geometry=geometry,
        gas=GasModel(1.4),
        r_max=2.0,
        n_cells=n_cells,
        cfl=0.5,
        t_end=t_end,
        limiter=LimiterKind.SUPERBEE,
        splitting=SplittingMode.STRANG,
        snapshot_times=times,
        initial_condition=DiaphragmSpec(ratio=ratio, r0=1.0),
    )


def shock_tube_config(left: PrimitiveState, right: PrimitiveState, t_end: float,
                      n_cells: int = 400) -> SimulationConfig:
    """[0, 1] 上の平面衝撃波管（両端透過境界）"""
    return SimulationConfig(
        geometry=Geometry.PLANAR,
        gas=GasModel(1.4),
        r_max=1.0,
        n_cells=n_cells,
        cfl=0.5,
        t_end=t_end,
        limiter=LimiterKind.SUPERBEE,
        splitting=SplittingMode.STRANG,
        snapshot_times=(t_end,),
        initial_condition=ShockTubeSpec(left, right, 0.5),
        boundaries=Boundaries(BoundaryKind.TRANSMISSIVE, BoundaryKind.TRANSMISSIVE),
    )


def advected_pulse_config(n_cells: int, t_end: float = 1.0, cfl: float = 0.5,
                          limiter: LimiterKind = LimiterKind.SUPERBEE) -> SimulationConfig:
    """周期箱 [0, 1] 上を u = 1 で移流するパルス"""
    return SimulationConfig(
        geometry=Geometry.PLANAR,
        gas=GasModel(1.4),
        r_max=1.0,
        n_cells=n_cells,
        cfl=cfl,
        t_end=t_end,
        limiter=limiter,
        splitting=SplittingMode.STRANG,
        snapshot_times=(t_end,),
        initial_condition=AdvectedPulseSpec(),
        boundaries=Boundaries(BoundaryKind.PERIODIC, BoundaryKind.PERIODIC),
    )


SCENARIOS: Dict[str, Callable[[], SimulationConfig]] = {
    "ratio4": lambda: diaphragm_config(4.0, snapshot_times=default_snapshot_times(0.6)),
    "ratio10": lambda: diaphragm_config(10.0, snapshot_times=default_snapshot_times(0.6)),
    "ratio20": lambda: diaphragm_config(20.0, snapshot_times=default_snapshot_times(0.6)),
    "ratio100": lambda: diaphragm_config(100.0, t_end=0.5, snapshot_times=default_snapshot_times(0.5)),
    "ratio1000": lambda: diaphragm_config(1000.0, t_end=0.4, snapshot_times=default_snapshot_times(0.4)),
    "sod": lambda: shock_tube_config(PrimitiveState(1.0, 0.0, 1.0), PrimitiveState(0.125, 0.0, 0.1), 0.2),
    "strong_tube": lambda: shock_tube_config(PrimitiveState(1.0, 0.0, 1000.0),
                                             PrimitiveState(1.0, 0.0, 0.01), 0.012),
}


def scenario_config(name: str) -> SimulationConfig:
    """
    既定シナリオの設定を返す

    例外:
        ConfigError: 未知のシナリオ名の場合（候補を提示）
    """
    factory = SCENARIOS.get(name)
    if factory is None:
        raise ConfigError(f"未知のシナリオ: {name}{_suggest(name, SCENARIOS)}")
    return factory()


# --- 設定ファイル ---

CONFIG_KEYS = (
    "geometry", "ratio", "r0", "r_max", "cells", "cfl", "t_end", "limiter",
    "splitting", "snapshots", "output_dir", "gamma", "source_subcycling",
)


def _suggest(word: str, candidates) -> str:
    matches = difflib.get_close_matches(word, list(candidates), n=1)
    return f"（もしかして: {matches[0]}）" if matches else ""


def _float(value: str, key: str, line: int) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key} は数値である必要があります: '{value}'", line)


def _bool(value: str, key: str, line: int) -> bool:
    text = value.strip().lower()
    if text in ("true", "yes", "on", "1"):
        return True
    if text in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{key} は true / false で指定してください: '{value}'", line)


def parse_config(text: str) -> SimulationConfig:
    """
    key = value 形式のシナリオ設定を解析する

    '#' 以降はコメントです。ratio 以外のキーは省略時にデフォルト値
    (geometry=cylindrical, r0=1.0, r_max=2.0, cells=400, cfl=0.5,
    t_end=0.7, limiter=superbee, splitting=strang, snapshots=0.1 刻み, gamma=1.4)
    を使います。

    引数:
        text (str): 設定ファイルの内容

    戻り値:
        SimulationConfig: 検証済みの設定

    例外:
        ConfigError: 未知のキー・重複・値の誤り（行番号付き）
    """
    entries: Dict[str, Tuple[str, int]] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"key = value 形式ではありません: '{raw.strip()}'", number)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"未知のキー '{key}'{_suggest(key, CONFIG_KEYS)}", number)
        if key in entries:
            raise ConfigError(f"キー '{key}' が重複しています（{entries[key][1]}行目）", number)
        entries[key] = (value, number)

    def line_of(key: str) -> Optional[int]:
        return entries[key][1] if key in entries else None

    def number(key: str, default: float) -> float:
        if key not in entries:
            return default
        value, line = entries[key]
        return _float(value, key, line)

    if "ratio" not in entries:
        raise ConfigError("ratio は必須です")

    geometry = Geometry.CYLINDRICAL
    if "geometry" in entries:
        value, line = entries["geometry"]
        names = [g.name.lower() for g in Geometry]
        if value.strip().lower() not in names:
            raise ConfigError(f"未知の幾何形状 '{value}'{_suggest(value.strip().lower(), names)}", line)
        geometry = Geometry.from_name(value)

    limiter = LimiterKind.SUPERBEE
    if "limiter" in entries:
        value, line = entries["limiter"]
        limiter = _enum_value(LimiterKind, value, line)

    splitting = SplittingMode.STRANG
    if "splitting" in entries:
        value, line = entries["splitting"]
        splitting = _enum_value(SplittingMode, value, line)

    ratio = number("ratio", 0.0)
    if not ratio > 1.0:
        raise ConfigError(f"ratio は 1 より大きい必要があります: {ratio}", line_of("ratio"))
    r0 = number("r0", 1.0)
    r_max = number("r_max", 2.0)
    if not 0.0 < r0 < r_max:
        raise ConfigError(f"r0 は (0, r_max={r_max}) の範囲にある必要があります: {r0}",
                          line_of("r0") or line_of("r_max"))

    cells = 400
    if "cells" in entries:
        value, line = entries["cells"]
        try:
            cells = int(value)
        except ValueError:
            raise ConfigError(f"cells は整数である必要があります: '{value}'", line)
        if cells < 4:
            raise ConfigError(f"cells は 4 以上である必要があります: {cells}", line)

    cfl = number("cfl", 0.5)
    if not 0.0 < cfl <= 1.0:
        raise ConfigError(f"cfl は 0 < cfl <= 1 である必要があります: {cfl}", line_of("cfl"))
    t_end = number("t_end", DEFAULT_T_END)
    if not t_end > 0.0:
        raise ConfigError(f"t_end は正である必要があります: {t_end}", line_of("t_end"))
    gamma = number("gamma", 1.4)
    if not gamma > 1.0:
        raise ConfigError(f"gamma は 1 より大きい必要があります: {gamma}", line_of("gamma"))

    snapshots = default_snapshot_times(t_end)
    if "snapshots" in entries:
        value, line = entries["snapshots"]
        parts = [part.strip() for part in value.split(",") if part.strip()]
        snapshots = tuple(_float(part, "snapshots", line) for part in parts)
        if list(snapshots) != sorted(snapshots) or any(t < 0.0 or t > t_end for t in snapshots):
            raise ConfigError(f"snapshots は [0, t_end={t_end}] の範囲の昇順で指定してください", line)

    subcycling = False
    if "source_subcycling" in entries:
        value, line = entries["source_subcycling"]
        subcycling = _bool(value, "source_subcycling", line)

    output_dir = entries["output_dir"][0] if "output_dir" in entries else None

    config = SimulationConfig(
        geometry=geometry,
        gas=GasModel(gamma),
        r_max=r_max,
        n_cells=cells,
        cfl=cfl,
        t_end=t_end,
        limiter=limiter,
        splitting=splitting,
        snapshot_times=snapshots,
        initial_condition=DiaphragmSpec(ratio=ratio, r0=r0),
        source_subcycling=subcycling,
        output_dir=output_dir or None,
    )
    return config.validate()


def _enum_value(kind, value: str, line: int):
    names = [member.value for member in kind]
    text = value.strip().lower()
    if text not in names:
        raise ConfigError(f"未知の値 '{value}'{_suggest(text, names)}。選択肢: {', '.join(names)}", line)
    return kind(text)


def serialize_config(config: SimulationConfig) -> str:
    """
    設定を key = value 形式に書き出す（parse_config で同じ設定に戻る）

    例外:
        ConfigError: 隔膜問題以外の設定（設定ファイルで表現できない）
    """
    spec = config.initial_condition
    if not isinstance(spec, DiaphragmSpec) or config.boundaries is not None or config.r_min != 0.0:
        raise ConfigError("設定ファイルに書き出せるのは隔膜問題の設定のみです")
    lines = [
        f"geometry = {config.geometry.name.lower()}",
        f"ratio = {float(spec.ratio)!r}",
        f"r0 = {float(spec.r0)!r}",
        f"r_max = {float(config.r_max)!r}",
        f"cells = {int(config.n_cells)}",
        f"cfl = {float(config.cfl)!r}",
        f"t_end = {float(config.t_end)!r}",
        f"limiter = {config.limiter.value}",
        f"splitting = {config.splitting.value}",
        "snapshots = " + ", ".join(repr(float(t)) for t in config.snapshot_times),
        f"gamma = {float(config.gas.gamma)!r}",
        f"source_subcycling = {'true' if config.source_subcycling else 'false'}",
    ]
    if config.output_dir:
        lines.append(f"output_dir = {config.output_dir}")
    return "\n".join(lines) + "\n"


def load_config_file(path: Union[str, os.PathLike]) -> SimulationConfig:
    """
    設定ファイルを読み込んで解析する

    例外:
        ConfigError: ファイルが存在しない・読めない、または内容が不正な場合
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"設定ファイル {path} を読み込めません: {e.strerror or str(e)}")
    try:
        return parse_config(text)
    except ConfigError as exc:
        where = f"{path}:{exc.line}" if exc.line is not None else str(path)
        raise ConfigError(f"{where}: {exc.reason}", exc.line)


# --- CSV / summary ---


def snapshot_filename(time_value: float, prefix: str = "snapshot") -> str:
    return f"{prefix}_t{time_value:.4f}.csv"


def _write_rows(snapshot: Snapshot, f: TextIO) -> None:
    f.write(f"# t={snapshot.time:.17g}\n")
    f.write(CSV_HEADER + "\n")
    for row in snapshot.rows():
        f.write(",".join(repr(float(v)) for v in row) + "\n")


def write_snapshot_csv(snapshot: Snapshot, destination: Destination) -> None:
    """
    スナップショットを CSV に書き出す

    1 行目はコメント `# t=<17 桁>`、2 行目はヘッダ `r,rho,u,p,T,mach`、以降は
    r の昇順に 1 セル 1 行。各値は float の最短往復表現 (repr) です。

    引数:
        snapshot (Snapshot): スナップショット
        destination: ファイルパスまたはテキストストリーム

    例外:
        OSError: 書き込みに失敗した場合
    """
    if hasattr(destination, "write"):
        _write_rows(snapshot, destination)
        return
    with open(destination, "w", encoding="utf-8", newline="\n") as f:
        _write_rows(snapshot, f)
    logger.debug(f"CSV を書き出しました: {destination}")


def read_snapshot_csv(path: Union[str, os.PathLike]) -> Snapshot:
    """
    write_snapshot_csv の出力を読み戻す

    戻り値:
        Snapshot: 読み込んだスナップショット
    """
    with open(path, "r", encoding="utf-8") as f:
        first = f.readline().strip()
    if not first.startswith("# t="):
        raise ValueError(f"スナップショット CSV ではありません: {path}")
    data = np.loadtxt(path, delimiter=",", skiprows=2, ndmin=2, dtype=np.float64)
    return Snapshot(float(first[4:]), data[:, 0], data[:, 1], data[:, 2], data[:, 3], data[:, 4], data[:, 5])


def exact_snapshot(spec: ShockTubeSpec, grid: RadialGrid, gas: GasModel, time_value: float) -> Snapshot:
    """衝撃波管の厳密解をセル中心で評価したスナップショット"""
    prim = spec.exact(grid.centers, time_value, gas)
    c = np.sqrt(gas.gamma * prim.p / prim.rho)
    return Snapshot(float(time_value), grid.centers, prim.rho, prim.u, prim.p,
                    gas.gamma * prim.p / prim.rho, np.abs(prim.u) / c)


def summary_lines(result: SimulationResult, wall_seconds: float) -> List[str]:
    convergence = result.convergence
    drift = result.ledger.as_dict()
    return [
        f"t_c = {float(convergence.t_c)!r}" if convergence.detected else "t_c = none",
        f"detected = {'true' if convergence.detected else 'false'}",
        f"steps = {result.final_state.step_count}",
        f"mass_drift = {drift['mass_drift']!r}",
        f"momentum_drift = {drift['momentum_drift']!r}",
        f"energy_drift = {drift['energy_drift']!r}",
        f"wall_seconds = {wall_seconds:.3f}",
    ]


def write_summary(result: SimulationResult, destination: Union[str, os.PathLike], wall_seconds: float) -> None:
    """summary.txt を key = value 形式で書き出す（wall_seconds のみ非決定的）"""
    with open(destination, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(summary_lines(result, wall_seconds)) + "\n")


# --- CLI ---


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="対称座標系の一次元オイラー方程式ソルバー（収束衝撃波）")
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--scenario", help=f"既定シナリオ ({' / '.join(SCENARIOS)})")
    source.add_argument("--config", help="key = value 形式のシナリオ設定ファイル")
    parser.add_argument("--output-dir", help="出力ディレクトリ（デフォルト: config.yml の output.directory）")
    parser.add_argument("--cells", type=int, help="セル数")
    parser.add_argument("--ratio", type=float, help="初期の圧力比・密度比")
    parser.add_argument("--cfl", type=float, help="クーラン数")
    parser.add_argument("--t-end", type=float, help="終了時刻")
    parser.add_argument("--limiter", choices=[k.value for k in LimiterKind], help="リミッタ")
    parser.add_argument("--splitting", choices=[m.value for m in SplittingMode], help="演算子分割")
    parser.add_argument("--log-level", help="ログレベル (DEBUG / INFO / WARNING / ERROR)")
    parser.add_argument("--settings", help="実行時設定ファイル（デフォルト: config.yml）")
    return parser


def apply_overrides(config: SimulationConfig, args: argparse.Namespace) -> SimulationConfig:
    """
    コマンドライン引数を設定に上書きする（フラグが設定ファイルより優先）

    例外:
        ConfigError: 上書き後の設定が不正な場合
    """
    changes = {}
    if args.cells is not None:
        changes["n_cells"] = args.cells
    if args.cfl is not None:
        changes["cfl"] = args.cfl
    if args.limiter is not None:
        changes["limiter"] = LimiterKind(args.limiter)
    if args.splitting is not None:
        changes["splitting"] = SplittingMode(args.splitting)
    if args.ratio is not None:
        spec = config.initial_condition
        if not isinstance(spec, DiaphragmSpec):
            raise ConfigError("--ratio は隔膜問題のシナリオでのみ指定できます")
        changes["initial_condition"] = replace(spec, ratio=args.ratio)
    if args.t_end is not None:
        if not args.t_end > 0.0:
            raise ConfigError(f"--t-end は正である必要があります: {args.t_end}")
        kept = tuple(t for t in config.snapshot_times if t <= args.t_end)
        if len(kept) < len(config.snapshot_times):
            logger.warning(f"t_end={args.t_end} より後の記録時刻を除外しました")
        changes["t_end"] = args.t_end
        changes["snapshot_times"] = kept
    if args.cells is not None and args.cells < 4:
        raise ConfigError(f"--cells は 4 以上である必要があります: {args.cells}")
    return replace(config, **changes).validate() if changes else config.validate()


def cli_main(argv: Optional[Sequence[str]] = None, settings: Optional[RuntimeSettings] = None) -> int:
    """
    コマンドラインのエントリポイント

    シナリオを実行し、スナップショットごとの CSV と summary.txt を書き出します。
    衝撃波管シナリオでは厳密解 exact_t*.csv も書き出します。

    引数:
        argv: コマンドライン引数（None なら sys.argv）
        settings (RuntimeSettings): 実行時設定（None なら config.yml から読み込む）

    戻り値:
        int: 終了コード（0 正常、1 設定エラー、2 非物理状態）
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1

    if settings is None:
        settings = load_runtime_settings(args.settings)
    setup_logging(settings, args.log_level)

    try:
        config = scenario_config(args.scenario) if args.scenario else load_config_file(args.config)
        config = apply_overrides(config, args)
    except ConfigError as exc:
        logger.error(f"設定エラー: {exc}")
        return 1

    output_dir = Path(args.output_dir or config.output_dir or settings.output_directory)
    try:
        output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        logger.error(f"出力ディレクトリ {output_dir} を作成できません: {str(e)}")
        return 1

    grid = config.grid
    spec = config.initial_condition
    logger.info(f"シナリオ {args.scenario or args.config} を実行します（出力先: {output_dir}）")

    def on_snapshot(snapshot: Snapshot):
        write_snapshot_csv(snapshot, output_dir / snapshot_filename(snapshot.time))
        if isinstance(spec, ShockTubeSpec):
            exact = exact_snapshot(spec, grid, config.gas, snapshot.time)
            write_snapshot_csv(exact, output_dir / snapshot_filename(snapshot.time, "exact"))

    start = time.perf_counter()
    try:
        result = run_simulation(config, on_snapshot=on_snapshot, progress_every=settings.progress_every)
    except NonPhysicalState as exc:
        logger.error(f"非物理状態のため中断しました: {exc}")
        if exc.last_state is not None:
            crash = output_dir / "crash.csv"
            try:
                write_snapshot_csv(make_snapshot(exc.last_state, grid, config.gas), crash)
                logger.error(f"最後に受理された状態を {crash} に書き出しました")
            except (OSError, NonPhysicalState) as e:
                logger.error(f"crash.csv を書き出せませんでした: {str(e)}")
        return 2
    except ConfigError as exc:
        logger.error(f"設定エラー: {exc}")
        return 1
    except OSError as e:
        logger.error(f"出力の書き込みに失敗しました: {str(e)}")
        return 1
    wall_seconds = time.perf_counter() - start

    try:
        write_summary(result, output_dir / "summary.txt", wall_seconds)
    except OSError as e:
        logger.error(f"summary.txt の書き込みに失敗しました: {str(e)}")
        return 1
    logger.info(f"完了しました（{result.final_state.step_count} ステップ, {wall_seconds:.2f} 秒）")
    return 0
