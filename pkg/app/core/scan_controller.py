"""
Scan Controller - パラメータスキャンの統合モジュール
CLI から独立したスキャン制御ロジック（設定の検証・並列評価・CSV 出力）
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import pandas as pd
import yaml

from .bloch import decompose_bipartite
from .criteria import observation1_check, observation2_check, sarbicki_check
from .errors import ConfigError
from .observables import resolve_trace
from .settings import SettingsManager, get_settings
from .states import BipartiteState, horodecki, random_chessboard, random_hs, upb_tiles, werner

logger = logging.getLogger(__name__)

EXPERIMENTS = ("horodecki", "upb", "chessboard", "random", "werner")
TraceValue = Union[float, str]


def parse_grid(spec: Any) -> Tuple[float, float, int]:
    """
    グリッド指定 "a:b:n" または [a, b, n] を (a, b, n) に

    Raises:
        ConfigError: 書式不正または n < 1
    """
    try:
        if isinstance(spec, str):
            a, b, n = spec.split(":")
        else:
            a, b, n = spec
        a, b, n = float(a), float(b), int(n)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"grid must be 'a:b:n' or [a, b, n], got {spec!r}") from e
    if n < 1:
        raise ConfigError(f"grid needs at least one point, got n={n}")
    return a, b, n


def grid_values(spec: Tuple[float, float, int]) -> np.ndarray:
    a, b, n = spec
    return np.linspace(a, b, n) if n > 1 else np.array([a])


@dataclass
class ScanConfig:
    """スキャン設定"""
    experiment: str
    seed: int = 2024
    samples: int = 2000
    dims: List[int] = field(default_factory=list)
    grids: Dict[str, Tuple[float, float, int]] = field(default_factory=dict)
    t_values: List[TraceValue] = field(default_factory=list)
    h_values: List[float] = field(default_factory=list)
    out: Optional[str] = None

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r} (known: {', '.join(EXPERIMENTS)})")
        if int(self.samples) < 1:
            raise ConfigError(f"samples must be >= 1, got {self.samples}")
        self.samples = int(self.samples)
        self.seed = int(self.seed)
        self.grids = {k: parse_grid(v) for k, v in self.grids.items()}
        self.dims = [int(d) for d in self.dims]
        if any(d < 2 for d in self.dims):
            raise ConfigError(f"dimensions must be >= 2, got {self.dims}")
        self.t_values = [_trace_value(t) for t in self.t_values]
        self.h_values = [float(h) for h in self.h_values]
        for name in _REQUIRED[self.experiment]:
            if not getattr(self, name):
                raise ConfigError(f"{self.experiment} scan needs a nonempty {name}")
        for name in _REQUIRED_GRIDS[self.experiment]:
            if name not in self.grids:
                raise ConfigError(f"{self.experiment} scan needs a grid for {name!r}")

    @classmethod
    def from_mapping(cls, experiment: str, mapping: Dict[str, Any]) -> "ScanConfig":
        """設定ファイル/既定値の辞書から構築（未知のキーは無視）"""
        return cls(
            experiment=experiment,
            seed=mapping.get("seed", 2024),
            samples=mapping.get("samples", 2000),
            dims=list(mapping.get("dims", [])),
            grids=dict(mapping.get("grid", {})),
            t_values=list(mapping.get("t", [])),
            h_values=list(mapping.get("h", [])),
            out=mapping.get("out"),
        )

    def metadata(self) -> Dict[str, Any]:
        meta: Dict[str, Any] = {"experiment": self.experiment, "seed": self.seed}
        if self.experiment in ("chessboard", "random"):
            meta["samples"] = self.samples
        if self.dims:
            meta["dims"] = ",".join(str(d) for d in self.dims)
        for name, (a, b, n) in self.grids.items():
            meta[f"grid.{name}"] = f"{a:g}:{b:g}:{n}"
        if self.t_values:
            meta["t"] = ",".join(str(t) for t in self.t_values)
        if self.h_values:
            meta["h"] = ",".join(f"{h:g}" for h in self.h_values)
        return meta


_REQUIRED: Dict[str, Tuple[str, ...]] = {
    "horodecki": ("t_values",),
    "upb": ("t_values",),
    "chessboard": ("t_values",),
    "random": ("dims", "t_values", "h_values"),
    "werner": ("dims",),
}
_REQUIRED_GRIDS: Dict[str, Tuple[str, ...]] = {
    "horodecki": ("s", "p"),
    "upb": ("p",),
    "chessboard": (),
    "random": (),
    "werner": ("phi",),
}


def _trace_value(t: Any) -> TraceValue:
    if isinstance(t, str):
        key = t.strip().lower()
        if key in ("ccnr", "esic"):
            return key
        try:
            return float(key)
        except ValueError as e:
            raise ConfigError(f"t must be a number, 'ccnr' or 'esic', got {t!r}") from e
    return float(t)


def load_scan_config(path: Union[str, Path]) -> Dict[str, Any]:
    """
    スキャン設定ファイル（JSON / YAML）を読み込む

    Raises:
        ConfigError: 読めない・辞書でない
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(f)
            else:
                data = json.load(f)
    except (OSError, json.JSONDecodeError, yaml.YAMLError) as e:
        logger.error(f"Error loading scan config {path}: {e}")
        raise ConfigError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: scan config must be a mapping")
    return data


def resolve_scan_config(
    experiment: str,
    overrides: Optional[Dict[str, Any]] = None,
    settings: Optional[SettingsManager] = None,
) -> ScanConfig:
    """既定値 < 設定ファイル < CLI フラグ の順に上書きして ScanConfig を作る"""
    settings = settings or get_settings()
    merged = settings.scan_defaults(experiment)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "grid" and isinstance(value, dict):
            merged["grid"] = {**merged.get("grid", {}), **value}
        else:
            merged[key] = value
    return ScanConfig.from_mapping(experiment, merged)


# ---------------------------------------------------------------------------
# 評価ヘルパー
# ---------------------------------------------------------------------------

def _ordered_map(fn: Callable, items: Sequence, threads: int) -> List:
    """並列評価しても結果はグリッド順"""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _t_label(t: TraceValue) -> str:
    return t if isinstance(t, str) else f"{t:g}"


def _obs1_rows(state: BipartiteState, t_values: Iterable[TraceValue]) -> List[Dict[str, Any]]:
    chi = decompose_bipartite(state).chi
    rows = []
    for t in t_values:
        report = observation1_check(state, t, t, chi=chi)
        rows.append({
            "t_label": _t_label(t),
            "t": report.params["tA"],
            "statistic": report.statistic,
            "bound": report.bound,
            "margin": report.margin,
            "detected": report.entangled,
        })
    return rows


def _warn_ppt_beating(df: pd.DataFrame, family: str) -> None:
    hits = df[df["detected"]].groupby("t_label", sort=False).size()
    for label, count in hits.items():
        logger.warning(f"{family}: {count} PPT-beating detections at t={label}")


# ---------------------------------------------------------------------------
# スキャン本体
# ---------------------------------------------------------------------------

def scan_horodecki(config: ScanConfig, threads: int = 1) -> pd.DataFrame:
    """Horodecki 3×3 + 白色ノイズの (s, p) グリッドを各 t で評価"""
    cells = [(s, p) for s in grid_values(config.grids["s"]) for p in grid_values(config.grids["p"])]

    def run(cell):
        s, p = cell
        return [{"s": s, "p": p, **row} for row in _obs1_rows(horodecki(s, p), config.t_values)]

    rows = [row for chunk in _ordered_map(run, cells, threads) for row in chunk]
    df = pd.DataFrame(rows, columns=["s", "p", "t_label", "t", "statistic", "bound", "margin", "detected"])
    _warn_ppt_beating(df, "horodecki")
    return df


def scan_upb(config: ScanConfig, threads: int = 1) -> pd.DataFrame:
    """UPB + 白色ノイズを p グリッド上で評価"""
    ps = list(grid_values(config.grids["p"]))

    def run(p):
        return [{"p": p, **row} for row in _obs1_rows(upb_tiles(p), config.t_values)]

    rows = [row for chunk in _ordered_map(run, ps, threads) for row in chunk]
    df = pd.DataFrame(rows, columns=["p", "t_label", "t", "statistic", "bound", "margin", "detected"])
    _warn_ppt_beating(df, "upb")
    return df


def scan_chessboard(config: ScanConfig, threads: int = 1) -> pd.DataFrame:
    """ランダムなチェス盤状態の検出率（t ごと）"""

    def run(index):
        return [row["detected"] for row in _obs1_rows(random_chessboard(config.seed, index), config.t_values)]

    flags = np.array(_ordered_map(run, list(range(config.samples)), threads), dtype=bool)
    rows = []
    for j, t in enumerate(config.t_values):
        detected = int(flags[:, j].sum())
        rows.append({
            "t_label": _t_label(t),
            "t": resolve_trace(3, t),
            "N": config.samples,
            "detected": detected,
            "fraction": detected / config.samples,
        })
    df = pd.DataFrame(rows, columns=["t_label", "t", "N", "detected", "fraction"])
    for label, count in zip(df["t_label"], df["detected"]):
        if count:
            logger.warning(f"chessboard: {count} PPT-beating detections at t={label}")
    return df


def scan_random(config: ScanConfig, threads: int = 1) -> pd.DataFrame:
    """Hilbert–Schmidt ランダム状態で obs1(t) と sarbicki(h) の検出率を比べる"""
    rows = []
    for d in config.dims:

        def run(index, d=d):
            state = random_hs(d, d, config.seed, index)
            chi = decompose_bipartite(state).chi
            flags = [observation1_check(state, t, t, chi=chi).entangled for t in config.t_values]
            flags += [sarbicki_check(state, h, h, chi=chi).entangled for h in config.h_values]
            return flags

        flags = np.array(_ordered_map(run, list(range(config.samples)), threads), dtype=bool)
        labels = [("obs1", _t_label(t)) for t in config.t_values] + [("sarbicki", f"{h:g}") for h in config.h_values]
        for j, (criterion, value) in enumerate(labels):
            detected = int(flags[:, j].sum())
            rows.append({
                "dim": d,
                "N": config.samples,
                "criterion": criterion,
                "t_or_h": value,
                "detected": detected,
                "fraction": detected / config.samples,
            })
        logger.info(f"random scan: d={d} done ({config.samples} samples)")
    return pd.DataFrame(rows, columns=["dim", "N", "criterion", "t_or_h", "detected", "fraction"])


def scan_werner(config: ScanConfig, threads: int = 1) -> pd.DataFrame:
    """Werner 状態の φ グリッドで sarbicki(h) / obs1(t) / obs2(t) を評価"""
    cells = [(d, phi) for d in config.dims for phi in grid_values(config.grids["phi"])]
    t_values = config.t_values or [1.0]
    h_values = config.h_values or [0.0]

    def run(cell):
        d, phi = cell
        state = werner(d, float(np.clip(phi, -1.0, 1.0)))
        chi = decompose_bipartite(state).chi
        reports = [("sarbicki", f"{h:g}", sarbicki_check(state, h, h, chi=chi)) for h in h_values]
        reports += [("obs1", _t_label(t), observation1_check(state, t, t, chi=chi)) for t in t_values]
        reports += [("obs2", _t_label(t), observation2_check(state, t, chi=chi)) for t in t_values]
        return [
            {
                "d": d,
                "phi": phi,
                "criterion": name,
                "param": value,
                "statistic": r.statistic,
                "bound": r.bound,
                "margin": r.margin,
                "detected": r.entangled,
            }
            for name, value, r in reports
        ]

    rows = [row for chunk in _ordered_map(run, cells, threads) for row in chunk]
    return pd.DataFrame(rows, columns=["d", "phi", "criterion", "param", "statistic", "bound", "margin", "detected"])


SCANS: Dict[str, Callable[[ScanConfig, int], pd.DataFrame]] = {
    "horodecki": scan_horodecki,
    "upb": scan_upb,
    "chessboard": scan_chessboard,
    "random": scan_random,
    "werner": scan_werner,
}


# ---------------------------------------------------------------------------
# 集計
# ---------------------------------------------------------------------------

def detected_counts(df: pd.DataFrame) -> pd.Series:
    """Horodecki / UPB: t ごとの検出セル数（設定順）"""
    return df.groupby("t_label", sort=False)["detected"].sum().astype(int)


def upb_thresholds(df: pd.DataFrame) -> pd.Series:
    """t ごとの検出最小 p（検出なしは NaN）"""
    out = {}
    for label, group in df.groupby("t_label", sort=False):
        hit = group.loc[group["detected"], "p"]
        out[label] = float(hit.min()) if len(hit) else math.nan
    return pd.Series(out, name="p_star")


def werner_thresholds(df: pd.DataFrame) -> pd.DataFrame:
    """(d, criterion, param) ごとの検出された最大 φ"""
    hits = df[df["detected"]]
    return hits.groupby(["d", "criterion", "param"], sort=False)["phi"].max().reset_index(name="phi_max")


def summarize(df: pd.DataFrame, experiment: str) -> pd.DataFrame:
    if experiment == "horodecki":
        return detected_counts(df).reset_index(name="detected_cells")
    if experiment == "upb":
        return upb_thresholds(df).reset_index().rename(columns={"index": "t_label"})
    if experiment == "werner":
        return werner_thresholds(df)
    return df


# ---------------------------------------------------------------------------
# コントローラ
# ---------------------------------------------------------------------------

class ScanController:
    """
    スキャン実行の中核ロジック
    CLI から独立して動作し、結果は設定順に並んだ DataFrame で返す
    """

    def __init__(self, config: ScanConfig, threads: Optional[int] = None, version: str = "0"):
        """
        初期化

        Args:
            config: スキャン設定
            threads: 並列数（None なら ED_THREADS / CPU 数）
            version: CSV メタデータに書くアーティファクトのバージョン
        """
        self.config = config
        self.threads = threads if threads is not None else get_settings().threads()
        self.version = version
        self.result: Optional[pd.DataFrame] = None

    def run(self) -> pd.DataFrame:
        logger.info(f"Scan started: {self.config.experiment} (threads={self.threads})")
        self.result = SCANS[self.config.experiment](self.config, self.threads)
        logger.info(f"Scan finished: {self.config.experiment}, {len(self.result)} rows")
        return self.result

    def summary(self) -> pd.DataFrame:
        if self.result is None:
            raise RuntimeError("scan has not been run")
        return summarize(self.result, self.config.experiment)

    def metadata_lines(self) -> List[str]:
        """先頭のメタデータ行。UPB は t ごとの p* を 1 行ずつ追加"""
        meta = {"version": self.version, **self.config.metadata()}
        lines = ["# " + " ".join(f"{k}={v}" for k, v in meta.items())]
        if self.config.experiment == "upb" and self.result is not None:
            for label, p_star in upb_thresholds(self.result).items():
                lines.append(f"# p_star t={label} value={p_star:.17g}")
        return lines

    def write_csv(self, out: Optional[Union[str, Path, TextIO]] = None) -> str:
        """
        CSV を書き出す（先頭に # メタデータ行）

        Returns:
            書き出した CSV テキスト
        """
        if self.result is None:
            self.run()
        body = self.result.to_csv(index=False, lineterminator="\n", float_format="%.17g")
        text = "\n".join(self.metadata_lines()) + "\n" + body
        target = out if out is not None else self.config.out
        if target is None:
            return text
        if hasattr(target, "write"):
            target.write(text)
        else:
            try:
                Path(target).parent.mkdir(parents=True, exist_ok=True)
                with open(target, "w", encoding="utf-8", newline="") as f:
                    f.write(text)
            except OSError as e:
                logger.error(f"Error writing {target}: {e}")
                raise
            logger.info(f"{len(self.result)} rows written to {target}")
        return text
