"""
Settings Utilities
config/*.json を単一ソースとした許容誤差・プリセット・スキャン既定値の管理
"""

import json
import logging
import os
from functools import lru_cache
from typing import Any, Dict, List, Optional

logger = logging.getLogger(__name__)

CONFIG_DIR_ENV = "ED_CONFIG_DIR"
THREADS_ENV = "ED_THREADS"


class SettingsManager:
    """
    設定ファイルの管理クラス
    ファイルが無い・壊れている場合は組み込み既定値にフォールバックする
    """

    def __init__(self, config_dir: Optional[str] = None):
        self.config_dir = config_dir or os.getenv(CONFIG_DIR_ENV)
        self.criteria_config = self._load_config("criteria_config.json", self._get_default_criteria_config())
        self.scan_config = self._load_config("scan_config.json", self._get_default_scan_config())

    def _candidate_paths(self, filename: str) -> List[str]:
        """探索するパス候補（優先順）"""
        paths = []
        if self.config_dir:
            paths.append(os.path.join(self.config_dir, filename))
        paths.extend([
            os.path.join("config", filename),
            os.path.join(os.path.dirname(__file__), "..", "..", "config", filename),
        ])
        return paths

    def _load_config(self, filename: str, defaults: Dict) -> Dict:
        """設定ファイルを読み込み、既定値にマージ"""
        for path in self._candidate_paths(filename):
            if not os.path.exists(path):
                continue
            try:
                with open(path, "r", encoding="utf-8") as f:
                    loaded = json.load(f)
                logger.info(f"Settings loaded from: {path}")
                return _merge(defaults, loaded)
            except Exception as e:
                logger.error(f"Error loading {path}: {e}")
                return defaults
        logger.warning(f"{filename} not found, using defaults")
        return defaults

    def _get_default_criteria_config(self) -> Dict:
        """許容誤差などの既定値"""
        return {
            "tolerances": {
                "hermitian": 1e-10,
                "psd_clamp": 1e-10,
                "trace": 1e-10,
                "verdict": 1e-9,
                "rank_cutoff": 1e-10,
                "pinv_cutoff": 1e-12,
                "balanced": 1e-10,
                "ppt": 1e-10,
                "imaginary": 1e-10,
            },
            "normal_form": {"tol": 1e-10, "max_iter": 1000},
            "chessboard": {"resample_threshold": 1e-6},
            "presets": {},
        }

    def _get_default_scan_config(self) -> Dict:
        """スキャン既定値（デスクスケール）"""
        return {
            "defaults": {"seed": 2024, "samples": 2000},
            "experiments": {},
        }

    def tolerance(self, name: str) -> float:
        """
        名前付き許容誤差を取得

        Args:
            name: "hermitian" | "verdict" | ...

        Returns:
            許容誤差
        """
        tolerances = self.criteria_config.get("tolerances", {})
        if name not in tolerances:
            raise KeyError(f"unknown tolerance: {name}")
        return float(tolerances[name])

    def normal_form_defaults(self) -> Dict[str, Any]:
        nf = self.criteria_config.get("normal_form", {})
        return {"tol": float(nf.get("tol", 1e-10)), "max_iter": int(nf.get("max_iter", 1000))}

    def chessboard_threshold(self) -> float:
        return float(self.criteria_config.get("chessboard", {}).get("resample_threshold", 1e-6))

    def preset_names(self) -> List[str]:
        return list(self.criteria_config.get("presets", {}).keys())

    def scan_defaults(self, experiment: Optional[str] = None) -> Dict[str, Any]:
        """
        スキャンの既定値を取得（experiment 固有値 > 共通 defaults）

        Args:
            experiment: "horodecki" | "upb" | "chessboard" | "random" | "werner"

        Returns:
            既定値の辞書
        """
        merged = dict(self.scan_config.get("defaults", {}))
        if experiment:
            merged.update(self.scan_config.get("experiments", {}).get(experiment, {}))
        return merged

    def experiments_by_priority(self) -> List[str]:
        """priority 順の実験 ID（priority 無しは後ろ）"""
        items = list(self.scan_config.get("experiments", {}).items())
        items.sort(key=lambda kv: (kv[1].get("priority") is None, kv[1].get("priority", 1_000_000)))
        return [name for name, _ in items]

    def threads(self) -> int:
        """ED_THREADS による並列数の上限"""
        raw = os.getenv(THREADS_ENV)
        if raw:
            try:
                return max(1, int(raw))
            except ValueError:
                logger.warning(f"Invalid {THREADS_ENV}={raw!r}, ignoring")
        return os.cpu_count() or 1


def _merge(base: Dict, override: Dict) -> Dict:
    """ネストした辞書の上書きマージ"""
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = value
    return out


@lru_cache(maxsize=1)
def get_settings() -> SettingsManager:
    """共有インスタンス"""
    return SettingsManager()
