"""
Entangle Detect - Application Package
警告制御とログ設定
"""

import logging
import os
import warnings

# numpy の RuntimeWarning を抑制
warnings.filterwarnings("ignore", category=RuntimeWarning, module="numpy")

# ログレベル設定（ED_LOG_LEVEL で上書き可）
_level = os.getenv("ED_LOG_LEVEL", "WARNING").upper()
if _level not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    _level = "WARNING"
logging.basicConfig(
    level=_level,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)

# バージョン情報
__version__ = "1.0.0"
__author__ = "Entangle Detect Team"
