#!/usr/bin/env python3
"""
プリセット観測量タプルの確認スクリプト
κ_Aκ_B と閉形式の上界、フィルタ後の上界を並べて表示する
"""

import sys
from typing import Dict, List, Tuple

from app.core.criteria import preset_tuples, table1_bound
from app.core.errors import EntangleError
from app.core.lft import lft_table
from app.core.settings import get_settings

TOL = 1e-12


def check_config() -> bool:
    """設定ファイルの読み込み確認"""
    try:
        settings = get_settings()
        names = settings.preset_names()
    except EntangleError as e:
        print(f"❌ 設定を読み込めません: {e}")
        return False
    if not names:
        print("⚠️ プリセットが定義されていません（config/criteria_config.json を確認してください）")
        return False
    print(f"✅ 設定を読み込みました（プリセット {len(names)} 個）")
    return True


def check_bounds(dims: List[Tuple[int, int]]) -> int:
    """タプル由来の κ_Aκ_B と閉形式の一致を確認し、不一致の数を返す"""
    print("\n🎯 κ_Aκ_B と閉形式の上界:")
    print("-" * 64)
    print(f"{'プリセット':<12} {'dims':<8} {'κ_Aκ_B':>14} {'閉形式':>14}")
    print("-" * 64)

    failures = 0
    for name in get_settings().preset_names():
        for dA, dB in dims:
            A, B = preset_tuples(name, {}, dA, dB)
            params: Dict[str, float] = {}
            if name == "sarbicki":
                params = {"hA": A.params["h"], "hB": B.params["h"]}
            elif name == "simplex":
                params = {"tA": A.params["t"], "tB": B.params["t"]}
            kappa = A.kappa * B.kappa
            bound = table1_bound(name, dA, dB, **params)
            mark = "✅" if abs(kappa - bound) < TOL else "❌"
            if mark == "❌":
                failures += 1
            print(f"{mark} {name:<10} {f'{dA}x{dB}':<8} {kappa:>14.10f} {bound:>14.10f}")
    return failures


def show_lft_table(dims: List[Tuple[int, int]]) -> None:
    """フィルタ後の上界（‖𝒯̃‖_tr に対する値）"""
    print("\n💻 フィルタ後の上界:")
    print("-" * 64)
    for dA, dB in dims:
        table = lft_table(dA, dB)
        best = min(("vicente", "ccnr", "esic"), key=lambda k: table[k])
        cells = "  ".join(f"{k}={v:.6f}" for k, v in table.items())
        print(f"  {dA}x{dB}: {cells}  (最小: {best})")


def main():
    """メイン処理"""
    print("=" * 64)
    print("🧪 Entangle Detect - プリセット確認ツール")
    print("=" * 64)

    if not check_config():
        sys.exit(1)

    dims = [(dA, dB) for dA in range(2, 6) for dB in range(dA, 6)]
    failures = check_bounds(dims)
    show_lft_table(dims)

    if failures:
        print(f"\n❌ {failures} 件の不一致があります")
        sys.exit(1)

    print("\n✨ 確認完了！")
    print("判定を試す: python -m app.cli check --state <file> --criterion esic")


if __name__ == "__main__":
    main()
