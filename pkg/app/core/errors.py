"""
Errors - 判定ライブラリ共通の例外階層
ライブラリ側は例外を送出するだけ。終了コードへの変換は CLI が担当する。
"""

from typing import Optional, Tuple


class EntangleError(Exception):
    """ライブラリ全体の基底例外"""


class NonFiniteError(EntangleError, ValueError):
    """NaN / inf を含む入力"""


class NonSquareError(EntangleError, ValueError):
    """正方行列が必要な箇所に非正方行列"""


class NotHermitianError(EntangleError, ValueError):
    """エルミート性の許容誤差超過"""

    def __init__(self, asymmetry: float, tol: float):
        super().__init__(f"matrix is not Hermitian: max|H - H^dag| = {asymmetry:.3e} > {tol:.1e}")
        self.asymmetry = asymmetry
        self.tol = tol


class NotPositiveError(EntangleError, ValueError):
    """PSD クランプ範囲を下回る固有値"""

    def __init__(self, min_eigenvalue: float, tol: float):
        super().__init__(f"matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < -{tol:.1e}")
        self.min_eigenvalue = min_eigenvalue


class SingularBelowCutoffError(EntangleError, ValueError):
    """逆平方根を取れない（固有値がカットオフ以下）"""

    def __init__(self, min_eigenvalue: float, cutoff: float):
        super().__init__(f"eigenvalue {min_eigenvalue:.3e} not above cutoff {cutoff:.1e}")
        self.min_eigenvalue = min_eigenvalue
        self.cutoff = cutoff


class DimensionMismatchError(EntangleError, ValueError):
    """次元の不一致"""


class InvalidStateError(EntangleError, ValueError):
    """密度行列として不正（トレース・エルミート性・正値性）"""


class ParameterRangeError(EntangleError, ValueError):
    """パラメータが定義域外"""


class ZeroDenominatorError(EntangleError, ValueError):
    """ゼロ除算になるパラメータ"""


class NotBalancedError(EntangleError, ValueError):
    """Σ_μ t_μ a_μ ≠ 0 の観測量タプル"""

    def __init__(self, imbalance: float):
        super().__init__(f"observable tuple is not balanced: |sum t_mu a_mu| = {imbalance:.3e}")
        self.imbalance = imbalance


class NotFullLocalRankError(EntangleError):
    """局所ランク欠損（正規形が存在しない）"""

    def __init__(self, ranks: Tuple[int, int], dims: Tuple[int, int], iteration: int = 0):
        super().__init__(
            f"state does not have full local rank: ranks={ranks}, dims={dims} (iteration {iteration})"
        )
        self.ranks = ranks
        self.dims = dims
        self.iteration = iteration


class NoConvergenceError(EntangleError):
    """正規形の反復が収束しなかった"""

    def __init__(self, residual: float, iterations: int, tol: float):
        super().__init__(
            f"normal form did not converge: residual {residual:.3e} after {iterations} iterations (tol {tol:.1e})"
        )
        self.residual = residual
        self.iterations = iterations
        self.tol = tol


class UnknownCriterionError(EntangleError, ValueError):
    """未知の判定基準 ID"""

    def __init__(self, name: str, known: Optional[Tuple[str, ...]] = None, kind: str = "criterion"):
        msg = f"unknown {kind}: {name!r}"
        if known:
            msg += f" (known: {', '.join(known)})"
        elif kind != "criterion":
            msg += " (takes no parameters)"
        super().__init__(msg)
        self.name = name


class ConfigError(EntangleError, ValueError):
    """スキャン設定の検証エラー"""
