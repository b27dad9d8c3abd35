"""
Observables - 観測量タプルと MIBS スケール (β, κ)

タプルは (t, Abloch) で表す。t_μ = Tr A_μ、Abloch の第 μ 列が a⃗_μ。
プリセット: vicente / sarbicki / simplex（ccnr, esic は simplex の t 既定値）
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Any, Dict, List, Sequence, Union

import numpy as np

from .bloch import bloch_to_observable, observable_to_bloch, state_to_bloch
from .errors import DimensionMismatchError, NotBalancedError, ParameterRangeError
from .linalg import pinv_symmetric
from .settings import get_settings

logger = logging.getLogger(__name__)

_settings = get_settings()
BALANCED_TOL = _settings.tolerance("balanced")
VERDICT_TOL = _settings.tolerance("verdict")

TupleKind = str  # "vicente" | "sarbicki" | "simplex" | "generic"
EXACT_BETA_KINDS = ("vicente", "sarbicki", "simplex")
TraceSpec = Union[float, str]


@dataclass(frozen=True)
class MibsScale:
    """β（厳密値または上界）と κ = √(|t|²/d² + β)"""
    beta: float
    beta_is_exact: bool
    kappa: float


@dataclass(frozen=True, eq=False)
class MeasurementTuple:
    """
    m 個の観測量の組
    M = [t/√(2d); Abloch] が Π 基底での係数行列になる
    """
    dim: int
    t: np.ndarray
    abloch: np.ndarray  # shape (d²−1, m)
    kind: TupleKind = "generic"
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        t = np.array(self.t, dtype=float).reshape(-1)
        abloch = np.array(self.abloch, dtype=float)
        if abloch.ndim != 2 or abloch.shape != (self.dim**2 - 1, t.size):
            raise DimensionMismatchError(
                f"Abloch must be ({self.dim**2 - 1}, {t.size}) for d={self.dim}, got {abloch.shape}"
            )
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(abloch))):
            raise ParameterRangeError("tuple contains non-finite entries")
        t.setflags(write=False)
        abloch.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "abloch", abloch)

    @property
    def m(self) -> int:
        return int(self.t.size)

    @property
    def t_norm(self) -> float:
        return float(np.linalg.norm(self.t))

    @property
    def imbalance(self) -> float:
        """|Σ_μ t_μ a⃗_μ|"""
        return float(np.linalg.norm(self.abloch @ self.t))

    @property
    def balanced(self) -> bool:
        return self.imbalance <= BALANCED_TOL

    def m_matrix(self) -> np.ndarray:
        """Π = {√(2/d)𝟙, π} 基底での係数行列 M（d² × m）"""
        return np.vstack([self.t[None, :] / np.sqrt(2.0 * self.dim), self.abloch])

    @cached_property
    def scale(self) -> MibsScale:
        return beta_bound(self)

    @property
    def kappa(self) -> float:
        return self.scale.kappa

    def label(self) -> str:
        if not self.params:
            return self.kind
        args = ",".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({args})"


# ---------------------------------------------------------------------------
# 正単体
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def simplex_vertices(n: int) -> np.ndarray:
    """
    R^n の正単体の n+1 個の単位頂点（列ベクトル）

    第 k 列 = (b_1, …, b_{k−1}, a_k, 0, …, 0)
      a_k = √((n+1)(n−k+1) / (n(n−k+2)))
      b_k = −√((n+1) / (n(n−k+1)(n−k+2)))

    Returns:
        n × (n+1) 行列（読み取り専用）
    """
    if n < 1:
        raise ParameterRangeError(f"simplex dimension must be >= 1, got {n}")
    V = np.zeros((n, n + 1))
    for k in range(1, n + 1):
        a_k = np.sqrt((n + 1) * (n - k + 1) / (n * (n - k + 2)))
        b_k = -np.sqrt((n + 1) / (n * (n - k + 1) * (n - k + 2)))
        V[k - 1, k - 1] = a_k
        V[k - 1, k:] = b_k
    V.setflags(write=False)
    return V


def ccnr_t(d: int) -> float:
    """CCNR を再現する t = √(2d/(d²−1))"""
    return float(np.sqrt(2.0 * d / (d * d - 1)))


def esic_t(d: int) -> float:
    """ESIC を再現する t = √(2d/(d−1))"""
    return float(np.sqrt(2.0 * d / (d - 1)))


TRACE_PRESETS = {"ccnr": ccnr_t, "esic": esic_t}


def resolve_trace(d: int, t: TraceSpec) -> float:
    """t の数値化（"ccnr" / "esic" は次元依存のプリセット）"""
    if isinstance(t, str):
        key = t.strip().lower()
        if key in TRACE_PRESETS:
            return TRACE_PRESETS[key](d)
        try:
            return float(key)
        except ValueError:
            raise ParameterRangeError(f"unknown trace preset {t!r} (known: {', '.join(TRACE_PRESETS)})")
    return float(t)


# ---------------------------------------------------------------------------
# タプル構築
# ---------------------------------------------------------------------------

def _check_dim(d: int) -> None:
    if d < 2:
        raise ParameterRangeError(f"dimension must be >= 2, got {d}")


@lru_cache(maxsize=64)
def tuple_vicente(d: int) -> MeasurementTuple:
    """生成子タプル: A_1 = 0, A_{μ+1} = π_μ（t = 0）"""
    _check_dim(d)
    n = d * d - 1
    abloch = np.hstack([np.zeros((n, 1)), np.eye(n)])
    return MeasurementTuple(dim=d, t=np.zeros(d * d), abloch=abloch, kind="vicente")


@lru_cache(maxsize=256)
def tuple_sarbicki(d: int, h: float) -> MeasurementTuple:
    """生成子タプルに t_1 = √(2d)·h（A_1 = h√(2/d)𝟙）を加えたもの"""
    base = tuple_vicente(d)
    t = np.zeros(d * d)
    t[0] = np.sqrt(2.0 * d) * h
    return MeasurementTuple(dim=d, t=t, abloch=base.abloch, kind="sarbicki", params={"h": float(h)})


@lru_cache(maxsize=256)
def tuple_simplex(d: int, t: TraceSpec) -> MeasurementTuple:
    """
    正単体タプル: d² 個の観測量、Tr A_μ = t、a⃗_μ は正単体の頂点

    Args:
        d: 局所次元
        t: トレース値、または "ccnr" / "esic"
    """
    _check_dim(d)
    params: Dict[str, Any] = {}
    if isinstance(t, str) and t.strip().lower() in TRACE_PRESETS:
        params["preset"] = t.strip().lower()
    value = resolve_trace(d, t)
    params["t"] = value
    return MeasurementTuple(
        dim=d,
        t=np.full(d * d, value),
        abloch=simplex_vertices(d * d - 1),
        kind="simplex",
        params=params,
    )


def tuple_generic(ops: Sequence[np.ndarray]) -> MeasurementTuple:
    """
    明示的な観測量の列からタプルを作る（t_μ = Tr A_μ, a⃗_μ = Tr[A_μ π]/2）

    Raises:
        NotHermitianError: 非エルミートな観測量
        DimensionMismatchError: 次元が揃っていない
    """
    if len(ops) == 0:
        raise ParameterRangeError("observable tuple must not be empty")
    d = np.asarray(ops[0]).shape[0]
    ts, cols = [], []
    for op in ops:
        if np.asarray(op).shape != (d, d):
            raise DimensionMismatchError(f"all observables must be {d}x{d}, got {np.asarray(op).shape}")
        t, a = observable_to_bloch(op)
        ts.append(t)
        cols.append(a)
    return MeasurementTuple(dim=d, t=np.array(ts), abloch=np.array(cols).T, kind="generic")


def tuple_operators(tup: MeasurementTuple) -> List[np.ndarray]:
    """タプル → 観測量行列のリスト"""
    return [bloch_to_observable(tup.t[mu], tup.abloch[:, mu], tup.dim) for mu in range(tup.m)]


def padded(tup: MeasurementTuple, m: int) -> MeasurementTuple:
    """零観測量を末尾に足して長さ m にする"""
    if m < tup.m:
        raise ParameterRangeError(f"cannot pad a tuple of length {tup.m} down to {m}")
    if m == tup.m:
        return tup
    extra = m - tup.m
    return MeasurementTuple(
        dim=tup.dim,
        t=np.concatenate([tup.t, np.zeros(extra)]),
        abloch=np.hstack([tup.abloch, np.zeros((tup.abloch.shape[0], extra))]),
        kind=tup.kind,
        params={**tup.params, "padded": m},
    )


# ---------------------------------------------------------------------------
# MIBS
# ---------------------------------------------------------------------------

def omega_matrix(tup: MeasurementTuple) -> np.ndarray:
    """Ω = 2·Ablochᵀ·Abloch"""
    return 2.0 * tup.abloch.T @ tup.abloch


def omega_pinv(tup: MeasurementTuple) -> np.ndarray:
    """Ω の Moore–Penrose 逆行列"""
    return pinv_symmetric(omega_matrix(tup))


def _structure_matches(tup: MeasurementTuple) -> bool:
    """kind の主張どおりの列構造か（末尾の零観測量は無視）"""
    nonzero = np.linalg.norm(tup.abloch, axis=0) > BALANCED_TOL
    cols = tup.abloch[:, nonzero]
    n = tup.dim * tup.dim - 1
    gram = cols.T @ cols
    if tup.kind in ("vicente", "sarbicki"):
        return cols.shape[1] == n and np.allclose(gram, np.eye(n), atol=BALANCED_TOL)
    if tup.kind == "simplex":
        ts = tup.t[nonzero]
        return (
            cols.shape[1] == n + 1
            and np.allclose(gram, ((n + 1) * np.eye(n + 1) - 1.0) / n, atol=BALANCED_TOL)
            and np.allclose(ts, ts[0], atol=BALANCED_TOL)
        )
    return False


def beta_bound(tup: MeasurementTuple) -> MibsScale:
    """
    β と κ を求める

    vicente / sarbicki: β = 2(d−1)/d（厳密）
    simplex:            β = 2d/(d+1)（厳密）
    それ以外:           β ≤ (d−1)/d·λ_max(Ω)（上界）
    kind と列構造が食い違うタプルは上界で扱う

    Raises:
        NotBalancedError: Σ t_μ a⃗_μ ≠ 0
    """
    if not tup.balanced:
        raise NotBalancedError(tup.imbalance)
    d = tup.dim
    kind = tup.kind
    if kind in EXACT_BETA_KINDS and not _structure_matches(tup):
        logger.warning(f"beta_bound: tuple labelled {kind!r} does not have that structure, using the lambda_max bound")
        kind = "generic"
    if kind in ("vicente", "sarbicki"):
        beta, exact = 2.0 * (d - 1) / d, True
    elif kind == "simplex":
        beta, exact = 2.0 * d / (d + 1), True
    else:
        lam_max = float(np.linalg.eigvalsh(omega_matrix(tup))[-1])
        beta, exact = (d - 1) / d * max(lam_max, 0.0), False
    kappa = float(np.sqrt(tup.t_norm**2 / d**2 + beta))
    logger.debug(f"beta_bound: kind={tup.kind} d={d} beta={beta:.6g} exact={exact} kappa={kappa:.6g}")
    return MibsScale(beta=beta, beta_is_exact=exact, kappa=kappa)


def mibv(rho: np.ndarray, tup: MeasurementTuple) -> np.ndarray:
    """
    測定誘起 Bloch ベクトル α_μ = r⃗·a⃗_μ

    Args:
        rho: 単一系の密度行列（次元 = tup.dim）
    """
    rho = np.asarray(rho)
    if rho.shape != (tup.dim, tup.dim):
        raise DimensionMismatchError(f"state of shape {rho.shape} does not match tuple dimension {tup.dim}")
    r = state_to_bloch(rho).r
    return tup.abloch.T @ r


def ellipsoid_contains(alpha: np.ndarray, tup: MeasurementTuple, purity: float = 1.0, tol: float = VERDICT_TOL) -> bool:
    """
    MIBV が超楕円体 (d/(d·purity − 1))·αᵀΩ⁺α ≤ 1 に含まれるか
    α が Ω の値域に無ければ False
    """
    alpha = np.asarray(alpha, dtype=float)
    if alpha.shape != (tup.m,):
        raise DimensionMismatchError(f"MIBV must have {tup.m} components, got {alpha.shape}")
    d = tup.dim
    if not 1.0 / d - tol <= purity <= 1.0 + tol:
        raise ParameterRangeError(f"purity must be in [1/d, 1], got {purity}")
    omega = omega_matrix(tup)
    pinv = pinv_symmetric(omega)
    off_range = alpha - omega @ (pinv @ alpha)
    if np.linalg.norm(off_range) > np.sqrt(tol):
        return False
    spread = d * purity - 1.0
    quad = float(alpha @ pinv @ alpha)
    if spread <= tol:
        return quad <= tol
    return d / spread * quad <= 1.0 + tol

