"""
Criteria - 相関行列と判定基準のはしご
相関行列のトレースノルム判定（vicente / sarbicki / simplex / ccnr / esic）、d×d 用の二つの判定（obs2）、PPT ベースライン

判定は片側のみ: Entangled ⇔ margin > 1e−9、それ以外は Inconclusive
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .bloch import bipartite_expectations, decompose_bipartite
from .errors import DimensionMismatchError, ParameterRangeError, UnknownCriterionError
from .linalg import trace_norm
from .observables import (
    MeasurementTuple,
    TraceSpec,
    resolve_trace,
    tuple_operators,
    tuple_sarbicki,
    tuple_simplex,
    tuple_vicente,
)
from .settings import get_settings
from .states import BipartiteState, ppt_min_eigenvalue

logger = logging.getLogger(__name__)

_settings = get_settings()
VERDICT_TOL = _settings.tolerance("verdict")
PPT_TOL = _settings.tolerance("ppt")

TUPLE_PRESETS = ("vicente", "sarbicki", "simplex", "ccnr", "esic")
KNOWN_CRITERIA = TUPLE_PRESETS + ("obs1", "obs2", "ppt", "thm2", "obs3", "lft-min")

# 判定基準ごとに受け付けるパラメータ
CRITERION_PARAMS: Dict[str, Tuple[str, ...]] = {
    "vicente": (),
    "sarbicki": ("hA", "hB"),
    "simplex": ("tA", "tB"),
    "obs1": ("tA", "tB"),
    "obs3": ("tA", "tB"),
    "obs2": ("t",),
    "ccnr": (),
    "esic": (),
    "ppt": (),
    "lft-min": (),
}


class Verdict(str, Enum):
    ENTANGLED = "Entangled"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class CriterionReport:
    """判定結果（値オブジェクト）"""
    criterion: str
    statistic: float
    bound: float
    margin: float
    verdict: Verdict
    params: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    @property
    def entangled(self) -> bool:
        return self.verdict == Verdict.ENTANGLED

    def to_dict(self) -> Dict[str, Any]:
        return {
            "criterion": self.criterion,
            "params": dict(self.params),
            "statistic": self.statistic,
            "bound": self.bound,
            "margin": self.margin,
            "verdict": self.verdict.value,
            "details": dict(self.details),
        }


def make_report(
    criterion: str,
    statistic: float,
    bound: float,
    margin: Optional[float] = None,
    params: Optional[Dict[str, Any]] = None,
    details: Optional[Dict[str, Any]] = None,
    tol: float = VERDICT_TOL,
) -> CriterionReport:
    """margin 未指定なら statistic − bound"""
    if margin is None:
        margin = statistic - bound
    verdict = Verdict.ENTANGLED if margin > tol else Verdict.INCONCLUSIVE
    return CriterionReport(
        criterion=criterion,
        statistic=float(statistic),
        bound=float(bound),
        margin=float(margin),
        verdict=verdict,
        params=params or {},
        details=details or {},
    )


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """C_μν = ⟨A_μ⊗B_ν⟩"""
    C: np.ndarray
    tuple_a: MeasurementTuple
    tuple_b: MeasurementTuple

    @property
    def trace_norm(self) -> float:
        return trace_norm(self.C)

    @property
    def trace(self) -> float:
        return float(np.trace(self.C))


def correlation_matrix(
    state: BipartiteState,
    A: MeasurementTuple,
    B: MeasurementTuple,
    method: str = "bloch",
    chi: Optional[np.ndarray] = None,
) -> CorrelationMatrix:
    """
    相関行列を計算

    Args:
        state: 二体状態
        A, B: 各側の観測量タプル
        method: "bloch"（C = M_Aᵀ χ M_B）または "direct"（Tr[ρ A_μ⊗B_ν] を直接）
        chi: 計算済みの係数行列（スキャンで同じ状態を使い回すとき）

    Returns:
        CorrelationMatrix
    """
    if A.dim != state.dA or B.dim != state.dB:
        raise DimensionMismatchError(
            f"tuple dims ({A.dim}, {B.dim}) do not match state dims {state.dims}"
        )
    if method == "bloch":
        if chi is None:
            chi = decompose_bipartite(state).chi
        C = A.m_matrix().T @ chi @ B.m_matrix()
    elif method == "direct":
        ops_a = np.array(tuple_operators(A))
        ops_b = np.array(tuple_operators(B))
        C = bipartite_expectations(state.rho, state.dA, state.dB, ops_a, ops_b)
    else:
        raise ValueError(f"unknown method: {method}")
    return CorrelationMatrix(C=C, tuple_a=A, tuple_b=B)


# ---------------------------------------------------------------------------
# ‖C‖_tr ≤ κ_Aκ_B 系
# ---------------------------------------------------------------------------

def theorem1_check(
    state: BipartiteState,
    A: MeasurementTuple,
    B: MeasurementTuple,
    criterion: str = "theorem1",
    params: Optional[Dict[str, Any]] = None,
    chi: Optional[np.ndarray] = None,
) -> CriterionReport:
    """
    ‖C‖_tr ≤ κ_A κ_B

    Raises:
        NotBalancedError: タプルが Σ t_μ a⃗_μ = 0 を満たさない
    """
    scale_a, scale_b = A.scale, B.scale
    corr = correlation_matrix(state, A, B, chi=chi)
    details = {
        "kappa_A": scale_a.kappa,
        "kappa_B": scale_b.kappa,
        "beta_exact": scale_a.beta_is_exact and scale_b.beta_is_exact,
    }
    return make_report(
        criterion,
        statistic=corr.trace_norm,
        bound=scale_a.kappa * scale_b.kappa,
        params=params or {"A": A.label(), "B": B.label()},
        details=details,
    )


def vicente_check(state: BipartiteState, chi: Optional[np.ndarray] = None) -> CriterionReport:
    return theorem1_check(state, tuple_vicente(state.dA), tuple_vicente(state.dB), criterion="vicente", chi=chi)


def sarbicki_check(
    state: BipartiteState, hA: float = 0.0, hB: float = 0.0, chi: Optional[np.ndarray] = None
) -> CriterionReport:
    """生成子タプル + h による ‖C‖_tr ≤ κ_Aκ_B"""
    return theorem1_check(
        state,
        tuple_sarbicki(state.dA, hA),
        tuple_sarbicki(state.dB, hB),
        criterion="sarbicki",
        params={"hA": float(hA), "hB": float(hB)},
        chi=chi,
    )


def observation1_check(
    state: BipartiteState,
    tA: TraceSpec,
    tB: TraceSpec,
    criterion: str = "obs1",
    chi: Optional[np.ndarray] = None,
) -> CriterionReport:
    """
    正単体タプルによる判定 ‖C‖_tr ≤ √(t_A² + 2d_A/(d_A+1))·√(t_B² + 2d_B/(d_B+1))
    tA, tB に "ccnr" / "esic" を渡すと各プリセット
    """
    A = tuple_simplex(state.dA, tA)
    B = tuple_simplex(state.dB, tB)
    params = {"tA": A.params["t"], "tB": B.params["t"]}
    return theorem1_check(state, A, B, criterion=criterion, params=params, chi=chi)


def observation2_check(state: BipartiteState, t: TraceSpec, chi: Optional[np.ndarray] = None) -> CriterionReport:
    """
    d×d 状態に対する二つの判定
      (i)  ‖C‖_tr > t² + 2d/(d+1)
      (ii) Tr C  < t² − 2d/(d²−1)
    どちらかが成り立てば Entangled。代表値は margin の大きい方
    """
    if state.dA != state.dB:
        raise DimensionMismatchError(f"observation 2 needs d_A == d_B, got {state.dims}")
    d = state.dA
    A = tuple_simplex(d, t)
    tv = A.params["t"]
    corr = correlation_matrix(state, A, A, chi=chi)

    norm_stat = corr.trace_norm
    norm_bound = tv**2 + 2.0 * d / (d + 1)
    trace_stat = corr.trace
    trace_bound = tv**2 - 2.0 * d / (d * d - 1)
    norm_margin = norm_stat - norm_bound
    trace_margin = trace_bound - trace_stat

    details = {
        "norm_statistic": norm_stat,
        "norm_bound": norm_bound,
        "norm_margin": norm_margin,
        "norm_verdict": (Verdict.ENTANGLED if norm_margin > VERDICT_TOL else Verdict.INCONCLUSIVE).value,
        "trace_statistic": trace_stat,
        "trace_bound": trace_bound,
        "trace_margin": trace_margin,
        "trace_verdict": (Verdict.ENTANGLED if trace_margin > VERDICT_TOL else Verdict.INCONCLUSIVE).value,
    }
    if trace_margin >= norm_margin:
        details["operative"] = "trace"
        return make_report("obs2", trace_stat, trace_bound, trace_margin, params={"t": tv}, details=details)
    details["operative"] = "norm"
    return make_report("obs2", norm_stat, norm_bound, norm_margin, params={"t": tv}, details=details)


# ---------------------------------------------------------------------------
# ベースラインと閉形式
# ---------------------------------------------------------------------------

def ppt_check(state: BipartiteState) -> Verdict:
    """ρ^{T_B} の最小固有値 < −1e−10 なら Entangled"""
    return ppt_report(state).verdict


def ppt_report(state: BipartiteState) -> CriterionReport:
    lam = ppt_min_eigenvalue(state)
    return make_report("ppt", statistic=-lam, bound=0.0, details={"min_eigenvalue": lam}, tol=PPT_TOL)


def realignment(state: BipartiteState) -> np.ndarray:
    """再配列行列 R_{(i_A j_A),(i_B j_B)} = ρ_{(i_A i_B),(j_A j_B)}"""
    dA, dB = state.dims
    r = np.asarray(state.rho).reshape(dA, dB, dA, dB)
    return r.transpose(0, 2, 1, 3).reshape(dA * dA, dB * dB)


def ccnr_direct(state: BipartiteState) -> float:
    """‖χ‖_tr を再配列行列から直接計算（= 2‖R(ρ)‖_tr）"""
    return 2.0 * trace_norm(realignment(state))


def table1_bound(name: str, dA: int, dB: int, **params: float) -> float:
    """
    タプル由来の κ_Aκ_B と照合するための閉形式

    Args:
        name: "vicente" | "sarbicki" | "simplex" | "ccnr" | "esic"
        params: sarbicki は hA, hB / simplex は tA, tB
    """
    if name == "vicente":
        return float(2.0 * np.sqrt((dA - 1) * (dB - 1) / (dA * dB)))
    if name == "sarbicki":
        hA, hB = float(params.get("hA", 0.0)), float(params.get("hB", 0.0))
        return float(np.sqrt(2.0 * (dA - 1 + hA**2) / dA) * np.sqrt(2.0 * (dB - 1 + hB**2) / dB))
    if name == "simplex":
        tA = resolve_trace(dA, params.get("tA", 0.0))
        tB = resolve_trace(dB, params.get("tB", 0.0))
        return float(np.sqrt(tA**2 + 2.0 * dA / (dA + 1)) * np.sqrt(tB**2 + 2.0 * dB / (dB + 1)))
    if name == "ccnr":
        return float(2.0 * dA * dB / np.sqrt((dA**2 - 1) * (dB**2 - 1)))
    if name == "esic":
        return float(4.0 * dA * dB / np.sqrt((dA**2 - 1) * (dB**2 - 1)))
    raise UnknownCriterionError(name, TUPLE_PRESETS)


def sarbicki_werner_optimum(d: int) -> Tuple[float, float, float]:
    """Werner 状態に対する h の最適値 (h_A, h_B) = (0, 0) と、そのときの上界"""
    return 0.0, 0.0, table1_bound("sarbicki", d, d, hA=0.0, hB=0.0)


def sarbicki_werner_threshold(d: int) -> float:
    """h = 0 の sarbicki 判定が Werner(d, φ) を検出するのは φ < −(d−2)/d"""
    return -(d - 2.0) / d


# ---------------------------------------------------------------------------
# 判定基準文字列
# ---------------------------------------------------------------------------

def _parse_value(raw: str) -> Any:
    raw = raw.strip()
    try:
        return float(raw)
    except ValueError:
        return raw.lower()


def parse_criterion(spec: str) -> Tuple[str, Dict[str, Any]]:
    """
    "name" / "name:k=v,k=v" / "thm2:<preset>" を分解

    Returns:
        (name, params)  thm2 の場合は params["tuples"] に入れ子の (name, params)

    Raises:
        UnknownCriterionError: 未知の名前または書式不正
    """
    if not isinstance(spec, str) or not spec.strip():
        raise UnknownCriterionError(str(spec), KNOWN_CRITERIA)
    name, _, rest = spec.strip().partition(":")
    name = name.strip().lower()
    if name not in KNOWN_CRITERIA:
        raise UnknownCriterionError(name, KNOWN_CRITERIA)
    if name == "thm2":
        inner = parse_criterion(rest or "vicente")
        if inner[0] not in TUPLE_PRESETS:
            raise UnknownCriterionError(rest, TUPLE_PRESETS)
        return name, {"tuples": inner}
    params: Dict[str, Any] = {}
    if rest:
        for item in rest.split(","):
            key, sep, value = item.partition("=")
            if not sep or not key.strip():
                raise UnknownCriterionError(spec, KNOWN_CRITERIA)
            _check_param(name, key.strip())
            params[key.strip()] = _parse_value(value)
    return name, params


def _check_param(name: str, key: str) -> None:
    allowed = CRITERION_PARAMS.get(name, ())
    if key not in allowed:
        raise UnknownCriterionError(key, allowed, kind=f"{name} parameter")


def _preset_defaults(name: str) -> Dict[str, Any]:
    presets = _settings.criteria_config.get("presets", {})
    return dict(presets.get(name, {}).get("defaults", {}))


def preset_tuples(name: str, params: Dict[str, Any], dA: int, dB: int) -> Tuple[MeasurementTuple, MeasurementTuple]:
    """名前付きプリセットから (A, B) タプルを作る"""
    for key in params:
        _check_param(name, key)
    merged = {**_preset_defaults(name), **params}
    if name == "vicente":
        return tuple_vicente(dA), tuple_vicente(dB)
    if name == "sarbicki":
        return tuple_sarbicki(dA, float(merged.get("hA", 0.0))), tuple_sarbicki(dB, float(merged.get("hB", 0.0)))
    if name in ("simplex", "obs1"):
        return tuple_simplex(dA, merged.get("tA", 1.0)), tuple_simplex(dB, merged.get("tB", 1.0))
    if name in ("ccnr", "esic"):
        return tuple_simplex(dA, name), tuple_simplex(dB, name)
    raise UnknownCriterionError(name, TUPLE_PRESETS)


def evaluate(state: BipartiteState, criterion: str) -> CriterionReport:
    """
    判定基準文字列で評価（CLI check とスキャン共通の入口）

    Args:
        state: 二体状態
        criterion: "vicente", "sarbicki:hA=0,hB=0", "simplex:tA=1,tB=1", "ccnr", "esic",
                   "obs2:t=1", "ppt", "thm2:<preset>", "obs3:tA=0,tB=0", "lft-min"
    """
    name, params = parse_criterion(criterion)
    logger.debug(f"evaluate: {name} {params} on {state.dims}")

    if name == "ppt":
        return ppt_report(state)
    if name == "vicente":
        return vicente_check(state)
    if name == "sarbicki":
        merged = {**_preset_defaults(name), **params}
        return sarbicki_check(state, float(merged.get("hA", 0.0)), float(merged.get("hB", 0.0)))
    if name in ("simplex", "obs1"):
        merged = {**_preset_defaults("simplex"), **params}
        return observation1_check(state, merged.get("tA", 1.0), merged.get("tB", 1.0), criterion=name)
    if name in ("ccnr", "esic"):
        return observation1_check(state, name, name, criterion=name)
    if name == "obs2":
        t = params.get("t", 1.0)
        if isinstance(t, str) and t not in ("ccnr", "esic"):
            raise ParameterRangeError(f"obs2 needs a numeric t, got {t!r}")
        return observation2_check(state, t)

    from .lft import pipeline

    if name == "lft-min":
        return pipeline(state, "obs3")
    return pipeline(state, criterion)
