"""
LFT - 局所フィルタ変換と正規形、フィルタ後の判定
  ρ → (F_A⊗F_B)ρ(F_A⊗F_B)† / Tr[…]
局所ランクが欠けていれば正規形は存在しない（NotFullLocalRankError）
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .bloch import decompose_bipartite
from .criteria import (
    CriterionReport,
    make_report,
    parse_criterion,
    preset_tuples,
)
from .errors import (
    NoConvergenceError,
    NotFullLocalRankError,
    SingularBelowCutoffError,
    ParameterRangeError,
    UnknownCriterionError,
)
from .linalg import hermitian_eig, kron, partial_trace, psd_inv_sqrt, psd_sqrt, trace_norm
from .observables import MeasurementTuple, TraceSpec, resolve_trace
from .settings import get_settings
from .states import BipartiteState

logger = logging.getLogger(__name__)

_settings = get_settings()
RANK_CUTOFF = _settings.tolerance("rank_cutoff")
PIPELINE_CRITERIA = ("obs3", "thm2", "lft-min")


@dataclass(frozen=True, eq=False)
class NormalFormResult:
    """正規形 ρ̃ と累積フィルタ"""
    rho_tilde: BipartiteState
    F_A: np.ndarray
    F_B: np.ndarray
    iterations: int
    residual: float

    @property
    def T_tilde(self) -> np.ndarray:
        return decompose_bipartite(self.rho_tilde).T

    def to_dict(self) -> Dict[str, Any]:
        def _entries(M: np.ndarray):
            return [[[float(z.real), float(z.imag)] for z in row] for row in M]

        return {
            "dA": self.rho_tilde.dA,
            "dB": self.rho_tilde.dB,
            "T_tilde": self.T_tilde.tolist(),
            "residual": self.residual,
            "iterations": self.iterations,
            "F_A": _entries(self.F_A),
            "F_B": _entries(self.F_B),
        }


def local_ranks(state: BipartiteState, cutoff: float = RANK_CUTOFF) -> Tuple[int, int]:
    """縮約状態のランク（固有値 > cutoff の個数）"""
    ranks = []
    for side in ("A", "B"):
        evals, _ = hermitian_eig(state.reduced(side))
        ranks.append(int(np.sum(evals > cutoff)))
    return ranks[0], ranks[1]


def _deviation(rho: np.ndarray, dA: int, dB: int) -> float:
    rA = partial_trace(rho, dA, dB, "B")
    rB = partial_trace(rho, dA, dB, "A")
    return max(
        float(np.max(np.abs(rA - np.eye(dA) / dA))),
        float(np.max(np.abs(rB - np.eye(dB) / dB))),
    )


def _filtered(rho: np.ndarray, F_A: np.ndarray, F_B: np.ndarray) -> np.ndarray:
    F = kron(F_A, F_B)
    out = F @ rho @ F.conj().T
    return out / np.trace(out).real


def normal_form(state: BipartiteState, tol: Optional[float] = None, max_iter: Optional[int] = None) -> NormalFormResult:
    """
    交互の局所白色化で正規形を求める
    各ステップ F ← ρ_red^{−1/2}/√d を片側に掛けて正規化

    Args:
        state: 二体状態
        tol: 縮約状態と 𝟙/d の max ノルム差の許容値
        max_iter: 最大スイープ数

    Raises:
        NotFullLocalRankError: 縮約状態の固有値が cutoff 以下になった
        NoConvergenceError: max_iter 以内に収束しない
    """
    defaults = _settings.normal_form_defaults()
    tol = defaults["tol"] if tol is None else tol
    max_iter = defaults["max_iter"] if max_iter is None else max_iter
    if max_iter < 1:
        raise ParameterRangeError(f"max_iter must be >= 1, got {max_iter}")

    dA, dB = state.dims
    ranks = local_ranks(state)
    if ranks != (dA, dB):
        raise NotFullLocalRankError(ranks, (dA, dB), 0)

    rho = np.array(state.rho)
    F_A = np.eye(dA, dtype=complex)
    F_B = np.eye(dB, dtype=complex)
    residual = _deviation(rho, dA, dB)

    for iteration in range(1, max_iter + 1):
        try:
            g_A = psd_inv_sqrt(partial_trace(rho, dA, dB, "B"), RANK_CUTOFF) / np.sqrt(dA)
            rho = _filtered(rho, g_A, np.eye(dB))
            g_B = psd_inv_sqrt(partial_trace(rho, dA, dB, "A"), RANK_CUTOFF) / np.sqrt(dB)
            rho = _filtered(rho, np.eye(dA), g_B)
        except SingularBelowCutoffError:
            raise NotFullLocalRankError(local_ranks(BipartiteState(dA, dB, rho)), (dA, dB), iteration)
        F_A = g_A @ F_A
        F_B = g_B @ F_B
        residual = _deviation(rho, dA, dB)
        logger.debug(f"normal_form iter {iteration}: residual {residual:.3e}")
        if residual < tol:
            break
    else:
        raise NoConvergenceError(residual, max_iter, tol)

    rho_tilde = _filtered(np.asarray(state.rho), F_A, F_B)
    residual = _deviation(rho_tilde, dA, dB)
    if residual > tol:
        raise NoConvergenceError(residual, iteration, tol)
    return NormalFormResult(
        rho_tilde=BipartiteState(dA, dB, rho_tilde),
        F_A=F_A,
        F_B=F_B,
        iterations=iteration,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# フィルタ後の判定
# ---------------------------------------------------------------------------

def theorem2_check(
    state: BipartiteState,
    A: MeasurementTuple,
    B: MeasurementTuple,
    nf: Optional[NormalFormResult] = None,
) -> CriterionReport:
    """
    ‖√𝒜 𝒯̃ √ℬ‖_tr ≤ κ_Aκ_B − |t⃗^A||t⃗^B|/(d_Ad_B)
    𝒜 = Σ_μ a⃗_μ a⃗_μᵀ, ℬ = Σ_μ b⃗_μ b⃗_μᵀ
    """
    scale_a, scale_b = A.scale, B.scale
    nf = nf or normal_form(state)
    dA, dB = state.dims
    sqrt_a = psd_sqrt(A.abloch @ A.abloch.T).real
    sqrt_b = psd_sqrt(B.abloch @ B.abloch.T).real
    statistic = trace_norm(sqrt_a @ nf.T_tilde @ sqrt_b)
    bound = scale_a.kappa * scale_b.kappa - A.t_norm * B.t_norm / (dA * dB)
    return make_report(
        "thm2",
        statistic,
        bound,
        params={"A": A.label(), "B": B.label()},
        details={"iterations": nf.iterations, "residual": nf.residual},
    )


def observation3_bound(dA: int, dB: int, tA: TraceSpec = 0.0, tB: TraceSpec = 0.0) -> float:
    """
    κ(t_A, t_B) = √((d_A²−1)(d_B²−1))/(d_Ad_B) · (√(t_A² + 2d_A/(d_A+1))·√(t_B² + 2d_B/(d_B+1)) − |t_At_B|)
    """
    ta = resolve_trace(dA, tA)
    tb = resolve_trace(dB, tB)
    prefactor = np.sqrt((dA**2 - 1) * (dB**2 - 1)) / (dA * dB)
    inner = np.sqrt(ta**2 + 2.0 * dA / (dA + 1)) * np.sqrt(tb**2 + 2.0 * dB / (dB + 1)) - abs(ta * tb)
    return float(prefactor * inner)


def kappa_min(dA: int, dB: int) -> float:
    """min κ(t_A, t_B) = 2√((d_A−1)(d_B−1)/(d_Ad_B))（t_A = t_B = 0 で到達）"""
    return float(2.0 * np.sqrt((dA - 1) * (dB - 1) / (dA * dB)))


def observation3_check(
    state: BipartiteState,
    tA: TraceSpec = 0.0,
    tB: TraceSpec = 0.0,
    nf: Optional[NormalFormResult] = None,
) -> CriterionReport:
    """‖𝒯̃‖_tr ≤ κ(t_A, t_B)"""
    nf = nf or normal_form(state)
    dA, dB = state.dims
    ta, tb = resolve_trace(dA, tA), resolve_trace(dB, tB)
    return make_report(
        "obs3",
        trace_norm(nf.T_tilde),
        observation3_bound(dA, dB, ta, tb),
        params={"tA": ta, "tB": tb},
        details={"iterations": nf.iterations, "residual": nf.residual},
    )


def lft_table(dA: int, dB: int) -> Dict[str, float]:
    """フィルタ後の上界（すべて ‖𝒯̃‖_tr に対する値）"""
    return {
        "kappa_min": kappa_min(dA, dB),
        "vicente": kappa_min(dA, dB),
        "traceless_simplex": observation3_bound(dA, dB, 0.0, 0.0),
        "ccnr": float(2.0 - 2.0 / np.sqrt(dA * dB)),
        "esic": float(4.0 - 2.0 * np.sqrt((dA + 1) * (dB + 1) / (dA * dB))),
    }


# ---------------------------------------------------------------------------
# パイプライン
# ---------------------------------------------------------------------------

def _support(rho_red: np.ndarray) -> np.ndarray:
    evals, evecs = hermitian_eig(rho_red)
    return evecs[:, evals > RANK_CUTOFF]


def project_to_support(state: BipartiteState) -> BipartiteState:
    """縮約状態の台への射影（等長写像 V_A⊗V_B で圧縮）"""
    V = kron(_support(state.reduced("A")), _support(state.reduced("B")))
    rho = V.conj().T @ np.asarray(state.rho) @ V
    rA, rB = local_ranks(state)
    return BipartiteState(rA, rB, rho / np.trace(rho).real)


def _post_lft(state: BipartiteState, name: str, params: Dict[str, Any]) -> CriterionReport:
    nf = normal_form(state)
    if name == "thm2":
        inner_name, inner_params = params["tuples"]
        A, B = preset_tuples(inner_name, inner_params, state.dA, state.dB)
        return theorem2_check(state, A, B, nf)
    return observation3_check(state, params.get("tA", 0.0), params.get("tB", 0.0), nf)


def pipeline(state: BipartiteState, criterion: str = "obs3", _depth: int = 0) -> CriterionReport:
    """
    局所ランク → (欠損なら台へ射影して 1 回だけ再帰) → 正規形 → obs3 / thm2

    Args:
        state: 二体状態
        criterion: "obs3[:tA=..,tB=..]" / "thm2:<preset>" / "lft-min"

    Raises:
        NoConvergenceError: 正規形が収束しない
    """
    name, params = parse_criterion(criterion)
    if name not in PIPELINE_CRITERIA:
        raise UnknownCriterionError(name, PIPELINE_CRITERIA)
    if name == "lft-min":
        name, params = "obs3", {}

    ranks = local_ranks(state)
    if ranks == state.dims:
        return _post_lft(state, name, params)

    if min(ranks) == 1:
        logger.info(f"pipeline: local rank {ranks} means a product state")
        return make_report(
            name, 0.0, 0.0, params=params, details={"local_ranks": list(ranks), "reduction": "product"}
        )
    if _depth >= 1:
        logger.info(f"pipeline: still rank deficient after projection {ranks}, giving up")
        return make_report(
            name, 0.0, 0.0, params=params, details={"local_ranks": list(ranks), "reduction": "irreducible"}
        )

    projected = project_to_support(state)
    logger.info(f"pipeline: projected {state.dims} -> {projected.dims}")
    report = pipeline(projected, criterion, _depth + 1)
    details = {**report.details, "local_ranks": list(ranks), "projected_dims": list(projected.dims)}
    return make_report(
        report.criterion,
        report.statistic,
        report.bound,
        report.margin,
        params=report.params,
        details=details,
    )
