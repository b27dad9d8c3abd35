"""
Witness - 相関行列の SVD から最適観測量と線形エンタングルメント・ウィットネスを作る
  C = PΣQᵀ,  A′ = PᵀA,  B′ = QᵀB
  W = κ𝟙⊗𝟙 − Σ_{μ≤r} A′_μ⊗B′_μ
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from .criteria import CorrelationMatrix, correlation_matrix
from .errors import DimensionMismatchError, NotHermitianError
from .linalg import hermitian_part, kron, svd_real
from .observables import MeasurementTuple, padded, tuple_operators
from .settings import get_settings
from .states import BipartiteState

logger = logging.getLogger(__name__)

_settings = get_settings()
RANK_CUTOFF = _settings.tolerance("rank_cutoff")
IMAG_TOL = _settings.tolerance("imaginary")


@dataclass(frozen=True, eq=False)
class Witness:
    """W と、それを組み立てた最適観測量"""
    W: np.ndarray
    kappa: float
    optimal_a: List[np.ndarray] = field(default_factory=list)
    optimal_b: List[np.ndarray] = field(default_factory=list)
    singular_values: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def rank(self) -> int:
        return len(self.optimal_a)

    def to_dict(self, expectation: Optional[float] = None) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "kappa": self.kappa,
            "rank": self.rank,
            "singular_values": [float(s) for s in self.singular_values],
            "W": [[[float(z.real), float(z.imag)] for z in row] for row in self.W],
        }
        if expectation is not None:
            out["expectation"] = expectation
        return out


def _rotated(tup: MeasurementTuple, O: np.ndarray) -> MeasurementTuple:
    """A′_μ = Σ_ν O_νμ A_ν"""
    return MeasurementTuple(
        dim=tup.dim,
        t=tup.t @ O,
        abloch=tup.abloch @ O,
        kind="rotated",
        params={"from": tup.label()},
    )


def optimal_observables(corr: CorrelationMatrix) -> Tuple[MeasurementTuple, MeasurementTuple, np.ndarray, int]:
    """
    ⟨A′_μ⊗B′_ν⟩ = (PᵀCQ)_μν が対角になる回転

    長さが違う場合は短い方を零観測量で埋める

    Returns:
        (A′, B′, singular_values, rank)
    """
    A, B = corr.tuple_a, corr.tuple_b
    k = max(A.m, B.m)
    C = np.zeros((k, k))
    C[: A.m, : B.m] = corr.C
    P, s, Q = svd_real(C)
    rank = int(np.sum(s > RANK_CUTOFF * max(1.0, float(s[0]) if s.size else 0.0)))
    if A.m != B.m:
        logger.debug(f"optimal_observables: padded ({A.m}, {B.m}) -> {k}")
    return _rotated(padded(A, k), P), _rotated(padded(B, k), Q), s, rank


def build_witness(state: BipartiteState, A: MeasurementTuple, B: MeasurementTuple) -> Witness:
    """
    W = κ_Aκ_B 𝟙 − Σ_{μ≤r} A′_μ⊗B′_μ  （Tr[Wρ] = κ − ‖C‖_tr）

    Raises:
        NotBalancedError: タプルが釣り合っていない
    """
    kappa = A.kappa * B.kappa
    corr = correlation_matrix(state, A, B)
    A_opt, B_opt, s, rank = optimal_observables(corr)
    ops_a = tuple_operators(A_opt)[:rank]
    ops_b = tuple_operators(B_opt)[:rank]
    n = state.dA * state.dB
    W = kappa * np.eye(n, dtype=complex)
    for a, b in zip(ops_a, ops_b):
        W = W - kron(a, b)
    W = hermitian_part(W)
    logger.debug(f"build_witness: kappa={kappa:.6g} rank={rank} ||C||_tr={float(np.sum(s)):.6g}")
    return Witness(W=W, kappa=kappa, optimal_a=ops_a, optimal_b=ops_b, singular_values=s[:rank])


def witness_expectation(W: Union[Witness, np.ndarray], rho: Union[BipartiteState, np.ndarray]) -> float:
    """
    Re Tr[Wρ]

    Raises:
        DimensionMismatchError: 行列サイズの不一致
        NotHermitianError: 虚部が許容値を超えた
    """
    W_mat = W.W if isinstance(W, Witness) else np.asarray(W)
    rho_mat = rho.rho if isinstance(rho, BipartiteState) else np.asarray(rho)
    if W_mat.shape != rho_mat.shape:
        raise DimensionMismatchError(f"witness {W_mat.shape} and state {rho_mat.shape} differ in size")
    value = complex(np.einsum("ij,ji->", W_mat, rho_mat))
    if abs(value.imag) > IMAG_TOL:
        raise NotHermitianError(abs(value.imag), IMAG_TOL)
    return float(value.real)


def witness_check(state: BipartiteState, A: MeasurementTuple, B: MeasurementTuple) -> Tuple[Witness, float]:
    """ウィットネスを作って同じ状態で評価する"""
    witness = build_witness(state, A, B)
    return witness, witness_expectation(witness, state)
