# tests/test_acceptance.py
"""
受け入れ基準のテスト
フルサイズの実行は slow マーカー付き（pytest -m slow で実行）
"""

import numpy as np
import pytest

from app.core.criteria import (
    ccnr_direct,
    correlation_matrix,
    evaluate,
    observation1_check,
    observation2_check,
    sarbicki_check,
    table1_bound,
    theorem1_check,
)
from app.core.lft import lft_table, normal_form, observation3_bound, theorem2_check
from app.core.observables import simplex_vertices, tuple_sarbicki, tuple_simplex, tuple_vicente
from app.core.scan_controller import (
    ScanConfig,
    ScanController,
    detected_counts,
    upb_thresholds,
)
from app.core.states import max_entangled, random_hs, random_separable, werner
from app.core.witness import build_witness, witness_check, witness_expectation

T_LADDER = ["ccnr", 1.2, 1.5, "esic"]


def assert_nondecreasing(values):
    values = list(values)
    assert all(a <= b for a, b in zip(values, values[1:])), values


class TestExactness:
    @pytest.mark.parametrize("n", [3, 8, 15, 24, 35, 63])
    def test_simplex(self, n):
        V = simplex_vertices(n)
        assert np.allclose(V.T @ V, ((n + 1) * np.eye(n + 1) - 1) / n, atol=1e-12)

    def test_simplex_entry(self):
        assert simplex_vertices(8)[1, 1] == pytest.approx(3 * np.sqrt(7) / 8, abs=1e-12)

    def test_table(self):
        for dA in range(2, 6):
            for dB in range(2, 6):
                for name in ("vicente", "ccnr", "esic"):
                    if name == "vicente":
                        A, B = tuple_vicente(dA), tuple_vicente(dB)
                    else:
                        A, B = tuple_simplex(dA, name), tuple_simplex(dB, name)
                    assert abs(A.kappa * B.kappa - table1_bound(name, dA, dB)) < 1e-12
                A, B = tuple_sarbicki(dA, 0.5), tuple_sarbicki(dB, 1.5)
                assert abs(A.kappa * B.kappa - table1_bound("sarbicki", dA, dB, hA=0.5, hB=1.5)) < 1e-12
        assert table1_bound("ccnr", 3, 3) == pytest.approx(2.25)
        assert table1_bound("esic", 3, 3) == pytest.approx(4.5)

    def test_ccnr_equivalence(self):
        scale = 9 / 8
        for index in range(100):
            state = random_hs(3, 3, seed=2024, index=index)
            report = observation1_check(state, "ccnr", "ccnr")
            direct = scale * (ccnr_direct(state) - 2.0)
            assert abs(report.margin - direct) < 1e-9
            assert report.entangled == (direct > 1e-9)

    @pytest.mark.parametrize("d", [2, 3, 5, 8])
    def test_werner(self, d):
        phis = np.linspace(-1, 1, 201)
        step = phis[1] - phis[0]
        threshold = -(d - 2) / d
        for phi in phis:
            state = werner(d, float(np.clip(phi, -1, 1)))
            for t in (0.5, 1.0, 2.0):
                assert observation2_check(state, t).entangled == (phi < -1e-9), (d, phi, t)
            detected = sarbicki_check(state).entangled
            if abs(phi - threshold) > step:
                assert detected == (phi < threshold), (d, phi)

    def test_post_lft_presets(self):
        for dA in range(2, 9):
            for dB in range(2, 9):
                table = lft_table(dA, dB)
                assert abs(observation3_bound(dA, dB, "esic", "esic") - table["esic"]) < 1e-12
                if dA == dB:
                    assert abs(table["esic"] - table["ccnr"]) < 1e-12
                else:
                    assert table["esic"] < table["ccnr"]


class TestWitnessConsistency:
    def test_flagged_states(self):
        states = [max_entangled(2), max_entangled(3), werner(3, -1.0), werner(4, -0.6)]
        states += [random_hs(2, 2, seed=6, index=i) for i in range(30)]
        flagged = 0
        for state in states:
            for A, B in [
                (tuple_vicente(state.dA), tuple_vicente(state.dB)),
                (tuple_simplex(state.dA, "esic"), tuple_simplex(state.dB, "esic")),
            ]:
                report = theorem1_check(state, A, B)
                if not report.entangled:
                    continue
                flagged += 1
                witness, value = witness_check(state, A, B)
                assert value == pytest.approx(witness.kappa - report.statistic, abs=1e-9)
                assert value < 0
        assert flagged >= 8

    @pytest.mark.slow
    def test_separable_monte_carlo(self):
        witnesses = {2: [], 3: []}
        for index in range(400):
            d = 2 + index % 2
            if len(witnesses[d]) >= 5:
                continue
            state = random_hs(d, d, seed=1, index=index)
            A, B = tuple_simplex(d, "esic"), tuple_simplex(d, "esic")
            if theorem1_check(state, A, B).entangled:
                witnesses[d].append(build_witness(state, A, B))
        assert len(witnesses[2]) == 5 and len(witnesses[3]) == 5
        for index in range(10000):
            d = 2 + index % 2
            state = random_separable(d, d, 4, seed=31337, index=index)
            for witness in witnesses[d]:
                assert witness_expectation(witness, state) >= -1e-9


class TestNormalFormContract:
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
    def test_quick(self, dims):
        self._check(dims, 20)

    @pytest.mark.slow
    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
    def test_full(self, dims):
        self._check(dims, 500)

    @staticmethod
    def _check(dims, count):
        dA, dB = dims
        A, B = tuple_simplex(dA, 1.1), tuple_simplex(dB, "esic")
        for index in range(count):
            state = random_hs(dA, dB, seed=500, index=index)
            nf = normal_form(state)
            assert nf.residual < 1e-10
            assert nf.iterations <= 1000
            lhs = correlation_matrix(nf.rho_tilde, A, B).trace_norm
            rhs = A.t_norm * B.t_norm / (dA * dB) + theorem2_check(state, A, B, nf).statistic
            assert abs(lhs - rhs) < 1e-8


class TestOneSided:
    CRITERIA = ["vicente", "sarbicki:hA=1,hB=1", "simplex:tA=2,tB=2", "ccnr", "esic", "lft-min", "thm2:esic"]

    def _check(self, count):
        dims = [(2, 2), (2, 3), (3, 3)]
        for index in range(count):
            dA, dB = dims[index % 3]
            state = random_separable(dA, dB, dA * dB + 1, seed=4242, index=index)
            criteria = list(self.CRITERIA)
            if dA == dB:
                criteria += ["obs2:t=1", "obs2:t=esic"]
            for c in criteria:
                assert not evaluate(state, c).entangled, (c, dA, dB, index)

    def test_quick(self):
        self._check(150)

    @pytest.mark.slow
    def test_full(self):
        self._check(10000)


@pytest.mark.slow
class TestFamilies:
    def test_horodecki_monotone(self, frozen):
        config = ScanConfig(
            experiment="horodecki", grids={"s": "0:1:101", "p": "0:1:101"}, t_values=T_LADDER
        )
        df = ScanController(config).run()
        counts = detected_counts(df)
        assert_nondecreasing(counts)
        frozen.check("horodecki_detected.101x101", {str(k): int(v) for k, v in counts.items()})

    def test_upb_threshold(self, frozen):
        config = ScanConfig(experiment="upb", grids={"p": "0:1:101"}, t_values=["ccnr", "esic"])
        p_star = upb_thresholds(ScanController(config).run())
        assert not np.isnan(p_star["esic"])
        if not np.isnan(p_star["ccnr"]):
            assert p_star["esic"] <= p_star["ccnr"]
        frozen.check("upb_p_star.p101", {str(k): (None if np.isnan(v) else float(v)) for k, v in p_star.items()})

    def test_chessboard_monotone(self, frozen):
        config = ScanConfig(experiment="chessboard", samples=5000, t_values=T_LADDER)
        df = ScanController(config).run()
        assert_nondecreasing(df["fraction"])
        detected = {str(label): int(n) for label, n in zip(df["t_label"], df["detected"])}
        frozen.check(f"chessboard_detected.seed{config.seed}.n5000", detected)

    def test_random_families(self):
        config = ScanConfig(experiment="random", samples=2000, dims=[2, 3, 5], t_values=[5.0], h_values=[5.0])
        df = ScanController(config).run().set_index(["dim", "criterion"])
        obs1 = df.xs("obs1", level="criterion")["fraction"]
        sarbicki = df.xs("sarbicki", level="criterion")["fraction"]
        assert abs(obs1[3] - sarbicki[3]) < 0.02
        assert obs1[3] > obs1[2] and obs1[3] > obs1[5]
