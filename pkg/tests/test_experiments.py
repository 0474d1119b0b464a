import math

import numpy as np
import pytest

from conftest import separable_square_eigenvalues
from latzeta import experiments

G_LSRW = 2.0 / np.pi


class TestPiTable:
    def test_prefactors(self):
        assert experiments.pi_prefactor("king") == pytest.approx(2.0 / 3.0, rel=1e-13)
        assert experiments.pi_prefactor("triangular") == pytest.approx(np.sqrt(3) / 2, rel=1e-13)
        assert experiments.pi_prefactor("knight") == pytest.approx(0.2, rel=1e-13)

    def test_internal_consistency(self):
        est = experiments.run_pi_table(["king"], [12])[0]
        lhs = est.pi_approx * est.trace
        rhs = est.prefactor * est.radius**2 * math.log(est.radius**2)
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert est.pi_approx > 0
        assert est.abs_error == abs(est.pi_approx - math.pi)

    def test_against_analytic_trace(self):
        radius = 20
        est = experiments.run_pi_table(["king"], [radius])[0]
        oracle_trace = float((1.0 / separable_square_eigenvalues("king", radius)).sum())
        assert est.trace == pytest.approx(oracle_trace, rel=1e-10)
        expected = (2.0 / 3.0) * radius**2 * math.log(radius**2) / oracle_trace
        assert est.pi_approx == pytest.approx(expected, rel=1e-10)

    def test_cartesian_pairs(self):
        table = experiments.run_pi_table(["king", "triangular"], [8, 10])
        assert [(e.walk, e.radius) for e in table] == [
            ("king", 8), ("king", 10), ("triangular", 8), ("triangular", 10)
        ]

    def test_threads_match_serial(self):
        serial = experiments.run_pi_table(["king"], [8, 12])
        threaded = experiments.run_pi_table(["king"], [8, 12], threads=2)
        assert [e.trace for e in serial] == [e.trace for e in threaded]


class TestGrowthFit:
    def test_exact_synthetic_recovery(self):
        ns = np.array([400.0, 900.0, 1600.0, 2500.0, 3600.0])
        zs = G_LSRW * ns * np.log(ns) + 3.0 * ns
        a, b, a_stderr, residuals = experiments.fit_trace_growth(ns, zs)
        assert a == pytest.approx(G_LSRW, abs=1e-9)
        assert b == pytest.approx(3.0, abs=1e-9)
        assert np.abs(residuals).max() <= 1e-9
        assert a_stderr == pytest.approx(0.0, abs=1e-9)

    def test_requires_four_sizes(self):
        with pytest.raises(experiments.ExperimentError):
            experiments.run_g_fit("lsrw", [10, 20, 30])

    def test_report_fields(self):
        report = experiments.run_g_fit("lsrw", [8, 12, 16, 20])
        assert report.walk == "lsrw"
        assert report.target == pytest.approx(G_LSRW, rel=1e-12)
        assert len(report.ns) == 4
        assert report.a > 0 and report.a_stderr >= 0
        assert report.a_relative_error >= 0

    def test_lazy_trace_doubles_nonlazy(self):
        # identical domains: the lazy generator is half the plain one, so
        # traces and fitted leading constants double exactly
        lazy = experiments.run_g_fit("lsrw", [8, 12, 16, 20])
        plain = experiments.run_g_fit("srw", [8, 12, 16, 20])
        assert np.abs(lazy.traces / plain.traces - 2.0).max() <= 1e-8
        assert lazy.a / plain.a == pytest.approx(2.0, abs=1e-8)


@pytest.fixture(scope="module")
def ledger_rows():
    return experiments.run_ledger("lsrw", 40, 0.25)


class TestLedger:
    def test_row_sources(self, ledger_rows):
        assert [r.source for r in ledger_rows] == [
            "Interior main term",
            "Interior fluctuation",
            "Boundary (early)",
            "Boundary (late)",
            "Long-time tail",
            "Weaker (QH-lite) dev.",
        ]

    def test_interior_main_term_offset_is_order_one(self, ledger_rows):
        row = ledger_rows[0]
        assert abs(row.details["offset"]) <= 2.0

    def test_fluctuation_is_small(self, ledger_rows):
        assert 0.0 <= ledger_rows[1].measured <= 1.0

    def test_boundary_counts(self, ledger_rows):
        row = ledger_rows[2]
        assert 0.5 <= row.measured <= 4.0
        assert row.details["max_interior_exit_prob"] <= 1e-4
        assert row.details["samples"] >= 1
        assert row.details["layer_count"] + row.details["interior_count"] == 1600

    def test_per_vertex_bound_gap(self, ledger_rows):
        row = ledger_rows[3]
        assert 0.0 < row.measured <= 3.0

    def test_long_time_tail_is_order_one(self, ledger_rows):
        row = ledger_rows[4]
        assert 0.0 <= row.measured <= 1.0
        assert row.details["geometric_remainder"] <= 1e-6

    def test_averaged_deviation_small(self, ledger_rows):
        assert abs(ledger_rows[5].measured) <= 0.05

    def test_eta_validated(self):
        with pytest.raises(Exception):
            experiments.run_ledger("lsrw", 20, 0.7)


class TestDimensionSanity:
    def test_small_path_is_exact(self):
        rows = experiments.run_dimension_sanity(path_radii=(2,), square_radii=())
        assert rows[0]["trace"] == pytest.approx(8.0 / 3.0, abs=1e-12)

    def test_path_ratio_bracket(self):
        rows = experiments.run_dimension_sanity(path_radii=(50, 100), square_radii=())
        ratios = [r["ratio"] for r in rows]
        assert all(0.25 <= x <= 0.40 for x in ratios)
        assert abs(ratios[0] - ratios[1]) / ratios[1] <= 0.25

    def test_square_normalizer(self):
        rows = experiments.run_dimension_sanity(path_radii=(), square_radii=(12, 20))
        for row in rows:
            n = row["n"]
            assert row["ratio"] == pytest.approx(row["trace"] / (n * math.log(n)), rel=1e-12)

    def test_square_ratio_stabilises(self):
        rows = experiments.run_dimension_sanity(path_radii=(), square_radii=(20, 40))
        r20, r40 = rows[0]["ratio"], rows[1]["ratio"]
        assert abs(r20 - r40) / r40 <= 0.20
