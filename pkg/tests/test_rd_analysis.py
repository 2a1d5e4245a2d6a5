import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rdc.analysis import (
    RDCurve, RDPoint, bd_rate, log_rate_interpolant, overlap, pareto_frontier, rank_analysis,
    rate_savings_curve, read_curves, write_curves,
)
from rdc.errors import IngestionError, NoOverlapError

from oracles import bd_rate_trapezoid, brute_frontier, pchip_eval

REF = RDCurve.from_arrays("ref", [0.25, 0.5, 1.0, 2.0], [32, 35, 38, 41])
TEST = RDCurve.from_arrays("test", [0.25 * 0.9, 0.5 * 0.85, 1.0 * 0.8, 2.0 * 0.8], [32, 35, 38, 41])


def test_identical_curves():
    assert abs(bd_rate(REF, REF).percent_rate_delta) <= 1e-9


@pytest.mark.parametrize("method", ["pchip", "cubic_fit"])
def test_scaled_rates(method):
    res = bd_rate(REF.scaled(1.30, "x"), REF, method=method)
    assert res.percent_rate_delta == pytest.approx(30.0, abs=0.01)
    assert (res.quality_lo, res.quality_hi, res.method) == (32, 41, method)


@pytest.mark.parametrize("method", ["pchip", "cubic_fit"])
def test_anti_symmetry(method):
    a = bd_rate(TEST, REF, method=method).percent_rate_delta
    b = bd_rate(REF, TEST, method=method).percent_rate_delta
    assert (1 + a / 100) * (1 + b / 100) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("method", ["pchip", "cubic_fit"])
def test_four_point_case_against_trapezoid_oracle(method):
    ours = bd_rate(TEST, REF, method=method).percent_rate_delta
    oracle = bd_rate_trapezoid((TEST.bpp, TEST.psnr), (REF.bpp, REF.psnr), method=method)
    assert ours < 0
    assert abs(ours - oracle) <= 0.05 * abs(oracle) / 100 + 1e-12
    assert ours == pytest.approx(oracle, abs=0.05)


def test_hand_pchip_matches_interpolant():
    q = np.linspace(32, 41, 77)
    assert np.allclose(log_rate_interpolant(TEST)(q), pchip_eval(TEST.psnr, np.log2(TEST.bpp), q), atol=1e-12)


def test_interpolant_knots_and_monotone():
    f = log_rate_interpolant(TEST)
    assert np.allclose(f(TEST.psnr), np.log2(TEST.bpp), atol=1e-12)
    assert np.all(np.diff(f(np.linspace(32, 41, 1000))) >= 0)


def test_explicit_range_and_errors():
    res = bd_rate(TEST, REF, (33.0, 40.0))
    assert (res.quality_lo, res.quality_hi) == (33.0, 40.0)
    with pytest.raises(NoOverlapError):
        bd_rate(TEST, REF, (31.0, 40.0))
    with pytest.raises(NoOverlapError):
        bd_rate(TEST, REF, (36.0, 36.0))
    far = RDCurve.from_arrays("far", [0.1, 0.2], [20, 25])
    with pytest.raises(NoOverlapError):
        bd_rate(far, REF)


def test_curve_validation():
    with pytest.raises(IngestionError):
        RDCurve.from_arrays("a", [1.0], [30])
    with pytest.raises(IngestionError):
        RDCurve.from_arrays("a", [1.0, 0.5], [30, 35])
    with pytest.raises(IngestionError):
        RDCurve.from_arrays("a", [1.0, 2.0], [30, 30])
    with pytest.raises(IngestionError):
        RDCurve.from_arrays("a", [0.0, 2.0], [30, 31])
    c = RDCurve.from_arrays("a", [2.0, 1.0], [35, 30])   # sorted on construction
    assert [p.psnr_db for p in c.points] == [30, 35]


def test_rate_savings_examples():
    ref = RDCurve.from_arrays("r", [0.5, 1.0, 2.0], [30, 35, 40])
    test = RDCurve.from_arrays("t", [0.4, 0.8, 1.6], [30, 35, 40])
    out = rate_savings_curve(test, ref, [35.0])
    assert out[0].savings_percent == pytest.approx(20.0)
    assert all(s.savings_percent == 0 for s in rate_savings_curve(ref, ref, np.linspace(30, 40, 5)))
    marked = rate_savings_curve(test, ref, [29.0, 32.0, 41.0])
    assert marked[0].error and marked[2].error and marked[1].error is None
    assert marked[0].savings_percent is None


@pytest.mark.parametrize("c", [5.0, 20.0, 30.0])
def test_constant_savings_matches_bd(c):
    test = REF.scaled(1 - c / 100, "t")
    savings = rate_savings_curve(test, REF, np.linspace(32, 41, 25))
    assert all(s.savings_percent == pytest.approx(c) for s in savings)
    assert bd_rate(test, REF).percent_rate_delta == pytest.approx(-c, abs=1e-9)


def test_published_range_is_supported():
    anchor = RDCurve.from_arrays("bpg", [0.15, 0.3, 0.6, 1.2, 2.4], [29.0, 32.0, 35.5, 39.0, 42.5])
    model = anchor.scaled(0.77, "b")
    res = bd_rate(model, anchor, (31.6, 40.8))
    assert (res.quality_lo, res.quality_hi) == (31.6, 40.8)
    assert res.percent_rate_delta == pytest.approx(-23.0, abs=1e-9)


def test_overlap_of_many():
    a = RDCurve.from_arrays("a", [1, 2], [30, 40])
    b = RDCurve.from_arrays("b", [1, 2], [32, 42])
    c = RDCurve.from_arrays("c", [1, 2], [31, 39])
    assert overlap([a, b, c]) == (32, 39)


def test_curve_csv_round_trip(tmp_path):
    path = tmp_path / "curves.csv"
    write_curves([REF, TEST], path)
    curves = read_curves(path)
    assert list(curves) == ["ref", "test"]
    assert curves["test"].points == TEST.points
    (tmp_path / "bad.csv").write_text("name,bpp,psnr\nx,1,2\n")
    with pytest.raises(IngestionError):
        read_curves(tmp_path / "bad.csv")
    (tmp_path / "nm.csv").write_text("label,bpp,psnr\nx,1,30\nx,0.5,35\n")
    with pytest.raises(IngestionError):
        read_curves(tmp_path / "nm.csv")


def test_pareto_examples():
    front = pareto_frontier([(100, 2.0, "a"), (200, 1.5, "b"), (300, 1.8, "c")])
    assert [(p.flops, p.rd_loss) for p in front] == [(100, 2.0), (200, 1.5)]
    assert [p.label for p in pareto_frontier([{"flops": 1, "rd_loss": 1, "label": "x"}])] == ["x"]
    ties = pareto_frontier([(1, 1, "a"), (1, 1, "b"), (2, 1, "c"), (1, 2, "d")])
    assert sorted(p.label for p in ties) == ["a", "b"]


def test_pareto_random_against_oracle():
    rng = np.random.default_rng(0)
    pts = [(float(f), float(l)) for f, l in rng.random((100, 2))]
    ours = [(p.flops, p.rd_loss) for p in pareto_frontier(pts)]
    assert ours == brute_frontier(pts)


coords = st.integers(min_value=0, max_value=20).map(float)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(coords, coords), min_size=1, max_size=60))
def test_pareto_property(points):
    front = pareto_frontier(points)
    got = sorted((p.flops, p.rd_loss) for p in front)
    assert got == brute_frontier(points)
    assert [p.flops for p in front] == sorted(p.flops for p in front)
    again = pareto_frontier(front)
    assert [(p.flops, p.rd_loss) for p in again] == [(p.flops, p.rd_loss) for p in front]


TABLE_FLOPS = [1076.4, 631.1, 392.5, 342.1, 252.1, 200.1, 117.4]
TABLE_A100 = [9.9, 10.7, 10.8, 11.1, 31.5, 69.0, 95.9]


def test_rank_published_rows():
    rows = [{"label": l, "kflops_px": f, "speed_a": s} for l, f, s in zip("ABCDEFG", TABLE_FLOPS, TABLE_A100)]
    res = rank_analysis(rows)
    assert res.kendall_tau_flops_vs_speed == pytest.approx(1.0)
    assert res.inversions == [] and res.rank_pairs == []


def test_rank_identical_orderings():
    rows = [{"label": l, "kflops_px": f, "speed_a": s, "speed_b": 2 * s}
            for l, f, s in zip("ABCDEFG", TABLE_FLOPS, TABLE_A100)]
    res = rank_analysis(rows)
    assert res.inversions == []
    assert res.rank_pairs == [(7, 7), (6, 6), (5, 5), (4, 4), (3, 3), (2, 2), (1, 1)]


def test_rank_single_swap():
    rows = [{"label": "A", "kflops_px": 1, "speed_a": 10, "speed_b": 20},
            {"label": "B", "kflops_px": 2, "speed_a": 20, "speed_b": 10}]
    res = rank_analysis(rows)
    assert res.inversions == [("A", "B")]
    assert res.kendall_tau_flops_vs_speed == pytest.approx(-1.0)


def test_rank_errors():
    with pytest.raises(IngestionError):
        rank_analysis([{"label": "A", "kflops_px": 1, "speed_a": 1}, {"label": "A", "kflops_px": 2, "speed_a": 2}])
    with pytest.raises(IngestionError):
        rank_analysis([{"label": "A", "kflops_px": 1, "speed_a": 1}])


def test_rdpoint_is_value_type():
    assert RDPoint(1.0, 30.0) == RDPoint(1.0, 30.0)
