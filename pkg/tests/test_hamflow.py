import numpy as np
import pytest

from scatcalc.hamflow import (
    PhasePointChart,
    ThresholdDegeneracyError,
    boundary_chart_field,
    chart_field_by_limit,
    chart_transition,
    char_value,
    classify_radial,
    d_x1_model,
    find_radial_points,
    flow_trajectory,
    hamilton_field,
    helmholtz_model,
    helmholtz_radial_distance,
    klein_gordon_model,
    schrodinger_model,
    threshold_data,
    trajectory_rows,
    wave_model,
    x_dx_model,
)


class TestHamiltonField:
    def test_helmholtz_straight_lines(self):
        H = helmholtz_model(2.0, 3)
        dx, dxi = hamilton_field(H, np.array([1.0, 0.0, -1.0]), np.array([0.5, 1.0, 0.2]))
        assert np.allclose(dx, [1.0, 2.0, 0.4])
        assert np.allclose(dxi, 0.0)

    def test_first_derivative_model(self):
        H = d_x1_model(2)
        dx, dxi = hamilton_field(H, np.array([5.0, -2.0]), np.array([0.3, 0.4]))
        assert np.allclose(dx, [1.0, 0.0]) and np.allclose(dxi, 0.0)

    def test_x_dx_by_hand(self):
        H = x_dx_model()
        dx, dxi = hamilton_field(H, np.array([2.0]), np.array([-1.5]))
        assert np.allclose(dx, [2.0]) and np.allclose(dxi, [1.5])

    def test_generic_symbol_fallback(self):
        from scatcalc.symbols import Symbol
        from scatcalc.hamflow import SymbolHamiltonian

        p = Symbol(
            eval=lambda x, xi: np.sum(xi**2, axis=-1) - 1.0 + 0.0 * x[..., 0],
            order=(2.0, 0.0),
        )
        H = SymbolHamiltonian(p, (2.0, 0.0), None, {"dim": 2})
        dx, dxi = hamilton_field(H, np.array([0.3, 0.4]), np.array([0.6, 0.8]))
        assert np.allclose(dx, [1.2, 1.6], atol=1e-7)
        assert np.allclose(dxi, 0.0, atol=1e-7)


class TestChartFields:
    def test_helmholtz_vanishes_at_parallel_point(self):
        H = helmholtz_model(1.0, 2)
        xi = np.array([0.8, 0.6])
        pt = PhasePointChart(
            "spatial_face", {"rho": 0.0, "y": np.array([0.75]), "xi": xi}, axis=0, sign=1
        )
        f = boundary_chart_field(H, pt)
        assert f["rho"] == 0.0
        assert np.allclose(f["y"], 0.0)

    def test_klein_gordon_sink_point(self):
        H = klein_gordon_model(1.0)
        pt = PhasePointChart("kg_face", {"rho": 0.0, "v": 0.0, "tau": 1.3, "xi": 0.5}, sign=1)
        f = boundary_chart_field(H, pt)
        assert f["rho"] == 0.0 and f["v"] == 0.0
        verdict, eigs = classify_radial(H, pt)
        assert verdict == "sink"
        assert np.allclose(sorted(eigs.real), [-2.6, -2.6], atol=1e-6)

    def test_schrodinger_vanishes_at_doubled_frequency(self):
        H = schrodinger_model(1)
        pt = PhasePointChart(
            "schrodinger_time_face",
            {"rho": 0.0, "y": np.array([0.6]), "tau": -0.09, "xi": np.array([0.3])},
            sign=1,
        )
        f = boundary_chart_field(H, pt)
        assert f["rho"] == 0.0 and np.allclose(f["y"], 0.0)

    @pytest.mark.parametrize(
        "make_pt",
        [
            lambda: (
                helmholtz_model(1.0, 2),
                PhasePointChart(
                    "spatial_face",
                    {"rho": 0.0, "y": np.array([0.3]), "xi": np.array([0.8, 0.6])},
                    axis=0,
                    sign=1,
                ),
                ("rho", "y", "xi"),
            ),
            lambda: (
                klein_gordon_model(1.0),
                PhasePointChart(
                    "kg_face", {"rho": 0.0, "v": 0.2, "tau": np.sqrt(1.25), "xi": -0.5}, sign=1
                ),
                ("rho", "v", "tau", "xi"),
            ),
            lambda: (
                schrodinger_model(1),
                PhasePointChart(
                    "schrodinger_time_face",
                    {"rho": 0.0, "y": np.array([0.7]), "tau": -0.09, "xi": np.array([0.3])},
                    sign=1,
                ),
                ("rho", "y", "tau", "xi"),
            ),
        ],
    )
    def test_closed_form_matches_rescaled_limit(self, make_pt):
        H, pt, keys = make_pt()
        f = boundary_chart_field(H, pt)
        closed = np.concatenate([np.atleast_1d(np.asarray(f[k], dtype=float)) for k in keys])
        limit = chart_field_by_limit(H, pt)
        assert np.max(np.abs(closed - limit)) < 1e-6

    def test_tangency_of_rho_coefficient(self):
        # at rho = 0 the rho-component of every implemented field vanishes
        H = helmholtz_model(1.0, 3)
        rng = np.random.default_rng(5)
        for _ in range(10):
            xi = rng.standard_normal(3)
            xi /= np.linalg.norm(xi)
            y = rng.uniform(-0.9, 0.9, size=2)
            pt = PhasePointChart(
                "spatial_face", {"rho": 0.0, "y": y, "xi": xi}, axis=0, sign=1
            )
            assert abs(boundary_chart_field(H, pt)["rho"]) < 1e-9


class TestChartTransitions:
    def test_mutually_inverse(self):
        H = helmholtz_model(1.0, 3)
        pt = PhasePointChart(
            "spatial_face",
            {"rho": 0.2, "y": np.array([0.7, -0.4]), "xi": np.array([0.1, 0.2, 0.3])},
            axis=0,
            sign=1,
        )
        back = chart_transition(chart_transition(pt, H, 1), H, 0)
        assert abs(float(back.coords["rho"]) - 0.2) < 1e-10
        assert np.max(np.abs(np.asarray(back.coords["y"]) - [0.7, -0.4])) < 1e-10

    def test_invalid_target_rejected(self):
        H = helmholtz_model(1.0, 2)
        pt = PhasePointChart(
            "spatial_face", {"rho": 0.1, "y": np.array([0.0]), "xi": np.array([1.0, 0.0])},
            axis=0, sign=1,
        )
        with pytest.raises(ValueError):
            chart_transition(pt, H, 1)

    def test_negative_rho_rejected(self):
        with pytest.raises(ValueError):
            PhasePointChart("spatial_face", {"rho": -0.1, "y": np.zeros(1), "xi": np.ones(2)})


class TestFlow:
    H = helmholtz_model(1.0, 2)

    def random_boundary_start(self, rng):
        xi = rng.standard_normal(2)
        xi /= np.linalg.norm(xi)
        xd = rng.standard_normal(2)
        xd /= np.linalg.norm(xd)
        j = int(np.argmax(np.abs(xd)))
        others = [m for m in range(2) if m != j]
        return PhasePointChart(
            "spatial_face",
            {"rho": 0.0, "y": xd[others] / xd[j], "xi": xi},
            axis=j,
            sign=int(np.sign(xd[j])),
        )

    def test_boundary_trajectories_converge(self):
        rng = np.random.default_rng(11)
        for _ in range(8):
            start = self.random_boundary_start(rng)
            fwd = flow_trajectory(self.H, start, 20.0, 0.01)
            assert helmholtz_radial_distance(self.H, fwd[-1], "out") < 1e-3
            bwd = flow_trajectory(self.H, start, -20.0, 0.01)
            assert helmholtz_radial_distance(self.H, bwd[-1], "in") < 1e-3
            assert max(abs(float(p.coords["rho"])) for p in fwd) < 1e-9
            assert max(abs(char_value(self.H, p)) for p in fwd) < 1e-6

    def test_distance_monotone_after_transient(self):
        rng = np.random.default_rng(3)
        for _ in range(5):
            start = self.random_boundary_start(rng)
            path = flow_trajectory(self.H, start, 20.0, 0.01)
            d = [helmholtz_radial_distance(self.H, p, "out") for p in path[len(path) // 2 :]]
            assert all(d[i + 1] <= d[i] + 1e-12 for i in range(len(d) - 1))

    def test_chart_switch_fires_on_rotating_trajectory(self):
        # start x2-dominant with xi along e1: the boundary flow rotates xhat
        # to e1 and must hand over to the axis-0 chart on the way
        xi = np.array([1.0, 0.0])
        start = PhasePointChart(
            "spatial_face", {"rho": 0.0, "y": np.array([0.1]), "xi": xi}, axis=1, sign=1
        )
        path = flow_trajectory(self.H, start, 20.0, 0.01)
        axes_seen = {p.axis for p in path}
        assert axes_seen == {0, 1}
        assert helmholtz_radial_distance(self.H, path[-1], "out") < 1e-3

    def test_stationary_at_radial_point(self):
        xi = np.array([0.6, 0.8])
        start = PhasePointChart(
            "spatial_face", {"rho": 0.0, "y": np.array([0.75]), "xi": xi}, axis=1, sign=1
        )
        path = flow_trajectory(self.H, start, 5.0, 0.01)
        assert np.max(np.abs(np.asarray(path[-1].coords["y"]) - 0.75)) < 1e-14

    def test_interior_straight_line(self):
        xi = np.array([0.6, 0.8])
        start = PhasePointChart("interior", {"x": np.array([1.0, -2.0]), "xi": xi})
        path = flow_trajectory(self.H, start, 5.0, 0.01)
        exact = np.array([1.0, -2.0]) + 2 * xi * 5.0
        assert np.max(np.abs(np.asarray(path[-1].coords["x"]) - exact)) < 1e-10

    def test_large_step_rejected(self):
        start = PhasePointChart("interior", {"x": np.zeros(2), "xi": np.array([1.0, 0.0])})
        with pytest.raises(ValueError):
            flow_trajectory(self.H, start, 1.0, 0.1)

    def test_off_characteristic_start_rejected(self):
        start = PhasePointChart("interior", {"x": np.zeros(2), "xi": np.array([2.0, 0.0])})
        with pytest.raises(ValueError):
            flow_trajectory(self.H, start, 1.0, 0.01)

    def test_rows_export_shape(self):
        start = PhasePointChart("interior", {"x": np.zeros(2), "xi": np.array([1.0, 0.0])})
        rows = trajectory_rows(self.H, flow_trajectory(self.H, start, 0.1, 0.01))
        assert rows[0]["step"] == 0 and "abs_char" in rows[0]


class TestRadialPoints:
    def test_helmholtz_families(self):
        H = helmholtz_model(1.0, 2)
        rep = find_radial_points(H, resolution=8)
        assert len(rep.points) == 16
        for p in rep.points:
            assert abs(abs(p.tau) - 1.0) < 1e-8
            assert abs(p.mu) < 1e-8
            assert (p.family == "out") == (p.verdict == "sink")
            assert (p.family == "in") == (p.verdict == "source")

    def test_helmholtz_three_dimensional(self):
        H = helmholtz_model(1.5, 3)
        rep = find_radial_points(H, resolution=6)
        assert {(p.family, p.verdict) for p in rep.points} == {("in", "source"), ("out", "sink")}
        assert max(abs(abs(p.tau) - 1.5) for p in rep.points) < 1e-8
        assert max(abs(p.mu) for p in rep.points) < 1e-8
        p0 = [p for p in rep.points if p.family == "out"][0]
        b0, b1, _ = threshold_data(H, p0.point)
        assert b1 / b0 == pytest.approx(2.0, abs=1e-6)

    def test_helmholtz_sink_eigen_scale(self):
        # eigenvalues all at the -|xi_j| chart scale
        H = helmholtz_model(1.0, 2)
        rep = find_radial_points(H, resolution=4)
        p = [q for q in rep.points if q.family == "out"][0]
        xi = np.asarray(p.point.coords["xi"])
        scale = abs(xi[p.point.axis])
        assert np.allclose(p.eigenvalues.real, -scale, rtol=1e-6)

    def test_klein_gordon_caps(self):
        H = klein_gordon_model(1.0)
        rep = find_radial_points(H, resolution=5)
        plus = {(p.family, p.verdict) for p in rep.points if p.tau > 0}
        assert ("future_cap:tau+", "sink") in plus
        assert ("past_cap:tau+", "source") in plus
        p = [q for q in rep.points if q.family == "future_cap:tau+"][0]
        assert np.allclose(p.eigenvalues.real, -2 * p.tau, rtol=1e-6)

    def test_first_derivative_alignment(self):
        rep = find_radial_points(d_x1_model(2), resolution=5)
        assert {p.family for p in rep.points} == {"x1_plus", "x1_minus"}
        assert {p.verdict for p in rep.points} == {"sink", "source"}
        for p in rep.points:
            expected = "sink" if p.point.sign > 0 else "source"
            assert p.verdict == expected

    def test_x_dx_four_configurations(self):
        rep = find_radial_points(x_dx_model())
        got = {(p.family, p.verdict) for p in rep.points}
        assert got == {
            ("spatial_+", "sink"),
            ("spatial_-", "sink"),
            ("frequency_+", "source"),
            ("frequency_-", "source"),
        }

    def test_schrodinger_source_sink(self):
        rep = find_radial_points(schrodinger_model(1), resolution=4)
        assert {(p.family, p.verdict) for p in rep.points} == {("out", "sink"), ("in", "source")}

    def test_empty_scan_reports_not_raises(self):
        # the d_x1 scan in a chart family with no zeros stays silent
        rep = find_radial_points(d_x1_model(2), resolution=3)
        assert isinstance(rep.points, list)


class TestThresholdData:
    H = helmholtz_model(1.0, 2)

    def out_point(self):
        rep = find_radial_points(self.H, resolution=6)
        return [p for p in rep.points if p.family == "out"][0]

    def test_helmholtz_beta_values(self):
        p = self.out_point()
        b0, b1, th = threshold_data(self.H, p.point)
        xi = np.asarray(p.point.coords["xi"])
        assert b0 == pytest.approx(-abs(xi[p.point.axis]), rel=1e-6)
        assert b1 / b0 == pytest.approx(2.0, abs=1e-6)
        assert th == -0.5

    def test_in_point_opposite_sign_same_ratio(self):
        rep = find_radial_points(self.H, resolution=6)
        p_in = [p for p in rep.points if p.family == "in"][0]
        p_out = [p for p in rep.points if p.family == "out"][0]
        b0i, b1i, _ = threshold_data(self.H, p_in.point)
        b0o, b1o, _ = threshold_data(self.H, p_out.point)
        assert b0i > 0 > b0o
        assert b1i / b0i == pytest.approx(b1o / b0o, abs=1e-6)

    def test_ratio_invariant_under_rho_rescaling(self):
        p = self.out_point()
        b0, _, _ = threshold_data(self.H, p.point)
        b0c, _, _ = threshold_data(
            self.H, p.point, rho_fn=lambda q: 3.7 * float(q.coords["rho"])
        )
        assert b0c == pytest.approx(b0, abs=1e-9)

    def test_chart_independence_of_ratio(self):
        # the same radial point seen in two overlapping charts
        H = helmholtz_model(1.0, 2)
        xi = np.array([0.8, 0.6])
        pt0 = PhasePointChart(
            "spatial_face", {"rho": 0.0, "y": np.array([0.75]), "xi": xi}, axis=0, sign=1
        )
        pt1 = PhasePointChart(
            "spatial_face", {"rho": 0.0, "y": np.array([1 / 0.75]), "xi": xi}, axis=1, sign=1
        )
        b0a, b1a, _ = threshold_data(H, pt0)
        b0b, b1b, _ = threshold_data(H, pt1)
        assert b0a != pytest.approx(b0b, rel=1e-3)  # chart-scale quantities differ
        assert b1a / b0a == pytest.approx(b1b / b0b, abs=1e-6)

    def test_wave_operator_degenerate_gate(self):
        Hw = wave_model()
        pt = PhasePointChart("kg_face", {"rho": 0.0, "v": 0.0, "tau": 0.0, "xi": 0.0}, sign=1)
        verdict, eigs = classify_radial(Hw, pt)
        assert verdict == "degenerate"
        with pytest.raises(ThresholdDegeneracyError):
            threshold_data(Hw, pt)

    def test_massive_kg_not_degenerate(self):
        H = klein_gordon_model(1.0)
        pt = PhasePointChart("kg_face", {"rho": 0.0, "v": 0.0, "tau": 1.0, "xi": 0.0}, sign=1)
        b0, b1, th = threshold_data(H, pt)
        assert b0 < 0 and b1 < 0 and th == -0.5
