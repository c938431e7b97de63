import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.signal import find_peaks

from conftest import random_state
from qtransfer.dynamics import (
    SecularRegimeWarning,
    closed_form_double_A,
    closed_form_double_B_resonant,
    closed_form_double_B_secular,
    closed_form_single_A,
    closed_form_single_B_secular,
    default_grid,
    is_population_trapping,
    lossy_two_state_check,
    propagate,
    secular_frame_phases,
    single_A_discrepancy,
)
from qtransfer.hilbert import StateVector, get_frame, named_state
from qtransfer.model import CouplingConfig, SystemParams, build_hamiltonian

A, B = CouplingConfig.ATOM_MEDIATED, CouplingConfig.PHOTON_MEDIATED
T = default_grid()


class TestPropagate:
    def test_zero_generator(self):
        psi = random_state(np.random.default_rng(0), 8)
        tr = propagate(np.zeros((8, 8)), psi, [0, 1, 5])
        np.testing.assert_allclose(tr.states, np.tile(psi, (3, 1)), atol=1e-15)

    def test_w1_to_x1(self):
        p = SystemParams()
        tr = propagate(build_hamiltonian(A, 1, p), named_state("w1"), [np.pi / 4])
        x1 = named_state("x1").amplitudes
        assert abs(np.vdot(x1, tr.states[0])) ** 2 == pytest.approx(1, abs=1e-14)

    def test_u1_frozen(self):
        tr = propagate(build_hamiltonian(A, 1, SystemParams(delta=0.4)), named_state("u1"), T)
        np.testing.assert_allclose(tr.populations, np.tile(tr.populations[0], (T.size, 1)), atol=1e-13)

    def test_grid_defaults(self):
        assert T[0] == 0 and T[-1] == 20 and T.size == 2001

    @pytest.mark.parametrize(
        "times", [[1, 0.5], [-1, 0], [], [np.nan], [[0, 1]]]
    )
    def test_bad_times(self, times):
        with pytest.raises(ValueError):
            propagate(np.eye(4), np.array([1, 0, 0, 0]), times)

    def test_dimension_and_finite(self):
        with pytest.raises(ValueError):
            propagate(np.eye(4), np.ones(8) / np.sqrt(8), [0])
        with pytest.raises(ValueError):
            propagate(np.full((4, 4), np.inf), np.array([1, 0, 0, 0]), [0])

    def test_caller_times_untouched(self):
        t = np.linspace(0, 1, 5)
        propagate(np.eye(4), np.array([1, 0, 0, 0]), t)
        t[0] = 0.0  # still writable

    def test_hermitian_and_expm_agree(self):
        m = build_hamiltonian(B, 2, SystemParams(kappa=2, delta=1))
        psi = random_state(np.random.default_rng(3), 8)
        t = np.linspace(0, 5, 11)
        a = propagate(m, psi, t).states
        tiny = np.zeros_like(m)
        tiny[0, 0] = -1e-300j  # forces the non-Hermitian path
        b = propagate(m + tiny, psi, t).states
        np.testing.assert_allclose(a, b, atol=1e-11)

    @given(st.integers(0, 2**32 - 1), st.sampled_from([A, B]), st.sampled_from([1, 2, "augmented"]))
    def test_norm_conserved(self, seed, cfg, man):
        rng = np.random.default_rng(seed)
        p = SystemParams(g_a=rng.uniform(0, 2), g_b=rng.uniform(0, 2), delta=rng.uniform(-3, 3), kappa=rng.uniform(0, 10))
        m = build_hamiltonian(cfg, man, p)
        tr = propagate(m, random_state(rng, m.shape[0]), T)
        assert np.max(np.abs(tr.norms - 1)) < 1e-10

    @given(st.integers(0, 2**32 - 1), st.sampled_from([A, B]))
    def test_lossy_norm_monotone(self, seed, cfg):
        rng = np.random.default_rng(seed)
        p = SystemParams(kappa=rng.uniform(0, 5), delta=rng.uniform(-2, 2), Gamma=rng.uniform(0, 0.2), gamma=rng.uniform(0, 0.2))
        m = build_hamiltonian(cfg, 2, p, losses=True)
        n = propagate(m, random_state(rng, 8), np.linspace(0, 20, 201)).norms
        assert np.all(np.diff(n) <= 1e-12)


def _coords_traj(frame, cfg, params, init, times):
    fr = get_frame(frame, params)
    c0 = fr.amplitudes(np.asarray(init, dtype=complex))
    tr = propagate(build_hamiltonian(cfg, fr.manifold, params), c0, times)
    return tr.states @ fr.rows.T


class TestSingleA:
    def test_resonant_example(self):
        p = SystemParams(g_a=0.6, g_b=1.1)
        t = np.linspace(0, 3, 7)
        w, x, y, u = closed_form_single_A(p, (1, 0, 0, 0), t)
        om = np.sqrt(2) * p.g0
        np.testing.assert_allclose(w, np.cos(om * t), atol=1e-15)
        np.testing.assert_allclose(x, -1j * np.sin(om * t), atol=1e-15)

    def test_identity_at_zero(self):
        init = (0.1 + 0.2j, 0.3, -0.4j, 0.5)
        out = closed_form_single_A(SystemParams(delta=0.7), init, 0.0)
        np.testing.assert_allclose([complex(v) for v in out], init, atol=1e-15)

    @pytest.mark.parametrize("ga,gb", [(1, 1), (1, 2), (0.2, 0.9)])
    def test_resonant_matches_propagator(self, ga, gb, rng):
        p = SystemParams(g_a=ga, g_b=gb).with_phase(0.8)
        for _ in range(5):
            init = random_state(rng, 4)
            w, x, y, u = closed_form_single_A(p, init, T)
            ref = _coords_traj("single_A", A, p, [init[0], init[3], init[1], init[2]], T)
            got = np.stack([w, u, x, y], axis=1)
            assert np.max(np.abs(got - ref)) < 1e-9

    @pytest.mark.parametrize("d", [0.3, -1.2, 2 * np.sqrt(2)])
    def test_detuned_exact_form(self, d, rng):
        p = SystemParams(g_a=0.8, g_b=1.0, delta=d)
        init = random_state(rng, 4)
        w, x, y, u = closed_form_single_A(p, init, T, printed=False)
        ref = _coords_traj("single_A", A, p, [init[0], init[3], init[1], init[2]], T)
        assert np.max(np.abs(np.stack([w, u, x, y], 1) - ref)) < 1e-9

    def test_printed_detuned_discrepancy_recorded(self):
        # frozen diagnostic: printed detuned form vs the equations of motion
        p = SystemParams(delta=0.8)
        assert single_A_discrepancy(p, (1, 0, 0, 0), T) == pytest.approx(0.58834837923517, abs=1e-9)
        assert single_A_discrepancy(SystemParams(), (1, 0, 0, 0), T) < 1e-12
        d2 = single_A_discrepancy(p, (1, 0, 0, 0), T)
        assert d2 == single_A_discrepancy(p, (1, 0, 0, 0), T)  # stable


class TestSingleBSecular:
    def test_warns_outside_regime(self):
        with pytest.warns(SecularRegimeWarning):
            closed_form_single_B_secular(SystemParams(kappa=1), (1, 0, 0, 0), 0.1)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            closed_form_single_B_secular(SystemParams(kappa=10), (1, 0, 0, 0), 0.1)

    def test_identity(self):
        init = (0.5, 0.5j, -0.5, 0.5)
        out = closed_form_single_B_secular(SystemParams(kappa=10, delta=3), init, 0.0)
        np.testing.assert_allclose([complex(v) for v in out], init, atol=1e-15)

    def test_delta_equals_kappa_oscillation(self):
        p = SystemParams(kappa=10, delta=10)
        t = np.linspace(0, 5, 101)
        cs, ca, cp, cm = closed_form_single_B_secular(p, (1, 0, 0, 0), t)
        np.testing.assert_allclose(np.abs(cs) ** 2, np.cos(p.g0 * t / np.sqrt(2)) ** 2, atol=1e-14)
        np.testing.assert_allclose(np.abs(cp) ** 2, np.sin(p.g0 * t / np.sqrt(2)) ** 2, atol=1e-14)

    def test_equal_couplings_exact(self, rng):
        # with g_a = g_b the sectors decouple exactly, so no secular error at all
        p = SystemParams(kappa=10)
        t = np.linspace(0, 10 / p.g0, 501)
        for _ in range(5):
            init = random_state(rng, 4)
            got = np.stack(closed_form_single_B_secular(p, init, t), 1)
            assert np.max(np.abs(got - _coords_traj("single_B", B, p, init, t))) < 1e-12

    @pytest.mark.parametrize("gb", [0.9, 0.5])
    def test_error_shrinks_with_kappa(self, gb, rng):
        init = random_state(rng, 4)
        errs = []
        for k in (10, 40, 160):
            p = SystemParams(g_a=1, g_b=gb, kappa=k)
            t = np.linspace(0, 10 / p.g0, 2001)
            got = np.stack(closed_form_single_B_secular(p, init, t), 1)
            errs.append(np.max(np.abs(got - _coords_traj("single_B", B, p, init, t))))
        assert errs[0] > errs[1] > errs[2]


class TestDoubleA:
    def test_rejects_out_of_regime(self):
        with pytest.raises(ValueError):
            closed_form_double_A(SystemParams(g_b=2), np.eye(8)[0], 0.0)
        with pytest.raises(ValueError):
            closed_form_double_A(SystemParams(delta=1), np.eye(8)[0], 0.0)

    def test_examples(self):
        p = SystemParams()
        t = np.array([np.pi / 4, np.pi / (4 * np.sqrt(3))])
        w, q, *_ = closed_form_double_A(p, np.eye(8)[0], t)
        assert abs(q[0]) ** 2 == pytest.approx(1, abs=1e-15)
        _, _, u, z, *_ = closed_form_double_A(p, np.eye(8)[2], t)
        assert abs(z[1]) ** 2 == pytest.approx(1, abs=1e-15)
        out = closed_form_double_A(p, np.eye(8)[4], T)
        np.testing.assert_allclose(np.stack(out, 1), np.tile(np.eye(8)[4], (T.size, 1)), atol=0)

    @pytest.mark.parametrize("phase", [0.0, 1.1])
    def test_matches_propagator(self, phase, rng):
        p = SystemParams(g_a=0.7, g_b=0.7).with_phase(phase)
        for _ in range(5):
            init = random_state(rng, 8)
            got = np.stack(closed_form_double_A(p, init, T), 1)
            assert np.max(np.abs(got - _coords_traj("double_A", A, p, init, T))) < 1e-9

    def test_printed_rotation_is_populations_only(self):
        p = SystemParams()
        init = np.eye(8)[0]
        exact = np.stack(closed_form_double_A(p, init, T), 1)
        printed = np.stack(closed_form_double_A(p, init, T, printed=True), 1)
        np.testing.assert_allclose(np.abs(printed), np.abs(exact), atol=1e-15)
        assert np.max(np.abs(printed - exact)) > 0.5

    def test_peak_periods(self):
        p = SystemParams()
        dt = T[1] - T[0]
        for k, period in ((0, np.pi / 2), (2, np.pi / (2 * np.sqrt(3)))):
            tr = propagate(build_hamiltonian(A, 2, p), get_frame("double_A", p).state(get_frame("double_A", p).labels[k]), T)
            target = get_frame("double_A", p).rows[k + 1]
            pop = np.abs(tr.states @ target) ** 2
            peaks, _ = find_peaks(pop)
            assert np.all(np.abs(np.diff(T[peaks]) - period) <= dt)


class TestDoubleBResonant:
    def test_rejects(self):
        with pytest.raises(ValueError):
            closed_form_double_B_resonant(SystemParams(delta=1), np.eye(4)[0], 0.0)
        with pytest.raises(ValueError):
            closed_form_double_B_resonant(SystemParams(g_b=2), np.eye(4)[0], 0.0)

    def test_example(self):
        p = SystemParams(kappa=3)
        t = np.linspace(0, 3, 31)
        s7, sb, sa, sd = closed_form_double_B_resonant(p, (1, 0, 0, 0), t)
        np.testing.assert_allclose(np.abs(sb) ** 2, np.sin(np.sqrt(11) * t) ** 2, atol=1e-15)

    def test_matches_propagator_at_point(self):
        p = SystemParams(kappa=3)
        fr = get_frame("double_B_resonant", p)
        init = random_state(np.random.default_rng(7), 8)
        c = fr.coords(init)
        got = np.array([complex(v[0]) for v in closed_form_double_B_resonant(p, c[:4], [0.7])])
        ref = _coords_traj("double_B_resonant", B, p, c, [0.7])[0, :4]
        np.testing.assert_allclose(got, ref, atol=1e-9)

    @pytest.mark.parametrize("k", [0.5, 3, 10])
    def test_frame_closure(self, k):
        # coordinates 4..7 never mix with the first four
        p = SystemParams(kappa=k)
        fr = get_frame("double_B_resonant", p)
        m = fr.rows @ build_hamiltonian(B, 2, p) @ fr.rows.conj().T
        assert np.max(np.abs(m[:4, 4:])) < 1e-13


class TestDoubleBSecular:
    def test_identity_and_example(self):
        p = SystemParams(kappa=10, delta=10)
        init = (0.1, 0.7j, 0.1, np.sqrt(1 - 0.51))
        out = closed_form_double_B_secular(p, init, 0.0)
        np.testing.assert_allclose([complex(v) for v in out], init, atol=1e-15)
        e, lam, *_ = closed_form_double_B_secular(p, (0, 1, 0, 0), np.pi / (2 * np.sqrt(2)))
        assert abs(e) ** 2 == pytest.approx(1, abs=1e-12)

    def test_antisymmetric_pair_at_minus_kappa(self):
        p = SystemParams(kappa=10, delta=-10)
        *_, eps, th = closed_form_double_B_secular(p, (0, 0, 0, 1), np.pi / (2 * np.sqrt(2)))
        assert abs(eps) ** 2 == pytest.approx(1, abs=1e-12)

    def test_printed_form_single_component_start(self):
        # from a single component the printed real rotation has the right populations
        p = SystemParams(kappa=10, delta=10)
        a = closed_form_double_B_secular(p, (0, 1, 0, 0), T)
        b = closed_form_double_B_secular(p, (0, 1, 0, 0), T, printed=True)
        for x, y in zip(a, b):
            np.testing.assert_allclose(np.abs(x), np.abs(y), atol=1e-14)

    def test_frame_phases(self):
        p = SystemParams(kappa=2, delta=1)
        ph = secular_frame_phases(p, [0.0, 1.0])
        np.testing.assert_allclose(ph[0], 1)
        np.testing.assert_allclose(ph[1, 0], np.exp(-1j * (1 - 4)))

    def test_needs_equal_couplings(self):
        with pytest.raises(ValueError):
            closed_form_double_B_secular(SystemParams(g_b=2, kappa=10), (1, 0, 0, 0), 0.0)


class TestTrapping:
    @pytest.mark.parametrize("name", ["a1", "a2", "m", "n"])
    def test_double_A_trapping(self, name):
        v = is_population_trapping(build_hamiltonian(A, 2, SystemParams()), named_state(name))
        assert v.trapped and abs(v.eigenvalue) < 1e-12

    @pytest.mark.parametrize("name", ["alpha", "a_const"])
    def test_double_B_constants(self, name):
        p = SystemParams(kappa=2.5)
        assert is_population_trapping(build_hamiltonian(B, 2, p), named_state(name, p)).trapped

    def test_y1_phase_only(self):
        p = SystemParams(delta=0.9, g_b=1.4)
        v = is_population_trapping(build_hamiltonian(A, 1, p), named_state("y1", p))
        assert v.trapped and v.eigenvalue == pytest.approx(-0.9)

    @pytest.mark.parametrize("name", ["w", "q", "u", "z"])
    def test_oscillating_fail(self, name):
        assert not is_population_trapping(build_hamiltonian(A, 2, SystemParams()), named_state(name)).trapped

    def test_lossy_not_trapped(self):
        m = build_hamiltonian(A, 1, SystemParams(Gamma=0.1), losses=True)
        assert not is_population_trapping(m, named_state("u1")).trapped


class TestLossyTwoState:
    def test_equal_rates(self):
        r = lossy_two_state_check(A, SystemParams(Gamma=0.02, gamma=0.02), named_state("w1"))
        assert r.doublet == ("w1", "x1") and r.max_leakage < 1e-8
        assert r.final_norm == pytest.approx(np.exp(-0.01 * 20), rel=1e-9)

    def test_lossless_zero(self):
        assert lossy_two_state_check(A, SystemParams(), named_state("w1")).max_leakage < 1e-14

    def test_unequal_rates_stay_in_span(self):
        # losses are diagonal in the (w1, x1) span, so unequal rates still cause no leakage
        r = lossy_two_state_check(A, SystemParams(Gamma=0.02, gamma=0.05), named_state("w1"))
        assert r.max_leakage < 1e-8

    def test_double_doublet(self):
        r = lossy_two_state_check(A, SystemParams(Gamma=0.02, gamma=0.02), named_state("w"))
        assert r.doublet == ("w", "q") and r.max_leakage < 1e-8

    def test_not_in_doublet(self):
        with pytest.raises(ValueError):
            lossy_two_state_check(A, SystemParams(Gamma=0.1), StateVector(1, [0.6, 0, 0.8, 0]))


@pytest.mark.parametrize("k", [10, 100])
def test_lambda_eta_full_propagation_diagnostic(k):
    # at Delta = kappa the |ee00> amplitude is resonant with eta and lambda, so the
    # dropped coupling is not fast-rotating; the transfer saturates at 2/3
    p = SystemParams(kappa=k, delta=k)
    t = np.linspace(0, 2, 20001)
    tr = propagate(build_hamiltonian(B, 2, p), named_state("lambda", p), t)
    f = np.abs(tr.states @ named_state("eta", p).amplitudes.conj()) ** 2
    i = int(np.argmax(f))
    assert f[i] == pytest.approx(2 / 3, abs=1e-3)
    assert abs(tr.states[i, 0]) ** 2 == pytest.approx(1 / 3, abs=2e-3)
