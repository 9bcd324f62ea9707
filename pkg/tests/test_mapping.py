import numpy as np
import pytest

from semdyn.gll import gll_rule
from semdyn.mapping import (
    DomainDecomposition,
    MappingSpec,
    build_grid,
    calibrate_beta,
    decompose,
    graded_breakpoints,
    next_breakpoint,
    phase_integral,
)
from semdyn.potentials import Morse

MORSE = Morse(depth=200.0, a=0.05, r_e=20.0)
FREE = lambda r: np.zeros_like(np.asarray(r, dtype=float))


def trapezoid_phase(V, r0, r1, e_asy, mu=1.0, n=400001):
    """Independent brute-force oracle for the phase integral."""
    r = np.linspace(r0, r1, n)
    k = np.sqrt(np.maximum(e_asy - V(r), 0.0))
    return np.sqrt(2.0 * mu) / np.pi * np.trapezoid(k, r)


class TestPhaseIntegral:
    def test_constant_integrand(self):
        # V = 0: sqrt(2E) (r1-r0) / pi
        got = phase_integral(FREE, 0.0, 2.0, 0.5)
        assert got == pytest.approx(np.sqrt(1.0) * 2.0 / np.pi, rel=1e-12)

    def test_vanishing_integrand(self):
        V = lambda r: np.full_like(np.asarray(r, dtype=float), 0.5)
        assert phase_integral(V, 0.0, 5.0, 0.5) == 0.0

    def test_morse_against_trapezoid_oracle(self):
        got = phase_integral(MORSE, 20.0, 21.0, 0.0)
        want = trapezoid_phase(MORSE, 20.0, 21.0, 0.0)
        assert got == pytest.approx(want, abs=1e-8)

    def test_additivity(self):
        a, m, b = 8.0, 17.3, 40.0
        whole = phase_integral(MORSE, a, b, 0.0)
        parts = phase_integral(MORSE, a, m, 0.0) + phase_integral(
            MORSE, m, b, 0.0
        )
        assert whole == pytest.approx(parts, abs=1e-10)

    def test_turning_point_kink(self):
        # integrand has a sqrt kink at the inner turning point
        got = phase_integral(MORSE, 5.0, 8.0, 0.0)
        want = trapezoid_phase(MORSE, 5.0, 8.0, 0.0, n=2000001)
        assert got == pytest.approx(want, abs=1e-7)


class TestNextBreakpoint:
    def test_free_particle_closed_form(self):
        # beta = sqrt(2 E) h / pi  =>  h = pi for E = 0.5, beta = 1
        spec = MappingSpec(0.0, 100.0, beta=1.0, e_asy=0.5)
        r1 = next_breakpoint(FREE, 0.0, spec)
        assert r1 == pytest.approx(np.pi, abs=1e-9)

    def test_beta_halved_halves_elements(self):
        spec = MappingSpec(0.0, 100.0, beta=0.5, e_asy=0.5)
        r1 = next_breakpoint(FREE, 0.0, spec)
        assert r1 == pytest.approx(np.pi / 2.0, abs=1e-9)

    def test_clamps_at_r_max(self):
        spec = MappingSpec(0.0, 1.0, beta=1.0, e_asy=0.5)
        assert next_breakpoint(FREE, 0.0, spec) == 1.0

    def test_forbidden_region_carries_size_forward(self):
        V = lambda r: np.full_like(np.asarray(r, dtype=float), 10.0)
        spec = MappingSpec(0.0, 50.0, beta=1.0, e_asy=0.5)
        r1 = next_breakpoint(V, 5.0, spec, prev_size=2.0)
        assert r1 == pytest.approx(7.0, abs=1e-12)


class TestDecompose:
    def test_free_particle_equal_elements(self):
        spec = MappingSpec(0.0, 4.0 * np.pi, beta=1.0, e_asy=0.5)
        dec = decompose(FREE, spec)
        assert dec.n_elements == 4
        assert np.allclose(dec.element_sizes(), np.pi, atol=1e-8)

    def test_uniform_fallback(self):
        spec = MappingSpec(0.0, 10.0, uniform_size=2.0)
        dec = decompose(FREE, spec)
        assert np.allclose(dec.breakpoints, [0, 2, 4, 6, 8, 10])

    def test_monotone_potential_gives_nondecreasing_sizes(self):
        # attractive long-range tail: local momentum falls with distance
        V = lambda r: -1.0 / np.asarray(r, dtype=float) ** 2
        spec = MappingSpec(1.0, 200.0, beta=0.8, e_asy=0.0)
        dec = decompose(V, spec)
        sizes = dec.element_sizes()
        assert np.all(np.diff(sizes[:-1]) > -1e-9)

    def test_beta_halving_doubles_count(self):
        # fully allowed long-range potential: pure phase-driven sizing
        V = lambda r: -1.0 / np.asarray(r, dtype=float) ** 2
        m1 = decompose(V, MappingSpec(1.0, 200.0, beta=0.6, e_asy=0.0)).n_elements
        m2 = decompose(V, MappingSpec(1.0, 200.0, beta=0.3, e_asy=0.0)).n_elements
        assert 2 * m1 - 2 <= m2 <= 2 * m1 + 2

    def test_beta_halving_morse_within_percent(self):
        # with a forbidden wall the fill scales as beta^(2/3); the overall
        # count still doubles to within a percent
        m1 = decompose(MORSE, MappingSpec(0.0, 300.0, beta=0.5, e_asy=0.0)).n_elements
        m2 = decompose(MORSE, MappingSpec(0.0, 300.0, beta=0.25, e_asy=0.0)).n_elements
        assert abs(m2 - 2 * m1) <= 0.01 * 2 * m1

    def test_partition_covers_domain(self):
        spec = MappingSpec(0.0, 300.0, beta=0.9, e_asy=0.0)
        dec = decompose(MORSE, spec)
        assert dec.breakpoints[0] == 0.0
        assert dec.breakpoints[-1] == 300.0
        assert np.all(dec.jacobians > 0)

    def test_forbidden_wall_filled_finely(self):
        # inner Morse wall is forbidden at E_asy = 0; fill elements must
        # match the size of the first allowed element, not span the wall
        spec = MappingSpec(0.0, 300.0, beta=0.3, e_asy=0.0)
        dec = decompose(MORSE, spec)
        wall = dec.element_sizes()[dec.breakpoints[:-1] < 6.0]
        assert len(wall) > 5
        assert wall.max() < 1.0


class TestCalibrateBeta:
    def test_hits_element_target(self):
        spec = MappingSpec(0.0, 300.0, beta=0.5, e_asy=0.0)
        beta, dec = calibrate_beta(MORSE, spec, 500)
        assert abs(dec.n_elements - 500) <= 5
        assert 0 < beta <= 1.0


class TestBuildGrid:
    def test_single_element_is_reference_rule(self):
        rule = gll_rule(5)
        dec = DomainDecomposition(np.array([-1.0, 1.0]))
        grid = build_grid(dec, rule)
        assert np.allclose(grid.points, rule.nodes, atol=1e-15)
        assert np.allclose(grid.gamma, rule.weights, atol=1e-15)

    def test_interface_weight_merges(self):
        # elements [0,1], [1,3] with N=2: jacobians 1/2 and 1, so the
        # shared point carries 0.5/3 + 1/3 = 1/2
        rule = gll_rule(2)
        dec = DomainDecomposition(np.array([0.0, 1.0, 3.0]))
        grid = build_grid(dec, rule)
        assert grid.npoints == 5
        assert grid.gamma[2] == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("N,M", [(1, 4), (3, 11), (6, 7)])
    def test_total_weight_is_domain_length(self, N, M):
        rng = np.random.default_rng(3 * N + M)
        bp = np.concatenate([[0.0], np.cumsum(rng.uniform(0.3, 4.0, M))])
        grid = build_grid(DomainDecomposition(bp), gll_rule(N))
        assert grid.gamma.sum() == pytest.approx(bp[-1], rel=1e-12)
        assert grid.npoints == N * M + 1
        assert np.all(grid.gamma > 0)

    def test_index_round_trip(self):
        grid = build_grid(
            DomainDecomposition(np.array([0.0, 1.0, 2.5, 5.0])), gll_rule(4)
        )
        for i in range(grid.npoints):
            k, j = grid.element_of(i)
            assert grid.global_index(k, j) == i

    def test_points_increase(self):
        grid = build_grid(
            DomainDecomposition(np.array([-2.0, 0.5, 1.0, 9.0])), gll_rule(3)
        )
        assert np.all(np.diff(grid.points) > 0)


class TestGradedBreakpoints:
    def test_symmetric_and_sized(self):
        dec = graded_breakpoints(500.0, 60.0, 1.25, 4.0)
        bp = dec.breakpoints
        assert bp[0] == -500.0 and bp[-1] == 500.0
        assert np.allclose(bp, -bp[::-1], atol=1e-12)
        sizes = dec.element_sizes()
        core = sizes[np.abs(bp[:-1]) < 50.0]
        assert np.allclose(core, 1.25, atol=1e-9)
        assert sizes.max() <= 4.0 + 1e-9


class TestSpecValidation:
    def test_bad_beta(self):
        with pytest.raises(ValueError):
            MappingSpec(0.0, 1.0, beta=1.5)

    def test_bad_domain(self):
        with pytest.raises(ValueError):
            MappingSpec(1.0, 1.0)

    def test_bad_breakpoints(self):
        with pytest.raises(ValueError):
            DomainDecomposition(np.array([0.0, 0.0, 1.0]))
