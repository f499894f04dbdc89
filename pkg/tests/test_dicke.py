"""Single-pixel collective-spin algebra, checked against closed forms and a
full 2^N product-space simulation."""
from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from squeezelab.dicke import (
    X_AXIS,
    Y_AXIS,
    Z_AXIS,
    angular_momentum_matrix,
    axis_rotation_matrix,
    build_space,
    css,
    ground_state,
    oat_evolve,
    observable_stats,
    population_distribution,
    rotate,
    rotation_cache,
    rotation_matrix,
)


def test_build_space_single_spin():
    space = build_space(1)
    assert space.dim == 2
    assert space.j == 0.5
    assert np.allclose(space.m_values, [-0.5, 0.5])


def test_build_space_paper_sizes():
    assert build_space(50).dim == 51
    assert build_space(50).j == 25
    assert build_space(1000).dim == 1001


def test_build_space_m_values_ascending_unit_steps():
    space = build_space(7)
    steps = np.diff(space.m_values)
    assert np.allclose(steps, 1.0)
    assert space.m_values[0] == -space.j
    assert space.m_values[-1] == space.j


@pytest.mark.parametrize("bad", [0, -3, 2.5, True, "10"])
def test_build_space_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        build_space(bad)


def test_jz_is_diagonal_with_m_values():
    space = build_space(6)
    jz = angular_momentum_matrix(space, "z").matrix
    assert np.allclose(jz, np.diag(space.m_values))


def test_single_spin_matrices_are_half_paulis():
    space = build_space(1)
    jx = angular_momentum_matrix(space, "x").matrix
    jz = angular_momentum_matrix(space, "z").matrix
    assert np.allclose(jz, np.diag([-0.5, 0.5]))
    assert np.allclose(jx, np.array([[0, 0.5], [0.5, 0]]))


def test_two_atom_jx_ladder_elements():
    # J=1 ladder gives sqrt(2)/2 on both off-diagonals
    space = build_space(2)
    jx = angular_momentum_matrix(space, "x").matrix
    expected = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]]) * (math.sqrt(2) / 2)
    assert np.allclose(jx, expected)


@pytest.mark.parametrize("n_atoms", [1, 2, 5, 40])
def test_operators_hermitian_and_commutators(n_atoms):
    space = build_space(n_atoms)
    mats = {axis: angular_momentum_matrix(space, axis).matrix for axis in "xyz"}
    for mat in mats.values():
        assert np.max(np.abs(mat - mat.conj().T)) <= 1e-12
    for a, b, c in (("x", "y", "z"), ("y", "z", "x"), ("z", "x", "y")):
        comm = mats[a] @ mats[b] - mats[b] @ mats[a]
        assert np.max(np.abs(comm - 1j * mats[c])) <= 1e-10


def test_ground_state_is_all_spins_down():
    space = build_space(50)
    state = ground_state(space)
    assert state.amplitudes[0] == 1.0
    assert np.all(state.amplitudes[1:] == 0.0)
    mean, std = observable_stats(state, angular_momentum_matrix(space, "z"))
    assert mean == pytest.approx(-25.0, abs=1e-12)
    assert std == pytest.approx(0.0, abs=1e-12)


def test_rotate_zero_angle_is_identity():
    state = css(build_space(9), 0.7, X_AXIS)
    rotated = rotate(state, Y_AXIS, 0.0)
    assert np.max(np.abs(rotated.amplitudes - state.amplitudes)) < 1e-12


def test_rotate_pi_about_x_flips_ground():
    space = build_space(11)
    flipped = rotate(ground_state(space), X_AXIS, math.pi)
    probs = np.abs(flipped.amplitudes) ** 2
    assert probs[-1] == pytest.approx(1.0, abs=1e-12)


def test_rotate_bloch_vector_oracle():
    # classical rotation of the mean spin: <Jz> = -(N/2) cos(theta)
    space = build_space(10)
    jz = angular_momentum_matrix(space, "z")
    state = rotate(ground_state(space), X_AXIS, math.pi / 3)
    mean, _ = observable_stats(state, jz)
    assert mean == pytest.approx(-2.5, abs=1e-10)


def test_rotate_requires_unit_axis():
    state = ground_state(build_space(3))
    with pytest.raises(ValueError):
        rotate(state, (1.0, 1.0, 0.0), 0.3)


def test_rotate_general_axis_matches_expm():
    space = build_space(5)
    axis = np.array([1.0, 2.0, -0.5])
    axis /= np.linalg.norm(axis)
    generator = sum(axis[i] * angular_momentum_matrix(space, a).matrix
                    for i, a in enumerate("xyz"))
    expected = scipy.linalg.expm(-1j * 0.83 * generator) @ ground_state(space).amplitudes
    actual = rotate(ground_state(space), axis, 0.83).amplitudes
    assert np.max(np.abs(actual - expected)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(
    angle_a=st.floats(-6.0, 6.0),
    angle_b=st.floats(-6.0, 6.0),
    axis=st.sampled_from([X_AXIS, Y_AXIS, Z_AXIS]),
)
def test_rotation_composition_up_to_global_phase(angle_a, angle_b, axis):
    state = css(build_space(8), 0.9, X_AXIS)
    two_step = rotate(rotate(state, axis, angle_a), axis, angle_b)
    one_step = rotate(state, axis, angle_a + angle_b)
    overlap = np.vdot(one_step.amplitudes, two_step.amplitudes)
    phase = overlap / abs(overlap)
    assert np.max(np.abs(two_step.amplitudes - phase * one_step.amplitudes)) < 1e-9


@settings(max_examples=25, deadline=None)
@given(angle=st.floats(-10.0, 10.0), n_atoms=st.integers(1, 30))
def test_rotation_preserves_norm(angle, n_atoms):
    state = rotate(ground_state(build_space(n_atoms)), Y_AXIS, angle)
    assert abs(state.norm() - 1.0) <= 1e-10


def test_rotation_cache_returns_unitary_and_caches():
    rotation_cache.clear()
    space = build_space(12)
    u1 = axis_rotation_matrix(space, "x", 0.431)
    u2 = axis_rotation_matrix(space, "x", 0.431)
    assert u1 is u2  # served from the cache
    assert np.max(np.abs(u1 @ u1.conj().T - np.eye(space.dim))) < 1e-10


def test_rotation_matrix_negative_coordinate_axis():
    space = build_space(4)
    plus = rotation_matrix(space, (0.0, 1.0, 0.0), -0.7)
    minus = rotation_matrix(space, (0.0, -1.0, 0.0), 0.7)
    assert np.max(np.abs(plus - minus)) < 1e-12


def test_oat_zero_angle_is_identity():
    state = css(build_space(6), math.pi / 2, X_AXIS)
    evolved = oat_evolve(state, 0.0)
    assert np.array_equal(evolved.amplitudes, state.amplitudes)


def test_oat_preserves_populations():
    state = css(build_space(9), math.pi / 2, X_AXIS)
    evolved = oat_evolve(state, 1.37)
    assert np.max(np.abs(np.abs(evolved.amplitudes) - np.abs(state.amplitudes))) < 1e-14


def test_oat_two_pi_identity_for_integer_m():
    # integer M makes exp(-i 2pi M^2) = 1 exactly
    state = css(build_space(2), math.pi / 2, X_AXIS)
    evolved = oat_evolve(state, 2 * math.pi)
    assert np.max(np.abs(evolved.amplitudes - state.amplitudes)) < 1e-12


def test_css_zero_angle_is_ground():
    space = build_space(5)
    diff = css(space, 0.0).amplitudes - ground_state(space).amplitudes
    assert np.max(np.abs(diff)) < 1e-12


def test_css_population_is_binomial():
    # N=4 equal superposition: p(M=0) = C(4,2)/16 = 6/16
    state = css(build_space(4), math.pi / 2, X_AXIS)
    p = population_distribution(state)
    assert p[2] == pytest.approx(6 / 16, abs=1e-12)
    from scipy.stats import binom
    assert np.allclose(p, binom.pmf(np.arange(5), 4, 0.5), atol=1e-12)


def test_css_projection_mean_and_noise():
    n = 14
    space = build_space(n)
    jz = angular_momentum_matrix(space, "z")
    for theta in (0.3, math.pi / 2, 2.2):
        state = css(space, theta, X_AXIS)
        mean, std = observable_stats(state, jz)
        assert mean + n / 2 == pytest.approx(n / 2 * (1 - math.cos(theta)), abs=1e-9)
        assert std == pytest.approx(math.sqrt(n) / 2 * abs(math.sin(theta)), abs=1e-9)


def test_observable_stats_rejects_non_hermitian():
    space = build_space(3)
    state = ground_state(space)
    bad = np.triu(np.ones((space.dim, space.dim), dtype=complex))
    with pytest.raises(ValueError):
        observable_stats(state, bad)


def test_observable_stats_accepts_operator_polynomial():
    space = build_space(8)
    state = css(space, math.pi / 2, X_AXIS)
    jz = angular_momentum_matrix(space, "z").matrix
    mean_sq, _ = observable_stats(state, jz @ jz)
    _, std = observable_stats(state, jz)
    mean, _ = observable_stats(state, jz)
    assert mean_sq == pytest.approx(std * std + mean * mean, abs=1e-9)


def test_population_distribution_sums_to_one_and_matches_projection_mean():
    space = build_space(12)
    state = rotate(oat_evolve(css(space, math.pi / 2, X_AXIS), 0.4), Y_AXIS, 0.9)
    p = population_distribution(state)
    assert p.sum() == pytest.approx(1.0, abs=1e-10)
    counts = space.m_values + space.n_atoms / 2
    jz = angular_momentum_matrix(space, "z")
    mean, _ = observable_stats(state, jz)
    assert p @ counts == pytest.approx(mean + space.n_atoms / 2, abs=1e-10)


# ---------------------------------------------------------------------------
# Independent oracle: the same collective drives applied to N individual
# spins in the full 2^N product space.
# ---------------------------------------------------------------------------


def _product_space_stats(n_atoms: int, operations) -> dict[str, tuple[float, float]]:
    sx = np.array([[0, 1], [1, 0]], dtype=complex) / 2
    sy = np.array([[0, 1j], [-1j, 0]], dtype=complex) / 2
    sz = np.array([[-1, 0], [0, 1]], dtype=complex) / 2
    singles = {"x": sx, "y": sy, "z": sz}
    eye = np.eye(2, dtype=complex)

    def collective(axis):
        total = np.zeros((2 ** n_atoms,) * 2, dtype=complex)
        for pos in range(n_atoms):
            op = np.array([[1.0 + 0j]])
            for k in range(n_atoms):
                op = np.kron(op, singles[axis] if k == pos else eye)
            total += op
        return total

    big = {axis: collective(axis) for axis in "xyz"}
    psi = np.zeros(2 ** n_atoms, dtype=complex)
    psi[0] = 1.0
    for name, *params in operations:
        if name == "rotate":
            axis_vec, angle = params
            generator = sum(axis_vec[i] * big[a] for i, a in enumerate("xyz"))
            psi = scipy.linalg.expm(-1j * angle * generator) @ psi
        elif name == "oat":
            zdiag = np.real(np.diag(big["z"]))
            psi = np.exp(-1j * params[0] * zdiag * zdiag) * psi
    out = {}
    for axis in "xyz":
        applied = big[axis] @ psi
        mean = float(np.real(np.vdot(psi, applied)))
        var = max(float(np.real(np.vdot(applied, applied))) - mean * mean, 0.0)
        out[axis] = (mean, math.sqrt(var))
    return out


@pytest.mark.parametrize("n_atoms", [1, 2, 3])
def test_dicke_manifold_matches_product_space(n_atoms):
    rng = np.random.default_rng(7)
    space = build_space(n_atoms)
    for _ in range(6):
        theta = rng.uniform(0, math.pi)
        alpha = rng.uniform(0, 2 * math.pi)
        gamma = rng.uniform(-math.pi, math.pi)
        operations = [
            ("rotate", X_AXIS, theta),
            ("oat", alpha),
            ("rotate", Y_AXIS, gamma),
        ]
        state = rotate(oat_evolve(css(space, theta, X_AXIS), alpha), Y_AXIS, gamma)
        oracle = _product_space_stats(n_atoms, operations)
        for axis in "xyz":
            mean, std = observable_stats(state, angular_momentum_matrix(space, axis))
            assert mean == pytest.approx(oracle[axis][0], abs=1e-10)
            assert std == pytest.approx(oracle[axis][1], abs=1e-10)
