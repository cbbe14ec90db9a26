import numpy as np
import pytest

from goldmeter import (
    CompartmentSpec,
    ContractViolationError,
    Frame,
    GaussianProfile,
    InteractionConfig,
    MeterBasis,
    MeterState,
    PointProfile,
    TableProfile,
    UniformProfile,
    build_grid,
    evolve,
    meter_state,
    offdiagonal_suppression,
    prepare_product_state,
    reduce_to_meter,
    to_lab_frame,
    to_rearranged_frame,
)

CFG = InteractionConfig()
B2 = MeterBasis((0.0, 1.0))
B3 = MeterBasis((0.0, 1.0, 2.0))


def point_grid():
    spec = CompartmentSpec(q_min=0.0, q_max=2.0, n_q=2, kappa=1.0, n_v=2)
    return build_grid(spec, PointProfile(iq=0, iv=1))


def two_velocity_grid(v_low, v_high, weight_low=0.5):
    """1 x 2 grid whose velocity compartment centers are exactly v_low, v_high."""
    width_v = v_high - v_low
    spec = CompartmentSpec(
        q_min=0.0, q_max=1.0, n_q=1, kappa=width_v, n_v=2,
        v_center=0.5 * (v_low + v_high),
    )
    np.testing.assert_allclose(spec.v_centers(), [v_low, v_high], atol=1e-14)
    rows = ((0, 0, np.sqrt(weight_low), 0.0), (0, 1, np.sqrt(1 - weight_low), 0.0))
    return build_grid(spec, TableProfile(rows=rows))


def gaussian_state(psi, sigma_v=1.0, n_v=64, n_q=4, span=4.0):
    spec = CompartmentSpec(
        q_min=-2.0, q_max=2.0, n_q=n_q,
        kappa=(4.0 / n_q) * (2 * span * sigma_v / n_v), n_v=n_v,
    )
    grid = build_grid(spec, GaussianProfile(q0=0.0, sigma_q=1.0, v0=0.0, sigma_v=sigma_v))
    return prepare_product_state(psi, grid)


def test_interaction_config_requires_neglect_kinetic():
    with pytest.raises(ValueError):
        InteractionConfig(neglect_kinetic=False)
    with pytest.raises(ValueError):
        InteractionConfig(coupling=0.0)


def test_prepare_point_grid_norm():
    psi = MeterState(np.array([1.0, 0.0], dtype=complex), B2)
    state = prepare_product_state(psi, point_grid())
    assert abs(state.total_squared_norm() - 1.0) < 1e-12
    assert state.time == 0.0
    assert state.frame is Frame.LAB


def test_prepare_product_blocks_identical():
    psi = meter_state([2**-0.5, 0.5, 0.5], B3)
    spec = CompartmentSpec(q_min=-1.0, q_max=1.0, n_q=3, kappa=1.0, n_v=4)
    state = prepare_product_state(psi, build_grid(spec, UniformProfile()))
    for iq in range(3):
        for iv in range(4):
            np.testing.assert_array_equal(state.blocks[iq, iv], psi.amplitudes)


def test_prepare_norm_uniform_grid():
    spec = CompartmentSpec(q_min=0.0, q_max=2.0, n_q=2, kappa=1.0, n_v=2)
    state = prepare_product_state(
        MeterState(np.array([1.0, 0.0], dtype=complex), B2),
        build_grid(spec, UniformProfile()),
    )
    assert abs(state.total_squared_norm() - 1.0) < 1e-12


def test_prepare_rejects_unnormalized():
    psi = MeterState(np.array([1.0, 1.0], dtype=complex), B2)
    with pytest.raises(ContractViolationError):
        prepare_product_state(psi, point_grid())


def test_evolve_zero_time_is_identity():
    psi = meter_state([0.6, 0.8], B2)
    state = prepare_product_state(psi, point_grid())
    evolved = evolve(state, 0.0, CFG)
    np.testing.assert_array_equal(evolved.blocks, state.blocks)
    assert evolved.time == 0.0


def test_evolve_zero_velocity_sector_is_static():
    grid = two_velocity_grid(0.0, 2.0, weight_low=1.0)
    psi = meter_state([0.6, 0.8], B2)
    state = prepare_product_state(psi, grid)
    evolved = evolve(state, 3.7, CFG)
    np.testing.assert_allclose(evolved.blocks[0, 0], psi.amplitudes, atol=1e-15)


def test_evolve_phase_arithmetic():
    # One sector at velocity pi, eigenvalues (1, 2), dt = 1: the block picks
    # up phases (e^{i pi}, e^{2 i pi}) = (-1, +1).
    basis = MeterBasis((1.0, 2.0))
    grid = two_velocity_grid(np.pi, 2 * np.pi, weight_low=1.0)
    psi = meter_state([1.0, 1.0], basis)
    evolved = evolve(prepare_product_state(psi, grid), 1.0, CFG)
    np.testing.assert_allclose(
        evolved.blocks[0, 0],
        [-psi.amplitudes[0], psi.amplitudes[1]],
        atol=1e-14,
    )


def test_evolve_negative_dt_rejected():
    state = prepare_product_state(meter_state([1, 0], B2), point_grid())
    with pytest.raises(ValueError):
        evolve(state, -0.1, CFG)


def test_evolve_preserves_sector_weights_and_norm():
    rng = np.random.default_rng(31)
    psi = meter_state(rng.normal(size=3) + 1j * rng.normal(size=3), B3)
    state = gaussian_state(psi)
    evolved = evolve(state, 5.0, CFG)
    np.testing.assert_array_equal(evolved.grid.sector_weights, state.grid.sector_weights)
    assert abs(evolved.total_squared_norm() - 1.0) < 1e-12


def test_norm_drift_thousand_steps():
    rng = np.random.default_rng(32)
    psi = meter_state(rng.normal(size=3) + 1j * rng.normal(size=3), B3)
    state = gaussian_state(psi, n_v=32)
    for _ in range(1000):
        state = evolve(state, float(rng.uniform(0, 0.01)), CFG)
    assert abs(state.total_squared_norm() - 1.0) < 1e-9


def test_evolve_composes_additively():
    rng = np.random.default_rng(33)
    psi = meter_state(rng.normal(size=3) + 1j * rng.normal(size=3), B3)
    state = gaussian_state(psi, n_v=16)
    for _ in range(10):
        t1, t2 = rng.uniform(0, 3, size=2)
        once = evolve(state, float(t1 + t2), CFG)
        twice = evolve(evolve(state, float(t1), CFG), float(t2), CFG)
        np.testing.assert_allclose(twice.blocks, once.blocks, atol=1e-12)


def test_rearranged_frame_shares_amplitudes():
    psi = meter_state([2**-0.5, 0.5, 0.5], B3)
    evolved = evolve(gaussian_state(psi), 2.0, CFG)
    rearranged = to_rearranged_frame(evolved)
    assert rearranged.frame is Frame.REARRANGED
    np.testing.assert_array_equal(rearranged.blocks, evolved.blocks)
    np.testing.assert_array_equal(rearranged.grid.amplitudes, evolved.grid.amplitudes)


def test_rearranged_frame_round_trip_and_idempotence():
    psi = meter_state([0.6, 0.8], B2)
    state = evolve(prepare_product_state(psi, point_grid()), 1.5, CFG)
    rearranged = to_rearranged_frame(state)
    assert to_rearranged_frame(rearranged) is rearranged
    back = to_lab_frame(rearranged)
    assert back.frame is Frame.LAB
    np.testing.assert_array_equal(back.blocks, state.blocks)
    assert back.time == state.time


def test_rearranged_velocity_label_sign_flip():
    grid = two_velocity_grid(-1.0, 2.0)
    state = prepare_product_state(meter_state([1, 0], B2), grid)
    rearranged = to_rearranged_frame(state)
    assert state.sector_velocity(1) == 2.0
    assert rearranged.sector_velocity(1) == -2.0
    assert rearranged.sector_position(0) == 0.0


def test_reduce_product_state_pure_projector():
    psi = meter_state([2**-0.5, 2**-0.5], B2)
    spec = CompartmentSpec(q_min=0.0, q_max=2.0, n_q=2, kappa=1.0, n_v=2)
    state = prepare_product_state(psi, build_grid(spec, UniformProfile()))
    rho = reduce_to_meter(state)
    np.testing.assert_allclose(rho.matrix, 0.5 * np.ones((2, 2)), atol=1e-14)


def test_reduce_single_sector_stays_pure():
    psi = meter_state([2**-0.5, 0.5, 0.5], B3)
    state = evolve(prepare_product_state(psi, point_grid_3()), 4.2, CFG)
    eigs = np.linalg.eigvalsh(reduce_to_meter(state).matrix)
    assert eigs[-1] == pytest.approx(1.0, abs=1e-12)
    assert np.all(eigs[:-1] < 1e-12)


def point_grid_3():
    spec = CompartmentSpec(q_min=0.0, q_max=2.0, n_q=2, kappa=1.0, n_v=2)
    return build_grid(spec, PointProfile(iq=1, iv=0))


def test_reduce_two_sector_full_dephasing():
    # Sector displacements 0 and pi on eigenvalue gap 1: the coherence
    # averages (1/2)(1 + e^{-i pi}) = 0. Oracle is the explicit two-term sum.
    grid = two_velocity_grid(0.0, np.pi)
    psi = meter_state([2**-0.5, 2**-0.5], B2)
    state = evolve(prepare_product_state(psi, grid), 1.0, CFG)
    rho = reduce_to_meter(state)
    oracle = 0.5 * 0.5 * (np.exp(1j * 0.0 * (0 - 1)) + np.exp(1j * np.pi * (0 - 1)))
    assert abs(rho.matrix[0, 1] - oracle) < 1e-15
    assert abs(rho.matrix[0, 1]) < 1e-12


def test_reduced_density_is_physical():
    rng = np.random.default_rng(34)
    psi = meter_state(rng.normal(size=3) + 1j * rng.normal(size=3), B3)
    rho = reduce_to_meter(evolve(gaussian_state(psi), 1.3, CFG))
    m = rho.matrix
    assert np.max(np.abs(m - m.conj().T)) < 1e-12
    assert np.trace(m).real == pytest.approx(1.0, abs=1e-10)
    assert np.min(np.linalg.eigvalsh(m)) > -1e-10


def test_offdiagonal_suppression_at_zero_time():
    psi = meter_state([2**-0.5, 0.5, 0.5], B3)
    state = gaussian_state(psi)
    for m in range(3):
        for n in range(3):
            if m != n:
                assert offdiagonal_suppression(state, m, n) == pytest.approx(1.0)


def test_offdiagonal_suppression_rejects_diagonal():
    state = gaussian_state(meter_state([1, 0, 0], B3))
    with pytest.raises(ValueError):
        offdiagonal_suppression(state, 1, 1)


def test_offdiagonal_suppression_symmetric_two_sector_cosine():
    # Equal weights at velocities +-w give cos(w t (M_m - M_n)); two-term oracle.
    w = 0.8
    grid = two_velocity_grid(-w, w)
    psi = meter_state([2**-0.5, 2**-0.5], B2)
    for t in (0.3, 1.1, 2.9):
        state = evolve(prepare_product_state(psi, grid), t, CFG)
        got = offdiagonal_suppression(state, 0, 1)
        expected = np.cos(w * t * (0.0 - 1.0))
        assert got.real == pytest.approx(expected, abs=1e-12)
        assert abs(got.imag) < 1e-12


def test_offdiagonal_suppression_matches_density_ratio():
    # For nonzero product amplitudes: suppression = rho_mn / (c_m conj(c_n)),
    # including with a non-unit coupling.
    rng = np.random.default_rng(35)
    psi = meter_state(rng.normal(size=3) + 1j * rng.normal(size=3), B3)
    cfg = InteractionConfig(coupling=2.0)
    state = evolve(gaussian_state(psi, n_v=32), 0.9, cfg)
    rho = reduce_to_meter(state)
    c = psi.amplitudes
    for m in range(3):
        for n in range(3):
            if m == n:
                continue
            ratio = rho.matrix[m, n] / (c[m] * np.conj(c[n]))
            assert offdiagonal_suppression(state, m, n) == pytest.approx(ratio, abs=1e-12)


def test_gaussian_envelope_and_monotonicity():
    # 64 velocity compartments spanning +-4 sigma: the suppression magnitude
    # follows exp(-sigma^2 t^2 gap^2 / 2) within 2% while the envelope is
    # above 0.01, and decreases monotonically there.
    sigma = 1.3
    psi = meter_state([2**-0.5, 2**-0.5], B2)
    state0 = gaussian_state(psi, sigma_v=sigma, n_v=64)
    t_max = np.sqrt(2 * np.log(100.0)) / sigma
    ts = np.linspace(0.0, t_max, 40)
    mags = []
    for t in ts:
        state = evolve(state0, float(t), CFG)
        mags.append(abs(offdiagonal_suppression(state, 0, 1)))
    mags = np.array(mags)
    envelope = np.exp(-(sigma**2) * ts**2 / 2)
    np.testing.assert_allclose(mags, envelope, rtol=0.02)
    assert np.all(np.diff(mags) <= 1e-12)
