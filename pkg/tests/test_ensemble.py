import numpy as np
import pytest

from goldmeter import (
    CompartmentSpec,
    EnsembleSpec,
    GaugeEvent,
    GaussianProfile,
    InteractionConfig,
    MeterBasis,
    PointProfile,
    ReadingOutcome,
    Stage,
    StatisticsError,
    UniformProfile,
    born_statistics,
    build_grid,
    classify_stage,
    evolve,
    generator_basis,
    meter_state,
    prepare_product_state,
    run_pipeline,
)

B3 = MeterBasis((0.0, 1.0, 2.0))


def base_spec(**overrides):
    kwargs = dict(
        n_copies=4000,
        psi0=meter_state([2**-0.5, 0.5, 0.5], B3),
        grid_profile=GaussianProfile(q0=0.0, sigma_q=1.0, v0=0.0, sigma_v=1.0),
        compartments=CompartmentSpec(q_min=-4.0, q_max=4.0, n_q=8, kappa=0.0625, n_v=128),
        interaction=InteractionConfig(),
        t_decohere=6.0,
        mu=0.1,
        R=100.0,
        base_seed=777,
    )
    kwargs.update(overrides)
    return EnsembleSpec(**kwargs)


def outcome(index, delta=0.1):
    return ReadingOutcome(
        event=GaugeEvent.from_velocity(iv=0, xi_dot=delta, mu=1.0),
        equivalence_passed=index is not None,
        collapsed_index=index,
        discrepancy=1.0 + 0.0j,
    )


def test_spec_validation():
    with pytest.raises(ValueError):
        base_spec(n_copies=0)
    with pytest.raises(ValueError):
        base_spec(t_decohere=-1.0)
    with pytest.raises(ValueError):
        base_spec(mu=0.0)
    with pytest.raises(ValueError):
        base_spec(R=0.5)


def test_pipeline_born_statistics():
    report = run_pipeline(base_spec())
    assert report.refused == 0
    assert report.stage is Stage.CLASSICAL_PURE
    assert report.stage_sequence == (
        Stage.QUANTUM_PURE,
        Stage.CLASSICAL_MIXED,
        Stage.CLASSICAL_PURE,
    )
    for n, target in ((0, 0.5), (1, 0.25), (2, 0.25)):
        assert report.born_targets[n] == pytest.approx(target, abs=1e-9)
        assert report.frequencies[n] == pytest.approx(target, abs=0.03)
    assert report.chi_square_pass


def test_pipeline_refuses_without_dephasing():
    report = run_pipeline(base_spec(t_decohere=0.0, n_copies=50))
    assert report.refused == 50
    assert report.counts == {0: 0, 1: 0, 2: 0}
    assert report.frequencies == {}
    assert report.chi_square is None
    assert report.stage is Stage.QUANTUM_PURE
    assert not report.decoherence_verdicts.all_passed


def test_pipeline_eigenstate_collapses_identically():
    report = run_pipeline(base_spec(psi0=meter_state([0, 1, 0], B3), n_copies=200))
    assert report.refused == 0
    assert report.counts == {0: 0, 1: 200, 2: 0}
    assert report.stage is Stage.CLASSICAL_PURE
    assert report.chi_square == pytest.approx(0.0, abs=1e-9)
    assert report.chi_square_pass


def test_pipeline_conservation():
    for t in (0.0, 6.0):
        report = run_pipeline(base_spec(t_decohere=t, n_copies=300))
        assert sum(report.counts.values()) + report.refused == 300


def test_pipeline_deterministic():
    r1 = run_pipeline(base_spec(n_copies=500))
    r2 = run_pipeline(base_spec(n_copies=500))
    assert r1.counts == r2.counts
    assert r1.frequencies == r2.frequencies
    assert r1.chi_square == r2.chi_square
    assert r1.stage == r2.stage
    r3 = run_pipeline(base_spec(n_copies=500, base_seed=778))
    assert r3.counts != r1.counts


def test_pipeline_outcomes_are_exchangeable():
    report = run_pipeline(base_spec(n_copies=400), keep_outcomes=True)
    assert len(report.outcomes) == 400
    rng = np.random.default_rng(0)
    shuffled = list(report.outcomes)
    rng.shuffle(shuffled)
    counts = {n: 0 for n in range(3)}
    for o in shuffled:
        if o.collapsed_index is not None:
            counts[o.collapsed_index] += 1
    assert counts == report.counts


def test_classify_stage_cases():
    obs = generator_basis(B3)
    spec = CompartmentSpec(q_min=-1.0, q_max=1.0, n_q=2, kappa=0.5, n_v=4)
    grid = build_grid(spec, UniformProfile())

    fresh = prepare_product_state(meter_state([2**-0.5, 0.5, 0.5], B3), grid)
    assert classify_stage([fresh], obs, R=100.0) is Stage.QUANTUM_PURE

    dep_spec = base_spec()
    dep_grid = build_grid(dep_spec.compartments, dep_spec.grid_profile)
    dephased = evolve(
        prepare_product_state(dep_spec.psi0, dep_grid), 6.0, InteractionConfig()
    )
    assert classify_stage([dephased], obs, R=100.0) is Stage.CLASSICAL_MIXED

    collapsed = prepare_product_state(meter_state([1, 0, 0], B3), grid)
    assert classify_stage([collapsed, collapsed], obs, R=100.0) is Stage.CLASSICAL_PURE

    with pytest.raises(ValueError):
        classify_stage([], obs, R=100.0)


def test_born_statistics_exact_match():
    outcomes = [outcome(0)] * 50 + [outcome(1)] * 25 + [outcome(2)] * 25
    chi2, ok = born_statistics(outcomes, {0: 0.5, 1: 0.25, 2: 0.25})
    assert chi2 == pytest.approx(0.0, abs=1e-12)
    assert ok


def test_born_statistics_faithful_sampler():
    rng = np.random.default_rng(66)
    draws = rng.choice(3, size=100_000, p=[0.5, 0.25, 0.25])
    outcomes = [outcome(int(d)) for d in draws]
    chi2, ok = born_statistics(outcomes, [0.5, 0.25, 0.25])
    assert ok


def test_born_statistics_maximal_violation():
    outcomes = [outcome(1)] * 100
    chi2, ok = born_statistics(outcomes, [1.0, 0.0])
    assert chi2 == np.inf
    assert not ok


def test_born_statistics_requires_collapses():
    with pytest.raises(StatisticsError):
        born_statistics([outcome(None)], [1.0])


def test_point_profile_never_dephases():
    spec = base_spec(
        grid_profile=PointProfile(iq=1, iv=3),
        n_copies=20,
    )
    report = run_pipeline(spec)
    # a single sector cannot dephase a superposition: reads are refused
    assert report.refused == 20
    assert report.stage is Stage.QUANTUM_PURE
