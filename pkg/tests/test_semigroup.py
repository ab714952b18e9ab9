import dataclasses
import math
from fractions import Fraction

import numpy as np
import pytest

from jamison import (
    IndexSequence,
    ShiftConstruction,
    assemble_operator,
    build_construction,
    matrix_power,
    operator_norm,
)
from jamison.construction import TruncatedOperator
from jamison.errors import (
    DegenerateSpectrum,
    HorizonExceedsSequence,
    OutOfDomain,
    PreconditionViolated,
    SpectrumOutsideDomain,
)
from jamison.semigroup import (
    bounded_along,
    check_lattice,
    evolve,
    generator_spectrum_check,
    lift_report,
    principal_log,
    unit_interval_sup,
)


@pytest.fixture(scope="module")
def factorial_setup():
    seq = IndexSequence.factorials(8)
    cons = build_construction(seq, L=8, K=8, w=(1, 2, 3, 4, 5, 6, 7, 8))
    op = assemble_operator(cons, 8, 2)
    return seq, op, principal_log(op)


@pytest.fixture(scope="module")
def separated_setup():
    cons = ShiftConstruction.from_parameters(
        IndexSequence.factorials(6),
        [Fraction(1, 23), Fraction(1, 31), Fraction(1, 41), Fraction(1, 53), Fraction(2, 23)],
        (1.0, 2.0, 3.0, 4.0, 5.0),
        horizon=6,
    )
    op = assemble_operator(cons, 5, 2)
    return op, principal_log(op)


# --- principal log ----------------------------------------------------------


def test_log_of_identity_is_zero():
    sg = principal_log(TruncatedOperator(3, 1, np.eye(3, dtype=complex)))
    assert np.max(np.abs(sg.generator)) == 0.0
    assert sg.method == "eigendecomposition"
    assert sg.eig_cond == pytest.approx(1.0)


def test_log_of_diagonal_phases():
    phis = np.array([0.3, -0.8, 1.0])
    sg = principal_log(TruncatedOperator(3, 1, np.diag(np.exp(1j * phis))))
    assert np.max(np.abs(np.diag(sg.generator) - 1j * phis)) <= 1e-14
    off = sg.generator[~np.eye(3, dtype=bool)]
    assert np.max(np.abs(off)) == 0.0


def test_log_rejects_left_halfplane_spectrum():
    angles = np.exp(2j * np.pi * np.array([0.3, 0.05]))
    with pytest.raises(SpectrumOutsideDomain):
        principal_log(TruncatedOperator(2, 1, np.diag(angles)))


def test_log_rejects_cross_fiber_coupling():
    M = np.eye(4, dtype=complex)
    M[0, 1] = 0.5  # slot(1,1) -> slot(2,1)
    with pytest.raises(PreconditionViolated):
        principal_log(TruncatedOperator(2, 2, M))


def test_eigendecomposition_path_on_separated_spectrum(separated_setup):
    op, sg = separated_setup
    assert sg.method == "eigendecomposition"
    assert sg.eig_cond < 1e8
    assert sg.roundtrip_error <= 1e-10


def test_fallback_path_on_clustered_spectrum(factorial_setup):
    _, op, sg = factorial_setup
    # level gaps collapse below float resolution, so no float eigenbasis exists
    assert sg.method == "inverse-scaling-squaring"
    assert math.isinf(sg.eig_cond)
    assert sg.roundtrip_error <= 1e-10


def test_force_eigen_raises_on_clustered_spectrum(factorial_setup):
    _, op, _ = factorial_setup
    with pytest.raises(DegenerateSpectrum):
        principal_log(op, force_eigen=True)


# --- evolution ---------------------------------------------------------------


def test_evolve_at_zero_one_two(factorial_setup):
    _, op, sg = factorial_setup
    assert np.allclose(evolve(sg, 0.0), np.eye(16), atol=1e-15)
    T = op.matrix
    assert np.linalg.norm(evolve(sg, 1) - T, 2) <= 1e-10 * np.linalg.norm(T, 2)
    T2 = T @ T
    assert np.linalg.norm(evolve(sg, 2) - T2, 2) <= 1e-9 * np.linalg.norm(T2, 2)


def test_evolve_rejects_bad_times(factorial_setup):
    _, _, sg = factorial_setup
    with pytest.raises(OutOfDomain):
        evolve(sg, -0.5)
    with pytest.raises(OutOfDomain):
        evolve(sg, math.inf)


def test_semigroup_law(factorial_setup):
    _, _, sg = factorial_setup
    rng = np.random.default_rng(3)
    for _ in range(8):
        s, t = rng.uniform(0.0, 3.0, 2)
        lhs = evolve(sg, s + t)
        rhs = evolve(sg, s) @ evolve(sg, t)
        assert np.linalg.norm(lhs - rhs, 2) <= 1e-9 * (1.0 + np.linalg.norm(lhs, 2))


def test_strong_continuity_proxy(factorial_setup):
    _, _, sg = factorial_setup
    norm_G = np.linalg.norm(np.array(sg.generator), 2)
    last = math.inf
    for h in (1e-1, 1e-2, 1e-3, 1e-4):
        dist = np.linalg.norm(evolve(sg, h) - np.eye(16), 2)
        assert dist <= norm_G * h * 1.01
        assert dist < last
        last = dist


def test_spectral_mapping_at_one(factorial_setup):
    _, op, sg = factorial_setup
    got = sorted(np.linalg.eigvals(evolve(sg, 1.0)), key=lambda z: z.imag)
    want = sorted(np.diag(op.matrix), key=lambda z: z.imag)
    assert max(abs(g - w) for g, w in zip(got, want)) <= 1e-9


# --- lattice consistency -----------------------------------------------------


def test_lattice_agreement(factorial_setup):
    seq, _, sg = factorial_setup
    rep = check_lattice(sg, seq, 8)
    assert rep.all_ok
    assert max(r.rel_err for r in rep.rows) <= 1e-10
    assert [r.n_k for r in rep.rows] == list(seq.terms)


def test_lattice_detects_perturbed_generator(factorial_setup):
    seq, _, sg = factorial_setup
    rng = np.random.default_rng(7)
    noise = 1e-3 * (rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16)))
    bad = dataclasses.replace(sg, generator=sg.generator + noise)
    rep = check_lattice(bad, seq, 6)
    assert not rep.all_ok


def test_lattice_validation(factorial_setup):
    seq, _, sg = factorial_setup
    with pytest.raises(HorizonExceedsSequence):
        check_lattice(sg, seq, 9)
    real = IndexSequence((1.0, 2.5), "real")
    with pytest.raises(PreconditionViolated):
        check_lattice(sg, real, 2)


# --- boundedness along real sequences ---------------------------------------


def test_bounded_along_half_offsets(factorial_setup):
    seq, _, sg = factorial_setup
    half = IndexSequence((1.0,) + tuple(float(n) + 0.5 for n in seq.terms[1:]), "real")
    rep = bounded_along(sg, half, 8)
    assert rep.all_ok
    assert rep.grid_sup <= rep.certified_sup
    assert rep.sup_along <= rep.certified_sup * max(r.norm_at_floor for r in rep.rows)
    with pytest.raises(HorizonExceedsSequence):
        bounded_along(sg, half, 9)


def test_bounded_along_integer_times_is_trivial(factorial_setup):
    seq, _, sg = factorial_setup
    ints = IndexSequence(tuple(float(n) for n in seq.terms[:5]), "real")
    rep = bounded_along(sg, ints, 5)
    assert rep.all_ok
    for r in rep.rows:
        assert r.norm_at_t == pytest.approx(r.norm_at_floor, rel=1e-12)


def test_half_offset_bound_with_certified_sup(factorial_setup):
    seq, _, sg = factorial_setup
    _, certified = unit_interval_sup(sg)
    for n in seq.terms:
        norm_t = np.linalg.norm(evolve(sg, n + 0.5), 2)
        norm_n = np.linalg.norm(evolve(sg, float(n)), 2)
        assert norm_t <= certified * norm_n * (1.0 + 1e-6)


# --- generator spectrum -------------------------------------------------------


def test_generator_spectrum_purely_imaginary(factorial_setup):
    _, _, sg = factorial_setup
    rep = generator_spectrum_check(sg)
    assert rep.all_ok
    assert rep.max_real_part <= 1e-9
    assert rep.max_deviation <= 1e-9
    assert len(rep.rows) == 16


def test_generator_spectrum_on_separated(separated_setup):
    _, sg = separated_setup
    rep = generator_spectrum_check(sg)
    assert rep.all_ok


def test_zero_phase_level_gives_zero_eigenvalue():
    M = np.diag(np.array([1.0 + 0j, np.exp(0.1j)]))
    sg = principal_log(TruncatedOperator(2, 1, M))
    rep = generator_spectrum_check(sg)
    assert rep.rows[0].expected_imag == 0.0
    assert abs(complex(rep.rows[0].real_part, rep.rows[0].imag_part)) <= 1e-15


# --- shift norm and report -----------------------------------------------------


def test_shift_part_norm_below_one_third(factorial_setup):
    _, op, _ = factorial_setup
    assert operator_norm(op.shift_part(), 2) < 1.0 / 3.0


def test_lift_report_bundle(factorial_setup):
    seq, _, sg = factorial_setup
    rep = lift_report(sg, seq, 8)
    assert rep["lattice"]["all_ok"]
    assert rep["spectrum"]["all_ok"]
    assert rep["shift_norm_below_third"]
    assert rep["semigroup"]["method"] == "inverse-scaling-squaring"
    assert len(sg.generator_csv_rows()) == 16 * 16
