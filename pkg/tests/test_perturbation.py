import numpy as np
import pytest

from gup_dosc.errors import UsageError
from gup_dosc.fock import FockSpace
from gup_dosc.model import ModelParams, spinor_level
from gup_dosc.numerics import norm_max
from gup_dosc.perturbation import (
    REFERENCE_DEGENERATE_BLOCK,
    REFERENCE_DEGENERATE_EIGENVECTOR,
    ClusterMember,
    critical_field,
    degenerate_shift,
    degeneracy_analysis,
    exact_oracle,
    field_scan,
    first_order_shift,
    interior_spectrum,
    level_cluster,
    level_exists,
    lowest_level_cluster,
    operator_level,
    oracle_slopes,
    shifts_of_matrix,
    spectral_clusters,
    validation_report,
)

SPACE = FockSpace(cutoff=12, include_spin=True)
PARAMS = ModelParams(omega=0.1, b_field=0.0, gup_a=1e-4)

# Frozen from the exact characteristic polynomial of the stored block.
BLOCK_SHIFTS = [-8.7307879247336544, -8.0, -7.3192108377341745, 2.049998762467828]


def test_ground_shift_is_minus_one():
    r = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 0, "+"))
    assert r.shifts == [-1.0]
    assert r.shifts_energy[0] == pytest.approx(-PARAMS.shift_unit, rel=1e-14)
    assert abs(r.oracle_slopes[0] - (-1.0)) <= 1e-6
    assert r.method == "nondegenerate"


def test_ground_breakdown_sums_to_total():
    r = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 0, "+"))
    total = sum(r.breakdown.values())
    assert total == pytest.approx(r.shifts[0], abs=1e-12)
    # pure upper state: no orbital angular momentum contribution
    assert r.breakdown["angular"] == pytest.approx(0.0, abs=1e-14)


def test_first_excited_shift_spinor_weighted():
    # independent ladder-algebra oracle: <p^2> = c1^2 (2 m w h) + d1^2 (m w h)
    level = spinor_level(PARAMS, 1, "+")
    expected = -(1.0 + level.c_n ** 2)
    r = first_order_shift(SPACE, PARAMS, level)
    assert r.shifts[0] == pytest.approx(expected, abs=1e-13)
    assert abs(r.oracle_slopes[0] - r.shifts[0]) <= 1e-6 * abs(r.shifts[0])
    assert not r.discrepancy_flags


def test_both_branches_reported_independently():
    plus = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 1, "+"))
    minus = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 1, "-"))
    c_plus = spinor_level(PARAMS, 1, "+").c_n
    c_minus = spinor_level(PARAMS, 1, "-").c_n
    assert plus.shifts[0] == pytest.approx(-(1.0 + c_plus ** 2), abs=1e-13)
    assert minus.shifts[0] == pytest.approx(-(1.0 + c_minus ** 2), abs=1e-13)
    assert plus.shifts[0] != minus.shifts[0]
    for r in (plus, minus):
        assert abs(r.oracle_slopes[0] - r.shifts[0]) <= 1e-6 * abs(r.shifts[0])


def test_degenerate_levels_are_rejected():
    with pytest.raises(UsageError, match="degenerate_shift"):
        first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 2, "+"))


def test_lowest_tower_shifts_are_distinct():
    r = degenerate_shift(SPACE, PARAMS, lowest_level_cluster(SPACE, PARAMS, 6))
    assert r.shifts == pytest.approx([-6.0, -5.0, -4.0, -3.0, -2.0, -1.0], abs=1e-12)
    assert len(set(np.round(r.shifts, 9))) == 6
    for s, o in zip(r.shifts, r.oracle_slopes):
        assert abs(s - o) <= 1e-6 * abs(s)


def test_degenerate_cluster_matrix_is_diagonal_in_spectator_tower():
    r = degenerate_shift(SPACE, PARAMS, level_cluster(SPACE, PARAMS, n=2, size=4))
    off = r.subspace_matrix - np.diag(np.diag(r.subspace_matrix))
    assert norm_max(off) <= 1e-13
    c2 = spinor_level(PARAMS, 2, "+").c_n
    expected = sorted(-(2.0 + k + c2 ** 2) for k in range(4))
    assert r.shifts == pytest.approx(expected, abs=1e-12)


def test_degenerate_trace_identity():
    r = degenerate_shift(SPACE, PARAMS, lowest_level_cluster(SPACE, PARAMS, 5))
    assert sum(r.shifts) == pytest.approx(
        float(np.trace(r.subspace_matrix).real), abs=1e-12
    )


def test_degenerate_eigenvvectors_unitary():
    r = degenerate_shift(SPACE, PARAMS, level_cluster(SPACE, PARAMS, n=2, size=4))
    v = r.eigenvectors
    assert norm_max(v.conj().T @ v - np.eye(4)) <= 1e-10


def test_degenerate_mixed_energies_rejected():
    cluster = [ClusterMember(n=0, spectator=0), ClusterMember(n=1, spectator=0)]
    with pytest.raises(UsageError, match="not degenerate"):
        degenerate_shift(SPACE, PARAMS, cluster)


def test_stored_block_shifts_eigenvector_and_trace():
    r = shifts_of_matrix(REFERENCE_DEGENERATE_BLOCK)
    assert r.shifts == pytest.approx(BLOCK_SHIFTS, abs=1e-12)
    assert sum(r.shifts) == pytest.approx(-22.0, abs=1e-12)
    image = REFERENCE_DEGENERATE_BLOCK @ REFERENCE_DEGENERATE_EIGENVECTOR
    assert norm_max(image - (-8.0) * REFERENCE_DEGENERATE_EIGENVECTOR) <= 1e-12


def test_scalar_cluster_matrix_gives_repeated_shift():
    r = shifts_of_matrix(2.5 * np.eye(4, dtype=complex))
    assert r.shifts == [2.5, 2.5, 2.5, 2.5]


def test_exact_oracle_contract():
    with pytest.raises(UsageError):
        exact_oracle(SPACE, PARAMS, [1e-5, 2e-5])  # missing zero
    with pytest.raises(UsageError):
        exact_oracle(SPACE, PARAMS, [0.0, 2e-5, 1e-5])  # unsorted
    steps = [0.0, 1e-5, 2e-5]
    out = exact_oracle(SPACE, PARAMS, steps)
    assert [s for s, _ in out] == steps
    w0 = interior_spectrum(SPACE, PARAMS, strength=0.0)
    assert np.array_equal(out[0][1], w0)
    # Weyl bound: eigenvalue motion is capped by the perturbation norm
    from gup_dosc.model import build_h_prime
    from gup_dosc.fock import compress

    unit = compress(build_h_prime(SPACE, PARAMS, strength=1.0),
                    SPACE.interior_indices(2))
    opnorm = float(np.max(np.abs(np.linalg.eigvalsh(unit))))
    for s, w in out[1:]:
        assert np.max(np.abs(w - w0)) <= s * opnorm * (1 + 1e-12)


def test_oracle_slopes_match_whole_tower():
    # internal PT-oracle consistency over the complete interior tower
    tower_size = SPACE.cutoff - 1  # interior spectators of the lowest level
    r = degenerate_shift(
        SPACE, PARAMS, lowest_level_cluster(SPACE, PARAMS, tower_size),
        include_oracle=False,
    )
    slopes = oracle_slopes(SPACE, PARAMS, 1.0)
    assert len(slopes) == tower_size
    for s, o in zip(r.shifts, slopes):
        assert abs(s - o) <= 1e-6 * abs(s)


def test_degeneracy_analysis_splits_lowest_tower():
    before, after = degeneracy_analysis(SPACE, PARAMS, 1e-9)
    tower = SPACE.cutoff - 1
    assert before.get(tower, 0) >= 2  # rest-energy towers on both signs
    w0 = interior_spectrum(SPACE, PARAMS, strength=0.0)
    w1 = interior_spectrum(SPACE, PARAMS)
    clusters0 = {
        round(e, 9): m for e, m in spectral_clusters(w0, 1e-9)
    }
    assert clusters0[1.0] == tower
    clusters1 = [m for e, m in spectral_clusters(w1, 1e-9) if abs(e - 1.0) < 1e-3]
    assert max(clusters1) < tower  # the tower split
    assert sum(after.values()) > sum(before.values())


def test_degeneracy_analysis_identity_without_deformation():
    p0 = ModelParams(omega=0.1, gup_a=0.0)
    before, after = degeneracy_analysis(SPACE, p0, 1e-9)
    assert before == after


def test_degeneracy_window_floor():
    with pytest.raises(UsageError, match="noise floor"):
        degeneracy_analysis(SPACE, PARAMS, 1e-16)


def test_critical_field_formula():
    assert critical_field(ModelParams(omega=1.0)) == 2.0
    assert critical_field(ModelParams(omega=0.0)) == 0.0
    p = ModelParams(omega=1.0)
    assert p.with_field(critical_field(p)).omega_tilde == 0.0


def test_field_scan_crosses_critical_point():
    space = FockSpace(cutoff=10, include_spin=True)
    base = ModelParams(omega=1.0, gup_a=1e-4)
    scan = field_scan(space, base, [0.0, 1.0, 2.0, 3.0])
    assert [pt["omega_tilde"] for pt in scan.points] == [1.0, 0.5, 0.0, -0.5]
    assert scan.critical_b == 2.0
    for pt in scan.points:
        wt = pt["omega_tilde"]
        if wt >= 0.0:
            assert pt["ground_shift"] == pytest.approx(
                -base.gup_a * wt, rel=1e-12, abs=1e-18
            )
        assert abs(pt["ground_shift"]) <= base.alpha_gup * abs(wt) * (1 + 1e-6)


def test_field_scan_keeps_errored_points():
    # cutoff too small for the second-level cluster: every point errors
    # but the record count is preserved
    space = FockSpace(cutoff=4, include_spin=True)
    base = ModelParams(omega=1.0, gup_a=1e-4)
    scan = field_scan(space, base, [0.0, 1.0])
    assert len(scan.points) == 2
    assert all("error" in pt for pt in scan.points)
    assert all("B" in pt and "omega_tilde" in pt for pt in scan.points)


def test_field_scan_rejects_unsorted_input():
    with pytest.raises(UsageError, match="ascending"):
        field_scan(SPACE, PARAMS, [1.0, 0.0])


def test_field_scan_parallel_matches_serial():
    space = FockSpace(cutoff=8, include_spin=True)
    base = ModelParams(omega=1.0, gup_a=1e-4)
    values = [0.0, 0.5, 1.0, 1.5]
    serial = field_scan(space, base, values, max_workers=1)
    parallel = field_scan(space, base, values, max_workers=3)
    assert serial.points == parallel.points


def test_over_critical_levels_mirror():
    p = ModelParams(omega=0.1, b_field=0.3, gup_a=1e-4)  # wt = -0.05
    assert p.omega_tilde == pytest.approx(-0.05)
    assert not level_exists(p, 0, "+")
    assert level_exists(p, 0, "-")
    level = operator_level(p, 0, "-")
    assert level.energy == -p.rest_energy
    r = first_order_shift(SPACE, p, level)
    # natural-unit shift is still negative and proportional to |wt|
    assert r.shifts_energy[0] == pytest.approx(
        -p.gup_a * abs(p.omega_tilde), rel=1e-12
    )
    assert any("over-critical" in f for f in r.discrepancy_flags)
    assert abs(r.oracle_slopes[0] - r.shifts[0]) <= 1e-5 * abs(r.shifts[0])


def test_shift_units_scaling_invariance():
    # ground shift: -1 in units a c m hbar wt for any unit system
    for params in (
        PARAMS,
        ModelParams(omega=0.2, gup_a=1e-4, mass=2.0),
        ModelParams(omega=0.1, gup_a=1e-4, light_speed=3.0),
        ModelParams(omega=0.05, gup_a=1e-4, hbar=2.0),
    ):
        r = first_order_shift(
            SPACE, params, spinor_level(params, 0, "+"), include_oracle=False
        )
        assert r.shifts[0] == pytest.approx(-1.0, abs=1e-12)
    # lambda-matched parameter sets agree on every dimensionless shift
    matched = ModelParams(omega=0.2, gup_a=1e-4, mass=2.0)  # lambda = 0.1
    assert matched.lam == pytest.approx(PARAMS.lam, abs=1e-15)
    r1 = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 1, "+"),
                           include_oracle=False)
    r2 = first_order_shift(SPACE, matched, spinor_level(matched, 1, "+"),
                           include_oracle=False)
    assert r1.shifts[0] == pytest.approx(r2.shifts[0], abs=1e-12)


def test_linearity_in_deformation_strength():
    doubled = ModelParams(omega=0.1, gup_a=2e-4)
    r1 = first_order_shift(SPACE, PARAMS, spinor_level(PARAMS, 1, "+"),
                           include_oracle=False)
    r2 = first_order_shift(SPACE, doubled, spinor_level(doubled, 1, "+"),
                           include_oracle=False)
    assert r2.shifts_energy[0] == pytest.approx(2.0 * r1.shifts_energy[0], rel=1e-12)
    d1 = degenerate_shift(SPACE, PARAMS, lowest_level_cluster(SPACE, PARAMS, 4),
                          include_oracle=False)
    d2 = degenerate_shift(SPACE, doubled, lowest_level_cluster(SPACE, doubled, 4),
                          include_oracle=False)
    for a, b in zip(d1.shifts_energy, d2.shifts_energy):
        assert b == pytest.approx(2.0 * a, rel=1e-12)


def test_shifts_vanish_at_critical_field():
    p = ModelParams(omega=1.0, b_field=2.0, gup_a=1e-3)
    r = first_order_shift(SPACE, p, spinor_level(p, 0, "+"))
    assert r.shifts == [0.0] and r.shifts_energy == [0.0]
    assert r.oracle_slopes == [0.0]
    assert any("critical field" in f for f in r.discrepancy_flags)


def test_validation_report_passes_with_allowlisted_rows():
    space = FockSpace(cutoff=14, include_spin=True)
    p = ModelParams(omega=1.0, b_field=1.0, gup_a=1e-4)
    result = validation_report(space, p)
    assert result["passed"]
    assert result["unexpected_discrepancies"] == []
    by_row = {r["row"]: r for r in result["rows"]}
    assert by_row["ground-shift"]["status"] == "MATCH"
    assert by_row["ground-shift-oracle"]["status"] == "MATCH"
    assert by_row["first-excited-shift"]["status"] == "DISCREPANCY"
    assert by_row["first-excited-shift"]["reference"] == -2.5
    assert by_row["first-excited-oracle"]["status"] == "MATCH"
    assert by_row["degenerate-block-basis"]["status"] == "DISCREPANCY"
    assert by_row["degenerate-block-eigenvalues"]["status"] == "MATCH"
    assert by_row["degenerate-block-eigenvector"]["status"] == "MATCH"
    assert by_row["critical-field"]["status"] == "MATCH"
    for n in range(5):
        for branch in ("+", "-"):
            assert by_row[f"level n={n} branch {branch}"]["status"] == "MATCH"
