"""First-order corrections, the exact-diagonalization oracle, and scans.

Every perturbative number produced here is cross-checkable against an
independent path: first-order shifts come from matrix elements of the
perturbation over explicitly constructed eigenstates, while the oracle
differentiates the exact interior spectrum with respect to the deformation
parameter (Richardson-extrapolated central differences through a = 0).

Shift bookkeeping: `shifts` are dimensionless multiples of the natural
correction scale a c m hbar wt (`shift_units`); `shifts_energy` are the same
numbers converted to energy for the configured deformation strength. Beyond
the critical field wt flips sign, the level structure mirrors between the
two boson modes, and the branch carrying the undisplaced rest-energy level
flips from + to -; reports flag this.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, UsageError
from .fock import (
    FockSpace,
    angular_momentum,
    compress,
    ladder_a,
    p_squared,
    position_ops,
)
from .model import (
    NEGATIVE,
    POSITIVE,
    ModelParams,
    SpinorLevel,
    build_h0,
    build_h_prime,
    landau_level,
    spinor_level,
)
from .numerics import eigh, eigvalsh

SHIFT_UNITS = "a·c·m·ħ·ω̃"

# Window for locating unperturbed clusters, in units of m c^2.
CLUSTER_WINDOW = 1e-9
# Deformation steps (in units of alpha = a m c) for the oracle stencil.
ORACLE_STEP = 1e-5
# Relative agreement demanded between a shift and its oracle slope.
ORACLE_RTOL = 1e-6

# Reference values for the validation command: the degenerate second-level
# block quoted for this model (entries in units of a c m hbar wt), its
# expected shift set, and the expected first-excited and ground shifts.
REFERENCE_DEGENERATE_BLOCK = -0.5 * np.array(
    [
        [11.0, -5.0, -5.0, -5.0],
        [-5.0, 11.0, -5.0, -5.0],
        [-5.0, -5.0, 13.0, -5.0],
        [-5.0, -5.0, -5.0, 9.0],
    ],
    dtype=np.complex128,
)
REFERENCE_DEGENERATE_SHIFTS = (-8.7308, -8.0, -7.3192, 2.05)
REFERENCE_DEGENERATE_EIGENVECTOR = np.array([-1.0, 1.0, 0.0, 0.0])
REFERENCE_DEGENERATE_EIGENVECTOR_SHIFT = -8.0
REFERENCE_FIRST_EXCITED_SHIFT = -2.5
REFERENCE_GROUND_SHIFT = -1.0

# Validation rows allowed to disagree without failing the run: the stored
# first-excited value and the stored block are not reproducible from the
# constructions this package pins down (see README).
ALLOWLISTED_DISCREPANCIES = frozenset(
    {"first-excited-shift", "degenerate-block-basis"}
)


@dataclass(frozen=True)
class ClusterMember:
    """One degenerate-cluster member: level index, branch, spectator quantum."""

    n: int
    branch: str = POSITIVE
    spectator: int = 0


@dataclass
class PTReport:
    """One perturbation-theory result with its oracle cross-check."""

    cluster_label: str
    unperturbed_energy: float
    method: str
    subspace_basis: list[dict]
    subspace_matrix: np.ndarray
    shifts: list[float]
    shifts_energy: list[float]
    oracle_slopes: list[float]
    discrepancy_flags: list[str]
    shift_units: str = SHIFT_UNITS
    breakdown: dict | None = None
    eigenvectors: np.ndarray | None = None


@dataclass
class ScanResult:
    """Field sweep: one record per requested field value."""

    points: list[dict]
    critical_b: float | None


def critical_field(p: ModelParams) -> float:
    """Field at which the reduced frequency vanishes: 2 omega m c / |e|."""
    return 2.0 * p.omega * p.mass * p.light_speed / p.charge


def _mirror_params(p: ModelParams) -> ModelParams:
    """Zero-field model with the same |wt|; used beyond the critical field."""
    return ModelParams(
        omega=abs(p.omega_tilde),
        b_field=0.0,
        gup_a=p.gup_a,
        mass=p.mass,
        light_speed=p.light_speed,
        hbar=p.hbar,
        charge=p.charge,
    )


def level_exists(p: ModelParams, n: int, branch: str) -> bool:
    """Whether level (n, branch) exists in the operator model at these params."""
    if n > 0:
        return True
    return branch == (POSITIVE if p.omega_tilde >= 0.0 else NEGATIVE)


def operator_level(p: ModelParams, n: int, branch: str) -> SpinorLevel:
    """Level data consistent with the assembled operators.

    For wt >= 0 this equals `spinor_level` exactly. For wt < 0 the operator
    spectrum follows |wt| with the rest-energy level mirrored to the negative
    branch, so weights are evaluated at |wt| and the ground level flips sign.
    """
    wt = p.omega_tilde
    if wt >= 0.0:
        return spinor_level(p, n, branch)
    mirror = _mirror_params(p)
    if n == 0:
        if branch == POSITIVE:
            raise UsageError(
                "beyond the critical field the rest-energy level sits on "
                "the negative branch"
            )
        ref = spinor_level(mirror, 0, POSITIVE)
        return SpinorLevel(n=0, branch=NEGATIVE, energy=-ref.energy, c_n=ref.c_n,
                           d_n=ref.d_n)
    ref = spinor_level(mirror, n, branch)
    return SpinorLevel(n=n, branch=branch, energy=ref.energy, c_n=ref.c_n,
                       d_n=ref.d_n)


def _state_vector(
    space: FockSpace, p: ModelParams, n: int, branch: str, spectator: int
) -> tuple[np.ndarray, dict]:
    """Embedded eigenstate of the assembled H0 plus its basis descriptor.

    For wt > 0 the state is c|n_a=n, n_b=k, up> + d|n_a=n-1, n_b=k, down>;
    for wt < 0 the modes swap roles and the lower component carries a phase i
    fixed by the mirrored block structure.
    """
    if not space.include_spin:
        raise UsageError("eigenstates require a spinful space")
    wt = p.omega_tilde
    if wt == 0.0:
        raise UsageError("eigenstates are not oscillator-like at the critical field")
    if not level_exists(p, n, branch):
        raise UsageError(f"level (n={n}, branch {branch}) does not exist here")
    level = operator_level(p, n, branch)
    if n + spectator > space.cutoff - 2:
        raise UsageError(
            f"state (n={n}, spectator={spectator}) too close to cutoff "
            f"{space.cutoff}; raise the cutoff"
        )
    vec = np.zeros(space.dim, dtype=np.complex128)
    upper: tuple[int, int] | None
    lower: tuple[int, int] | None
    if n == 0:
        # the undisplaced rest-energy level is a pure spinor component
        if wt > 0.0:
            upper, lower, lower_weight = (0, spectator), None, 0.0j
            vec[space.index(0, spectator, spin_up=True)] = 1.0
        else:
            upper, lower, lower_weight = None, (spectator, 0), 1.0 + 0.0j
            vec[space.index(spectator, 0, spin_up=False)] = 1.0
    elif wt > 0.0:
        upper, lower = (n, spectator), (n - 1, spectator)
        lower_weight = complex(level.d_n)
        vec[space.index(n, spectator, spin_up=True)] = level.c_n
        vec[space.index(n - 1, spectator, spin_up=False)] = lower_weight
    else:
        upper, lower = (spectator, n - 1), (spectator, n)
        lower_weight = 1j * level.d_n
        vec[space.index(spectator, n - 1, spin_up=True)] = level.c_n
        vec[space.index(spectator, n, spin_up=False)] = lower_weight
    descriptor = {
        "upper_state": list(upper) if upper is not None else None,
        "upper_weight": float(level.c_n) if upper is not None else 0.0,
        "lower_state": list(lower) if lower is not None else None,
        "lower_weight": [lower_weight.real, lower_weight.imag],
        "n": n,
        "branch": branch,
        "spectator": spectator,
    }
    return vec, descriptor


def _p2_embedded(space: FockSpace, p: ModelParams) -> np.ndarray:
    """p^2 on the spinful space (identity across the spinor factor)."""
    sless = space.without_spin()
    p2 = p_squared(sless, p.frame())
    zero = np.zeros_like(p2)
    return np.block([[p2, zero], [zero, p2]])


def _expectation(op: np.ndarray, vec: np.ndarray) -> float:
    return float(np.real(vec.conj() @ (op @ vec)))


def _shift_scale(p: ModelParams) -> float:
    """m hbar wt: divides <p^2> to express shifts in units of a c m hbar wt."""
    return p.mass * p.hbar * p.omega_tilde


def interior_spectrum(
    space: FockSpace,
    p: ModelParams,
    margin: int = 2,
    strength: float | None = None,
) -> np.ndarray:
    """Ascending eigenvalues of the interior-projected full Hamiltonian."""
    h = build_h0(space, p) + build_h_prime(space, p, strength=strength)
    return eigvalsh(compress(h, space.interior_indices(margin)))


class _OracleSpectra:
    """Cached interior spectra at the five stencil strengths around a = 0."""

    def __init__(self, space: FockSpace, p: ModelParams, margin: int = 2):
        step = ORACLE_STEP / (p.mass * p.light_speed)
        h0 = build_h0(space, p)
        prime_unit = build_h_prime(space, p, strength=1.0)
        idx = space.interior_indices(margin)
        h0c = compress(h0, idx)
        pc = compress(prime_unit, idx)
        self.step = step
        self.base = eigvalsh(h0c)
        self.plus1 = eigvalsh(h0c + step * pc)
        self.minus1 = eigvalsh(h0c - step * pc)
        self.plus2 = eigvalsh(h0c + 2.0 * step * pc)
        self.minus2 = eigvalsh(h0c - 2.0 * step * pc)


_ORACLE_CACHE: dict[tuple, _OracleSpectra] = {}


def _oracle_spectra(space: FockSpace, p: ModelParams, margin: int) -> _OracleSpectra:
    key = (space, p, margin)
    if key not in _ORACLE_CACHE:
        if len(_ORACLE_CACHE) > 8:
            _ORACLE_CACHE.clear()
        _ORACLE_CACHE[key] = _OracleSpectra(space, p, margin)
    return _ORACLE_CACHE[key]


def oracle_slopes(
    space: FockSpace,
    p: ModelParams,
    energy: float,
    margin: int = 2,
    window: float = CLUSTER_WINDOW,
) -> list[float]:
    """Ascending d(E)/d(a) for the cluster at `energy`, in shift units.

    Central differences through a = 0 with one Richardson step. Within a
    splitting cluster the ascending order at +a pairs with the descending
    order at -a; that pairing reconstructs the analytic branches.
    """
    spectra = _oracle_spectra(space, p, margin)
    win = window * p.rest_energy
    w0 = spectra.base
    i0 = int(np.searchsorted(w0, energy - win, side="left"))
    i1 = int(np.searchsorted(w0, energy + win, side="right"))
    if i1 <= i0:
        raise ComputationError(
            f"no interior eigenvalue within {win:.3e} of {energy!r}"
        )
    h = spectra.step
    d1 = (spectra.plus1[i0:i1] - spectra.minus1[i0:i1][::-1]) / (2.0 * h)
    d2 = (spectra.plus2[i0:i1] - spectra.minus2[i0:i1][::-1]) / (4.0 * h)
    slopes = (4.0 * d1 - d2) / 3.0
    unit = p.light_speed * p.mass * p.hbar * p.omega_tilde
    return sorted(float(s) / unit for s in slopes)


def exact_oracle(
    space: FockSpace,
    p: ModelParams,
    gup_steps: list[float],
    margin: int = 2,
) -> list[tuple[float, np.ndarray]]:
    """Exact interior spectra at each deformation strength.

    `gup_steps` must be sorted ascending with a leading zero, so the
    undeformed spectrum always heads the output.
    """
    steps = list(gup_steps)
    if not steps or steps[0] != 0.0:
        raise UsageError("gup_steps must start at 0")
    if any(s < 0.0 for s in steps) or any(
        b < a for a, b in zip(steps, steps[1:])
    ):
        raise UsageError("gup_steps must be nonnegative and sorted ascending")
    h0 = build_h0(space, p)
    prime_unit = build_h_prime(space, p, strength=1.0)
    idx = space.interior_indices(margin)
    h0c = compress(h0, idx)
    pc = compress(prime_unit, idx)
    return [(s, eigvalsh(h0c + s * pc)) for s in steps]


def _zero_coupling_report(p: ModelParams, label: str, size: int) -> PTReport:
    flags = [
        "critical field: oscillator coupling vanishes, all corrections are "
        "identically zero"
    ]
    return PTReport(
        cluster_label=label,
        unperturbed_energy=p.rest_energy,
        method="nondegenerate" if size == 1 else "degenerate",
        subspace_basis=[],
        subspace_matrix=np.zeros((size, size), dtype=np.complex128),
        shifts=[0.0] * size,
        shifts_energy=[0.0] * size,
        oracle_slopes=[0.0] * size,
        discrepancy_flags=flags,
        breakdown={"ladder": 0.0, "position": 0.0, "angular": 0.0}
        if size == 1
        else None,
        eigenvectors=None if size == 1 else np.eye(size, dtype=np.complex128),
    )


def first_order_shift(
    space: FockSpace,
    p: ModelParams,
    level: SpinorLevel,
    spectator: int = 0,
    margin: int = 2,
    include_oracle: bool = True,
) -> PTReport:
    """Non-degenerate first-order correction <psi|H'|psi> for level n <= 1.

    The report carries the three-term breakdown of <p^2> (ladder, position,
    angular-momentum pieces) and the matching finite-difference oracle slope.
    Levels with n >= 2 are degenerate beyond their spectator tower and must
    go through `degenerate_shift`.
    """
    if level.n >= 2:
        raise UsageError(
            f"level n={level.n} is degenerate; use degenerate_shift"
        )
    label = f"n={level.n}, branch {level.branch}"
    if p.omega_tilde == 0.0:
        return _zero_coupling_report(p, label, 1)
    vec, descriptor = _state_vector(space, p, level.n, level.branch, spectator)
    p2 = _p2_embedded(space, p)
    scale = _shift_scale(p)
    mult = -_expectation(p2, vec) / scale
    energy = operator_level(p, level.n, level.branch).energy

    # breakdown via the ladder-form decomposition, in the same shift units
    sless = space.without_spin()
    frame = p.frame()
    a_op = ladder_a(sless)
    z, zbar = position_ops(sless, frame)
    w_eff = abs(p.omega_tilde)
    t_ladder = (
        2.0 * p.mass * w_eff * p.hbar * (a_op.conj().T @ a_op + a_op @ a_op.conj().T)
    )
    t_position = -((p.mass * w_eff) ** 2) * (z @ zbar)
    t_angular = 2.0 * p.mass * w_eff * angular_momentum(sless, hbar=p.hbar)
    zero = np.zeros_like(t_ladder)
    breakdown = {}
    for name, block in (
        ("ladder", t_ladder),
        ("position", t_position),
        ("angular", t_angular),
    ):
        emb = np.block([[block, zero], [zero, block]])
        breakdown[name] = -_expectation(emb, vec) / scale

    flags: list[str] = []
    if p.omega_tilde < 0.0:
        flags.append(
            "over-critical: operator spectrum follows |wt| with mirrored "
            "branches; closed-form levels use the signed frequency"
        )
    slopes: list[float] = []
    if include_oracle:
        all_slopes = oracle_slopes(space, p, energy, margin=margin)
        nearest = min(all_slopes, key=lambda s: abs(s - mult))
        slopes = [nearest]
        denom = max(abs(mult), 1e-30)
        if abs(nearest - mult) / denom > ORACLE_RTOL + ORACLE_STEP:
            flags.append(
                f"oracle slope {nearest!r} disagrees with shift {mult!r}"
            )
    return PTReport(
        cluster_label=label,
        unperturbed_energy=energy,
        method="nondegenerate",
        subspace_basis=[descriptor],
        subspace_matrix=np.array([[mult]], dtype=np.complex128),
        shifts=[mult],
        shifts_energy=[mult * p.shift_unit],
        oracle_slopes=slopes,
        discrepancy_flags=flags,
        breakdown=breakdown,
    )


def degenerate_shift(
    space: FockSpace,
    p: ModelParams,
    cluster: list[ClusterMember],
    margin: int = 2,
    include_oracle: bool = True,
) -> PTReport:
    """Diagonalize H' restricted to a degenerate cluster.

    Cluster members must share the unperturbed energy to within the cluster
    window; shifts come back ascending with the diagonalizing (unitary)
    eigenvector set in the cluster basis.
    """
    if not cluster:
        raise UsageError("cluster must contain at least one member")
    label = "cluster " + ", ".join(
        f"(n={m.n},{m.branch},k={m.spectator})" for m in cluster
    )
    if p.omega_tilde == 0.0:
        return _zero_coupling_report(p, label, len(cluster))
    vectors = []
    descriptors = []
    energies = []
    for m in cluster:
        vec, desc = _state_vector(space, p, m.n, m.branch, m.spectator)
        vectors.append(vec)
        descriptors.append(desc)
        energies.append(operator_level(p, m.n, m.branch).energy)
    spread = max(energies) - min(energies)
    if spread > CLUSTER_WINDOW * p.rest_energy:
        raise UsageError(
            f"cluster members span {spread:.3e} in energy; not degenerate"
        )
    p2 = _p2_embedded(space, p)
    scale = _shift_scale(p)
    g = len(cluster)
    sub = np.empty((g, g), dtype=np.complex128)
    images = [p2 @ v for v in vectors]
    for i in range(g):
        for j in range(g):
            sub[i, j] = -(vectors[i].conj() @ images[j]) / scale
    decomp = eigh(sub)
    shifts = [float(w) for w in decomp.eigenvalues]
    energy = float(np.mean(energies))
    flags: list[str] = []
    if p.omega_tilde < 0.0:
        flags.append(
            "over-critical: operator spectrum follows |wt| with mirrored "
            "branches; closed-form levels use the signed frequency"
        )
    slopes: list[float] = []
    if include_oracle:
        all_slopes = oracle_slopes(space, p, energy, margin=margin)
        for s in shifts:
            slopes.append(min(all_slopes, key=lambda x: abs(x - s)))
        tol = ORACLE_RTOL + ORACLE_STEP
        for s, o in zip(shifts, slopes):
            if abs(s - o) / max(abs(s), 1e-30) > tol:
                flags.append(f"oracle slope {o!r} disagrees with shift {s!r}")
    return PTReport(
        cluster_label=label,
        unperturbed_energy=energy,
        method="degenerate",
        subspace_basis=descriptors,
        subspace_matrix=sub,
        shifts=shifts,
        shifts_energy=[s * p.shift_unit for s in shifts],
        oracle_slopes=slopes,
        discrepancy_flags=flags,
        eigenvectors=decomp.eigenvectors,
    )


def shifts_of_matrix(block: np.ndarray, label: str = "stored block") -> PTReport:
    """Shifts of an externally supplied cluster matrix (already in shift units)."""
    decomp = eigh(block)
    return PTReport(
        cluster_label=label,
        unperturbed_energy=math.nan,
        method="degenerate",
        subspace_basis=[],
        subspace_matrix=np.asarray(block, dtype=np.complex128),
        shifts=[float(w) for w in decomp.eigenvalues],
        shifts_energy=[],
        oracle_slopes=[],
        discrepancy_flags=[],
        eigenvectors=decomp.eigenvectors,
    )


def lowest_level_cluster(
    space: FockSpace, p: ModelParams, size: int
) -> list[ClusterMember]:
    """The first `size` spectator members of the rest-energy level tower."""
    branch = POSITIVE if p.omega_tilde >= 0.0 else NEGATIVE
    return [ClusterMember(n=0, branch=branch, spectator=k) for k in range(size)]


def level_cluster(
    space: FockSpace, p: ModelParams, n: int, size: int, branch: str = POSITIVE
) -> list[ClusterMember]:
    """The first `size` spectator members of the level-n tower."""
    return [ClusterMember(n=n, branch=branch, spectator=k) for k in range(size)]


def spectral_clusters(
    spectrum: np.ndarray, window: float
) -> list[tuple[float, int]]:
    """(mean energy, multiplicity) for maximal runs closer than `window`."""
    out: list[tuple[float, int]] = []
    start = 0
    w = np.asarray(spectrum)
    for k in range(1, len(w) + 1):
        if k == len(w) or w[k] - w[k - 1] > window:
            out.append((float(np.mean(w[start:k])), k - start))
            start = k
    return out


def degeneracy_analysis(
    space: FockSpace,
    p: ModelParams,
    energy_window: float,
    margin: int = 2,
) -> tuple[dict[int, int], dict[int, int]]:
    """Multiplicity histograms of the interior spectrum before/after H'.

    Returns {multiplicity: number of clusters} for the undeformed and the
    deformed Hamiltonian, clustered with the given absolute energy window.
    """
    floor = 1e-12 * p.rest_energy
    if energy_window < floor:
        raise UsageError(
            f"window {energy_window!r} below the numerical noise floor {floor!r}"
        )
    before = interior_spectrum(space, p, margin=margin, strength=0.0)
    after = interior_spectrum(space, p, margin=margin)
    def hist(w: np.ndarray) -> dict[int, int]:
        counts: dict[int, int] = {}
        for _, size in spectral_clusters(w, energy_window):
            counts[size] = counts.get(size, 0) + 1
        return dict(sorted(counts.items()))

    return hist(before), hist(after)


def _scan_point(
    space: FockSpace,
    base: ModelParams,
    b_value: float,
    margin: int,
    degeneracy_window: float,
) -> dict:
    p = base.with_field(b_value)
    point: dict = {"B": b_value, "omega_tilde": p.omega_tilde}
    try:
        if p.omega_tilde == 0.0:
            point["ground_shift"] = 0.0
            point["first_shift"] = 0.0
            point["n2_shifts"] = [0.0, 0.0, 0.0, 0.0]
        else:
            p2 = _p2_embedded(space, p)
            scale = _shift_scale(p)
            unit = p.shift_unit
            branch0 = POSITIVE if p.omega_tilde > 0.0 else NEGATIVE
            v0, _ = _state_vector(space, p, 0, branch0, 0)
            point["ground_shift"] = -_expectation(p2, v0) / scale * unit
            v1, _ = _state_vector(space, p, 1, POSITIVE, 0)
            point["first_shift"] = -_expectation(p2, v1) / scale * unit
            n2 = []
            for k in range(4):
                v, _ = _state_vector(space, p, 2, POSITIVE, k)
                n2.append(-_expectation(p2, v) / scale * unit)
            point["n2_shifts"] = sorted(n2)
        before, after = degeneracy_analysis(
            space, p, degeneracy_window * p.rest_energy, margin=margin
        )
        point["degeneracy_counts_before"] = before
        point["degeneracy_counts_after"] = after
    except (UsageError, ComputationError) as exc:
        point["error"] = str(exc)
    return point


def field_scan(
    space: FockSpace,
    base_params: ModelParams,
    b_values: list[float],
    margin: int = 2,
    degeneracy_window: float = CLUSTER_WINDOW,
    max_workers: int | None = None,
) -> ScanResult:
    """Sweep the magnetic field; one record per value, errors kept per point.

    Points are independent and may run on a small thread pool; results are
    assembled in input order regardless of completion order.
    """
    values = [float(b) for b in b_values]
    if any(b2 < b1 for b1, b2 in zip(values, values[1:])):
        raise UsageError("field values must be sorted ascending")
    workers = max_workers or 1
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = list(
                pool.map(
                    lambda b: _scan_point(
                        space, base_params, b, margin, degeneracy_window
                    ),
                    values,
                )
            )
    else:
        points = [
            _scan_point(space, base_params, b, margin, degeneracy_window)
            for b in values
        ]
    critical = critical_field(base_params)
    in_range = values and values[0] <= critical <= values[-1]
    return ScanResult(points=points, critical_b=critical if in_range else None)


def _status(ok: bool, code: str | None = None) -> dict:
    if ok:
        return {"status": "MATCH", "code": None}
    return {"status": "DISCREPANCY", "code": code}


def validation_report(
    space: FockSpace, p: ModelParams, margin: int = 2
) -> dict:
    """Compare computed results against the stored reference values.

    Every row carries status MATCH or DISCREPANCY plus a code; codes in
    ALLOWLISTED_DISCREPANCIES are expected and do not fail validation.
    """
    rows: list[dict] = []
    mc2 = p.rest_energy

    # 1. closed-form levels against the exact interior spectrum
    spectrum = interior_spectrum(space, p, margin=margin, strength=0.0)
    for n in range(5):
        for branch in (POSITIVE, NEGATIVE):
            analytic = landau_level(p, n, branch)
            nearest = float(spectrum[np.argmin(np.abs(spectrum - analytic))])
            rel = abs(nearest - analytic) / max(abs(analytic), 1e-30)
            rows.append(
                {
                    "row": f"level n={n} branch {branch}",
                    "computed": nearest,
                    "reference": analytic,
                    "detail": f"relative error {rel:.3e}",
                    **_status(rel <= 1e-8, f"level-{n}-{branch}"),
                }
            )

    # 2. ground-level shift and its oracle slope
    ground = first_order_shift(space, p, spinor_level(p, 0, POSITIVE),
                               margin=margin)
    rows.append(
        {
            "row": "ground-shift",
            "computed": ground.shifts[0],
            "reference": REFERENCE_GROUND_SHIFT,
            "detail": f"units {SHIFT_UNITS}",
            **_status(
                abs(ground.shifts[0] - REFERENCE_GROUND_SHIFT) <= 1e-10,
                "ground-shift",
            ),
        }
    )
    slope = ground.oracle_slopes[0]
    rows.append(
        {
            "row": "ground-shift-oracle",
            "computed": slope,
            "reference": ground.shifts[0],
            "detail": "finite-difference slope of the exact spectrum",
            **_status(
                abs(slope - ground.shifts[0]) <= ORACLE_RTOL * abs(ground.shifts[0]),
                "ground-shift-oracle",
            ),
        }
    )

    # 3. first excited level: stored value vs the oracle-consistent one
    first = first_order_shift(space, p, spinor_level(p, 1, POSITIVE),
                              margin=margin)
    rows.append(
        {
            "row": "first-excited-shift",
            "computed": first.shifts[0],
            "reference": REFERENCE_FIRST_EXCITED_SHIFT,
            "detail": (
                "stored reference value is not reproduced by the pinned "
                "constructions; both values shown"
            ),
            **_status(
                abs(first.shifts[0] - REFERENCE_FIRST_EXCITED_SHIFT) <= 1e-6,
                "first-excited-shift",
            ),
        }
    )
    rows.append(
        {
            "row": "first-excited-oracle",
            "computed": first.oracle_slopes[0],
            "reference": first.shifts[0],
            "detail": "internal consistency of shift vs exact spectrum slope",
            **_status(
                abs(first.oracle_slopes[0] - first.shifts[0])
                <= ORACLE_RTOL * abs(first.shifts[0]),
                "first-excited-oracle",
            ),
        }
    )

    # 4. degenerate block: own-basis matrix vs stored block
    own = degenerate_shift(
        space, p, level_cluster(space, p, n=2, size=4), margin=margin
    )
    stored = shifts_of_matrix(REFERENCE_DEGENERATE_BLOCK, "stored 4x4 block")
    own_set = np.array(own.shifts)
    stored_set = np.array(stored.shifts)
    rows.append(
        {
            "row": "degenerate-block-basis",
            "computed": [float(s) for s in own_set],
            "reference": [float(s) for s in stored_set],
            "detail": (
                "own-basis cluster matrix is diagonal in the spectator "
                "tower; stored block uses an unreconstructible basis"
            ),
            **_status(
                bool(np.all(np.abs(own_set - stored_set) <= 1e-6)),
                "degenerate-block-basis",
            ),
        }
    )
    printed = np.array(sorted(REFERENCE_DEGENERATE_SHIFTS))
    rows.append(
        {
            "row": "degenerate-block-eigenvalues",
            "computed": [float(s) for s in stored_set],
            "reference": [float(s) for s in printed],
            "detail": "eigensolver on the stored block vs its expected shifts",
            **_status(
                bool(np.all(np.abs(stored_set - printed) <= 5e-4)),
                "degenerate-block-eigenvalues",
            ),
        }
    )
    vec = REFERENCE_DEGENERATE_EIGENVECTOR
    image = REFERENCE_DEGENERATE_BLOCK @ vec
    expected = REFERENCE_DEGENERATE_EIGENVECTOR_SHIFT * vec
    vec_err = float(np.max(np.abs(image - expected)))
    rows.append(
        {
            "row": "degenerate-block-eigenvector",
            "computed": vec_err,
            "reference": 0.0,
            "detail": "(-1, 1, 0, 0) must map to -8 times itself",
            **_status(vec_err <= 1e-12, "degenerate-block-eigenvector"),
        }
    )

    # 5. critical field
    bc = critical_field(p)
    wt_at_bc = p.with_field(bc).omega_tilde
    rows.append(
        {
            "row": "critical-field",
            "computed": bc,
            "reference": 2.0 * p.omega * p.mass * p.light_speed / p.charge,
            "detail": f"reduced frequency at the critical field: {wt_at_bc!r}",
            **_status(abs(wt_at_bc) <= 1e-12, "critical-field"),
        }
    )

    failing = [
        r["code"]
        for r in rows
        if r["status"] != "MATCH" and r["code"] not in ALLOWLISTED_DISCREPANCIES
    ]
    return {
        "rows": rows,
        "allowlisted": sorted(ALLOWLISTED_DISCREPANCIES),
        "unexpected_discrepancies": failing,
        "passed": not failing,
        "own_block": own,
        "stored_block": stored,
    }
