"""Physical parameters, the analytic level structure, and Hamiltonian assembly.

The unperturbed Hamiltonian couples the two spinor components through the
dynamical boson mode only,

    H0 = [[ m c^2,              2 c p_z + i m wt c zbar ],
          [ adjoint(from above), -m c^2                 ]]

with wt the reduced frequency. The lower-left block is fixed to be the exact
adjoint of the upper-right one; together with the commutator conventions in
`fock` this pins Hermiticity and the closed-form level spectrum

    E_n(±) = ± m c^2 sqrt(1 + 4 hbar wt n / (m c^2)).

The minimal-length correction enters as H' = -a c p^2 on both spinor
components. In the ladder representation p^2 carries an overall m |wt| hbar
prefactor, so H' (and every first-order shift) vanishes identically at the
critical field wt = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ComputationError, UsageError
from .fock import (
    FockSpace,
    OscParams,
    embed_spinor,
    momentum_ops,
    p_squared,
    position_ops,
)
from .numerics import adjoint

POSITIVE = "+"
NEGATIVE = "-"
BRANCHES = (POSITIVE, NEGATIVE)


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs plus derived dimensionless quantities.

    Defaults give natural units (m = c = hbar = |e| = 1); reports quote
    energies in units of m c^2 and first-order shifts in units of
    a c m hbar wt.
    """

    omega: float
    b_field: float = 0.0
    gup_a: float = 0.0
    mass: float = 1.0
    light_speed: float = 1.0
    hbar: float = 1.0
    charge: float = 1.0

    def __post_init__(self):
        if self.mass <= 0.0:
            raise UsageError(f"mass must be positive, got {self.mass}")
        if self.light_speed <= 0.0:
            raise UsageError(f"light speed must be positive, got {self.light_speed}")
        if self.hbar <= 0.0:
            raise UsageError(f"hbar must be positive, got {self.hbar}")
        if self.charge <= 0.0:
            raise UsageError(f"charge magnitude must be positive, got {self.charge}")
        if self.omega < 0.0:
            raise UsageError(f"oscillator frequency must be >= 0, got {self.omega}")
        if self.gup_a < 0.0:
            raise UsageError(f"deformation parameter must be >= 0, got {self.gup_a}")

    @property
    def cyclotron_frequency(self) -> float:
        return self.charge * self.b_field / (self.mass * self.light_speed)

    @property
    def omega_tilde(self) -> float:
        return self.omega - 0.5 * self.cyclotron_frequency

    @property
    def rest_energy(self) -> float:
        return self.mass * self.light_speed ** 2

    @property
    def lam(self) -> float:
        """Dimensionless level-spacing parameter hbar wt / (m c^2)."""
        return self.hbar * self.omega_tilde / self.rest_energy

    @property
    def alpha_gup(self) -> float:
        """Dimensionless deformation strength a m c."""
        return self.gup_a * self.mass * self.light_speed

    @property
    def shift_unit(self) -> float:
        """The natural scale of first-order corrections, a c m hbar wt."""
        return (
            self.gup_a * self.light_speed * self.mass * self.hbar * self.omega_tilde
        )

    def with_field(self, b_field: float) -> "ModelParams":
        return ModelParams(
            omega=self.omega,
            b_field=b_field,
            gup_a=self.gup_a,
            mass=self.mass,
            light_speed=self.light_speed,
            hbar=self.hbar,
            charge=self.charge,
        )

    def frame(self) -> OscParams:
        """Oscillator frame for operator construction.

        Uses the reduced frequency when it is nonzero; exactly at the
        critical field the bare frequency provides the basis scale and all
        oscillator couplings carry an explicit factor of wt = 0.
        """
        freq = self.omega_tilde if self.omega_tilde != 0.0 else self.omega
        return OscParams(mass=self.mass, omega_tilde=freq, hbar=self.hbar)


@dataclass(frozen=True)
class SpinorLevel:
    """One analytic level: quantum number, branch, energy and spinor weights."""

    n: int
    branch: str
    energy: float
    c_n: float
    d_n: float


def reduced_frequency(p: ModelParams) -> float:
    """omega - |e| B / (2 m c)."""
    return p.omega_tilde


def landau_level(p: ModelParams, n: int, branch: str = POSITIVE) -> float:
    """Closed-form level energy ± m c^2 sqrt(1 + 4 hbar wt n / (m c^2))."""
    if n < 0:
        raise UsageError(f"level index must be >= 0, got {n}")
    if branch not in BRANCHES:
        raise UsageError(f"branch must be '+' or '-', got {branch!r}")
    radicand = 1.0 + 4.0 * p.lam * n
    if radicand < 0.0:
        raise ComputationError(
            f"branch collapse: level n={n} has no real energy at "
            f"reduced frequency {p.omega_tilde}"
        )
    sign = 1.0 if branch == POSITIVE else -1.0
    return sign * p.rest_energy * math.sqrt(radicand)


def spinor_level(p: ModelParams, n: int, branch: str = POSITIVE) -> SpinorLevel:
    """Analytic eigenstate data for level n.

    Weights: c_n(±) = ± sqrt((E_n + m c^2) / (2 E_n)) with E_n the positive
    branch energy (upper sign for +), d_n(±) = sqrt((E_n -+ m c^2) / (2 E_n)).
    The ground level is a pure upper-component state; its negative-branch
    partner has identically vanishing weight and does not exist.
    """
    e_plus = landau_level(p, n, POSITIVE)
    if e_plus <= 0.0:
        raise ComputationError(
            f"branch collapse: level n={n} at reduced frequency {p.omega_tilde}"
        )
    mc2 = p.rest_energy
    if n == 0:
        if branch == NEGATIVE:
            raise UsageError(
                "the ground level has no negative branch: its weight "
                "vanishes identically"
            )
        return SpinorLevel(n=0, branch=POSITIVE, energy=mc2, c_n=1.0, d_n=0.0)
    if branch == POSITIVE:
        c = math.sqrt((e_plus + mc2) / (2.0 * e_plus))
        d = math.sqrt((e_plus - mc2) / (2.0 * e_plus))
        energy = e_plus
    else:
        c = -math.sqrt((e_plus - mc2) / (2.0 * e_plus))
        d = math.sqrt((e_plus + mc2) / (2.0 * e_plus))
        energy = -e_plus
    return SpinorLevel(n=n, branch=branch, energy=energy, c_n=c, d_n=d)


def _require_spin(space: FockSpace) -> None:
    if not space.include_spin:
        raise UsageError("Hamiltonian assembly requires a spinful space")


def build_h0(space: FockSpace, p: ModelParams) -> np.ndarray:
    """Assemble the unperturbed Hamiltonian on the truncated basis."""
    _require_spin(space)
    sless = space.without_spin()
    mc2 = p.rest_energy
    rest = mc2 * np.eye(sless.spinless_dim, dtype=np.complex128)
    frame = p.frame()
    if frame.omega_tilde == 0.0:
        off = np.zeros_like(rest)
    else:
        _, zbar = position_ops(sless, frame)
        pz, _ = momentum_ops(sless, frame)
        off = (
            2.0 * p.light_speed * pz
            + 1j * p.mass * p.omega_tilde * p.light_speed * zbar
        )
    return embed_spinor(rest, -rest, off, adjoint(off))


def build_h_prime(
    space: FockSpace, p: ModelParams, strength: float | None = None
) -> np.ndarray:
    """Minimal-length perturbation -a c p^2 on both spinor components.

    `strength` overrides p.gup_a; negative values are permitted here because
    the finite-difference oracle extends the spectrum symmetrically through
    a = 0. Identically zero at the critical field, where the ladder
    representation of p^2 carries a vanishing prefactor.
    """
    _require_spin(space)
    a = p.gup_a if strength is None else strength
    sless = space.without_spin()
    if a == 0.0 or p.omega_tilde == 0.0:
        zero = np.zeros((sless.spinless_dim, sless.spinless_dim), dtype=np.complex128)
        return embed_spinor(zero, zero, zero, zero)
    p2 = p_squared(sless, p.frame())
    block = -a * p.light_speed * p2
    zero = np.zeros_like(block)
    return embed_spinor(block, block, zero, zero)


def build_full(space: FockSpace, p: ModelParams) -> np.ndarray:
    """H0 + H'."""
    return build_h0(space, p) + build_h_prime(space, p)
