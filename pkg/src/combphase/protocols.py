"""Multi-pulse protocol composition and the Ramsey outcome model.

Protocol kinds
--------------
1A : one train of N weak pulses (theta << 1); excitation amplitude carries
     a sin(N dphi)/sin(dphi) interference factor.
1B : one train of N pi/2-class pulses; pairs of pulses collapse to a pure
     sigma_z rotation, total exp(-i N dphi sigma_z).
2A : split/delayed/interleaved train operated at theta << 1.
2B : split/delayed/interleaved train at theta = pi/2; the pair phase
     difference is boosted by the delay, total exp(-i N N_d dphi sigma_z).
phase_ref : ideal sigma_x gates interleaved between pulses, accumulating
     the *sum* of the CEO phases instead of differences.

The outcome model implements the two-arm Ramsey experiment: arm 1 applies
Hadamard, reference phase xi on |1>, the train, and an undoing Hadamard;
arm 2 applies the train directly to |0> (no Hadamards), measuring the raw
excitation probability that pins down theta.  All probabilities come with
exact analytic derivatives in (theta, dphi), obtained by product-rule
accumulation through a square-and-multiply matrix power.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from ._su2 import HADAMARD, SIGMA_MINUS, SIGMA_PLUS, SIGMA_Z, ID2, matpow_with_grad, rot_x, rot_z
from .comb import PulseTrain
from .pulses import PulseSpec, Unitary, integrate_pulse, rwa_matrix

PROTOCOL_KINDS = ("1A", "1B", "2A", "2B", "phase_ref")


@dataclass(frozen=True)
class ProtocolSpec:
    """Which protocol to run and at which operating point."""

    kind: str
    n_pulses: int
    n_delay: int = 0
    reference_phase: float = 0.0
    theta: float = np.pi / 2

    def __post_init__(self):
        if self.kind not in PROTOCOL_KINDS:
            raise ValueError(f"unknown protocol kind {self.kind!r}")
        if self.n_pulses < 1:
            raise ValueError("n_pulses must be >= 1")
        if self.kind in ("1B", "2A", "2B") and self.n_pulses % 2:
            raise ValueError(f"protocol {self.kind} needs an even pulse count")
        if not 0.0 <= self.reference_phase < 2.0 * np.pi:
            raise ValueError("reference_phase must lie in [0, 2 pi)")
        if self.kind in ("2A", "2B") and self.n_delay < 1:
            raise ValueError("delayed protocols need n_delay >= 1")

    @property
    def enhancement(self) -> float:
        """Phase-accumulation factor chi(N): the fringe argument is chi * dphi."""
        if self.kind == "1B":
            return float(self.n_pulses)
        if self.kind == "2B":
            return float(self.n_pulses * self.n_delay)
        if self.kind == "2A":
            return float(self.n_delay)
        if self.kind == "phase_ref":
            return float(self.n_pulses * (self.n_pulses + 1))
        return 1.0  # 1A: no coherent enhancement


def compose_train(
    t: PulseTrain,
    use_rwa: bool = True,
    template: PulseSpec | None = None,
    steps_per_cycle: int = 200,
) -> Unitary:
    """Ordered product of per-pulse unitaries, later pulses to the left."""
    if len(t) == 0:
        raise ValueError("empty train")
    u = ID2
    for phi, theta in zip(t.phases, t.thetas):
        if use_rwa:
            step = rwa_matrix(theta, phi)
        else:
            if template is None:
                raise ValueError("integrated composition needs a pulse template")
            step = integrate_pulse(
                template.replace(theta=theta, ceo_phase=phi), steps_per_cycle
            ).matrix
        u = step @ u
    return Unitary(u, tol=1e-8 if not use_rwa else 1e-10)


def closed_form_1a(theta: float, dphi: float, n: int) -> np.ndarray:
    """First-order weak-pulse train unitary (valid for N*theta small).

    Returns a plain matrix: the expansion is unitary only to O(theta^2).
    """
    if n * theta > 0.3:
        warnings.warn("closed_form_1a used outside the weak-pulse regime", stacklevel=2)
    if abs(np.sin(dphi)) < 1e-12:
        ratio = float(n)  # removable singularity at dphi = 0 mod pi
    else:
        ratio = np.sin(n * dphi) / np.sin(dphi)
    alpha = (n + 1) * dphi
    return ID2 + 1.0j * theta * ratio * (
        np.exp(-1.0j * alpha) * SIGMA_PLUS + np.exp(1.0j * alpha) * SIGMA_MINUS
    )


def closed_form_1b(phases: np.ndarray) -> Unitary:
    """Pairwise-collapsed train unitary exp(-2i sum(phi_even - phi_odd) sigma_z).

    ``phases`` is the ordered phase list of an even-length train; pair k is
    (phases[2k], phases[2k+1]) with the later pulse second.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.size % 2:
        raise ValueError("closed_form_1b needs an even number of pulses")
    s = float(np.sum(phases[1::2] - phases[0::2]))
    return Unitary(rot_z(2.0 * s))


def closed_form_2b(dphi: float, n: int, n_delay: int) -> Unitary:
    """Delayed-interleave train unitary exp(-i sigma_z dphi N N_d)."""
    if n % 2:
        raise ValueError("closed_form_2b needs an even number of pulses")
    return Unitary(rot_z(float(n * n_delay) * dphi))


def phase_reference_sequence(t: PulseTrain) -> Unitary:
    """Train with ideal sigma_x gates interleaved: exp(2i sum(phi_m) sigma_z)."""
    return Unitary(rot_z(-2.0 * float(np.sum(t.phases))))


def brute_force_permutation_phase(phases) -> float:
    """Exhaustive maximum of |sum of pair phase differences| over pairings.

    Any ordering/pairing of the pulses assigns half the phases a + sign and
    half a - sign, so the search space is the balanced sign assignments.
    """
    phases = np.asarray(phases, dtype=float)
    n = phases.size
    if n % 2:
        raise ValueError("even-length phase list required")
    total = phases.sum()
    best = 0.0
    for plus in itertools.combinations(range(n), n // 2):
        s = phases[list(plus)].sum()
        best = max(best, abs(2.0 * s - total))
    return float(best)


def optimal_permutation_phase(phases) -> tuple[float, list[int]]:
    """Largest accumulated phase over single-use rearrangements, with witness.

    The optimum pairs the smallest half of the sorted phases against the
    largest half; the witness lists source indices in interleaved pair order
    (low_1, high_1, low_2, high_2, ...).
    """
    phases = np.asarray(phases, dtype=float)
    n = phases.size
    if n % 2:
        raise ValueError("even-length phase list required")
    order = np.argsort(phases, kind="stable")
    low, high = order[: n // 2], order[n // 2 :]
    value = float(phases[high].sum() - phases[low].sum())
    witness = [int(i) for pair in zip(low, high) for i in pair]
    return value, witness


# --- Ramsey outcome model -------------------------------------------------

_E0 = np.array([1.0, 0.0], dtype=complex)


def _train_unitary_with_grad(spec: ProtocolSpec, theta: float, dphi: float):
    """U_tot(theta, dphi) and its exact partial derivatives."""
    if spec.kind == "phase_ref":
        total = dphi * spec.n_pulses * (spec.n_pulses + 1) / 2.0
        u = rot_z(-2.0 * total)
        du_dphi = 2.0j * (spec.n_pulses * (spec.n_pulses + 1) / 2.0) * (SIGMA_Z @ u)
        return u, np.zeros((2, 2), dtype=complex), du_dphi

    a = rot_x(theta)
    da_dth = 1.0j * (np.array([[0, 1], [1, 0]], dtype=complex) @ a)
    if spec.kind in ("1A", "1B"):
        g, dg_dth, dg_dphi = a, da_dth, np.zeros((2, 2), dtype=complex)
        k = spec.n_pulses
    else:  # 2A / 2B: pair unitary with delay-boosted inner phase
        nd = spec.n_delay
        c = rot_z(nd * dphi)
        cinv = rot_z(-nd * dphi)
        core = c @ a @ cinv
        g = core @ a
        dg_dth = c @ da_dth @ cinv @ a + core @ da_dth
        dg_dphi = -1.0j * nd * (SIGMA_Z @ core - core @ SIGMA_Z) @ a
        k = spec.n_pulses // 2

    d = rot_z(dphi)
    dinv = rot_z(-dphi)
    m = g @ dinv
    dm_dth = dg_dth @ dinv
    dm_dphi = dg_dphi @ dinv + 1.0j * (g @ (SIGMA_Z @ dinv))
    p, (dp_dth, dp_dphi) = matpow_with_grad(m, [dm_dth, dm_dphi], k)
    dz = rot_z(k * dphi)
    u = dz @ p
    du_dth = dz @ dp_dth
    du_dphi = -1.0j * k * (SIGMA_Z @ u) + dz @ dp_dphi
    return u, du_dth, du_dphi


@dataclass(frozen=True)
class RamseyOutcomeModel:
    """Two-arm measurement distributions P1/P2(s | theta, dphi) with gradients."""

    spec: ProtocolSpec

    def evaluate(self, theta: float, dphi: float):
        """Return (p1, p2, dp1_dth, dp1_dphi, dp2_dth, dp2_dphi).

        Each entry is a length-2 array indexed by the outcome s in {0, 1}.
        """
        u, du_dth, du_dphi = _train_unitary_with_grad(self.spec, theta, dphi)
        xi = self.spec.reference_phase
        ref = np.array([[1.0, 0.0], [0.0, np.exp(1.0j * xi)]])
        pre1 = ref @ (HADAMARD @ _E0)
        psi1 = HADAMARD @ (u @ pre1)
        dpsi1_dth = HADAMARD @ (du_dth @ pre1)
        dpsi1_dphi = HADAMARD @ (du_dphi @ pre1)
        psi2 = u @ _E0
        dpsi2_dth = du_dth @ _E0
        dpsi2_dphi = du_dphi @ _E0

        def probs(psi):
            return np.abs(psi) ** 2

        def dprobs(psi, dpsi):
            return 2.0 * np.real(np.conj(psi) * dpsi)

        return (
            probs(psi1),
            probs(psi2),
            dprobs(psi1, dpsi1_dth),
            dprobs(psi1, dpsi1_dphi),
            dprobs(psi2, dpsi2_dth),
            dprobs(psi2, dpsi2_dphi),
        )

    def p1(self, s: int, theta: float, dphi: float) -> float:
        return float(self.evaluate(theta, dphi)[0][s])

    def p2(self, s: int, theta: float, dphi: float) -> float:
        return float(self.evaluate(theta, dphi)[1][s])

    def train_unitary(self, theta: float, dphi: float) -> np.ndarray:
        return _train_unitary_with_grad(self.spec, theta, dphi)[0]


def ramsey_model(spec: ProtocolSpec) -> RamseyOutcomeModel:
    return RamseyOutcomeModel(spec)
