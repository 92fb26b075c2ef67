"""Single-pulse two-level physics.

A laser pulse is described by its envelope shape, integrated area (Rabi
angle), duration, carrier frequency and carrier-envelope offset (CEO)
phase.  On resonance and for long enough pulses the propagator has the
closed form

    U(theta, phi) = exp(-i phi sigma_z) (cos(theta) + i sin(theta) sigma_x)
                    exp(+i phi sigma_z),

so the CEO phase enters only through conjugation with sigma_z.  Note the
full-angle convention: the off-diagonal element carries exp(-2i phi), hence
phi is recoverable from a single unitary only modulo pi.  This convention is
used consistently everywhere in the package (see README).

`integrate_pulse` propagates the full semiclassical model, carrier wiggles
included, and is the reference against which the closed form is judged.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._su2 import SIGMA_Z, expm_herm, rot_x, rot_z, unitarity_defect
from .errors import IntegrationError, UndefinedPhaseError

ENVELOPE_KINDS = ("gaussian", "cos2", "rect")

#: width of the truncated gaussian envelope, as a fraction of the duration
_GAUSSIAN_STD_FRACTION = 1.0 / 8.0


@dataclass(frozen=True)
class PulseSpec:
    """One laser pulse: envelope shape, area, duration, frequencies, phase.

    The envelope s(t) is supported on [-tau/2, tau/2], is nonnegative and is
    normalized so that its integral equals the Rabi angle ``theta``.
    """

    envelope_kind: str = "gaussian"
    theta: float = np.pi / 4
    tau: float = 30.0 * 2.0 * np.pi
    carrier_freq: float = 1.0  # rad/s
    atom_freq: float = 1.0  # rad/s
    ceo_phase: float = 0.0

    def __post_init__(self):
        if self.envelope_kind not in ENVELOPE_KINDS:
            raise ValueError(f"unknown envelope kind {self.envelope_kind!r}")
        if not np.isfinite(self.theta) or self.theta < 0:
            raise ValueError("theta must be finite and >= 0")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.carrier_freq <= 0:
            raise ValueError("carrier_freq must be positive")
        if not np.isfinite(self.ceo_phase):
            raise ValueError("ceo_phase must be finite")

    @property
    def detuning(self) -> float:
        return self.atom_freq - self.carrier_freq

    @property
    def carrier_cycles(self) -> float:
        """Number of carrier oscillations contained in the pulse."""
        return self.tau * self.carrier_freq / (2.0 * np.pi)

    def envelope(self, t):
        """Evaluate s(t); vectorized, zero outside [-tau/2, tau/2]."""
        t = np.asarray(t, dtype=float)
        half = self.tau / 2.0
        inside = np.abs(t) <= half
        if self.envelope_kind == "rect":
            shape = np.ones_like(t)
            area = self.tau
        elif self.envelope_kind == "cos2":
            shape = np.cos(np.pi * t / self.tau) ** 2
            area = self.tau / 2.0
        else:  # gaussian, truncated and renormalized
            std = self.tau * _GAUSSIAN_STD_FRACTION
            shape = np.exp(-0.5 * (t / std) ** 2)
            from scipy.special import erf

            area = std * np.sqrt(2.0 * np.pi) * erf(half / (std * np.sqrt(2.0)))
        return np.where(inside, self.theta * shape / area, 0.0)

    def replace(self, **kwargs) -> "PulseSpec":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class Unitary:
    """A 2x2 or 3x3 unitary matrix (checked on construction)."""

    matrix: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
            raise ValueError("expected a square 2x2 or 3x3 matrix")
        object.__setattr__(self, "matrix", m)
        if unitarity_defect(m) > self.tol:
            raise ValueError("matrix is not unitary within tolerance")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "Unitary") -> "Unitary":
        return Unitary(self.matrix @ other.matrix, tol=max(self.tol, other.tol))


@dataclass(frozen=True)
class QubitState:
    """Normalized complex amplitude vector (dim 2 or 3)."""

    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        if a.ndim != 1 or a.shape[0] not in (2, 3):
            raise ValueError("expected a length-2 or length-3 vector")
        if abs(np.linalg.norm(a) - 1.0) > 1e-10:
            raise ValueError("state is not normalized")
        object.__setattr__(self, "amplitudes", a)

    def populations(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def rwa_unitary(p: PulseSpec) -> Unitary:
    """Closed-form resonant propagator; depends only on theta and the phase."""
    u = rot_z(p.ceo_phase) @ rot_x(p.theta) @ rot_z(-p.ceo_phase)
    return Unitary(u)


def rwa_matrix(theta: float, phi: float) -> np.ndarray:
    """Bare ndarray version of `rwa_unitary` for hot loops."""
    return rot_z(phi) @ rot_x(theta) @ rot_z(-phi)


def _rotating_frame_hamiltonians(p: PulseSpec, phases, times) -> np.ndarray:
    """H(t) in the frame co-rotating with the carrier, shape (T, G, 2, 2).

    The lab-frame drive is written so that its rotating-wave limit is exactly
    the closed form of `rwa_unitary`: amplitude 2*s(t), carrier phase 2*phi
    and a sign that makes the resonant area-theta pulse equal
    cos(theta) + i sin(theta) sigma_x.
    """
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    times = np.asarray(times, dtype=float)
    s = p.envelope(times)[:, None]
    delta = p.detuning
    fast = np.exp(1.0j * (2.0 * p.carrier_freq * times[:, None] + 2.0 * phases[None, :]))
    slow = np.exp(-2.0j * phases[None, :]) * np.ones_like(times)[:, None]
    drive = -s * (fast + slow)  # coefficient of sigma_plus
    h = np.zeros(drive.shape + (2, 2), dtype=complex)
    h[..., 0, 0] = delta / 2.0
    h[..., 1, 1] = -delta / 2.0
    h[..., 0, 1] = drive
    h[..., 1, 0] = np.conj(drive)
    return h


def _propagate_two_level(p: PulseSpec, phases, steps: int) -> np.ndarray:
    """Fourth-order (two-point Gauss Magnus) propagation over the pulse.

    Each step exponentiates an exactly Hermitian generator, so the result is
    unitary to machine precision regardless of the step size.  Batched over
    a grid of CEO phases; returns shape (G, 2, 2).
    """
    phases = np.atleast_1d(np.asarray(phases, dtype=float))
    h_step = p.tau / steps
    t0 = -p.tau / 2.0 + h_step * np.arange(steps)
    c = np.sqrt(3.0) / 6.0
    h1 = _rotating_frame_hamiltonians(p, phases, t0 + (0.5 - c) * h_step)
    h2 = _rotating_frame_hamiltonians(p, phases, t0 + (0.5 + c) * h_step)
    comm = h2 @ h1 - h1 @ h2
    gen = (h_step / 2.0) * (h1 + h2) - 1.0j * (np.sqrt(3.0) * h_step**2 / 12.0) * comm
    u = np.broadcast_to(np.eye(2, dtype=complex), (phases.size, 2, 2)).copy()
    for k in range(steps):
        u = expm_herm(gen[k]) @ u
    return u


def integrate_pulse(
    p: PulseSpec,
    steps_per_cycle: int = 200,
    tol: float = 1e-8,
    max_refinements: int = 6,
) -> Unitary:
    """Propagator of the full semiclassical model, in the rotating frame.

    The step count is refined by halving until two consecutive resolutions
    agree to ``tol`` in Frobenius norm; failure to stabilize raises
    IntegrationError.
    """
    if steps_per_cycle < 100:
        raise ValueError("steps_per_cycle must be >= 100")
    steps = max(int(np.ceil(steps_per_cycle * p.carrier_cycles)), 50)
    u_prev = _propagate_two_level(p, p.ceo_phase, steps)[0]
    for _ in range(max_refinements):
        steps *= 2
        u = _propagate_two_level(p, p.ceo_phase, steps)[0]
        if np.linalg.norm(u - u_prev) <= tol:
            return Unitary(u, tol=1e-8)
        u_prev = u
    raise IntegrationError(
        f"propagator did not stabilize to {tol} after {max_refinements} halvings"
    )


def integrate_pulse_phase_grid(p: PulseSpec, phases, steps_per_cycle: int = 200) -> np.ndarray:
    """Batched `integrate_pulse` over a grid of CEO phases (fixed resolution)."""
    if steps_per_cycle < 100:
        raise ValueError("steps_per_cycle must be >= 100")
    steps = max(int(np.ceil(steps_per_cycle * p.carrier_cycles)), 50)
    return _propagate_two_level(p, phases, steps)


def unitary_fidelity(a: Unitary, b: Unitary) -> float:
    """|tr(a^dag b)| / dim; equals 1 iff a and b agree up to global phase."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(abs(np.trace(a.matrix.conj().T @ b.matrix)) / a.dim)


def matrix_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    if a.shape != b.shape:
        raise ValueError("dimension mismatch")
    return float(abs(np.trace(a.conj().T @ b)) / a.shape[0])


def effective_phase(u: Unitary | np.ndarray) -> float:
    """CEO phase read back from the sigma_plus coefficient of a 2x2 unitary.

    For the closed form the (0, 1) entry is i sin(theta) exp(-2i phi), so the
    phase is recovered as (pi/2 - arg u01) / 2, reduced to [0, pi).  The
    full-angle conjugation convention makes phi ambiguous modulo pi.
    """
    m = u.matrix if isinstance(u, Unitary) else np.asarray(u)
    if m.shape != (2, 2):
        raise ValueError("effective_phase is defined for 2x2 unitaries only")
    if abs(m[0, 1]) <= 1e-12:
        raise UndefinedPhaseError("off-diagonal element vanishes; phase undefined")
    phi = (np.pi / 2.0 - np.angle(m[0, 1])) / 2.0
    return float(np.mod(phi, np.pi))
