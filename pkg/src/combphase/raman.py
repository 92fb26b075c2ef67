"""Three-level Lambda/Raman physics.

Two long-lived states a and b are coupled through an excited state c by a
pulse that drives both legs with a common envelope but independent phases.
Detuning the laser from the a,b <-> c transitions keeps c essentially empty
at the end of the pulse while the leg phase difference phi_l = phi_2 - phi_1
is imprinted as a relative phase phi_s between a and b.  `phase_map` charts
phi_s(phi_l) for the full carrier-resolved model; in the rotating-wave limit
the map is exactly the identity.
"""
from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np

from ._su2 import expm_herm, rot_x, rot_z
from .errors import IntegrationError
from .pulses import Unitary

_BASIS = ("a", "b", "c")  # indices 0, 1, 2


@dataclass(frozen=True)
class LambdaSpec:
    """Raman pulse: common-envelope two-leg drive through an excited state.

    ``rabi`` is the peak amplitude of the envelope s(t) (not an integrated
    area); both legs share the same s(t).
    """

    rabi: float  # peak of s(t) [rad/s]
    duration: float  # tau [s]
    laser_freq: float  # omega [rad/s]
    excited_energy: float  # omega_at [rad/s]
    phi_1: float = 0.0
    phi_2: float = 0.0
    envelope_kind: str = "cos2"

    def __post_init__(self):
        if self.rabi < 0 or self.duration <= 0 or self.laser_freq <= 0:
            raise ValueError("rabi, duration and laser_freq must be positive")
        if self.envelope_kind not in ("gaussian", "cos2", "rect"):
            raise ValueError(f"unknown envelope kind {self.envelope_kind!r}")
        if self.detuning == 0.0:
            raise ValueError("Raman regime requires a nonzero detuning")

    @property
    def detuning(self) -> float:
        return self.excited_energy - self.laser_freq

    @property
    def phi_l(self) -> float:
        return self.phi_2 - self.phi_1

    @property
    def carrier_cycles(self) -> float:
        return self.duration * self.laser_freq / (2.0 * np.pi)

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        half = self.duration / 2.0
        if self.envelope_kind == "rect":
            shape = np.ones_like(t)
        elif self.envelope_kind == "cos2":
            shape = np.cos(np.pi * t / self.duration) ** 2
        else:
            std = self.duration / 8.0
            shape = np.exp(-0.5 * (t / std) ** 2)
        return np.where(np.abs(t) <= half, self.rabi * shape, 0.0)

    def replace(self, **kwargs) -> "LambdaSpec":
        from dataclasses import replace

        return replace(self, **kwargs)


@dataclass(frozen=True)
class RamanEffective:
    """Effective qubit picture of a Raman pulse pair.

    ``phase_eff`` is the phase entering the sigma_z conjugation: phi_m -
    phi_ref against a cw reference, or n_delay * dphi when the comb is
    self-referenced with a delay line.  ``delay_mismatch`` is the residual
    delay-line error delta_T = T_d - N_d T.
    """

    theta_eff: float
    phase_eff: float
    delay_mismatch: float = 0.0
    carrier_freq: float | None = None


def _lambda_hamiltonians(l: LambdaSpec, phi2_grid, times) -> np.ndarray:
    """Rotating-frame (at the laser frequency) Hamiltonians, (T, G, 3, 3)."""
    phi2 = np.atleast_1d(np.asarray(phi2_grid, dtype=float))
    times = np.asarray(times, dtype=float)
    s = l.envelope(times)[:, None]
    wt = l.laser_freq * times[:, None]
    leg1 = s * np.cos(wt + l.phi_1) * np.exp(1.0j * wt)
    leg2 = s * np.cos(wt + phi2[None, :]) * np.exp(1.0j * wt)
    h = np.zeros((times.size, phi2.size, 3, 3), dtype=complex)
    h[..., 2, 2] = l.detuning
    h[..., 2, 0] = leg1
    h[..., 0, 2] = np.conj(leg1)
    h[..., 2, 1] = leg2
    h[..., 1, 2] = np.conj(leg2)
    return h


def _lambda_rwa_hamiltonians(l: LambdaSpec, phi2_grid, times) -> np.ndarray:
    """Rotating-wave reduction of the same model (carrier dropped)."""
    phi2 = np.atleast_1d(np.asarray(phi2_grid, dtype=float))
    times = np.asarray(times, dtype=float)
    s = l.envelope(times)[:, None] / 2.0
    h = np.zeros((times.size, phi2.size, 3, 3), dtype=complex)
    h[..., 2, 2] = l.detuning
    h[..., 2, 0] = s * np.exp(-1.0j * l.phi_1)
    h[..., 0, 2] = np.conj(h[..., 2, 0])
    h[..., 2, 1] = s * np.exp(-1.0j * phi2[None, :])
    h[..., 1, 2] = np.conj(h[..., 2, 1])
    return h


def _propagate(l: LambdaSpec, phi2_grid, steps: int, rwa: bool) -> np.ndarray:
    ham = _lambda_rwa_hamiltonians if rwa else _lambda_hamiltonians
    h_step = l.duration / steps
    t0 = -l.duration / 2.0 + h_step * np.arange(steps)
    c = np.sqrt(3.0) / 6.0
    h1 = ham(l, phi2_grid, t0 + (0.5 - c) * h_step)
    h2 = ham(l, phi2_grid, t0 + (0.5 + c) * h_step)
    comm = h2 @ h1 - h1 @ h2
    gen = (h_step / 2.0) * (h1 + h2) - 1.0j * (np.sqrt(3.0) * h_step**2 / 12.0) * comm
    g = np.atleast_1d(np.asarray(phi2_grid)).size
    u = np.broadcast_to(np.eye(3, dtype=complex), (g, 3, 3)).copy()
    for k in range(steps):
        u = expm_herm(gen[k]) @ u
    return u


def integrate_lambda(
    l: LambdaSpec,
    steps_per_cycle: int = 200,
    rwa: bool = False,
    tol: float = 1e-8,
    max_refinements: int = 5,
) -> tuple[Unitary, float]:
    """Propagator of the three-level model and the residual |c> population.

    The population is quoted for an atom starting in |a>.  Step count is
    refined by halving until two resolutions agree to ``tol``.
    """
    if steps_per_cycle < 100:
        raise ValueError("steps_per_cycle must be >= 100")
    steps = max(int(np.ceil(steps_per_cycle * l.carrier_cycles)), 50)
    u_prev = _propagate(l, l.phi_2, steps, rwa)[0]
    for _ in range(max_refinements):
        steps *= 2
        u = _propagate(l, l.phi_2, steps, rwa)[0]
        if np.linalg.norm(u - u_prev) <= tol:
            return Unitary(u, tol=1e-8), float(np.abs(u[2, 0]) ** 2)
        u_prev = u
    raise IntegrationError(f"three-level propagator did not stabilize to {tol}")


@dataclass(frozen=True)
class PhaseMapResult:
    """phi_s(phi_l) samples plus derivative diagnostics."""

    phi_l: np.ndarray
    phi_s: np.ndarray
    dphi_s: np.ndarray  # d phi_s / d phi_l on the grid
    max_identity_deviation: float  # max |d phi_s / d phi_l - 1|
    max_curve_deviation: float  # max |phi_s - phi_l| [rad]
    monotone: bool


def phase_map(
    l: LambdaSpec,
    phi_l_grid,
    steps_per_cycle: int = 200,
    rwa: bool = False,
) -> PhaseMapResult:
    """Relative a-b phase imprinted by the pulse, as a function of phi_l.

    The atom starts in |a>; phi_s is arg(c_b / c_a) referenced to its value
    at phi_l = 0, unwrapped along the grid.  A non-monotone curve would
    invalidate phase stabilization and is flagged (with a warning).
    """
    grid = np.asarray(phi_l_grid, dtype=float)
    if grid.ndim != 1 or grid.size < 3:
        raise ValueError("need a 1-d grid with at least 3 points")
    steps = max(int(np.ceil(steps_per_cycle * l.carrier_cycles)), 50)
    phi2 = np.concatenate(([l.phi_1], l.phi_1 + grid))  # leading reference point
    u = _propagate(l, phi2, steps, rwa)
    ca, cb = u[:, 0, 0], u[:, 1, 0]
    if np.min(np.abs(cb)) < 1e-9:
        raise IntegrationError("b amplitude vanished; phase extraction undefined")
    raw = np.angle(cb / ca)
    phi_s = np.unwrap(raw[1:] - raw[0])
    dphi_s = np.gradient(phi_s, grid)
    monotone = bool(np.all(np.diff(phi_s) > 0) or np.all(np.diff(phi_s) < 0))
    if not monotone:
        warnings.warn("phi_s(phi_l) is not monotone on this grid", stacklevel=2)
    return PhaseMapResult(
        phi_l=grid,
        phi_s=phi_s,
        dphi_s=dphi_s,
        max_identity_deviation=float(np.max(np.abs(dphi_s - 1.0))),
        max_curve_deviation=float(np.max(np.abs(phi_s - grid))),
        monotone=monotone,
    )


def phase_map_to_csv(result: PhaseMapResult, path_or_file) -> None:
    """Columns: phi_l, phi_s, dphi_s_dphi_l."""
    close = False
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["phi_l", "phi_s", "dphi_s_dphi_l"])
        for row in zip(result.phi_l, result.phi_s, result.dphi_s):
            w.writerow([repr(float(x)) for x in row])
    finally:
        if close:
            fh.close()


def measured_phase_step(dphi: float, carrier_freq: float, delay_mismatch: float) -> float:
    """Phase step actually read out when the delay line misses by delta_T.

    A residual interferometric-path delay shifts the apparent step by
    omega * delta_T; the path itself must be stabilized separately.
    """
    return dphi + carrier_freq * delay_mismatch


def effective_qubit_unitary(r: RamanEffective, n: int, dphi: float | None = None) -> Unitary:
    """Qubit unitary of N Raman pulse pairs.

    exp(-i Phi sigma_z) exp(i N theta' sigma_x) exp(+i Phi sigma_z) with
    Phi = phase_eff, corrected for a delay mismatch when the carrier
    frequency is known and ``dphi`` (the per-pair step) is supplied.
    N * theta' should sit near pi/4 for best sensitivity.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    phi = r.phase_eff
    if dphi is not None and r.delay_mismatch != 0.0:
        if r.carrier_freq is None:
            raise ValueError("carrier_freq needed to apply a delay mismatch")
        scale = r.phase_eff / dphi if dphi != 0.0 else 0.0
        phi = scale * measured_phase_step(dphi, r.carrier_freq, r.delay_mismatch)
    u = rot_z(phi) @ rot_x(n * r.theta_eff) @ rot_z(-phi)
    return Unitary(u)


def pair_phase_gate(phase_difference: float) -> Unitary:
    """Non-overlapping pi/2 Lambda variant: |1> -> -e^{i dphi'} |1>."""
    return Unitary(np.diag([1.0, -np.exp(1.0j * phase_difference)]).astype(complex))


def visibility_budget(gamma: float, t_e: float, epsilon: float) -> int:
    """Pulse budget N = -ln(epsilon) / (gamma T_e) before losing visibility epsilon."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if gamma <= 0 or t_e <= 0:
        raise ValueError("gamma and t_e must be positive")
    return int(-np.log(epsilon) / (gamma * t_e))
