"""Pulse-train generation and optical transformations.

A comb emits pulses every repetition period T whose carrier-envelope phase
advances by a fixed step per pulse.  The step is tied to the offset
frequency nu_0; by default we use the angular convention

    phase_step = 2 pi nu_0 T

(a "cyclic" convention nu_0 * T is available as a switch, since the
literature is not unanimous about the 2 pi).
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import OverlapError, ReplicaBudgetError
from .pulses import PulseSpec

PHASE_CONVENTIONS = ("angular", "cyclic")

#: default gap between the two members of an interleaved pair [s]
DEFAULT_INTRA_PAIR_GAP = 10e-12


@dataclass(frozen=True)
class CombSpec:
    """Frequency-comb model: repetition period, offset frequency, pulse shape."""

    rep_period: float  # T [s]
    offset_freq: float  # nu_0 [Hz]
    pulse_template: PulseSpec
    phase_convention: str = "angular"

    def __post_init__(self):
        if self.rep_period <= 0:
            raise ValueError("rep_period must be positive")
        if self.rep_period <= self.pulse_template.tau:
            raise ValueError("rep_period must exceed the pulse duration")
        if self.phase_convention not in PHASE_CONVENTIONS:
            raise ValueError(f"unknown phase convention {self.phase_convention!r}")

    @property
    def rep_rate(self) -> float:
        return 1.0 / self.rep_period

    @property
    def phase_step(self) -> float:
        """Pulse-to-pulse phase increment [rad]."""
        step = self.offset_freq * self.rep_period
        if self.phase_convention == "angular":
            step *= 2.0 * np.pi
        return step


@dataclass(frozen=True)
class PulseTrain:
    """Ordered pulse arrival events (time, CEO phase, Rabi angle).

    ``indices`` tracks which source pulse each event came from, so optical
    rearrangements can prove they use each pulse only once.
    ``pulse_duration`` (when known) is used for overlap checks: consecutive
    arrivals must be at least two pulse durations apart.
    """

    times: np.ndarray
    phases: np.ndarray
    thetas: np.ndarray
    indices: np.ndarray | None = None
    pulse_duration: float | None = None
    wrap_risk: bool = False

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        ph = np.asarray(self.phases, dtype=float)
        th = np.asarray(self.thetas, dtype=float)
        if not (t.shape == ph.shape == th.shape) or t.ndim != 1 or t.size == 0:
            raise ValueError("times/phases/thetas must be equal-length 1-d arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("arrival times must be strictly increasing")
        if self.pulse_duration is not None and t.size > 1:
            # envelopes are supported on [-tau/2, tau/2], so arrivals one full
            # duration apart have disjoint supports
            if np.min(np.diff(t)) < self.pulse_duration * (1.0 - 1e-9):
                raise OverlapError("consecutive pulse envelopes overlap")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "phases", ph)
        object.__setattr__(self, "thetas", th)
        if self.indices is not None:
            object.__setattr__(self, "indices", np.asarray(self.indices, dtype=int))

    def __len__(self) -> int:
        return self.times.size


@dataclass(frozen=True)
class BsdSpec:
    """Beam-splitter-and-delayer: n short-spaced replicas of each pulse."""

    replicas: int
    spacing: float  # Delta t [s]
    amplitude_rule: str = "equal"  # "equal" or "geometric"
    ratio: float = 0.5  # used by the geometric rule

    def __post_init__(self):
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.spacing <= 0:
            raise ValueError("spacing must be positive")
        if self.amplitude_rule not in ("equal", "geometric"):
            raise ValueError(f"unknown amplitude rule {self.amplitude_rule!r}")
        if self.amplitude_rule == "geometric" and not 0 < self.ratio < 1:
            raise ValueError("geometric ratio must be in (0, 1)")


@dataclass(frozen=True)
class JitterSpec:
    """Stochastic per-pulse phase noise: white increments or a random walk."""

    kind: str = "random_walk"
    sigma: float = 0.0  # std of the per-pulse phase increment [rad]

    def __post_init__(self):
        if self.kind not in ("white", "random_walk"):
            raise ValueError(f"unknown jitter kind {self.kind!r}")
        if self.sigma < 0:
            raise ValueError("sigma must be >= 0")


def generate_train(c: CombSpec, n_pulses: int, start_index: int = 0) -> PulseTrain:
    """Ideal comb output: t_m = m T, phi_m = m * phase_step, uniform theta."""
    if n_pulses < 1:
        raise ValueError("n_pulses must be >= 1")
    m = start_index + np.arange(n_pulses)
    return PulseTrain(
        times=m * c.rep_period,
        phases=m * c.phase_step,
        thetas=np.full(n_pulses, c.pulse_template.theta),
        indices=m,
        pulse_duration=c.pulse_template.tau,
    )


def split_delay_interleave(
    t: PulseTrain,
    n_delay: int,
    n_pairs: int | None = None,
    intra_pair_gap: float = DEFAULT_INTRA_PAIR_GAP,
) -> PulseTrain:
    """Split the train, delay the early half by n_delay periods, interleave.

    Pair k consists of the delayed copy of pulse k (arriving first) and the
    undelayed pulse k + n_delay, separated by ``intra_pair_gap``.  Each source
    pulse is used exactly once, which caps the number of pairs at n_delay.
    """
    if n_delay < 0:
        raise ValueError("n_delay must be >= 0")
    n = len(t)
    if n_pairs is None:
        n_pairs = min(n - n_delay, n_delay) if n_delay > 0 else n
    if n_pairs < 1:
        raise ValueError("train too short for the requested delay")
    if n_delay > 0 and n_pairs > n_delay:
        raise ValueError("more pairs than the delay allows without reusing pulses")
    if n_pairs + n_delay > n:
        raise ValueError("train too short to pair each kept pulse")
    if t.pulse_duration is not None and intra_pair_gap < t.pulse_duration:
        raise OverlapError(
            f"intra-pair gap {intra_pair_gap} shorter than the pulse duration"
        )
    early = slice(0, n_pairs)
    late = slice(n_delay, n_delay + n_pairs)
    times = np.empty(2 * n_pairs)
    phases = np.empty(2 * n_pairs)
    thetas = np.empty(2 * n_pairs)
    indices = np.empty(2 * n_pairs, dtype=int)
    # delayed member first, undelayed one an intra-pair gap later
    times[0::2] = t.times[late]
    times[1::2] = t.times[late] + intra_pair_gap
    phases[0::2] = t.phases[early]
    phases[1::2] = t.phases[late]
    thetas[0::2] = t.thetas[early]
    thetas[1::2] = t.thetas[late]
    src = t.indices if t.indices is not None else np.arange(n)
    indices[0::2] = src[early]
    indices[1::2] = src[late]
    if n_delay == 0:
        # degenerate splitter: pair each pulse with itself, re-timed
        times[0::2] = t.times[early]
        times[1::2] = t.times[early] + intra_pair_gap
    return PulseTrain(times, phases, thetas, indices, t.pulse_duration, t.wrap_risk)


def max_replicas(pulse_duration: float, tau_rad: float | None, tau_coh: float | None) -> int:
    """Largest replica count allowed by the radiative/coherence lifetimes."""
    lifetimes = [x for x in (tau_rad, tau_coh) if x is not None]
    if not lifetimes:
        raise ValueError("at least one lifetime is required")
    return int(min(lifetimes) / (2.0 * pulse_duration))


def bsd_replicate(
    t: PulseTrain,
    b: BsdSpec,
    tau_rad: float | None = None,
    tau_coh: float | None = None,
) -> PulseTrain:
    """Replace every pulse by ``b.replicas`` replicas spaced ``b.spacing`` apart.

    The total pulse area of each event is preserved: the equal rule splits
    theta evenly, the geometric rule uses normalized weights ratio**j.
    """
    if b.replicas == 1:
        return t
    if t.pulse_duration is not None:
        if b.spacing < t.pulse_duration:
            raise OverlapError("replica spacing shorter than the pulse duration")
        if tau_rad is not None or tau_coh is not None:
            budget = max_replicas(t.pulse_duration, tau_rad, tau_coh)
            if b.replicas > budget:
                raise ReplicaBudgetError(
                    f"{b.replicas} replicas exceed the lifetime budget of {budget}"
                )
    span = (b.replicas - 1) * b.spacing
    if len(t) > 1 and span >= np.min(np.diff(t.times)):
        raise OverlapError("replica fan of one pulse reaches into the next event")
    if b.amplitude_rule == "equal":
        weights = np.full(b.replicas, 1.0 / b.replicas)
    else:
        w = b.ratio ** np.arange(b.replicas)
        weights = w / w.sum()
    offs = b.spacing * np.arange(b.replicas)
    times = (t.times[:, None] + offs[None, :]).ravel()
    phases = np.repeat(t.phases, b.replicas)
    thetas = (t.thetas[:, None] * weights[None, :]).ravel()
    indices = None
    if t.indices is not None:
        indices = np.repeat(t.indices, b.replicas)
    return PulseTrain(times, phases, thetas, indices, t.pulse_duration, t.wrap_risk)


def apply_phase_jitter(t: PulseTrain, model: JitterSpec, seed: int) -> PulseTrain:
    """Add stochastic per-pulse phase noise; deterministic under the seed.

    The wrap_risk flag is set when the predicted std of the accumulated
    phase excursion reaches pi/2, i.e. when a protocol reading the phase
    modulo pi can no longer trust a single-shot determination.
    """
    if model.sigma == 0.0:
        return t
    rng = np.random.default_rng(seed)
    n = len(t)
    kicks = rng.normal(0.0, model.sigma, size=n)
    if model.kind == "random_walk":
        noise = np.cumsum(kicks)
        predicted_std = model.sigma * np.sqrt(n)
    else:
        noise = kicks
        predicted_std = model.sigma
    return replace(
        t,
        phases=t.phases + noise,
        wrap_risk=bool(t.wrap_risk or predicted_std >= np.pi / 2.0),
    )


def fiber_comb_preset(carrier_freq: float = 2.0 * np.pi * 3.5e14) -> CombSpec:
    """A 100 MHz fiber comb with a 200 kHz-class offset and 10 ps pulses."""
    template = PulseSpec(
        envelope_kind="gaussian",
        theta=np.pi / 2,
        tau=10e-12,
        carrier_freq=carrier_freq,
        atom_freq=carrier_freq,
    )
    return CombSpec(rep_period=10e-9, offset_freq=200e3, pulse_template=template)


def wrap_pulse_count(c: CombSpec) -> int:
    """Pulse count after which the CEO phase completes a full 2 pi wrap."""
    step = abs(c.phase_step)
    if step == 0:
        return np.iinfo(np.int64).max
    return int(round(2.0 * np.pi / step))


# --- CSV interface (columns: index, t_m [s], phi_m [rad], theta_m [rad]) ---

def train_to_csv(t: PulseTrain, path_or_file) -> None:
    close = False
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        fh = open(path_or_file, "w", newline="")
        close = True
    else:
        fh = path_or_file
    try:
        w = csv.writer(fh)
        w.writerow(["index", "t_m", "phi_m", "theta_m"])
        src = t.indices if t.indices is not None else np.arange(len(t))
        for i, tm, ph, th in zip(src, t.times, t.phases, t.thetas):
            w.writerow([int(i), repr(float(tm)), repr(float(ph)), repr(float(th))])
    finally:
        if close:
            fh.close()


def train_from_csv(path_or_file) -> PulseTrain:
    if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
        with open(path_or_file, newline="") as fh:
            return train_from_csv(fh)
    if isinstance(path_or_file, str):
        path_or_file = io.StringIO(path_or_file)
    r = csv.reader(path_or_file)
    header = next(r)
    if header != ["index", "t_m", "phi_m", "theta_m"]:
        raise ValueError(f"unexpected CSV header {header!r}")
    rows = [row for row in r if row]
    idx = np.array([int(x[0]) for x in rows])
    return PulseTrain(
        times=np.array([float(x[1]) for x in rows]),
        phases=np.array([float(x[2]) for x in rows]),
        thetas=np.array([float(x[3]) for x in rows]),
        indices=idx,
    )
