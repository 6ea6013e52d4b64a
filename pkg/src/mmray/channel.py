"""Narrowband power, wideband impulse response, delay statistics, sweeps.

Each traced path becomes one complex tap. The coherent phasor sum of the
taps gives the narrowband received power; tap powers versus delay give the
power delay profile and its moments (mean excess delay, RMS delay spread).
A sweep engine slides the receiver along the duct centerline and evaluates
every antenna system and carrier frequency from one path enumeration per
position.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .antenna import AntennaSystem, gain
from .geometry import Vec3, neg, vec3
from .scene import Environment
from .tracer import SPEED_OF_LIGHT, PathContribution, Polarization, enumerate_paths

# Sea-level 60 GHz oxygen absorption is ~0.00116 dB/m; negligible over tens
# of metres and off by default, but available for longer ducts.
ATMOSPHERIC_LOSS_DB_PER_M = 0.00116

# Sentinel power for fully blocked receiver positions.
NO_COVERAGE = float("-inf")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        return NO_COVERAGE
    return 10.0 * math.log10(watts * 1000.0)


@dataclass(frozen=True)
class CarrierConfig:
    """Carrier frequency with derived wavelength and wavenumber."""

    frequency: float  # Hz

    def __post_init__(self) -> None:
        if self.frequency <= 0.0:
            raise ValueError(f"carrier frequency must be > 0, got {self.frequency}")

    @cached_property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @cached_property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength


@dataclass(frozen=True)
class ChannelTap:
    """One resolvable multipath component of the impulse response."""

    delay: float        # seconds
    amplitude: complex  # sqrt-watt units, carries the propagation phase
    power: float        # |amplitude|^2, watts


@dataclass(frozen=True)
class PowerDelayProfile:
    """Normalized tap power versus delay (strongest entry = 1)."""

    taps: Tuple[Tuple[float, float], ...]  # (delay s, normalized power)
    bin_width: float
    first_arrival: float


@dataclass(frozen=True)
class SweepSample:
    """Received power at one receiver position, one entry per antenna system."""

    distance: float              # arclength from the transmitter end, m
    powers: Tuple[float, ...]    # dBm; NO_COVERAGE where no path exists


@dataclass(frozen=True)
class SweepResult:
    """Power-versus-distance sweep at a single carrier frequency."""

    environment: str
    frequency: float
    sample_count: int
    samples: Tuple[SweepSample, ...]


@dataclass(eq=False)
class SweepGrid:
    """Full sweep over (position, antenna system, frequency).

    Arrays are indexed [position, system, frequency]. Power is in dBm with
    -inf marking no coverage; delay statistics are in seconds with NaN
    where undefined.
    """

    environment: str
    distances: np.ndarray
    systems: Tuple[AntennaSystem, ...]
    frequencies: Tuple[float, ...]
    power_dbm: np.ndarray
    rms_spread: np.ndarray
    mean_excess: np.ndarray


@dataclass(eq=False)
class DelaySpreadTable:
    """Sweep-aggregated RMS delay spread in ns per (environment, system, frequency)."""

    environments: Tuple[str, ...]
    system_labels: Tuple[str, ...]
    frequencies: Tuple[float, ...]
    values_ns: np.ndarray  # [environment, system, frequency]
    aggregate: str

    def cell(self, environment: str, system_label: str, frequency: float) -> float:
        i = self.environments.index(environment)
        j = self.system_labels.index(system_label)
        k = self.frequencies.index(frequency)
        return float(self.values_ns[i, j, k])


# ---------------------------------------------------------------------------
# Tap construction
# ---------------------------------------------------------------------------

def _complex_amplitudes(paths: Sequence[PathContribution],
                        sys: AntennaSystem,
                        carrier: CarrierConfig,
                        rx_boresight: Optional[Vec3] = None,
                        atmospheric_loss_db_per_m: float = 0.0) -> np.ndarray:
    """Per-path complex amplitudes in sqrt-watt units.

    amplitude_i = sqrt(T_R) * sqrt(a_t a_r) * (lambda/4pi) * refl_i *
                  trans_i * exp(-j k d_i) / d_i
    """
    if rx_boresight is None:
        rx_boresight = neg(sys.boresight)
    n = len(paths)
    dep = np.array([p.departure_dir for p in paths], float).reshape(n, 3)
    arr = np.array([p.arrival_dir for p in paths], float).reshape(n, 3)
    a_t = gain(sys, dep)
    a_r = gain(sys, -arr, boresight=rx_boresight)
    d = np.array([p.length for p in paths])
    refl = np.array([p.reflection_product for p in paths])
    trans = np.array([p.transmission_product(carrier.frequency) for p in paths],
                     complex)
    amps = (np.sqrt(a_t * a_r) * refl * trans
            * np.exp(-1j * carrier.wavenumber * d) / d)
    if atmospheric_loss_db_per_m > 0.0:
        amps = amps * 10.0 ** (-atmospheric_loss_db_per_m * d / 20.0)
    scale = math.sqrt(sys.tx_power_watts) * carrier.wavelength / (4.0 * math.pi)
    return scale * amps


def received_power(paths: Sequence[PathContribution],
                   sys: AntennaSystem,
                   carrier: CarrierConfig,
                   rx_boresight: Optional[Vec3] = None,
                   atmospheric_loss_db_per_m: float = 0.0) -> float:
    """Coherent narrowband received power in dBm.

    R = T_R * (lambda/4pi)^2 * |sum_i sqrt(a_t a_r) refl_i trans_i
        exp(-j k d_i)/d_i|^2. An empty path list (blocked receiver) returns
    the NO_COVERAGE sentinel rather than raising.
    """
    if not paths:
        return NO_COVERAGE
    amps = _complex_amplitudes(paths, sys, carrier, rx_boresight,
                               atmospheric_loss_db_per_m)
    return watts_to_dbm(abs(np.sum(amps)) ** 2)


def impulse_response(paths: Sequence[PathContribution],
                     sys: AntennaSystem,
                     carrier: CarrierConfig,
                     rx_boresight: Optional[Vec3] = None,
                     atmospheric_loss_db_per_m: float = 0.0) -> List[ChannelTap]:
    """One complex tap per traced path, sorted by delay.

    Summing the tap amplitudes coherently reproduces received_power.
    """
    if not paths:
        return []
    amps = _complex_amplitudes(paths, sys, carrier, rx_boresight,
                               atmospheric_loss_db_per_m)
    taps = [ChannelTap(delay=p.delay, amplitude=complex(a), power=abs(a) ** 2)
            for p, a in zip(paths, amps)]
    taps.sort(key=lambda t: t.delay)
    return taps


# ---------------------------------------------------------------------------
# Power delay profile and its moments
# ---------------------------------------------------------------------------

def power_delay_profile(taps: Sequence[ChannelTap],
                        bin_width: float = 0.0) -> PowerDelayProfile:
    """Normalized power versus delay; bin_width 0 keeps exact tap delays.

    With a positive bin_width, tap powers are summed within consecutive
    bins starting at the first arrival and each bin is placed at the
    power-weighted centroid of its taps.
    """
    if not taps:
        raise ValueError("cannot build a power delay profile from zero taps")
    if bin_width < 0.0:
        raise ValueError(f"bin_width must be >= 0, got {bin_width}")
    ordered = sorted(taps, key=lambda t: t.delay)
    first = ordered[0].delay

    if bin_width == 0.0:
        entries = [(t.delay, t.power) for t in ordered]
    else:
        bins: dict = {}
        for t in ordered:
            idx = int((t.delay - first) / bin_width)
            bins.setdefault(idx, []).append(t)
        entries = []
        for idx in sorted(bins):
            members = bins[idx]
            total = sum(t.power for t in members)
            if total > 0.0:
                centroid = sum(t.power * t.delay for t in members) / total
            else:
                centroid = sum(t.delay for t in members) / len(members)
            entries.append((centroid, total))

    peak = max(p for _, p in entries)
    if peak <= 0.0:
        raise ValueError("all taps have zero power")
    return PowerDelayProfile(
        taps=tuple((d, p / peak) for d, p in entries),
        bin_width=bin_width,
        first_arrival=first,
    )


def rms_delay_spread(pdp: PowerDelayProfile) -> float:
    """Square root of the second central moment of the delay profile."""
    if not pdp.taps:
        raise ValueError("empty power delay profile")
    delays = np.array([d for d, _ in pdp.taps])
    powers = np.array([p for _, p in pdp.taps])
    total = powers.sum()
    mean = float(np.dot(powers, delays)) / total
    second = float(np.dot(powers, delays ** 2)) / total
    return math.sqrt(max(second - mean * mean, 0.0))


def mean_excess_delay(pdp: PowerDelayProfile) -> float:
    """Power-weighted mean delay relative to the first arrival."""
    if not pdp.taps:
        raise ValueError("empty power delay profile")
    delays = np.array([d for d, _ in pdp.taps])
    powers = np.array([p for _, p in pdp.taps])
    return float(np.dot(powers, delays - pdp.first_arrival) / powers.sum())


# ---------------------------------------------------------------------------
# Receiver sweeps
# ---------------------------------------------------------------------------

_WORKER_CTX: Optional[tuple] = None


def _init_worker(env: Environment, tx: Vec3, systems, frequencies,
                 polarization, max_order: int, atmospheric: float) -> None:
    global _WORKER_CTX
    _WORKER_CTX = (env, tx, systems, frequencies, polarization, max_order,
                   atmospheric)


def _eval_position(job: Tuple[Vec3, Vec3]) -> tuple:
    """Powers and delay moments for one receiver position.

    Returns ((dBm,)*F per system, (rms s,)*F per system, (excess s,)*F per
    system) as nested tuples so results pickle cheaply and identically
    regardless of which process computed them.
    """
    env, tx, systems, frequencies, pol, max_order, atmos = _WORKER_CTX
    rx, rx_boresight = job
    n_sys = len(systems)
    n_freq = len(frequencies)
    paths = enumerate_paths(env, tx, rx, max_order=max_order, polarization=pol)
    if not paths:
        blank = tuple((NO_COVERAGE,) * n_freq for _ in range(n_sys))
        nan = tuple((math.nan,) * n_freq for _ in range(n_sys))
        return blank, nan, nan

    n = len(paths)
    dep = np.array([p.departure_dir for p in paths], float).reshape(n, 3)
    arr = np.array([p.arrival_dir for p in paths], float).reshape(n, 3)
    d = np.array([p.length for p in paths])
    delays = np.array([p.delay for p in paths])
    refl = np.array([p.reflection_product for p in paths])

    # Signed real geometry factor per (system, path): sqrt(a_t a_r) * refl.
    geo = np.empty((n_sys, n))
    for s, sys in enumerate(systems):
        a_t = gain(sys, dep)
        a_r = gain(sys, -arr, boresight=rx_boresight)
        geo[s] = np.sqrt(a_t * a_r) * refl

    # Complex propagation factor per (frequency, path).
    base = np.empty((n_freq, n), complex)
    for f, freq in enumerate(frequencies):
        k = 2.0 * math.pi * freq / SPEED_OF_LIGHT
        trans = np.array([p.transmission_product(freq) for p in paths], complex)
        base[f] = trans * np.exp(-1j * k * d) / d
    if atmos > 0.0:
        base *= 10.0 ** (-atmos * d / 20.0)

    coherent = geo @ base.T                       # (S, F) complex field sums
    tap_w = geo[:, None, :] ** 2 * np.abs(base[None, :, :]) ** 2  # (S, F, N)
    total_w = tap_w.sum(axis=2)

    powers = []
    rms = []
    excess = []
    first = delays.min()
    for s, sys in enumerate(systems):
        p_row = []
        r_row = []
        e_row = []
        for f, freq in enumerate(frequencies):
            lam = SPEED_OF_LIGHT / freq
            w = sys.tx_power_watts * (lam / (4.0 * math.pi)) ** 2 \
                * abs(coherent[s, f]) ** 2
            p_row.append(watts_to_dbm(w))
            tw = total_w[s, f]
            if tw <= 0.0:
                r_row.append(math.nan)
                e_row.append(math.nan)
                continue
            weights = tap_w[s, f]
            mean = float(weights @ delays) / tw
            second = float(weights @ delays ** 2) / tw
            r_row.append(math.sqrt(max(second - mean * mean, 0.0)))
            e_row.append(mean - first)
        powers.append(tuple(p_row))
        rms.append(tuple(r_row))
        excess.append(tuple(e_row))
    return tuple(powers), tuple(rms), tuple(excess)


def _receiver_jobs(env: Environment, distances: np.ndarray,
                   rx_height: float) -> List[Tuple[Vec3, Vec3]]:
    jobs = []
    for s in distances:
        rx = env.axis_point(float(s), height=rx_height)
        jobs.append((rx, neg(env.axis_direction(float(s)))))
    return jobs


def run_sweep_grid(env: Environment,
                   systems: Sequence[AntennaSystem],
                   frequencies: Sequence[float],
                   n_samples: int = 1024,
                   rx_start: float = 1.0,
                   rx_height: float = 1.5,
                   tx: Vec3 = (0.0, 0.0, 2.0),
                   polarization: Polarization = Polarization.TE,
                   max_order: int = 2,
                   workers: int = 1,
                   atmospheric: bool = False) -> SweepGrid:
    """Evaluate every (position, system, frequency) combination of a sweep.

    Paths are enumerated once per position and reused for all systems and
    frequencies. With workers > 1 positions are evaluated in a process
    pool; results are merged in position order, so the output is identical
    for any worker count.
    """
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    if not systems:
        raise ValueError("at least one antenna system is required")
    if not frequencies:
        raise ValueError("at least one frequency is required")
    if not 0.0 < rx_start < env.axis_length:
        raise ValueError(
            f"rx_start must be in (0, {env.axis_length}), got {rx_start}")
    if math.isfinite(env.height) and not 0.0 < rx_height < env.height:
        raise ValueError(
            f"rx_height must be in (0, {env.height}), got {rx_height}")

    tx = vec3(tx)
    systems = tuple(systems)
    frequencies = tuple(float(f) for f in frequencies)
    distances = np.linspace(rx_start, env.axis_length, n_samples)
    jobs = _receiver_jobs(env, distances, rx_height)
    atmos = ATMOSPHERIC_LOSS_DB_PER_M if atmospheric else 0.0
    init_args = (env, tx, systems, frequencies, polarization, int(max_order),
                 atmos)

    if workers <= 1:
        _init_worker(*init_args)
        results = [_eval_position(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers,
                                 initializer=_init_worker,
                                 initargs=init_args) as pool:
            chunk = max(1, n_samples // (workers * 8))
            results = list(pool.map(_eval_position, jobs, chunksize=chunk))

    power = np.array([r[0] for r in results])   # (n_pos, S, F)
    rms = np.array([r[1] for r in results])
    excess = np.array([r[2] for r in results])
    return SweepGrid(
        environment=env.name,
        distances=distances,
        systems=systems,
        frequencies=frequencies,
        power_dbm=power,
        rms_spread=rms,
        mean_excess=excess,
    )


def sweep_receiver(env: Environment,
                   systems: Sequence[AntennaSystem],
                   carrier: CarrierConfig,
                   n_samples: int = 1024,
                   rx_start: float = 1.0,
                   rx_height: float = 1.5,
                   tx: Vec3 = (0.0, 0.0, 2.0),
                   polarization: Polarization = Polarization.TE,
                   max_order: int = 2,
                   workers: int = 1,
                   atmospheric: bool = False) -> SweepResult:
    """Slide the receiver along the centerline at one carrier frequency."""
    grid = run_sweep_grid(env, systems, [carrier.frequency], n_samples,
                          rx_start, rx_height, tx, polarization, max_order,
                          workers, atmospheric)
    samples = tuple(
        SweepSample(distance=float(grid.distances[i]),
                    powers=tuple(float(grid.power_dbm[i, s, 0])
                                 for s in range(len(grid.systems))))
        for i in range(n_samples))
    return SweepResult(
        environment=env.name,
        frequency=carrier.frequency,
        sample_count=n_samples,
        samples=samples,
    )


def delay_spread_table(envs: Sequence[Environment],
                       systems: Sequence[AntennaSystem],
                       frequencies: Sequence[float],
                       n_samples: int = 1024,
                       rx_start: float = 1.0,
                       rx_height: float = 1.5,
                       tx: Vec3 = (0.0, 0.0, 2.0),
                       polarization: Polarization = Polarization.TE,
                       max_order: int = 2,
                       workers: int = 1,
                       aggregate: str = "mean") -> DelaySpreadTable:
    """Sweep-aggregated RMS delay spread per (environment, system, frequency).

    Positions without coverage are excluded from the aggregate; aggregate
    is "mean" (default) or "median" over the per-position spreads.
    """
    if aggregate not in ("mean", "median"):
        raise ValueError(f"aggregate must be 'mean' or 'median', got {aggregate!r}")
    values = np.empty((len(envs), len(systems), len(frequencies)))
    for i, env in enumerate(envs):
        grid = run_sweep_grid(env, systems, frequencies, n_samples, rx_start,
                              rx_height, tx, polarization, max_order, workers)
        for s in range(len(systems)):
            for f in range(len(frequencies)):
                col = grid.rms_spread[:, s, f]
                col = col[np.isfinite(col)]
                if col.size == 0:
                    values[i, s, f] = math.nan
                    continue
                agg = np.mean(col) if aggregate == "mean" else np.median(col)
                values[i, s, f] = float(agg) * 1e9
    return DelaySpreadTable(
        environments=tuple(e.name for e in envs),
        system_labels=tuple(s.kind for s in systems),
        frequencies=tuple(float(f) for f in frequencies),
        values_ns=values,
        aggregate=aggregate,
    )
