"""Correlator-level signal model on candidate-offset grids.

Each satellite channel contributes a cross-ambiguity surface over a 2D grid
of horizontal candidate offsets from the truth point: code-delay mismatch in
position space, Doppler mismatch in velocity space.  A multipath channel is a
superposition of signal paths, each shifting the correlation ridge by its own
delay/Doppler bias.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geom import (
    EcefVector,
    EnuVector,
    GeometryError,
    LookAngles,
    ecef_to_enu,
    look_angles,
    slant_range,
)

SPEED_OF_LIGHT = 299_792_458.0  # m/s

# Sign convention tying the correlation model to the tangent-line geometry:
# a positive path delay (Doppler bias) moves the correlation ridge to the far
# side of the truth point, away from the satellite azimuth.  The ridge line
# satisfies u_hat . offset = RIDGE_OFFSET_SIGN * projected_bias, and the
# delay/Doppler mismatch functions below carry the matching sign.
RIDGE_OFFSET_SIGN = -1.0

# Satellite range used when a channel is specified by look angles alone.  The
# mismatch model depends on the satellite position only through its unit
# direction, so the value is uncritical at GNSS scales.
NOMINAL_RANGE = 2.2e7  # m

# Provided angles and a provided position may disagree by at most this much.
ANGLE_CONSISTENCY_TOL = math.radians(0.1)


class GeometryMismatchError(GeometryError):
    """Authored look angles disagree with the authored satellite position."""


class Space(enum.Enum):
    """Which candidate-offset plane a grid or line lives in."""

    POSITION = "position"
    VELOCITY = "velocity"


class PathKind(enum.Enum):
    LOS = "los"
    NLOS = "nlos"


@dataclass(frozen=True)
class SignalConfig:
    """Signal-plan constants of the simulated receiver.

    ``sampling_rate`` is carried along for provenance but no sample-level
    processing consumes it.
    """

    code_rate: float = 10.23e6  # chips/s
    carrier: float = 1176.45e6  # Hz
    coherent_integration: float = 0.020  # s
    sampling_rate: float = 30.69e6  # Hz

    def __post_init__(self):
        if self.code_rate <= 0.0 or self.carrier <= self.code_rate:
            raise ValueError("require carrier > code_rate > 0")
        if self.coherent_integration <= 0.0:
            raise ValueError("coherent integration time must be positive")

    @property
    def chip_length(self) -> float:
        """Meters per chip."""
        return SPEED_OF_LIGHT / self.code_rate

    @property
    def wavelength(self) -> float:
        """Carrier wavelength, meters."""
        return SPEED_OF_LIGHT / self.carrier


@dataclass(frozen=True)
class SignalPath:
    """One propagation path of a satellite channel.

    Delay is in chips, Doppler bias in Hz, both relative to the line of
    sight; an LOS path has zero bias by definition.
    """

    kind: PathKind
    amplitude: float = 1.0
    delay_chips: float = 0.0
    doppler_hz: float = 0.0

    def __post_init__(self):
        if not self.amplitude >= 0.0:
            raise ValueError("path amplitude must be >= 0")
        if self.kind is PathKind.LOS and (self.delay_chips != 0.0 or self.doppler_hz != 0.0):
            raise ValueError("an LOS path cannot carry a delay or Doppler bias")

    def bias(self, space: Space) -> float:
        return self.delay_chips if space is Space.POSITION else self.doppler_hz


@dataclass(frozen=True)
class SatelliteChannel:
    """A satellite as seen by the receiver: geometry plus its signal paths.

    ``angles`` and ``slant`` are the canonical geometry used by all
    computations.  ``position``/``velocity``/``angles_deg`` keep whatever the
    scenario author wrote, so files round-trip exactly.  Construct through
    :func:`make_channel`, which derives the canonical fields.
    """

    prn: int
    paths: tuple[SignalPath, ...]
    angles: LookAngles
    slant: float
    position: EcefVector | None = None
    velocity: EcefVector | None = None
    angles_deg: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.paths:
            raise ValueError(f"PRN {self.prn}: channel needs at least one path")
        los = [p for p in self.paths if p.kind is PathKind.LOS]
        if len(los) > 1:
            raise ValueError(f"PRN {self.prn}: at most one LOS path per channel")
        if los and self.paths[0].kind is not PathKind.LOS:
            raise ValueError(f"PRN {self.prn}: the LOS path must come first")
        if not self.slant > 0.0:
            raise ValueError(f"PRN {self.prn}: slant range must be positive")

    def nlos_paths(self) -> tuple[SignalPath, ...]:
        return tuple(p for p in self.paths if p.kind is PathKind.NLOS)


def make_channel(
    receiver: EcefVector,
    prn: int,
    paths: Sequence[SignalPath],
    position: EcefVector | None = None,
    velocity: EcefVector | None = None,
    angles_deg: tuple[float, float] | None = None,
    nominal_range: float = NOMINAL_RANGE,
) -> SatelliteChannel:
    """Build a channel from an ECEF position, look angles, or both.

    When both are given the derived and authored angles must agree within
    ANGLE_CONSISTENCY_TOL, otherwise :class:`GeometryMismatchError` is
    raised.  With angles alone the satellite sits at ``nominal_range``.
    """
    if position is None and angles_deg is None:
        raise ValueError(f"PRN {prn}: need a position or look angles")
    if position is not None:
        derived = look_angles(ecef_to_enu(position, receiver))
        slant = slant_range(position, receiver)
        if angles_deg is not None:
            authored = LookAngles.from_degrees(*angles_deg)
            d_el = abs(authored.elevation - derived.elevation)
            d_az = abs(authored.azimuth - derived.azimuth) % (2.0 * math.pi)
            d_az = min(d_az, 2.0 * math.pi - d_az)
            if d_el > ANGLE_CONSISTENCY_TOL or d_az > ANGLE_CONSISTENCY_TOL:
                raise GeometryMismatchError(
                    f"PRN {prn}: authored angles ({authored.elevation_deg:.3f}, "
                    f"{authored.azimuth_deg:.3f}) deg differ from position-derived "
                    f"({derived.elevation_deg:.3f}, {derived.azimuth_deg:.3f}) deg "
                    f"by more than {math.degrees(ANGLE_CONSISTENCY_TOL):.1f} deg"
                )
        angles = derived
    else:
        angles = LookAngles.from_degrees(*angles_deg)
        slant = nominal_range
    return SatelliteChannel(
        prn=prn,
        paths=tuple(paths),
        angles=angles,
        slant=slant,
        position=position,
        velocity=velocity,
        angles_deg=tuple(angles_deg) if angles_deg is not None else None,
    )


@dataclass(frozen=True)
class GridSpec:
    """Square candidate-offset grid centered on the truth point.

    The sample count per axis is odd so the truth offset (0, 0) falls
    exactly on a node.
    """

    space: Space
    half_extent: float
    step: float

    def __post_init__(self):
        if self.step <= 0.0 or self.half_extent <= 0.0:
            raise ValueError("grid step and half extent must be positive")
        if round(self.half_extent / self.step) < 1:
            raise ValueError("grid must span at least one step from center")

    @property
    def n(self) -> int:
        return 2 * round(self.half_extent / self.step) + 1

    def axis(self) -> np.ndarray:
        half = self.n // 2
        return (np.arange(self.n) - half) * self.step


@dataclass(frozen=True)
class Grid2D:
    """Correlation values on a grid; ``values[i, j]`` is the cell at
    east = axis[j], north = axis[i]."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        n = self.spec.n
        if self.values.shape != (n, n):
            raise ValueError(f"values shape {self.values.shape} != ({n}, {n})")


DEFAULT_GRIDS = (
    GridSpec(Space.POSITION, 100.0, 1.0),
    GridSpec(Space.VELOCITY, 100.0, 0.1),
)


@dataclass
class Scenario:
    """Receiver truth, signal plan, and the satellite channels in view."""

    receiver_position: EcefVector
    receiver_velocity: EcefVector = EcefVector(0.0, 0.0, 0.0)
    signal: SignalConfig = SignalConfig()
    satellites: tuple[SatelliteChannel, ...] = ()
    grids: tuple[GridSpec, ...] = DEFAULT_GRIDS
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        self.satellites = tuple(self.satellites)
        self.grids = tuple(self.grids)
        if not self.satellites:
            raise ValueError("scenario needs at least one satellite")
        prns = [s.prn for s in self.satellites]
        if len(set(prns)) != len(prns):
            raise ValueError(f"duplicate PRNs in scenario: {sorted(prns)}")
        if self.noise_sigma < 0.0:
            raise ValueError("noise sigma must be >= 0")
        spaces = [g.space for g in self.grids]
        if len(set(spaces)) != len(spaces):
            raise ValueError("at most one grid spec per space")

    def channel(self, prn: int) -> SatelliteChannel:
        for s in self.satellites:
            if s.prn == prn:
                return s
        raise KeyError(f"PRN {prn} not in scenario")

    def grid_for(self, space: Space) -> GridSpec:
        for g in self.grids:
            if g.space is space:
                return g
        for g in DEFAULT_GRIDS:
            if g.space is space:
                return g
        raise KeyError(space)


def corr_code(delta_tau_chips):
    """Code correlation vs delay mismatch in chips: a unit triangle."""
    x = np.asarray(delta_tau_chips, dtype=float)
    out = np.maximum(0.0, 1.0 - np.abs(x))
    return out if out.ndim else float(out)


def corr_doppler(delta_f_hz, coherent_integration_s: float):
    """Doppler correlation vs frequency mismatch: sin(pi f T) / (pi f T)."""
    x = np.asarray(delta_f_hz, dtype=float) * coherent_integration_s
    out = np.sinc(x)
    return out if out.ndim else float(out)


def _mismatch_coef(channel: SatelliteChannel, signal: SignalConfig, space: Space) -> float:
    """Mismatch per meter of offset along the satellite azimuth (chips/m or Hz per m/s)."""
    rate = signal.code_rate if space is Space.POSITION else signal.carrier
    return -RIDGE_OFFSET_SIGN * rate / SPEED_OF_LIGHT * math.cos(channel.angles.elevation)


def delta_tau0(offset: EnuVector, channel: SatelliteChannel, scenario: Scenario) -> float:
    """Code-delay mismatch (chips) of a candidate horizontal offset for one channel.

    Linear in the offset: the per-meter rate is (code_rate / c) * cos(elevation)
    along the satellite azimuth and zero across it.
    """
    a = channel.angles
    along = math.sin(a.azimuth) * offset.e + math.cos(a.azimuth) * offset.n
    return _mismatch_coef(channel, scenario.signal, Space.POSITION) * along


def delta_fd0(offset: EnuVector, channel: SatelliteChannel, scenario: Scenario) -> float:
    """Doppler mismatch (Hz) of a candidate velocity offset (EnuVector in m/s)."""
    a = channel.angles
    along = math.sin(a.azimuth) * offset.e + math.cos(a.azimuth) * offset.n
    return _mismatch_coef(channel, scenario.signal, Space.VELOCITY) * along


def channel_caf(grid: GridSpec, channel: SatelliteChannel, scenario: Scenario) -> Grid2D:
    """Cross-ambiguity surface of one channel over a candidate-offset grid.

    Sums the per-path correlation, each path's ridge displaced by its
    delay/Doppler bias.  With ``scenario.noise_sigma > 0`` adds i.i.d.
    Gaussian noise from a stream keyed by (seed, prn, space); each cell's
    draw is fixed by its (row, col) index, independent of evaluation order.
    """
    axis = grid.axis()
    east = axis[np.newaxis, :]
    north = axis[:, np.newaxis]
    a = channel.angles
    base = _mismatch_coef(channel, scenario.signal, grid.space) * (
        math.sin(a.azimuth) * east + math.cos(a.azimuth) * north
    )
    values = np.zeros((grid.n, grid.n))
    for path in channel.paths:
        mismatch = base + path.bias(grid.space)
        if grid.space is Space.POSITION:
            values += path.amplitude * corr_code(mismatch)
        else:
            values += path.amplitude * corr_doppler(mismatch, scenario.signal.coherent_integration)
    if scenario.noise_sigma > 0.0:
        rng = np.random.default_rng([scenario.seed, channel.prn, _space_key(grid.space)])
        values += scenario.noise_sigma * rng.standard_normal((grid.n, grid.n))
    return Grid2D(grid, values)


def _space_key(space: Space) -> int:
    return 0 if space is Space.POSITION else 1


def scenario_caf(scenario: Scenario, space: Space, grid: GridSpec | None = None) -> list[Grid2D]:
    """Per-channel CAF grids for every satellite in the scenario."""
    spec = grid if grid is not None else scenario.grid_for(space)
    return [channel_caf(spec, ch, scenario) for ch in scenario.satellites]


def superpose_and_argmax(grids: Sequence[Grid2D]) -> tuple[EnuVector, float]:
    """Sum per-channel grids and locate the maximum.

    Exact value ties resolve to the smallest offset norm, then to the
    lexicographically smallest (row, col).  Returns the winning offset (the
    ``u`` component is always 0) and the peak value.
    """
    if not grids:
        raise ValueError("need at least one grid")
    spec = grids[0].spec
    for g in grids[1:]:
        if g.spec != spec:
            raise ValueError("grids must share one spec")
    total = grids[0].values.copy()
    for g in grids[1:]:
        total += g.values
    peak = float(total.max())
    axis = spec.axis()
    rows, cols = np.nonzero(total == peak)
    best = min((axis[j] ** 2 + axis[i] ** 2, i, j) for i, j in zip(rows, cols))
    _, i, j = best
    return EnuVector(float(axis[j]), float(axis[i]), 0.0), peak
