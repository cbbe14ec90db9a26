"""Coarse-grained phase space of the condensate's center-of-mass mode.

The condensate's collective coordinate Q and its velocity are binned into
rectangular compartments: constant width in Q, and the reciprocal constant
width in velocity so that ``width_q * width_v = kappa``. Each compartment
pair is a superselection sector carrying one complex amplitude of the
condensate wave function; the redefined coarse observables (compartment
centers) commute by construction, which is what makes the sector structure
a direct sum.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Union

import numpy as np

from .errors import ContractViolationError, DegenerateProfileError
from .statespace import TOL_NORM, _readonly_array


@dataclass(frozen=True)
class CompartmentSpec:
    """Geometry of the (Q, velocity) compartment lattice.

    ``kappa`` fixes the product of compartment widths; the velocity width is
    ``kappa / width_q``. A faithful coarse graining wants kappa of order
    hbar ( = 1 here) or larger, but no bound is enforced.
    """

    q_min: float
    q_max: float
    n_q: int
    kappa: float
    n_v: int
    v_center: float = 0.0

    def __post_init__(self):
        if self.q_max <= self.q_min:
            raise ValueError("q_max must exceed q_min")
        if self.n_q < 1 or self.n_v < 1:
            raise ValueError("compartment counts must be >= 1")
        if self.kappa <= 0.0:
            raise ValueError("kappa must be positive")

    @property
    def width_q(self) -> float:
        return (self.q_max - self.q_min) / self.n_q

    @property
    def width_v(self) -> float:
        return self.kappa / self.width_q

    @property
    def n_sectors(self) -> int:
        return self.n_q * self.n_v

    def q_centers(self) -> np.ndarray:
        return self.q_min + (np.arange(self.n_q) + 0.5) * self.width_q

    def v_centers(self) -> np.ndarray:
        return self.v_center + (np.arange(self.n_v) - (self.n_v - 1) / 2.0) * self.width_v


@dataclass(frozen=True)
class SectorLabel:
    """One superselection sector: compartment indices and their midpoints."""

    iq: int
    iv: int
    q_center: float
    v_center: float


@dataclass(frozen=True)
class GaussianProfile:
    """Separable Gaussian amplitude, std sigma_q / sigma_v in |amplitude|^2."""

    q0: float
    sigma_q: float
    v0: float
    sigma_v: float

    def __post_init__(self):
        if self.sigma_q <= 0 or self.sigma_v <= 0:
            raise ValueError("profile widths must be positive")


@dataclass(frozen=True)
class UniformProfile:
    """Equal amplitude on every sector."""


@dataclass(frozen=True)
class PointProfile:
    """All weight on a single sector."""

    iq: int
    iv: int


@dataclass(frozen=True)
class TableProfile:
    """Explicit amplitude table: rows of (iq, iv, re, im)."""

    rows: tuple[tuple[int, int, float, float], ...]

    def __post_init__(self):
        rows = tuple((int(q), int(v), float(re), float(im)) for q, v, re, im in self.rows)
        object.__setattr__(self, "rows", rows)


AmplitudeProfile = Union[GaussianProfile, UniformProfile, PointProfile, TableProfile]


@dataclass(frozen=True, eq=False)
class EventWeights:
    """Probability weights of the velocity compartments (sector marginal)."""

    weights: np.ndarray

    def __post_init__(self):
        w = _readonly_array(self.weights, float)
        if w.ndim != 1:
            raise ValueError("weights must be a flat vector")
        if np.any(w < -1e-15):
            raise ValueError("weights must be non-negative")
        if abs(w.sum() - 1.0) > TOL_NORM:
            raise ContractViolationError("event weights must sum to 1")
        object.__setattr__(self, "weights", w)

    @cached_property
    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.weights)
        c[-1] = 1.0
        c.setflags(write=False)
        return c

    def __len__(self) -> int:
        return self.weights.shape[0]

    def as_dict(self) -> dict[int, float]:
        return {iv: float(w) for iv, w in enumerate(self.weights)}


@dataclass(frozen=True, eq=False)
class SectorGrid:
    """Condensate amplitudes over the compartment lattice, unit total weight.

    ``coverage`` records, for Gaussian profiles, the fraction of the
    continuum profile mass the finite grid captured before renormalization
    (truncation diagnostic); None for the other profiles.
    """

    spec: CompartmentSpec
    amplitudes: np.ndarray
    coverage: float | None = None

    def __post_init__(self):
        amps = _readonly_array(self.amplitudes, complex)
        if amps.shape != (self.spec.n_q, self.spec.n_v):
            raise ValueError(
                f"amplitude array shape {amps.shape} != (n_q, n_v) = "
                f"({self.spec.n_q}, {self.spec.n_v})"
            )
        object.__setattr__(self, "amplitudes", amps)

    def squared_norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def is_normalized(self, tol: float = TOL_NORM) -> bool:
        return abs(self.squared_norm() - 1.0) < tol

    @cached_property
    def sector_weights(self) -> np.ndarray:
        w = np.abs(self.amplitudes) ** 2
        w.setflags(write=False)
        return w

    @cached_property
    def velocity_weights(self) -> EventWeights:
        return EventWeights(self.sector_weights.sum(axis=0))

    def label(self, iq: int, iv: int) -> SectorLabel:
        return SectorLabel(
            iq=iq,
            iv=iv,
            q_center=float(self.spec.q_centers()[iq]),
            v_center=float(self.spec.v_centers()[iv]),
        )

    def labels(self) -> Iterator[SectorLabel]:
        for iq in range(self.spec.n_q):
            for iv in range(self.spec.n_v):
                yield self.label(iq, iv)


@dataclass(frozen=True)
class CommutationReport:
    """Result of checking the coarse observables commute on the sector set."""

    commutator_max_norm: float
    width_q: float
    width_v: float
    width_product: float
    n_sectors: int


def _gaussian_coverage(spec: CompartmentSpec, profile: GaussianProfile) -> float:
    """Captured |amplitude|^2 mass of the grid relative to the continuum."""
    q = spec.q_centers()
    v = spec.v_centers()
    got_q = np.sum(np.exp(-((q - profile.q0) ** 2) / (2 * profile.sigma_q**2))) * spec.width_q
    got_v = np.sum(np.exp(-((v - profile.v0) ** 2) / (2 * profile.sigma_v**2))) * spec.width_v
    full_q = profile.sigma_q * np.sqrt(2 * np.pi)
    full_v = profile.sigma_v * np.sqrt(2 * np.pi)
    return float((got_q / full_q) * (got_v / full_v))


def build_grid(
    spec: CompartmentSpec,
    profile: AmplitudeProfile,
    c_light: float | None = None,
) -> SectorGrid:
    """Sample a profile at compartment midpoints and renormalize.

    ``c_light``, when given, enables a non-relativistic sanity warning if
    any velocity compartment center exceeds a tenth of it.
    """
    amps = np.zeros((spec.n_q, spec.n_v), dtype=complex)
    coverage = None
    if isinstance(profile, PointProfile):
        if not (0 <= profile.iq < spec.n_q and 0 <= profile.iv < spec.n_v):
            raise ValueError("point profile indices out of range")
        amps[profile.iq, profile.iv] = 1.0
    elif isinstance(profile, UniformProfile):
        amps[:, :] = 1.0
    elif isinstance(profile, GaussianProfile):
        q = spec.q_centers()[:, None]
        v = spec.v_centers()[None, :]
        amps = np.exp(
            -((q - profile.q0) ** 2) / (4 * profile.sigma_q**2)
            - ((v - profile.v0) ** 2) / (4 * profile.sigma_v**2)
        ).astype(complex)
        coverage = _gaussian_coverage(spec, profile)
    elif isinstance(profile, TableProfile):
        for iq, iv, re, im in profile.rows:
            if not (0 <= iq < spec.n_q and 0 <= iv < spec.n_v):
                raise ValueError(f"table row ({iq}, {iv}) out of range")
            amps[iq, iv] += re + 1j * im
    else:
        raise TypeError(f"unknown profile type {type(profile).__name__}")

    total = np.sum(np.abs(amps) ** 2)
    if total <= 0.0:
        raise DegenerateProfileError("profile is zero everywhere on the grid")
    amps /= np.sqrt(total)

    if c_light is not None:
        vmax = np.max(np.abs(spec.v_centers()))
        if vmax >= 0.1 * c_light:
            warnings.warn(
                f"velocity compartments reach {vmax:g}, not small against "
                f"c = {c_light:g}; the non-relativistic picture is strained",
                stacklevel=2,
            )
    return SectorGrid(spec=spec, amplitudes=amps, coverage=coverage)


def verify_commuting_redefinition(spec: CompartmentSpec) -> CommutationReport:
    """Check [Q_coarse, V_coarse] = 0 on the sector index set.

    Both coarse observables are diagonal in the sector basis (each sector is
    a simultaneous eigenvector with eigenvalues q_center and v_center), so
    the commutator is computed elementwise on the diagonals and must vanish
    identically.
    """
    q = np.repeat(spec.q_centers(), spec.n_v)
    v = np.tile(spec.v_centers(), spec.n_q)
    comm = q * v - v * q
    return CommutationReport(
        commutator_max_norm=float(np.max(np.abs(comm))),
        width_q=spec.width_q,
        width_v=spec.width_v,
        width_product=spec.width_q * spec.width_v,
        n_sectors=spec.n_sectors,
    )


def event_weights(grid: SectorGrid) -> EventWeights:
    """Marginal weight of each velocity compartment: w(iv) = sum_iq |A|^2."""
    if not grid.is_normalized():
        raise ContractViolationError("grid must be normalized before taking weights")
    return grid.velocity_weights


def sample_velocity(
    weights: EventWeights, rng: Union[int, np.random.Generator]
) -> int:
    """Draw a velocity-compartment index by inverse-CDF sampling.

    Accepts either an integer seed (one deterministic draw per seed) or a
    Generator for repeated draws from one stream.
    """
    gen = np.random.default_rng(rng) if isinstance(rng, (int, np.integer)) else rng
    u = gen.random()
    idx = int(np.searchsorted(weights.cdf, u, side="right"))
    return min(idx, len(weights) - 1)
