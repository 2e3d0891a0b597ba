"""Projection-domain data model and synthetic response corruption.

Raw counts are flat/dark normalized per detector unit, taken to the log
domain, and optionally corrupted by per-detector, per-view response
gains. Sign convention used throughout the package: a gain field with
multiplicative gains ``s`` carries log-domain offsets ``S = -log(s)``,
the corrupter produces ``measured = clean + S_true``, and compensation
recovers ``clean = measured - S``. A solver that estimates offsets
``S_est`` therefore succeeds when ``S_est`` matches ``S_true``.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ValidationError

__all__ = [
    "CountsFrame",
    "Sinogram",
    "GainField",
    "CorruptionSpec",
    "normalize",
    "neg_log",
    "sample_gain_field",
    "corrupt",
    "apply_compensation",
    "poisson_counts_from_log",
    "clamp_count",
    "reset_clamp_count",
]

NORMALIZED_COUNTS = "normalized_counts"
LOG_ATTENUATION = "log_attenuation"

# Photon-starved bins must not produce infinities in the log domain.
Q_FLOOR = 1e-6
# Headroom above 1 for noise overshoot in normalized counts.
Q_OVERSHOOT = 0.05

_clamp_count = 0


def clamp_count() -> int:
    """Total entries floor-clamped by :func:`neg_log` so far."""
    return _clamp_count


def reset_clamp_count() -> None:
    global _clamp_count
    _clamp_count = 0


@dataclass(frozen=True)
class CountsFrame:
    """Raw scan counts with their flat-field and dark-field calibration.

    ``scan_counts`` is V x U; ``flat_field`` and ``dark_field`` are
    per-detector vectors of length U with ``flat > dark`` everywhere.
    """

    scan_counts: np.ndarray
    flat_field: np.ndarray
    dark_field: np.ndarray

    def __post_init__(self):
        counts = np.asarray(self.scan_counts, dtype=np.float64)
        flat = np.asarray(self.flat_field, dtype=np.float64)
        dark = np.asarray(self.dark_field, dtype=np.float64)
        if counts.ndim != 2:
            raise DimensionError("scan_counts must be a V x U array")
        u = counts.shape[1]
        if flat.shape != (u,) or dark.shape != (u,):
            raise DimensionError(
                f"flat/dark fields must have length {u}, got "
                f"{flat.shape} and {dark.shape}"
            )
        for name, arr in (("scan_counts", counts), ("flat_field", flat),
                          ("dark_field", dark)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"{name} contains non-finite values")
            if np.any(arr < 0):
                raise ValidationError(f"{name} contains negative counts")
        bad = np.nonzero(flat <= dark)[0]
        if bad.size:
            raise ValidationError(
                f"flat_field <= dark_field at detector unit {bad[0]}; "
                "normalization is undefined"
            )
        object.__setattr__(self, "scan_counts", counts)
        object.__setattr__(self, "flat_field", flat)
        object.__setattr__(self, "dark_field", dark)

    @property
    def shape(self):
        return self.scan_counts.shape


@dataclass(frozen=True)
class Sinogram:
    """V x U projection data tagged with its domain."""

    data: np.ndarray
    domain: str

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 2:
            raise DimensionError("sinogram data must be a V x U array")
        if self.domain not in (NORMALIZED_COUNTS, LOG_ATTENUATION):
            raise ValidationError(f"unknown sinogram domain {self.domain!r}")
        object.__setattr__(self, "data", data)

    @property
    def shape(self):
        return self.data.shape

    def validate(self) -> "Sinogram":
        """Check the domain invariant, returning self for chaining."""
        if self.domain == NORMALIZED_COUNTS:
            if np.any(self.data <= 0):
                raise ValidationError("normalized counts must be positive")
            worst = self.data.max()
            if worst > 1 + Q_OVERSHOOT:
                j, i = np.unravel_index(np.argmax(self.data), self.shape)
                raise ValidationError(
                    f"normalized count {worst:.4f} at view {j}, detector "
                    f"{i} exceeds the 1 + {Q_OVERSHOOT} overshoot tolerance"
                )
        else:
            if not np.all(np.isfinite(self.data)):
                raise ValidationError("log-attenuation data must be finite")
        return self


def normalize(frame: CountsFrame) -> Sinogram:
    """Flat/dark normalize raw counts: q = (I - D) / (F - D).

    Entries are floor-clamped at Q_FLOOR, so photon-starved bins stay
    strictly positive for the subsequent log.
    """
    q = (frame.scan_counts - frame.dark_field) / (
        frame.flat_field - frame.dark_field
    )
    q = np.maximum(q, Q_FLOOR)
    return Sinogram(q, NORMALIZED_COUNTS).validate()


def neg_log(sino: Sinogram) -> Sinogram:
    """Take normalized counts to the log-attenuation domain, y = -log q.

    Nonpositive entries are floor-clamped at Q_FLOOR first; each clamp
    is recorded in the module's warning counter.
    """
    global _clamp_count
    if sino.domain != NORMALIZED_COUNTS:
        raise ValidationError(
            f"neg_log expects normalized counts, got {sino.domain!r}"
        )
    q = sino.data
    nonpos = q <= 0
    clamped = int(nonpos.sum())
    if clamped:
        _clamp_count += clamped
        q = np.maximum(q, Q_FLOOR)
    return Sinogram(-np.log(q), LOG_ATTENUATION)


@dataclass(frozen=True)
class GainField:
    """Per-detector, per-view response gains and their log offsets.

    ``gains`` is V x U with entries > 0; ``offsets`` is -log(gains).
    ``bad_columns`` lists the detector units whose response deviates
    from 1; all other columns are exactly 1 (offset exactly 0).
    """

    gains: np.ndarray
    offsets: np.ndarray
    bad_columns: np.ndarray = field(default=None)

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=np.float64)
        offsets = np.asarray(self.offsets, dtype=np.float64)
        if gains.ndim != 2 or gains.shape != offsets.shape:
            raise DimensionError("gains and offsets must both be V x U")
        if np.any(gains <= 0):
            raise ValidationError("gains must be positive")
        if not np.all(np.isfinite(offsets)):
            raise ValidationError("offsets must be finite")
        if np.abs(offsets + np.log(gains)).max() > 1e-12:
            raise ValidationError("offsets must equal -log(gains)")
        bad = self.bad_columns
        if bad is None:
            bad = np.nonzero(np.any(offsets != 0, axis=0))[0]
        bad = np.asarray(bad, dtype=np.int64)
        object.__setattr__(self, "gains", gains)
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "bad_columns", bad)

    @classmethod
    def from_gains(cls, gains, bad_columns=None) -> "GainField":
        gains = np.asarray(gains, dtype=np.float64)
        return cls(gains, -np.log(gains), bad_columns)

    @property
    def shape(self):
        return self.gains.shape


@dataclass(frozen=True)
class CorruptionSpec:
    """How to synthesize view-dependent detector response errors.

    ``fraction_bad`` of the detector columns (rounded up) get gains
    drawn uniformly from ``gain_range``. With the ``constant`` profile a
    column's gain is the same at every view; with ``piecewise`` the view
    axis is split into ``num_blocks`` contiguous blocks with independent
    draws, emulating responses that change sharply with view direction.
    """

    fraction_bad: float
    gain_range: tuple
    view_profile: str = "constant"
    num_blocks: int = 1
    rng_seed: int = 0

    def __post_init__(self):
        if not (0 < self.fraction_bad < 1):
            raise ValidationError(
                f"fraction_bad must be in (0, 1), got {self.fraction_bad}"
            )
        lo, hi = self.gain_range
        if not (0 < lo <= hi):
            raise ValidationError(f"need 0 < lo <= hi, got ({lo}, {hi})")
        object.__setattr__(self, "gain_range", (float(lo), float(hi)))
        if self.view_profile not in ("constant", "piecewise"):
            raise ValidationError(
                f"unknown view_profile {self.view_profile!r}"
            )
        if self.view_profile == "piecewise" and self.num_blocks < 1:
            raise ValidationError("num_blocks must be >= 1")


def sample_gain_field(spec: CorruptionSpec, num_views: int, num_detectors: int) -> GainField:
    """Draw a seeded gain field for a V x U sinogram.

    Selects ceil(fraction_bad * U) distinct columns; unselected columns
    keep gain exactly 1. Deterministic for a given seed.
    """
    if spec.fraction_bad * num_detectors < 1:
        raise ValidationError(
            "fraction_bad selects no detector columns "
            f"({spec.fraction_bad} * {num_detectors} < 1)"
        )
    num_bad = math.ceil(spec.fraction_bad * num_detectors)
    rng = np.random.default_rng(spec.rng_seed)
    cols = np.sort(rng.choice(num_detectors, size=num_bad, replace=False))
    lo, hi = spec.gain_range

    gains = np.ones((num_views, num_detectors))
    if spec.view_profile == "constant":
        gains[:, cols] = rng.uniform(lo, hi, size=num_bad)
    else:
        blocks = np.array_split(np.arange(num_views), min(spec.num_blocks, num_views))
        draws = rng.uniform(lo, hi, size=(len(blocks), num_bad))
        for b, views in enumerate(blocks):
            gains[np.ix_(views, cols)] = draws[b]

    offsets = np.zeros_like(gains)
    offsets[:, cols] = -np.log(gains[:, cols])
    return GainField(gains, offsets, bad_columns=cols)


def _as_log_sino(sino) -> np.ndarray:
    if isinstance(sino, Sinogram):
        if sino.domain != LOG_ATTENUATION:
            raise ValidationError(
                f"expected log-attenuation data, got {sino.domain!r}"
            )
        return sino.data
    return np.asarray(sino, dtype=np.float64)


def corrupt(clean: Sinogram, gains: GainField) -> Sinogram:
    """Inject response inconsistency: measured = clean + offsets."""
    data = _as_log_sino(clean)
    if data.shape != gains.shape:
        raise DimensionError(
            f"sinogram shape {data.shape} does not match gain field "
            f"{gains.shape}"
        )
    return Sinogram(data + gains.offsets, LOG_ATTENUATION)


def apply_compensation(measured: Sinogram, offsets) -> Sinogram:
    """Undo response inconsistency: corrected = measured - offsets."""
    data = _as_log_sino(measured)
    offsets = np.asarray(offsets, dtype=np.float64)
    if data.shape != offsets.shape:
        raise DimensionError(
            f"sinogram shape {data.shape} does not match offsets "
            f"{offsets.shape}"
        )
    return Sinogram(data - offsets, LOG_ATTENUATION)


def poisson_counts_from_log(clean_log: Sinogram, photons_per_ray: float, seed: int) -> CountsFrame:
    """Simulate raw counts for a clean log-attenuation sinogram.

    Expected counts are F * exp(-y) with a flat field of
    ``photons_per_ray`` per detector unit and zero dark field; actual
    counts are Poisson-distributed around that mean, seeded.
    """
    if photons_per_ray <= 0:
        raise ValidationError("photons_per_ray must be positive")
    y = _as_log_sino(clean_log)
    rng = np.random.default_rng(seed)
    expected = photons_per_ray * np.exp(-y)
    counts = rng.poisson(expected).astype(np.float64)
    num_det = y.shape[1]
    return CountsFrame(
        counts,
        np.full(num_det, float(photons_per_ray)),
        np.zeros(num_det),
    )
