"""Fan-beam scan geometry and the discrete projection operators.

The forward projector realizes the system matrix A of the scan: ray
``(view j, detector i)`` integrates the attenuation image along the
straight line from the X-ray source to the center of detector cell
``i``. The ray model is Joseph-style ray-driven interpolation (linear
interpolation along the axis closest to perpendicular to the ray), which
gives a smooth operator with an exact adjoint pair.

Coordinates: the image is an ``n x n`` grid of square pixels of side
``pixel_pitch`` centered on the rotation center. At view angle ``beta``
the source sits at radius ``source_to_center`` in direction
``(cos beta, sin beta)``; the flat detector is perpendicular to the
central ray at distance ``source_to_detector`` from the source, its
cells equally spaced by ``detector_pitch`` and centered on the central
ray.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import DimensionError, ValidationError

__all__ = [
    "FanBeamGeometry",
    "desk_geometry",
    "full_scale_geometry",
    "forward_project",
    "back_project",
    "row_column_sums",
]

# Real-scanner values: panel of 2068 cells at 0.075 mm pitch, source to
# detector 433.507 mm, source to rotation center 205 mm, 720 views.
_SCANNER_S2D = 433.507
_SCANNER_S2C = 205.0
_SCANNER_PANEL_WIDTH = 2068 * 0.075


@dataclass(frozen=True)
class FanBeamGeometry:
    """Immutable description of a 2-D fan-beam scan.

    Parameters
    ----------
    source_to_detector : float
        Source to detector distance (mm).
    source_to_center : float
        Source to rotation-center distance (mm).
    detector_pitch : float
        Detector cell spacing (mm).
    num_detectors : int
        Number of detector cells U (>= 2).
    num_views : int
        Number of projection views V (>= 1).
    image_size : int
        Image side length n in pixels (the image has n*n pixels).
    pixel_pitch : float
        Image pixel spacing (mm).
    view_angles : ndarray, optional
        Strictly increasing view angles in [0, 2*pi), length V.
        Defaults to a uniform sweep over [0, 2*pi).
    """

    source_to_detector: float
    source_to_center: float
    detector_pitch: float
    num_detectors: int
    num_views: int
    image_size: int
    pixel_pitch: float
    view_angles: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not (self.source_to_detector > self.source_to_center > 0):
            raise ValidationError(
                "need source_to_detector > source_to_center > 0, got "
                f"{self.source_to_detector} and {self.source_to_center}"
            )
        if self.num_views < 1:
            raise ValidationError(f"num_views must be >= 1, got {self.num_views}")
        if self.num_detectors < 2:
            raise ValidationError(
                f"num_detectors must be >= 2, got {self.num_detectors}"
            )
        if self.image_size < 1 or self.pixel_pitch <= 0 or self.detector_pitch <= 0:
            raise ValidationError("image_size and pitches must be positive")

        angles = self.view_angles
        if angles is None:
            angles = np.linspace(
                0.0, 2.0 * math.pi, self.num_views, endpoint=False
            )
        else:
            angles = np.asarray(angles, dtype=np.float64)
            if angles.shape != (self.num_views,):
                raise ValidationError(
                    f"view_angles must have length {self.num_views}"
                )
            if np.any(np.diff(angles) <= 0):
                raise ValidationError("view_angles must be strictly increasing")
            if angles[0] < 0 or angles[-1] >= 2.0 * math.pi:
                raise ValidationError("view_angles must lie in [0, 2*pi)")
        angles = np.ascontiguousarray(angles)
        angles.flags.writeable = False
        object.__setattr__(self, "view_angles", angles)

        # The detector fan must cover the inscribed circle of the image;
        # a 1e-9 relative slack absorbs rounding in derived configs.
        covered = math.atan(
            self.num_detectors * self.detector_pitch / 2 / self.source_to_detector
        )
        needed = math.atan(
            self.image_size * self.pixel_pitch / 2 / self.source_to_center
        )
        if covered < needed * (1 - 1e-9):
            raise ValidationError(
                f"detector fan (half-angle {covered:.4f} rad) does not cover "
                f"the image's inscribed circle (needs {needed:.4f} rad)"
            )

    @property
    def n(self) -> int:
        return self.image_size

    @property
    def V(self) -> int:
        return self.num_views

    @property
    def U(self) -> int:
        return self.num_detectors

    @property
    def sinogram_shape(self):
        return (self.num_views, self.num_detectors)

    @property
    def image_shape(self):
        return (self.image_size, self.image_size)


def desk_geometry(image_size=256, num_views=360, num_detectors=363):
    """Desk-scale geometry keeping the real scanner's distance ratio.

    The full panel width and the source/center distances match the real
    device; the detector is rebinned to ``num_detectors`` cells and the
    image field of view is sized to sit 2% inside the fan.
    """
    detector_pitch = _SCANNER_PANEL_WIDTH / num_detectors
    half_fan_tan = _SCANNER_PANEL_WIDTH / 2 / _SCANNER_S2D
    fov_half = 0.98 * _SCANNER_S2C * half_fan_tan
    return FanBeamGeometry(
        source_to_detector=_SCANNER_S2D,
        source_to_center=_SCANNER_S2C,
        detector_pitch=detector_pitch,
        num_detectors=num_detectors,
        num_views=num_views,
        image_size=image_size,
        pixel_pitch=2 * fov_half / image_size,
    )


def full_scale_geometry():
    """Geometry with the real scanning device's full parameters."""
    half_fan_tan = _SCANNER_PANEL_WIDTH / 2 / _SCANNER_S2D
    fov_half = 0.98 * _SCANNER_S2C * half_fan_tan
    return FanBeamGeometry(
        source_to_detector=_SCANNER_S2D,
        source_to_center=_SCANNER_S2C,
        detector_pitch=0.075,
        num_detectors=2068,
        num_views=720,
        image_size=2068,
        pixel_pitch=2 * fov_half / 2068,
    )


def _check_image(image, geom):
    image = np.ascontiguousarray(image, dtype=np.float64)
    if image.shape != geom.image_shape:
        raise DimensionError(
            f"image shape {image.shape} does not match geometry "
            f"{geom.image_shape}"
        )
    if not np.all(np.isfinite(image)):
        raise ValidationError("image contains non-finite values")
    return image


def _check_sino(sino, geom):
    sino = np.ascontiguousarray(sino, dtype=np.float64)
    if sino.shape != geom.sinogram_shape:
        raise DimensionError(
            f"sinogram shape {sino.shape} does not match geometry "
            f"{geom.sinogram_shape}"
        )
    if not np.all(np.isfinite(sino)):
        raise ValidationError("sinogram contains non-finite values")
    return sino


def forward_project(image, geom: FanBeamGeometry) -> np.ndarray:
    """Project an image into a V x U sinogram of line integrals.

    Linear in the image. Each entry is the integral of the (bilinearly
    interpolated) image along the source-to-detector-cell ray, in
    attenuation * mm units.
    """
    image = _check_image(image, geom)
    cos_b = np.cos(geom.view_angles)
    sin_b = np.sin(geom.view_angles)
    return _kernels.fan_forward(
        image,
        cos_b,
        sin_b,
        geom.num_detectors,
        geom.detector_pitch,
        geom.source_to_center,
        geom.source_to_detector,
        geom.pixel_pitch,
    )


def back_project(sino, geom: FanBeamGeometry) -> np.ndarray:
    """Apply the exact adjoint of :func:`forward_project`."""
    sino = _check_sino(sino, geom)
    cos_b = np.cos(geom.view_angles)
    sin_b = np.sin(geom.view_angles)
    return _kernels.fan_back(
        sino,
        cos_b,
        sin_b,
        geom.image_size,
        geom.detector_pitch,
        geom.source_to_center,
        geom.source_to_detector,
        geom.pixel_pitch,
    )


def row_column_sums(geom: FanBeamGeometry):
    """Per-ray and per-pixel weight sums used by SART normalization.

    Returns ``(A @ 1, A.T @ 1)``: the forward projection of an all-ones
    image and the back projection of an all-ones sinogram. All entries
    are nonnegative; rays that miss the image support sum to zero.
    """
    ones_img = np.ones(geom.image_shape)
    ones_sino = np.ones(geom.sinogram_shape)
    return forward_project(ones_img, geom), back_project(ones_sino, geom)
