"""Piecewise-constant disk phantoms for synthetic scans.

Ground truth stays exactly piecewise constant (pixel-center sampling,
no anti-aliasing), which is the regime total-variation priors model
best. Coordinates are fractions of the image half-width, so a spec is
independent of the raster size.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

__all__ = ["Disk", "PhantomSpec", "generate", "water_and_bone"]


@dataclass(frozen=True)
class Disk:
    """One disk: center and radius in [-1, 1] half-width fractions."""

    center_x: float
    center_y: float
    radius: float
    value: float


@dataclass(frozen=True)
class PhantomSpec:
    """Disks over a background value confined to the inscribed circle.

    Every disk must fit inside the unit circle
    (``|center| + radius <= 1``) and all values must be nonnegative.
    Later-listed disks paint over earlier ones.
    """

    image_size: int
    background: float = 0.0
    disks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.image_size < 1:
            raise ValidationError(f"image_size must be >= 1, got {self.image_size}")
        if self.background < 0:
            raise ValidationError("background attenuation must be >= 0")
        disks = tuple(
            d if isinstance(d, Disk) else Disk(*d) for d in self.disks
        )
        object.__setattr__(self, "disks", disks)
        for i, d in enumerate(disks):
            if d.radius <= 0:
                raise ValidationError(f"disk {i}: radius must be positive")
            if d.value < 0:
                raise ValidationError(f"disk {i}: value must be >= 0")
            if np.hypot(d.center_x, d.center_y) + d.radius > 1 + 1e-12:
                raise ValidationError(
                    f"disk {i} extends outside the unit circle"
                )


def generate(spec: PhantomSpec) -> np.ndarray:
    """Rasterize a phantom spec to an n x n attenuation image.

    Each pixel takes the value of the last-listed disk covering its
    center, the background value if only the inscribed circle covers
    it, and 0 outside the inscribed circle.
    """
    n = spec.image_size
    half = (n - 1) / 2
    scale = n / 2  # one half-width fraction in pixels
    yy, xx = np.mgrid[0:n, 0:n]
    fx = (xx - half) / scale
    fy = (yy - half) / scale

    img = np.where(fx**2 + fy**2 <= 1.0, spec.background, 0.0)
    for d in spec.disks:
        inside = (fx - d.center_x) ** 2 + (fy - d.center_y) ** 2 <= d.radius**2
        img[inside] = d.value
    return img


def water_and_bone(image_size: int = 256) -> PhantomSpec:
    """Structurally simple water-and-bone analog.

    A water disk (0.02/mm) filling most of the field with two off-center
    bone disks (0.05/mm). Structural simplicity makes residual rings
    highly visible, which is what makes it a hard correction case.
    """
    return PhantomSpec(
        image_size=image_size,
        background=0.0,
        disks=(
            Disk(0.0, 0.0, 0.8, 0.02),
            Disk(0.35, 0.0, 0.18, 0.05),
            Disk(-0.25, -0.3, 0.18, 0.05),
        ),
    )
