import numpy as np
import pytest

from ringfix.errors import ValidationError
from ringfix.phantom import Disk, PhantomSpec, generate, water_and_bone


def test_empty_disk_list_fills_inscribed_circle():
    img = generate(PhantomSpec(image_size=64, background=0.02))
    n = 64
    half = (n - 1) / 2
    yy, xx = np.mgrid[0:n, 0:n]
    inside = (xx - half) ** 2 + (yy - half) ** 2 <= (n / 2) ** 2
    assert np.all(img[inside] == 0.02)
    assert np.all(img[~inside] == 0.0)


def test_center_pixel_takes_disk_value():
    spec = PhantomSpec(image_size=65, background=0.0, disks=[Disk(0, 0, 0.3, 0.06)])
    img = generate(spec)
    assert img[32, 32] == 0.06


def test_later_disk_wins_on_overlap():
    spec = PhantomSpec(
        image_size=64,
        background=0.0,
        disks=[Disk(0, 0, 0.4, 0.03), Disk(0.1, 0, 0.4, 0.07)],
    )
    img = generate(spec)
    # pixel in the overlap region (near center) takes the second value
    assert img[31, 34] == 0.07


def test_value_count_bound():
    spec = water_and_bone(128)
    img = generate(spec)
    assert len(np.unique(img)) <= len(spec.disks) + 2


def test_mirrored_spec_mirrors_image_exactly():
    spec = PhantomSpec(
        image_size=96,
        background=0.01,
        disks=[Disk(0.4, -0.2, 0.25, 0.05), Disk(-0.1, 0.3, 0.15, 0.08)],
    )
    mirrored = PhantomSpec(
        image_size=96,
        background=0.01,
        disks=[Disk(-d.center_x, d.center_y, d.radius, d.value) for d in spec.disks],
    )
    assert np.array_equal(generate(mirrored), generate(spec)[:, ::-1])


def test_deterministic():
    spec = water_and_bone(64)
    assert np.array_equal(generate(spec), generate(spec))


def test_disk_outside_unit_circle_rejected():
    with pytest.raises(ValidationError):
        PhantomSpec(image_size=32, disks=[Disk(0.9, 0.0, 0.2, 0.05)])


def test_negative_value_rejected():
    with pytest.raises(ValidationError):
        PhantomSpec(image_size=32, disks=[Disk(0, 0, 0.2, -0.05)])
    with pytest.raises(ValidationError):
        PhantomSpec(image_size=32, background=-0.01)
