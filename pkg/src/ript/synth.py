"""Synthetic infrared scenes: cloud-like clutter plus Gaussian point targets."""
import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Box:
    """Target extent: top-left ``(row, col)`` and size ``a`` rows by ``b`` cols."""

    row: int
    col: int
    a: int
    b: int

    def contains(self, r, c):
        return self.row <= r < self.row + self.a and self.col <= c < self.col + self.b

    def to_list(self):
        return [self.row, self.col, self.a, self.b]


@dataclass
class GroundTruth:
    """Per-frame lists of target boxes, keyed by frame name."""

    frames: dict = field(default_factory=dict)

    def boxes(self, frame):
        return self.frames.get(frame, [])

    def to_json(self):
        return {"frames": {k: [b.to_list() for b in v] for k, v in self.frames.items()}}

    @classmethod
    def from_json(cls, data):
        frames = data.get("frames", data)
        return cls({k: [Box(*map(int, b)) for b in v] for k, v in frames.items()})


@dataclass
class TargetSpec:
    center: tuple
    amplitude: float
    spread: float = 1.0


@dataclass
class ClutterSpec:
    n_blobs: tuple = (5, 15)
    spread: tuple = (20.0, 60.0)
    amplitude: tuple = (5.0, 20.0)
    base: float = 40.0
    # background peak is rescaled to stay at or below this level
    ceiling: float = 150.0
    # sharp-edged cloud layers: count range, edge width (px), amplitude range
    n_clouds: tuple = (0, 0)
    cloud_edge: float = 1.5
    cloud_amplitude: tuple = (20.0, 50.0)
    flat: bool = False


def target_half_width(spread):
    return min(4, max(1, math.ceil(3 * spread)))


def gaussian_target(shape, spec):
    """Isotropic Gaussian truncated to its (at most 9x9) ``3 * spread`` box."""
    r0, c0 = (int(v) for v in spec.center)
    half = target_half_width(spec.spread)
    m, n = shape
    if not (half <= r0 < m - half and half <= c0 < n - half):
        raise ValueError(f"target at {spec.center} does not fit inside {shape}")
    out = np.zeros(shape)
    rr, cc = np.mgrid[-half:half + 1, -half:half + 1]
    out[r0 - half:r0 + half + 1, c0 - half:c0 + half + 1] = spec.amplitude * np.exp(
        -(rr ** 2 + cc ** 2) / (2.0 * spec.spread ** 2))
    box = Box(r0 - half, c0 - half, 2 * half + 1, 2 * half + 1)
    return out, box


def clutter_background(shape, spec, rng):
    m, n = shape
    bg = np.full(shape, float(spec.base))
    if spec.flat:
        return bg
    rows, cols = np.mgrid[0:m, 0:n].astype(float)
    count = int(rng.integers(spec.n_blobs[0], spec.n_blobs[1] + 1))
    for _ in range(count):
        r0, c0 = rng.uniform(0, m), rng.uniform(0, n)
        s1, s2 = rng.uniform(*spec.spread, size=2)
        theta = rng.uniform(0, np.pi)
        amp = rng.uniform(*spec.amplitude)
        dr, dc = rows - r0, cols - c0
        u = np.cos(theta) * dr + np.sin(theta) * dc
        v = -np.sin(theta) * dr + np.cos(theta) * dc
        bg += amp * np.exp(-0.5 * ((u / s1) ** 2 + (v / s2) ** 2))
    count = int(rng.integers(spec.n_clouds[0], spec.n_clouds[1] + 1))
    for _ in range(count):
        r0, c0 = rng.uniform(0, m), rng.uniform(0, n)
        s1, s2 = rng.uniform(*spec.spread, size=2)
        theta = rng.uniform(0, np.pi)
        amp = rng.uniform(*spec.cloud_amplitude)
        dr, dc = rows - r0, cols - c0
        u = np.cos(theta) * dr + np.sin(theta) * dc
        v = -np.sin(theta) * dr + np.cos(theta) * dc
        # signed distance (px, approx.) inside the elliptical boundary
        dist = (1.0 - np.hypot(u / s1, v / s2)) * np.sqrt(s1 * s2)
        bg += amp / (1.0 + np.exp(-dist / spec.cloud_edge))
    peak = bg.max()
    if peak > spec.ceiling:
        bg = spec.base + (bg - spec.base) * (spec.ceiling - spec.base) / (peak - spec.base)
    return bg


def gen_scene(seed, dims=(200, 200), target=None, clutter=None, noise_std=0.0,
              value_range=(0.0, 255.0)):
    """Generate one frame and its ground truth boxes.

    Parameters
    ----------
    seed : int
        Seeds a private generator; the same seed yields the same frame.
    dims : (rows, cols)
    target : TargetSpec or list of TargetSpec, optional
        Targets with zero amplitude are omitted from the ground truth.
    clutter : ClutterSpec, optional
    noise_std : float
        Standard deviation of additive white Gaussian noise.
    value_range : (lo, hi)
        Output is clipped to this range.

    Returns
    -------
    image : ndarray
    boxes : list of Box
    """
    rng = np.random.default_rng(seed)
    clutter = clutter or ClutterSpec()
    image = clutter_background(tuple(dims), clutter, rng)
    targets = [] if target is None else (target if isinstance(target, list) else [target])
    boxes = []
    for spec in targets:
        blob, box = gaussian_target(image.shape, spec)
        if spec.amplitude != 0:
            image = image + blob
            boxes.append(box)
    lo, hi = value_range
    image = np.clip(image, lo, hi)
    if noise_std > 0:
        image = np.clip(image + rng.normal(0.0, noise_std, image.shape), lo, hi)
    return image, boxes


def amplitude_for_scr(seed, center, scr_target, dims=(200, 200), spread=1.0, clutter=None,
                      upper=400.0, iterations=30):
    """Smallest target amplitude (to bisection precision) reaching `scr_target`.

    The SCR is measured on the noiseless frame, so the result depends only on
    the clutter drawn from `seed`. Returns `upper` when even that falls short.
    """
    from .metrics import scr

    def measured(amp):
        image, boxes = gen_scene(seed, dims, TargetSpec(center, amp, spread), clutter)
        return scr(image, boxes[0]) if boxes else 0.0

    lo, hi = 0.0, float(upper)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if measured(mid) < scr_target:
            lo = mid
        else:
            hi = mid
    return hi


def benchmark_frames(n_frames, seed=0, noise_std=0.0, scr_target=3.5, min_amplitude=100.0,
                     dims=(200, 200), spread=1.0, clutter=None, margin=30):
    """One-target frames with a guaranteed noiseless signal-to-clutter ratio.

    Frame ``i`` uses clutter seed ``seed + i`` and a target center drawn from
    an independent stream seeded ``1000 + seed + i``. The amplitude is the
    larger of the value reaching `scr_target` and `min_amplitude`.

    Returns
    -------
    list of (name, image, boxes, amplitude)
    """
    frames = []
    for i in range(n_frames):
        s = seed + i
        rng = np.random.default_rng(1000 + s)
        center = (int(rng.integers(margin, dims[0] - margin)),
                  int(rng.integers(margin, dims[1] - margin)))
        amp = max(amplitude_for_scr(s, center, scr_target, dims, spread, clutter),
                  float(min_amplitude))
        image, boxes = gen_scene(s, dims, TargetSpec(center, amp, spread), clutter,
                                 noise_std=noise_std)
        frames.append((f"frame_{s:04d}", image, boxes, amp))
    return frames
