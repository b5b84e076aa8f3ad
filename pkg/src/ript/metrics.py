"""Background-suppression metrics and detection ROC."""
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

EIGHT_CONNECTED = np.ones((3, 3), dtype=int)


@dataclass
class MetricsReport:
    lsnrg: float
    bsf: float
    scrg: float


@dataclass
class RocPoint:
    threshold: float
    pd: float
    fa: float


@dataclass
class Detection:
    row: float
    col: float
    count: int
    peak: float

    def to_dict(self):
        return {"row": self.row, "col": self.col, "count": self.count, "peak": self.peak}


def _ratio(num, den):
    if np.isinf(num) and np.isinf(den):
        return 1.0
    if den == 0:
        return float("inf")
    return float(num / den)


def regions(shape, box, d=20):
    """Boolean masks of the target box and its surrounding ``d``-wide frame."""
    m, n = shape
    if box.row < 0 or box.col < 0 or box.row + box.a > m or box.col + box.b > n:
        raise ValueError(f"box {box} lies outside image of shape {shape}")
    target = np.zeros(shape, dtype=bool)
    target[box.row:box.row + box.a, box.col:box.col + box.b] = True
    outer = np.zeros(shape, dtype=bool)
    outer[max(0, box.row - d):box.row + box.a + d,
          max(0, box.col - d):box.col + box.b + d] = True
    return target, outer & ~target


def _scr(img, target, neigh):
    sigma_b = float(np.std(img[neigh]))
    diff = abs(float(np.mean(img[target])) - float(np.mean(img[neigh])))
    return _ratio(diff, sigma_b), sigma_b


def scr(img, box, d=20):
    """Signal-to-clutter ratio ``|mu_t - mu_b| / sigma_b`` around `box`."""
    target, neigh = regions(np.shape(img), box, d)
    return _scr(np.asarray(img, dtype=float), target, neigh)[0]


def to_display_range(img, top=255.0):
    """Scale so the largest magnitude equals `top`; an all-zero image is unchanged."""
    img = np.asarray(img, dtype=float)
    peak = float(np.max(np.abs(img), initial=0.0))
    return img * (top / peak) if peak > 0 else img.copy()


def metrics(in_img, out_img, box, d=20, rescale=True):
    """LSNRG, BSF and SCRG of a processed image relative to its input.

    Parameters
    ----------
    in_img, out_img : ndarray
    box : Box
    d : int
        Width of the background frame around the box.
    rescale : bool
        Bring both images to a peak magnitude of 255 before scoring, which
        makes BSF independent of the output's arbitrary gain. LSNRG and SCRG
        are ratios and unaffected.

    Any zero denominator yields ``inf``, which is what a fully suppressed
    neighborhood produces.
    """
    in_img = np.asarray(in_img, dtype=float)
    out_img = np.asarray(out_img, dtype=float)
    if in_img.shape != out_img.shape:
        raise ValueError("input and output images differ in shape")
    if rescale:
        in_img, out_img = to_display_range(in_img), to_display_range(out_img)
    target, neigh = regions(in_img.shape, box, d)

    lsnr_in = _ratio(in_img[target].max(), in_img[neigh].max())
    lsnr_out = _ratio(out_img[target].max(), out_img[neigh].max())
    scr_in, sigma_in = _scr(in_img, target, neigh)
    scr_out, sigma_out = _scr(out_img, target, neigh)
    return MetricsReport(
        lsnrg=_ratio(lsnr_out, lsnr_in),
        bsf=_ratio(sigma_in, sigma_out),
        scrg=_ratio(scr_out, scr_in),
    )


def components(mask, image):
    """8-connected components of `mask` as :class:`Detection` records."""
    labels, count = ndimage.label(mask, structure=EIGHT_CONNECTED)
    out = []
    for idx, sl in enumerate(ndimage.find_objects(labels), start=1):
        local = labels[sl] == idx
        rr, cc = np.nonzero(local)
        out.append(Detection(
            row=float(rr.mean() + sl[0].start),
            col=float(cc.mean() + sl[1].start),
            count=int(rr.size),
            peak=float(image[sl][local].max()),
        ))
    return out


def match(detections, boxes):
    """Count true and false detections.

    A detection is true when its centroid lies inside a truth box; each box
    accepts at most one detection (the highest peak).
    """
    used = set()
    hits = 0
    for box in boxes:
        inside = [i for i, det in enumerate(detections)
                  if i not in used and box.contains(round(det.row), round(det.col))]
        if inside:
            used.add(max(inside, key=lambda i: detections[i].peak))
            hits += 1
    return hits, len(detections) - len(used)


def roc(target_imgs, truths, n_thresholds=50, thresholds=None):
    """Sweep thresholds over the pooled value range.

    Pixels strictly above the threshold form the detection mask. ``pd`` is
    true detections over actual targets; ``fa`` is false detections per frame.
    """
    target_imgs = [np.asarray(t, dtype=float) for t in target_imgs]
    if not target_imgs:
        raise ValueError("no target images given")
    if len(target_imgs) != len(truths):
        raise ValueError("number of frames and ground-truth entries differ")
    if thresholds is None:
        top = max(float(t.max()) for t in target_imgs)
        thresholds = np.linspace(0.0, top, n_thresholds)
    n_targets = sum(len(b) for b in truths)
    points = []
    for thr in np.sort(np.asarray(thresholds, dtype=float)):
        hits = false = 0
        for img, boxes in zip(target_imgs, truths):
            h, f = match(components(img > thr, img), boxes)
            hits += h
            false += f
        pd = hits / n_targets if n_targets else 0.0
        points.append(RocPoint(float(thr), pd, false / len(target_imgs)))
    return points


def roc_dominates(a, b):
    """Whether ROC `a` dominates ROC `b` sampled at the same thresholds.

    Requires, at every threshold, ``pd_a >= pd_b`` and ``fa_a <= fa_b``, and
    a strict improvement in one of them somewhere.
    """
    if [p.threshold for p in a] != [p.threshold for p in b]:
        raise ValueError("ROC curves were sampled at different thresholds")
    weak = all(pa.pd >= pb.pd and pa.fa <= pb.fa for pa, pb in zip(a, b))
    strict = any(pa.pd > pb.pd or pa.fa < pb.fa for pa, pb in zip(a, b))
    return weak and strict
