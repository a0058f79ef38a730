"""Independent reference for the golden statistics of mini_instances.json.

Rasterizes by per-pixel ray casting, decodes RLE directly, and counts every
pixel quantity with numpy slices (no integral images). Writes:

  golden_mob_values.json     per-gt MOB ratios, in scene order
  golden_mob_histogram.csv   20 uniform bins on [0, 1]
  golden_joint_histogram.csv 20 x 20 bins of (pixel IoU, maIoU)
  golden_joint_summary.json  pair count and off-diagonal quadrant counts
  golden_assign.json         per-gt positives of atss:maiou:9 and
                             fixed:iou:0.4:0.5, plus the label transitions

Run from this directory: python3 golden_oracle.py
"""

import json
import math

import numpy as np

BINS = 20
STRIDES = [8, 16, 32, 64, 128]
SCALE = 4.0


def pnpoly(vertices, x, y):
    inside = False
    n = len(vertices)
    for i in range(n):
        px, py = vertices[i]
        qx, qy = vertices[(i + 1) % n]
        if (py > y) != (qy > y) and x < px + (y - py) * (qx - px) / (qy - py):
            inside = not inside
    return inside


def polygon_mask(flat, h, w):
    verts = list(zip(flat[0::2], flat[1::2]))
    m = np.zeros((h, w), dtype=bool)
    for r in range(h):
        for c in range(w):
            m[r, c] = pnpoly(verts, c + 0.5, r + 0.5)
    return m


def rle_mask(counts, h, w):
    flat = np.zeros(h * w, dtype=bool)
    pos = 0
    for i, run in enumerate(counts):
        if i % 2 == 1:
            flat[pos:pos + run] = True
        pos += run
    return flat.reshape((w, h)).T


def discretize(box, h, w):
    x1, y1, x2, y2 = box
    x1 = min(max(math.floor(x1), 0), w)
    x2 = min(max(math.ceil(x2), 0), w)
    y1 = min(max(math.floor(y1), 0), h)
    y2 = min(max(math.ceil(y2), 0), h)
    if x1 >= x2 or y1 >= y2:
        return None
    return x1, y1, x2, y2


def anchors(h, w):
    out = []
    for s in STRIDES:
        rows, cols = -(-h // s), -(-w // s)
        half = SCALE * s / 2.0
        for i in range(rows):
            for j in range(cols):
                cx, cy = (j + 0.5) * s, (i + 0.5) * s
                out.append((cx - half, cy - half, cx + half, cy + half))
    return out


def levels(h, w):
    out, start = [], 0
    for s in STRIDES:
        n = (-(-h // s)) * (-(-w // s))
        out.append((start, n))
        start += n
    return out


def box_iou(a, b):
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    inter = iw * ih if iw > 0 and ih > 0 else 0.0
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def center(b):
    return ((b[0] + b[2]) / 2.0, (b[1] + b[3]) / 2.0)


def maiou_of(anchor, box, m, h, w):
    gx1, gy1, gx2, gy2 = discretize(box, h, w)
    area = (gx2 - gx1) * (gy2 - gy1)
    in_box = int(m[gy1:gy2, gx1:gx2].sum())
    d = discretize(anchor, h, w)
    if d is None:
        inter = covered = 0
        union = area
    else:
        ax1, ay1, ax2, ay2 = d
        ix1, iy1, ix2, iy2 = max(ax1, gx1), max(ay1, gy1), min(ax2, gx2), min(ay2, gy2)
        if ix1 < ix2 and iy1 < iy2:
            inter = (ix2 - ix1) * (iy2 - iy1)
            covered = int(m[iy1:iy2, ix1:ix2].sum())
        else:
            inter = covered = 0
        union = (ax2 - ax1) * (ay2 - ay1) + area - inter
    if in_box == 0:
        return inter / union
    return (area * covered) / (in_box * union)


def atss(anchor_list, lvls, gts, h, w, k=9):
    """Label per anchor: gt index or -1 (negative)."""
    best = [None] * len(anchor_list)
    for g, (box, m) in enumerate(gts):
        gc = center(box)
        cands = []
        for start, n in lvls:
            idx = list(range(start, start + n))
            def dist(i):
                ac = center(anchor_list[i])
                return (ac[0] - gc[0]) ** 2 + (ac[1] - gc[1]) ** 2
            idx.sort(key=lambda i: (dist(i), i))
            cands.extend(idx[:k])
        scores = [maiou_of(anchor_list[i], box, m, h, w) for i in cands]
        total = 0.0
        for v in scores:
            total += v
        mean = total / len(scores)
        var = 0.0
        for v in scores:
            var += (v - mean) * (v - mean)
        t = mean + math.sqrt(var / len(scores))
        for i, v in zip(cands, scores):
            cx, cy = center(anchor_list[i])
            inside = box[0] < cx < box[2] and box[1] < cy < box[3]
            if v >= t and inside and (best[i] is None or v > best[i][1]):
                best[i] = (g, v)
    return [b[0] if b is not None else -1 for b in best]


def fixed_iou(anchor_list, gts, neg=0.4, pos=0.5):
    """Label per anchor: gt index, -1 negative, -2 ignore."""
    out = []
    for a in anchor_list:
        best_g, best_v = None, None
        for g, (box, _) in enumerate(gts):
            v = box_iou(a, box)
            if best_v is None or v > best_v:
                best_g, best_v = g, v
        if best_v >= pos:
            out.append(best_g)
        elif best_v < neg:
            out.append(-1)
        else:
            out.append(-2)
    return out


def label_class(l):
    return 0 if l >= 0 else (1 if l == -1 else 2)


def bin_of(v):
    return min(int(math.floor(v * BINS)), BINS - 1)


def main():
    with open("mini_instances.json") as f:
        doc = json.load(f)
    images = sorted(doc["images"], key=lambda i: i["id"])
    anns = sorted(doc["annotations"], key=lambda a: a["id"])

    mobs = []
    joint = np.zeros((BINS, BINS), dtype=np.int64)
    pairs = 0
    low_high = 0
    high_low = 0
    per_gt = {"atss:maiou:9": {}, "fixed:iou:0.4:0.5": {}}
    transitions = [[0] * 3 for _ in range(3)]
    for img in images:
        h, w = img["height"], img["width"]
        gts = []
        for a in anns:
            if a["image_id"] != img["id"] or a.get("iscrowd", 0):
                continue
            x, y, bw, bh = a["bbox"]
            box = (min(max(x, 0), w), min(max(y, 0), h), min(max(x + bw, 0), w), min(max(y + bh, 0), h))
            seg = a["segmentation"]
            if isinstance(seg, list):
                m = np.zeros((h, w), dtype=bool)
                for part in seg:
                    m |= polygon_mask(part, h, w)
            else:
                m = rle_mask(seg["counts"], h, w)
            gts.append((box, m, a["id"]))
        ids = [g[2] for g in gts]
        gts = [(b, m) for b, m, _ in gts]
        anchor_list = anchors(h, w)
        lab_atss = atss(anchor_list, levels(h, w), gts, h, w)
        lab_fixed = fixed_iou(anchor_list, gts)
        for g, ann_id in enumerate(ids):
            per_gt["atss:maiou:9"][str(ann_id)] = lab_atss.count(g)
            per_gt["fixed:iou:0.4:0.5"][str(ann_id)] = lab_fixed.count(g)
        for lf, la in zip(lab_fixed, lab_atss):
            transitions[label_class(lf)][label_class(la)] += 1
        for box, m in gts:
            gx1, gy1, gx2, gy2 = discretize(box, h, w)
            area = (gx2 - gx1) * (gy2 - gy1)
            in_box = int(m[gy1:gy2, gx1:gx2].sum())
            mobs.append(in_box / area)
            for anchor in anchors(h, w):
                d = discretize(anchor, h, w)
                if d is None:
                    inter = covered = 0
                    union = area
                else:
                    ax1, ay1, ax2, ay2 = d
                    ix1, iy1, ix2, iy2 = max(ax1, gx1), max(ay1, gy1), min(ax2, gx2), min(ay2, gy2)
                    if ix1 < ix2 and iy1 < iy2:
                        inter = (ix2 - ix1) * (iy2 - iy1)
                        covered = int(m[iy1:iy2, ix1:ix2].sum())
                    else:
                        inter = covered = 0
                    union = (ax2 - ax1) * (ay2 - ay1) + area - inter
                iou = inter / union
                maiou = (area * covered) / (in_box * union)
                if iou == 0 and maiou == 0:
                    continue
                pairs += 1
                joint[bin_of(iou), bin_of(maiou)] += 1
                if iou < 0.5 <= maiou:
                    low_high += 1
                if maiou < 0.5 <= iou:
                    high_low += 1

    hist = np.zeros(BINS, dtype=np.int64)
    for v in mobs:
        hist[bin_of(v)] += 1

    with open("golden_mob_values.json", "w") as f:
        json.dump({"mob": mobs, "fraction_below_half": sum(v < 0.5 for v in mobs) / len(mobs)}, f, indent=1)
        f.write("\n")
    with open("golden_mob_histogram.csv", "w") as f:
        f.write("bin_lo,bin_hi,count\n")
        for i in range(BINS):
            f.write("%.4f,%.4f,%d\n" % (i / BINS, (i + 1) / BINS, hist[i]))
    with open("golden_joint_histogram.csv", "w") as f:
        f.write("iou_lo,iou_hi,maiou_lo,maiou_hi,count\n")
        for i in range(BINS):
            for j in range(BINS):
                f.write("%.4f,%.4f,%.4f,%.4f,%d\n" % (i / BINS, (i + 1) / BINS, j / BINS, (j + 1) / BINS, joint[i, j]))
    with open("golden_joint_summary.json", "w") as f:
        json.dump({"pairs": pairs, "low_iou_high_maiou": low_high, "high_iou_low_maiou": high_low}, f, indent=1)
        f.write("\n")
    with open("golden_assign.json", "w") as f:
        json.dump({"positives_per_gt": per_gt, "fixed_to_atss_transitions": transitions}, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
