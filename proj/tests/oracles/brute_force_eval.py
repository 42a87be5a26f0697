"""Straightforward re-implementation of the evaluation report.

Reads a fixture written by make_e2e_fixture.py and prints the expected report
JSON. Shares no code with the C++ evaluator: IoU comes from shapely, recall
levels are compared as exact fractions, and AP is read off every prefix of
the ranked list.
"""

import argparse
import json
import math
import pathlib
from fractions import Fraction

from shapely.geometry import Polygon

IGNORE = {"symbols", "mixed", "none"}


def quad(fields):
    xs = [float(v) for v in fields[:8]]
    return Polygon([(xs[0], xs[1]), (xs[2], xs[3]), (xs[4], xs[5]), (xs[6], xs[7])]).convex_hull


def iou(a, b):
    inter = a.intersection(b).area
    union = a.area + b.area - inter
    return inter / union if union > 0 else 0.0


def read_gt(path):
    out = []
    for line in path.read_text(encoding="utf-8-sig").splitlines():
        if not line.strip():
            continue
        parts = line.split(",", 9)
        script = parts[8].strip().lower()
        text = parts[9]
        out.append({"poly": quad(parts), "script": script, "dc": text == "###" or script in IGNORE})
    return out


def read_dets(path, image):
    out = []
    for k, line in enumerate(l for l in path.read_text().splitlines() if l.strip()):
        parts = line.split(",")
        rid = parts[9] if len(parts) > 9 else f"{image}_{k}"
        out.append({"poly": quad(parts), "conf": float(parts[8]), "rid": rid})
    return out


def read_vectors(path):
    rows = {}
    for line in path.read_text().splitlines():
        parts = line.split()
        if not parts or parts[0] == "dim":
            continue
        rows[parts[0].lower() if path.name == "classes.txt" else parts[0]] = [float(v) for v in parts[1:]]
    return rows


def cosine(a, b):
    ab = aa = bb = 0.0
    for x, y in zip(a, b):
        ab += x * y
        aa += x * x
        bb += y * y
    return min(1.0, max(-1.0, ab / (math.sqrt(aa) * math.sqrt(bb))))


def score(conf, sim, mode):
    half = min(1.0, max(0.0, (1.0 + sim) / 2.0))
    return {"detector": conf, "similarity": half, "product": conf * half}[mode]


def greedy(ranked, gts, thr):
    """ranked: list of (score, poly). Returns outcome per ranked entry."""
    order = sorted(range(len(ranked)), key=lambda i: -ranked[i][0])
    used = set()
    outcome = [None] * len(ranked)
    for i in order:
        cand = [(iou(ranked[i][1], g["poly"]), j) for j, g in enumerate(gts) if not g["dc"] and j not in used]
        best = max(cand, default=(-1.0, None), key=lambda t: t[0])
        dc = max((iou(ranked[i][1], g["poly"]) for g in gts if g["dc"]), default=-1.0)
        if best[1] is not None and best[0] >= thr:
            used.add(best[1])
            outcome[i] = "tp"
        elif dc >= thr:
            outcome[i] = "dc"
        else:
            outcome[i] = "fp"
    return outcome


def ap11(flags, n_gt, zero_gt_ap):
    if n_gt == 0:
        return zero_gt_ap if not flags else 0.0
    total = 0.0
    for level in range(11):
        best = 0.0
        for k in range(1, len(flags) + 1):
            tp = sum(flags[:k])
            if Fraction(tp, n_gt) >= Fraction(level, 10):
                best = max(best, tp / k)
        total += best
    return total / 11


def prf(tp, fp, n_gt):
    p = tp / (tp + fp) if tp + fp else 0.0
    r = tp / n_gt if n_gt else 0.0
    f = 2 * p * r / (p + r) if p + r > 0 else 0.0
    return p, r, f


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("fixture", type=pathlib.Path)
    ap.add_argument("--score-mode", default=None)
    args = ap.parse_args()
    root = args.fixture
    cfg = json.loads((root / "config.json").read_text())
    mode = args.score_mode or cfg["score_mode"]
    thr = cfg["iou_thresh"]
    seen, unseen = sorted(cfg["seen"]), sorted(cfg["unseen"])

    gt = {p.stem[3:]: read_gt(p) for p in sorted((root / cfg["gt_dir"]).glob("gt_*.txt"))}
    dets = {p.stem[4:]: read_dets(p, p.stem[4:]) for p in sorted((root / cfg["detections"]).glob("res_*.txt"))}
    regions = read_vectors(root / cfg["embeddings"])
    classes = read_vectors(root / cfg["class_embeddings"])

    def label(rid):
        sims = {c: cosine(regions[rid], classes[c]) for c in unseen}
        top = max(sims.values())
        name = min(c for c in unseen if sims[c] == top)
        return name, sims[name]

    images = []
    for image, records in sorted(gt.items()):
        cared = {g["script"] for g in records if not g["dc"]}
        if cared and cared <= set(unseen):
            images.append(image)

    ignored = sum(len(d) for image, d in dets.items() if image not in images)

    def agnostic(subset):
        tp = fp = dc = n_gt = 0
        for image in subset:
            ranked = [(d["conf"], d["poly"]) for d in dets.get(image, [])]
            out = greedy(ranked, gt[image], thr)
            tp += out.count("tp")
            fp += out.count("fp")
            dc += out.count("dc")
            n_gt += sum(1 for g in gt[image] if not g["dc"])
        p, r, f = prf(tp, fp, n_gt)
        return {"images": len(subset), "n_gt": n_gt, "tp": tp, "fp": fp, "precision": p, "recall": r,
                "f_measure": f, "dont_care_absorbed": dc}

    per_script = {}
    for s in sorted({g["script"] for i in images for g in gt[i] if not g["dc"]}):
        per_script[s] = agnostic([i for i in images if any(g["script"] == s and not g["dc"] for g in gt[i])])

    per_class = {}
    for c in unseen:
        hits = []
        n_gt = 0
        for image in images:
            regions_c = [g for g in gt[image] if g["dc"] or g["script"] == c]
            n_gt += sum(1 for g in regions_c if not g["dc"])
            ranked = []
            for d in dets.get(image, []):
                name, sim = label(d["rid"])
                if name == c:
                    ranked.append((score(d["conf"], sim, mode), d["poly"]))
            out = greedy(ranked, regions_c, thr)
            hits += [(s, o == "tp") for (s, _), o in zip(ranked, out) if o != "dc"]
        hits.sort(key=lambda h: -h[0])
        flags = [t for _, t in hits]
        per_class[c] = {"ap": ap11(flags, n_gt, 1.0), "n_gt": n_gt, "n_det": len(flags), "tp": sum(flags),
                        "fp": len(flags) - sum(flags)}
    total = 0.0
    for c in unseen:
        total += per_class[c]["ap"]

    report = {
        "config": {"iou_thresh": thr, "score_mode": mode, "zero_gt_ap": 1.0, "image_filter": "unseen",
                   "class_aware": True, "seen": seen, "unseen": unseen},
        "images": len(images),
        "class_aware": {"per_class": per_class, "map": total / len(unseen)},
        "class_agnostic": {"combined": agnostic(images), "per_script": per_script},
        "diagnostics": {"hull_fallbacks": 0, "detections_ignored": ignored},
    }
    print(json.dumps(report, indent=2, sort_keys=True))


if __name__ == "__main__":
    main()
