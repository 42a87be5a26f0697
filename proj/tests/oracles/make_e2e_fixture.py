"""Writes the synthetic 10-image evaluation fixture.

Ground truth, detections, region embeddings and the class table are planted
with a fixed seed. Every detection/ground-truth IoU is kept away from the 0.5
matching threshold so that the expected report does not hinge on rounding.
"""

import argparse
import json
import math
import pathlib
import random

from shapely.geometry import Polygon

SEEN = ["latin", "bangla", "arabic", "japanese"]
UNSEEN = ["chinese", "korean", "hindi"]
DIM = 8
SIZE = 200
MARGIN = 0.06


def rect(cx, cy, w, h, angle):
    c, s = math.cos(angle), math.sin(angle)
    pts = []
    for dx, dy in ((-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)):
        pts.append((cx + c * dx - s * dy, cy + s * dx + c * dy))
    return pts


def iou(a, b):
    pa, pb = Polygon(a), Polygon(b)
    inter = pa.intersection(pb).area
    return inter / (pa.area + pb.area - inter)


def far_from_threshold(q, others):
    return all(abs(iou(q, o) - 0.5) > MARGIN for o in others)


def disjoint_from(q, others):
    return all(Polygon(q).intersection(Polygon(o)).area == 0 for o in others)


def fmt(v):
    return repr(round(v, 1)).rstrip("0").rstrip(".") if v != int(v) else str(int(v))


def quad_line(q):
    return ",".join(f"{fmt(x)},{fmt(y)}" for x, y in q)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=pathlib.Path)
    args = ap.parse_args()
    rng = random.Random(2019)
    out = args.out
    (out / "gt").mkdir(parents=True, exist_ok=True)
    (out / "det").mkdir(parents=True, exist_ok=True)

    anchors = {}
    for name in SEEN + UNSEEN:
        anchors[name] = [rng.gauss(0, 1) for _ in range(DIM)]

    # img_01..08 unseen only, img_09 seen only, img_10 mixed
    plans = []
    for i in range(8):
        plans.append([rng.choice(UNSEEN) for _ in range(rng.randint(2, 4))])
    plans.append(["latin", "arabic", "latin"])
    plans.append(["latin", "hindi"])

    embeddings = {}
    for n, scripts in enumerate(plans, start=1):
        image = f"img_{n:02d}"
        gts = []
        gt_lines = []
        for k, script in enumerate(scripts + ["dontcare"] * (1 if n % 3 == 0 else 0)):
            while True:
                q = rect(rng.randint(30, 170), rng.randint(20, 180), rng.randint(30, 60), rng.randint(12, 22),
                         rng.uniform(-0.3, 0.3))
                q = [(round(x), round(y)) for x, y in q]
                if all(0 <= x <= SIZE and 0 <= y <= SIZE for x, y in q) and disjoint_from(q, [g for g, _ in gts]):
                    break
            if script == "dontcare":
                gt_lines.append(f"{quad_line(q)},{rng.choice(UNSEEN).capitalize()},###")
            else:
                gt_lines.append(f"{quad_line(q)},{script.capitalize()},word{n}_{k}")
            gts.append((q, script))
        (out / "gt" / f"gt_{image}.txt").write_text("\n".join(gt_lines) + "\n")

        gt_quads = [g for g, _ in gts]
        dets = []
        for q, script in gts:
            copies = 0 if rng.random() < 0.15 else (2 if rng.random() < 0.2 else 1)
            for _ in range(copies):
                while True:
                    cx = sum(p[0] for p in q) / 4 + rng.uniform(-4, 4)
                    cy = sum(p[1] for p in q) / 4 + rng.uniform(-3, 3)
                    w = math.dist(q[0], q[1]) * rng.uniform(0.8, 1.15)
                    h = math.dist(q[1], q[2]) * rng.uniform(0.8, 1.2)
                    ang = math.atan2(q[1][1] - q[0][1], q[1][0] - q[0][0]) + rng.uniform(-0.08, 0.08)
                    d = [(round(x, 1), round(y, 1)) for x, y in rect(cx, cy, w, h, ang)]
                    if far_from_threshold(d, gt_quads):
                        break
                dets.append((d, script))
        for _ in range(rng.randint(0, 2)):
            while True:
                d = rect(rng.uniform(20, 180), rng.uniform(20, 180), rng.uniform(20, 50), rng.uniform(10, 20),
                         rng.uniform(-0.5, 0.5))
                d = [(round(x, 1), round(y, 1)) for x, y in d]
                if far_from_threshold(d, gt_quads) and all(iou(d, g) < 0.3 for g in gt_quads):
                    break
            dets.append((d, None))

        rng.shuffle(dets)
        det_lines = []
        for k, (d, script) in enumerate(dets):
            conf = rng.choice([0.55, 0.6, 0.7, 0.8, 0.9, 0.95]) if rng.random() < 0.5 else round(rng.uniform(0.5, 1), 3)
            # a third of the regions rely on the implicit "<image>_<index>" id
            rid = f"{image}_{k}" if k % 3 == 0 else f"r{n:02d}{k:02d}"
            det_lines.append(f"{quad_line(d)},{conf}" + ("" if k % 3 == 0 else f",{rid}"))
            if script in UNSEEN and rng.random() < 0.75:
                target = script
            else:
                target = rng.choice(UNSEEN)
            noise = 0.35
            embeddings[rid] = [a + rng.gauss(0, noise) for a in anchors[target]]
        (out / "det" / f"res_{image}.txt").write_text("".join(line + "\n" for line in det_lines))

    with open(out / "embeddings.txt", "w") as f:
        f.write(f"dim {DIM}\n")
        for rid in sorted(embeddings):
            f.write(rid + "".join(f" {v!r}" for v in embeddings[rid]) + "\n")
    with open(out / "classes.txt", "w") as f:
        f.write(f"dim {DIM}\n")
        for name in SEEN + UNSEEN:
            f.write(name.capitalize() + "".join(f" {v!r}" for v in anchors[name]) + "\n")
    with open(out / "image_meta.csv", "w") as f:
        f.write("image_id,width,height\n")
        for n in range(1, len(plans) + 1):
            f.write(f"img_{n:02d},{SIZE},{SIZE}\n")
    config = {
        "gt_dir": "gt",
        "detections": "det",
        "embeddings": "embeddings.txt",
        "class_embeddings": "classes.txt",
        "image_meta": "image_meta.csv",
        "seen": SEEN,
        "unseen": UNSEEN,
        "iou_thresh": 0.5,
        "score_mode": "detector",
        "image_filter": "unseen",
        "out": "out",
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")


if __name__ == "__main__":
    main()
