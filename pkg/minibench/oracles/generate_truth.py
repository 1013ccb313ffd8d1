"""Recompute the mini-benchmark ground truth files from the raw dataset.

Standalone on purpose: answers are derived here with a second, independent
implementation of every measurement (own shoelace area, own gift-wrapping
hull) so the committed truth never inherits a bug from the package under
test.  Run from anywhere:

    python3 minibench/oracles/generate_truth.py
"""

import csv
import json
from pathlib import Path

DATASET = Path(__file__).resolve().parent.parent / "dataset"
TRUTH = Path(__file__).resolve().parent.parent / "suite" / "truth"


def polygon_area(points):
    total = 0.0
    for i in range(len(points)):
        x0, y0 = points[i]
        x1, y1 = points[(i + 1) % len(points)]
        total += x0 * y1 - x1 * y0
    return abs(total) / 2.0


def gift_wrap_hull(points):
    # O(n*h) jarvis march; fine for tiny contours and independent of the
    # package's andrew-monotone-chain implementation
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts
    hull = []
    start = pts[0]
    current = start
    while True:
        hull.append(current)
        candidate = pts[0] if pts[0] != current else pts[1]
        for p in pts:
            if p == current:
                continue
            cross = (candidate[0] - current[0]) * (p[1] - current[1]) - (
                candidate[1] - current[1]
            ) * (p[0] - current[0])
            if cross < 0:
                candidate = p
            elif cross == 0:
                # collinear: keep the farther point
                d_cand = (candidate[0] - current[0]) ** 2 + (candidate[1] - current[1]) ** 2
                d_p = (p[0] - current[0]) ** 2 + (p[1] - current[1]) ** 2
                if d_p > d_cand:
                    candidate = p
        current = candidate
        if current == start:
            break
    return hull


def load_properties():
    return json.loads((DATASET / "slide_properties.json").read_text())


def load_nuclei():
    out = {}
    for path in sorted((DATASET / "nuclei").glob("roi_*.json")):
        payload = json.loads(path.read_text())
        out[path.stem] = payload["nuclei"]
    return out


def main():
    TRUTH.mkdir(parents=True, exist_ok=True)
    props = load_properties()
    nuclei = load_nuclei()
    truth = {}

    # -- DataQA -------------------------------------------------------------
    alpha = props["case_alpha.svs"]
    truth["q01"] = [
        {
            "slide_id": "case_alpha",
            "level_count": alpha["level_count"],
            "magnification": alpha["objective_power"],
        }
    ]
    truth["q02"] = [
        {"slide_id": name.removesuffix(".svs"), "mpp": entry["mpp_x"]}
        for name, entry in sorted(props.items())
    ]
    gamma_l2 = props["case_gamma.svs"]["level_dimensions"][2]
    truth["q03"] = [
        {"slide_id": "case_gamma", "level2_width": gamma_l2[0], "level2_height": gamma_l2[1]}
    ]
    powers = [entry["objective_power"] for entry in props.values()]
    truth["q04"] = [
        {
            "mag_40_count": sum(1 for p in powers if p == 40),
            "mag_20_count": sum(1 for p in powers if p == 20),
        }
    ]

    # -- CellularQA ---------------------------------------------------------
    cellularity = {}
    for roi, records in nuclei.items():
        neo = sum(1 for r in records if r["type"] == "neoplastic")
        cellularity[roi] = round(100.0 * neo / len(records), 2)
    truth["q05"] = [
        {"image_id": roi, "neoplastic_percent": cellularity[roi]} for roi in sorted(nuclei)
    ]
    truth["q06"] = [
        {"image_id": roi, "nucleus_count": len(nuclei[roi])} for roi in sorted(nuclei)
    ]
    all_records = [r for records in nuclei.values() for r in records]
    inflammatory = sum(1 for r in all_records if r["type"] == "inflammatory")
    truth["q07"] = [
        {"inflammatory_percent": round(100.0 * inflammatory / len(all_records), 2)}
    ]

    # -- PatchQA ------------------------------------------------------------
    truth["q08"] = []
    for roi in sorted(nuclei):
        areas = [
            polygon_area(r["contour"]) for r in nuclei[roi] if r["type"] == "neoplastic"
        ]
        truth["q08"].append(
            {"image_id": roi, "mean_neoplastic_area": round(sum(areas) / len(areas), 2)}
        )
    solidities = []
    for r in all_records:
        if r["type"] != "neoplastic":
            continue
        area = polygon_area(r["contour"])
        hull_area = polygon_area(gift_wrap_hull(r["contour"]))
        solidities.append(area / hull_area)
    truth["q09"] = [
        {"mean_neoplastic_solidity": round(sum(solidities) / len(solidities), 3)}
    ]
    top_roi = max(sorted(cellularity), key=lambda roi: cellularity[roi])
    truth["q10"] = [{"image_id": top_roi, "neoplastic_percent": cellularity[top_roi]}]

    # -- SlideQA ------------------------------------------------------------
    with (DATASET / "metadata" / "survival.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    groups = [row["risk_group"] for row in rows]
    high = groups.count("high")
    low = groups.count("low")
    truth["q11"] = [
        {
            "high_count": high,
            "low_count": low,
            "majority_group": "high" if high >= low else "low",
        }
    ]
    labels = json.loads((DATASET / "labels.json").read_text())
    truth["q12"] = [
        {
            "slide_id": name.removesuffix(".svs"),
            "tumor_rich_probability": entry["probabilities"]["tumor_rich"],
        }
        for name, entry in sorted(labels["slides"].items())
    ]

    for qid, records in truth.items():
        path = TRUTH / f"{qid}.json"
        path.write_text(json.dumps(records, indent=2) + "\n")
        print(f"wrote {path.relative_to(TRUTH.parent.parent)}")


if __name__ == "__main__":
    main()
