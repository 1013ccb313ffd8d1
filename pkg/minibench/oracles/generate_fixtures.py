"""Build the recorded tool results that back the mini-benchmark runs.

Reads the same raw dataset files as generate_truth.py and emits
``dataset/tool_fixtures/<tool_name>/records.json``.  Argument paths are
written with the ``{dataset}`` placeholder so one recording works for any
checkout location.  Standalone on purpose, same as the truth generator.

    python3 minibench/oracles/generate_fixtures.py
"""

import json
from pathlib import Path

DATASET = Path(__file__).resolve().parent.parent / "dataset"
FIXTURES = DATASET / "tool_fixtures"

CANDIDATES = ["tumor_rich", "tumor_poor"]


def write_records(tool_name, records):
    tool_dir = FIXTURES / tool_name
    tool_dir.mkdir(parents=True, exist_ok=True)
    path = tool_dir / "records.json"
    path.write_text(json.dumps(records, indent=2) + "\n")
    print(f"wrote {path.relative_to(DATASET.parent)} ({len(records)} records)")


def main():
    props = json.loads((DATASET / "slide_properties.json").read_text())
    labels = json.loads((DATASET / "labels.json").read_text())

    slide_names = sorted(props)

    write_records(
        "dataset_of_wsi_get_valid_slide_paths_tool",
        [
            {
                "args": {"wsi_source": "{dataset}/slides"},
                "result": {
                    "slide_paths": [f"{{dataset}}/slides/{name}" for name in slide_names],
                    "number_of_slides": len(slide_names),
                },
            }
        ],
    )

    write_records(
        "retrieve_properties_from_wsi_tool",
        [
            {
                "args": {"path_to_wsi": f"{{dataset}}/slides/{name}"},
                "result": {"properties": props[name]},
            }
            for name in slide_names
        ],
    )

    write_records(
        "predict_wsi_label_tool",
        [
            {
                "args": {
                    "path_to_wsi": f"{{dataset}}/slides/{name}",
                    "candidate_labels": CANDIDATES,
                },
                "result": {
                    "predicted_label": labels["slides"][name]["predicted_label"],
                    "probabilities": labels["slides"][name]["probabilities"],
                },
            }
            for name in slide_names
        ],
    )

    segmentation = []
    for path in sorted((DATASET / "nuclei").glob("roi_*.json")):
        payload = json.loads(path.read_text())
        records = payload["nuclei"]
        counts = {}
        for record in records:
            counts[record["type"]] = counts.get(record["type"], 0) + 1
        segmentation.append(
            {
                "args": {"path_to_image": f"{{dataset}}/rois/{path.stem}.png"},
                "result": {
                    "nuclei": records,
                    "number_of_nuclei": len(records),
                    "type_counts": counts,
                },
            }
        )
    write_records("segment_and_classify_nuclei_in_histology_roi_tool", segmentation)

    import csv

    with (DATASET / "metadata" / "survival.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    class_counts = {}
    for row in rows:
        group = row["risk_group"]
        class_counts[group] = class_counts.get(group, 0) + 1
    write_records(
        "prepare_wsi_classification_metadata",
        [
            {
                "args": {
                    "path_to_metadata": "{dataset}/metadata/survival.csv",
                    "label_column": "risk_group",
                },
                "result": {
                    "metadata_file": "{dataset}/metadata/survival.csv",
                    "number_of_slides": len(rows),
                    "class_counts": dict(sorted(class_counts.items())),
                    "operation_log": [
                        f"validated {len(rows)} rows against column risk_group",
                        "no duplicate slide ids found",
                    ],
                },
            }
        ],
    )


if __name__ == "__main__":
    main()
