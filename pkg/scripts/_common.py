"""Shared helpers for the experiment scripts."""

import csv
import json
from pathlib import Path


def results_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_rows(path, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2) + "\n", encoding="utf-8")
