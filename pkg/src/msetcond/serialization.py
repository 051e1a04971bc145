"""CSV, JSON and JSON-lines readers and writers."""
from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

from .enumeration import BivariateTable
from .sampling import MultisetObject, SizeProfile


def write_json(data, path) -> None:
    Path(path).write_text(json.dumps(data, sort_keys=True, indent=2) + "\n")


def write_csv(rows: Iterable[dict], path, fieldnames: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def table_rows(table: BivariateTable, nonzero: bool = False):
    """``{"n", "N", "g"}`` rows with ``g`` as a decimal string (exact for integers)."""
    for n, N, g in table.rows():
        if nonzero and not g:
            continue
        yield {"n": n, "N": N, "g": str(g) if table.exact else repr(float(g))}


def write_table_csv(table: BivariateTable, path, nonzero: bool = False) -> None:
    write_csv(table_rows(table, nonzero), path, ["n", "N", "g"])


def table_to_json(table: BivariateTable) -> dict:
    rows = [[str(g) if table.exact else float(g) for g in
             (table.series[n, N] for N in range(table.N_max + 1))] for n in range(table.n_max + 1)]
    return {"class": table.seq_name, "n_max": table.n_max, "N_max": table.N_max,
            "domain": table.domain.value, "g": rows}


def write_jsonl(objects: Iterable, path) -> int:
    count = 0
    with open(path, "w") as fh:
        for obj in objects:
            fh.write(json.dumps(obj.to_dict(), sort_keys=True) + "\n")
            count += 1
    return count


def read_jsonl(path) -> list:
    """Parse samples back, rechecking ``n`` and ``kappa`` against the components."""
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            data = json.loads(line)
            if "components" in data:
                obj = MultisetObject.from_dict(data)
            else:
                obj = SizeProfile(tuple(tuple(c) for c in data["sizes"]))
            if "n" in data and data["n"] != obj.total_size:
                raise ValueError(f"line {lineno}: n={data['n']} but components give {obj.total_size}")
            if "kappa" in data and data["kappa"] != obj.kappa:
                raise ValueError(f"line {lineno}: kappa={data['kappa']} but components give {obj.kappa}")
            out.append(obj)
    return out
