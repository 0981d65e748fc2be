"""Locale-independent CSV and key=value output."""

import numpy as np


def format_value(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path, header, rows):
    """Header row, then one line per row; floats in shortest round-trip form."""
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(format_value(v) for v in row) + "\n")


def read_csv(path):
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(",")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, data


def write_summary(path, metrics):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key in sorted(metrics):
            fh.write(f"{key}={format_value(metrics[key])}\n")


def read_summary(path):
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, _, value = line.partition("=")
            try:
                out[key] = float(value)
            except ValueError:
                out[key] = value
    return out
