#!/usr/bin/env python3
"""Line-protocol predictor serving a linear model spec.

Usage: reference_predictor.py MODEL_JSON

Reads "predict <n>" headers followed by n CSV rows on stdin and writes one
prediction per row. Accumulates intercept + w_j * x_j in index order so the
bits match a serial client-side evaluation.
"""
import json
import sys


def main() -> int:
    with open(sys.argv[1]) as fh:
        spec = json.load(fh)
    if spec.get("type") != "linear":
        print("reference_predictor: only linear specs supported", file=sys.stderr)
        return 1
    weights = [float(w) for w in spec["weights"]]
    intercept = float(spec["intercept"])

    stdin = sys.stdin
    stdout = sys.stdout
    for header in stdin:
        header = header.strip()
        if not header:
            continue
        fields = header.split()
        if len(fields) != 2 or fields[0] != "predict":
            print("reference_predictor: bad header: %r" % header, file=sys.stderr)
            return 2
        count = int(fields[1])
        for _ in range(count):
            line = stdin.readline()
            if not line:
                print("reference_predictor: truncated batch", file=sys.stderr)
                return 2
            values = [float(tok) for tok in line.strip().split(",")]
            if len(values) != len(weights):
                print("reference_predictor: row width mismatch", file=sys.stderr)
                return 2
            acc = intercept
            for w, x in zip(weights, values):
                acc += w * x
            stdout.write(repr(acc) + "\n")
        stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())
