#!/usr/bin/env python3
"""Stand-in for the dl predictor: `predict --model M --in I --out O`.

The model file holds one number, returned as label_norm_hat for every
instance. A missing model file exits with status 3.
"""
import argparse
import sys


def main() -> int:
    p = argparse.ArgumentParser()
    p.add_argument("command", choices=["predict"])
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    a = p.parse_args()
    try:
        with open(a.model) as f:
            value = float(f.read().strip())
    except OSError as e:
        print(f"cannot read model: {e}", file=sys.stderr)
        return 3
    rows = 0
    with open(a.inp) as f:
        for line in f:
            if not line.strip():
                continue
            if len(line.split(",")) != 1001:
                print(f"instance row {rows} has the wrong shape", file=sys.stderr)
                return 4
            rows += 1
    with open(a.out, "w") as f:
        f.write("index,label_norm_hat\n")
        for i in range(rows):
            f.write(f"{i},{value!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
