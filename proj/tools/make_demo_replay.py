#!/usr/bin/env python3
# Copyright 2026 The Haptibot Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes data/demo_two_hands.jsonl: 10 s of two hands at 50 Hz.

The left hand circles the left half of the mat, the right hand sweeps a figure eight on the
right half and is untracked between 6.0 s and 6.8 s.
"""
import json
import math
import sys

RATE = 50
DURATION = 10.0


def frame(t, hand, pos, tracked=True):
    out = {"t": round(t, 6), "hand": hand, "tracked": tracked}
    if tracked:
        out["pos"] = [round(c, 4) for c in pos]
    return out


def main(path):
    lines = []
    for k in range(int(DURATION * RATE)):
        t = k / RATE
        left = (0.17 + 0.07 * math.cos(0.8 * t), 0.28 + 0.10 * math.sin(0.8 * t), 0.16 + 0.03 * math.sin(2.0 * t))
        right = (0.40 + 0.06 * math.sin(0.6 * t), 0.28 + 0.12 * math.sin(1.2 * t), 0.18)
        lines.append(frame(t, "left", left))
        lines.append(frame(t + 0.004, "right", right, not 6.0 <= t < 6.8))
    with open(path, "w") as f:
        for line in lines:
            f.write(json.dumps(line, separators=(",", ":")) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/demo_two_hands.jsonl")
