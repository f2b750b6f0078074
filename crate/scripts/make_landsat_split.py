"""Rebuild UCI-format Statlog (Landsat Satellite) train/test files.

The official sat.trn / sat.tst files are not always reachable. The KEEL
repository ships the same 6435 instances as one file (satimage.dat). This
script splits that file into 4435 training and 2000 test rows using the
official per-class counts and a fixed seed, and writes them in the UCI
layout: 36 space-separated integers followed by the class label.

    python3 scripts/make_landsat_split.py satimage.dat data/landsat
"""
import random
import sys
from pathlib import Path

TRAIN_COUNTS = {1: 1072, 2: 479, 3: 961, 4: 415, 5: 470, 7: 1038}


def main(src, out_dir):
    rows = []
    for line in Path(src).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("@"):
            continue
        fields = [int(v) for v in line.replace(",", " ").split()]
        assert len(fields) == 37, line
        rows.append(fields)
    assert len(rows) == 6435, len(rows)

    rng = random.Random(20200901)
    by_class = {}
    for i, r in enumerate(rows):
        by_class.setdefault(r[-1], []).append(i)
    train = set()
    for label, idx in sorted(by_class.items()):
        rng.shuffle(idx)
        train.update(idx[: TRAIN_COUNTS[label]])

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "sat.trn", "w") as trn, open(out / "sat.tst", "w") as tst:
        for i, r in enumerate(rows):
            (trn if i in train else tst).write(" ".join(map(str, r)) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
