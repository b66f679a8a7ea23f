#!/usr/bin/env python3
"""Materialize MovieLens 100K (u.data plus the canonical u1-u5, ua, ub splits).

The ratings are taken from the official GroupLens archive when reachable.
Otherwise the copy bundled in the RecBole wheel is used (same rows, same
order, with a typed header line). Splits are regenerated with the same
rules as the dataset's own mku.sh / allbut.pl scripts.

Usage: scripts/fetch_ml100k.py [OUT_DIR]   (default: data/ml-100k)
"""
import io
import os
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS_URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
RECBOLE_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS_URL, timeout=30) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode()


def from_recbole():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q",
             "-d", tmp, "recbole==1.2.1"],
            check=True,
        )
        wheel = next(f for f in os.listdir(tmp) if f.endswith(".whl"))
        text = zipfile.ZipFile(os.path.join(tmp, wheel)).read(RECBOLE_MEMBER)
    lines = text.decode().splitlines()
    assert lines[0].startswith("user_id:token")
    return "\n".join(lines[1:]) + "\n"


def sort_key(line):
    user, item = line.split("\t")[:2]
    return int(user), int(item)


def write(path, lines):
    with open(path, "w") as f:
        f.writelines(line + "\n" for line in lines)


def allbut(rows, start, stop, max_test):
    counts, test, base = {}, [], []
    for row in rows:
        user = row.split("\t")[0]
        counts[user] = counts.get(user, 0) + 1
        if len(test) < max_test and start <= counts[user] <= stop:
            test.append(row)
        else:
            base.append(row)
    return base, test


def main():
    out = sys.argv[1] if len(sys.argv) > 1 else "data/ml-100k"
    os.makedirs(out, exist_ok=True)
    try:
        data = from_grouplens()
    except Exception as err:  # noqa: BLE001
        print(f"GroupLens download failed ({err}); using RecBole copy", file=sys.stderr)
        data = from_recbole()
    rows = [l for l in data.splitlines() if l.strip()]
    assert len(rows) == 100000, len(rows)
    assert rows[0] == "196\t242\t3\t881250949", rows[0]
    write(os.path.join(out, "u.data"), rows)

    for i in range(1, 6):
        lo, hi = (i - 1) * 20000, i * 20000
        write(os.path.join(out, f"u{i}.test"), sorted(rows[lo:hi], key=sort_key))
        write(os.path.join(out, f"u{i}.base"), sorted(rows[:lo] + rows[hi:], key=sort_key))
    for name, start, stop in (("ua", 1, 10), ("ub", 11, 20)):
        base, test = allbut(rows, start, stop, 100000)
        write(os.path.join(out, f"{name}.base"), sorted(base, key=sort_key))
        write(os.path.join(out, f"{name}.test"), sorted(test, key=sort_key))
    print(f"wrote u.data and 7 splits to {out}")


if __name__ == "__main__":
    main()
