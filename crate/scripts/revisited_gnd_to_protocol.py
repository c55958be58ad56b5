#!/usr/bin/env python3
"""Convert revisited Oxford/Paris ground truth (gnd_*.pkl) to protocol JSON.

    python scripts/revisited_gnd_to_protocol.py gnd_roxford5k.pkl out/ --name roxford5k

Writes `<name>_easy.json`, `<name>_medium.json` and `<name>_hard.json`:

    easy    positives = easy          junk = junk + hard
    medium  positives = easy + hard   junk = junk
    hard    positives = hard          junk = junk + easy

Query images are cropped, so query ids get a prefix (default `query_`) to
keep them apart from the uncropped database image of the same name. Query
descriptors must be extracted under the prefixed ids.
"""

import argparse
import json
import os
import pickle
import sys

SETUPS = {
    "easy": (("easy",), ("junk", "hard")),
    "medium": (("easy", "hard"), ("junk",)),
    "hard": (("hard",), ("junk", "easy")),
}


def convert(gnd, setup, prefix):
    pos_keys, junk_keys = SETUPS[setup]
    imlist = list(gnd["imlist"])
    queries = []
    for name, g in zip(gnd["qimlist"], gnd["gnd"]):
        positives = sorted({imlist[i] for k in pos_keys for i in g.get(k, [])})
        taken = set(positives)
        junk = sorted({imlist[i] for k in junk_keys for i in g.get(k, [])} - taken)
        queries.append({"id": prefix + name, "positives": positives, "junk": junk})
    return {"database": imlist, "queries": queries}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("gnd", help="gnd_roxford5k.pkl or gnd_rparis6k.pkl")
    ap.add_argument("out_dir")
    ap.add_argument("--name", help="file name stem (default: from the pickle name)")
    ap.add_argument("--prefix", default="query_")
    ap.add_argument("--setup", choices=sorted(SETUPS), action="append",
                    help="repeatable; default all three")
    args = ap.parse_args(argv)

    with open(args.gnd, "rb") as f:
        gnd = pickle.load(f)
    missing = {"imlist", "qimlist", "gnd"} - set(gnd)
    if missing:
        sys.exit(f"{args.gnd}: missing keys {sorted(missing)}")
    if len(gnd["qimlist"]) != len(gnd["gnd"]):
        sys.exit(f"{args.gnd}: {len(gnd['qimlist'])} queries but {len(gnd['gnd'])} ground-truth entries")

    name = args.name or os.path.splitext(os.path.basename(args.gnd))[0].removeprefix("gnd_")
    os.makedirs(args.out_dir, exist_ok=True)
    for setup in args.setup or ["easy", "medium", "hard"]:
        path = os.path.join(args.out_dir, f"{name}_{setup}.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(convert(gnd, setup, args.prefix), f, indent=1)
            f.write("\n")
        print(path)


if __name__ == "__main__":
    main()
