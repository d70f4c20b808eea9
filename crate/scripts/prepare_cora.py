#!/usr/bin/env python3
"""Convert the LINQS Cora release (cora.cites / cora.content) into the
edge-list and feature-matrix text files read by `llp`.

Usage: prepare_cora.py <dir with cora.cites and cora.content> <out dir>

The PGL wheel on PyPI ships both files under pgl/data/cora/.
"""
import os
import sys


def main():
    src, out = sys.argv[1], sys.argv[2]
    ids, rows = {}, []
    with open(os.path.join(src, "cora.content")) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            ids[parts[0]] = len(ids)
            rows.append(parts[1:-1])
    edges = set()
    with open(os.path.join(src, "cora.cites")) as f:
        for line in f:
            parts = line.split()
            if len(parts) != 2:
                continue
            u, v = ids[parts[0]], ids[parts[1]]
            if u == v:
                continue
            edges.add((min(u, v), max(u, v)))
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "cora.edges"), "w") as f:
        f.write("# Cora citation graph, undirected, zero-based node ids\n")
        for u, v in sorted(edges):
            f.write(f"{u} {v}\n")
    with open(os.path.join(out, "cora.features"), "w") as f:
        f.write(f"{len(rows)} {len(rows[0])}\n")
        for r in rows:
            f.write(" ".join(r) + "\n")
    print(f"nodes={len(rows)} edges={len(edges)} features={len(rows[0])}")


if __name__ == "__main__":
    main()
