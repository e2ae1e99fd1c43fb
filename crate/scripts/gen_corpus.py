#!/usr/bin/env python3
"""Writes the PD and chord-diagram corpus into corpus/."""

import os
import sys

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "corpus")


def braid_closure(strands, word):
    """PD code of the closure of a braid word (k > 0 for s_k, k < 0 for its inverse).

    Strands run bottom to top. A crossing with incoming arcs x (left) and
    y (right) and outgoing arcs x2 (top right) and y2 (top left) is written
    X[x,y,x2,y2] for s_k and X[y,x2,y2,x] for its inverse.
    """
    labels = list(range(1, strands + 1))
    initial = list(labels)
    nxt = strands + 1
    crossings = []
    for g in word:
        k = abs(g) - 1
        x, y = labels[k], labels[k + 1]
        x2, y2 = nxt, nxt + 1
        nxt += 2
        crossings.append([x, y, x2, y2] if g > 0 else [y, x2, y2, x])
        labels[k], labels[k + 1] = y2, x2
    close = {labels[p]: initial[p] for p in range(strands)}
    crossings = [[close.get(a, a) for a in c] for c in crossings]
    used = sorted({a for c in crossings for a in c})
    renum = {a: i + 1 for i, a in enumerate(used)}
    return [[renum[a] for a in c] for c in crossings]


def pd_text(crossings):
    return "PD[" + ",".join("X[" + ",".join(map(str, c)) + "]" for c in crossings) + "]\n"


def one_monochord(k):
    """One circle z with a single monochord e and k circles w_j, each joined
    to z by two bichords separated by e."""
    z = ["es"] + [f"p{j}" for j in range(1, k + 1)] + ["et"] + [f"q{j}" for j in range(k, 0, -1)]
    lines = ["circle z: " + " ".join(z)]
    for j in range(1, k + 1):
        lines.append(f"circle w{j}: P{j} Q{j}")
    chords = [("es", "et")]
    for j in range(1, k + 1):
        chords += [(f"p{j}", f"P{j}"), (f"q{j}", f"Q{j}")]
    lines += [f"chord {i}: {a} {b}" for i, (a, b) in enumerate(chords, 1)]
    return "\n".join(lines) + "\n"


def super_simple(n):
    """Two circles with n monochords each (half-disks e_i on z1, f_i on z2)
    joined by bichords a_i, b_i; every half-disk holds two bichord ends."""
    z1 = []
    for i in range(1, n + 1):
        prev = n if i == 1 else i - 1
        z1 += [f"e{i}s", f"b{prev}u", f"a{i}u", f"e{i}t"]
    z2 = []
    for i in range(1, n + 1):
        z2 += [f"f{i}s", f"a{i}v", f"b{i}v", f"f{i}t"]
    z2.reverse()
    lines = ["circle z1: " + " ".join(z1), "circle z2: " + " ".join(z2)]
    chords = []
    for i in range(1, n + 1):
        chords += [(f"e{i}s", f"e{i}t"), (f"f{i}s", f"f{i}t"), (f"a{i}u", f"a{i}v"), (f"b{i}u", f"b{i}v")]
    lines += [f"chord {i}: {a} {b}" for i, (a, b) in enumerate(chords, 1)]
    return "\n".join(lines) + "\n"


def main():
    os.makedirs(OUT, exist_ok=True)
    pds = {
        "unknot": [],
        "kink_pos": [[1, 2, 2, 1]],
        "kink_neg": [[2, 2, 1, 1]],
        "hopf_pos": braid_closure(2, [1, 1]),
        "hopf_neg": braid_closure(2, [-1, -1]),
        "trefoil_right": [[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]],
        "trefoil_left": braid_closure(2, [-1, -1, -1]),
        "figure_eight": braid_closure(3, [1, -2, 1, -2]),
    }
    for q in range(2, 8):
        pds[f"t2_{q}"] = braid_closure(2, [1] * q)
    for q in (3, 4, 5):
        pds[f"t3_{q}"] = braid_closure(3, [1, 2] * q)
    for name, cr in pds.items():
        with open(os.path.join(OUT, name + ".pd"), "w") as f:
            f.write(pd_text(cr))
    for k in (2, 3, 4):
        with open(os.path.join(OUT, f"one_monochord_k{k}.cd"), "w") as f:
            f.write(one_monochord(k))
    for n in (2, 3, 4):
        with open(os.path.join(OUT, f"super_simple_n{n}.cd"), "w") as f:
            f.write(super_simple(n))
    return 0


if __name__ == "__main__":
    sys.exit(main())
