"""Solve the exported relaxations with independent solvers.

SDPA files go to cvxpy (Clarabel), LP files to scipy's HiGHS. Results are
written to expected.json, which the cli test suite compares against.
Run from this directory: python3 solve_external.py
"""
import json
import re
import sys

import cvxpy as cp
import numpy as np
from scipy.optimize import linprog


def read_sdpa(path):
    lines = [l for l in open(path) if l.strip() and not l.startswith(('"', '*'))]
    m = int(lines[0].split()[0])
    sizes = [int(t) for t in lines[2].split()]
    c = np.array([float(t) for t in lines[3].split()])
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for line in lines[4:]:
        mat, blk, i, j, v = line.split()
        a = mats[int(mat)][int(blk) - 1]
        a[int(i) - 1, int(j) - 1] = float(v)
        a[int(j) - 1, int(i) - 1] = float(v)
    return sizes, c, mats


def solve_sdpa(path):
    sizes, c, mats = read_sdpa(path)
    ys = []
    cons = []
    for s in sizes:
        if s > 0:
            y = cp.Variable((s, s), symmetric=True)
            cons.append(y >> 0)
        else:
            y = cp.Variable(-s)
            cons.append(y >= 0)
        ys.append(y)

    def inner(a, y, s):
        return cp.trace(a @ y) if s > 0 else np.diag(a) @ y

    for i in range(1, len(mats)):
        cons.append(sum(inner(mats[i][b], ys[b], s) for b, s in enumerate(sizes)) == c[i - 1])
    obj = sum(inner(mats[0][b], ys[b], s) for b, s in enumerate(sizes))
    prob = cp.Problem(cp.Maximize(obj), cons)
    prob.solve(solver=cp.CLARABEL, tol_gap_abs=1e-10, tol_gap_rel=1e-10, tol_feas=1e-10)
    return prob.value


def parse_expr(text, index):
    coeffs = {}
    sign, num = 1.0, 1.0
    for tok in text.split():
        if tok in "+-":
            sign, num = (1.0 if tok == "+" else -1.0), 1.0
        elif re.fullmatch(r"[-+]?[0-9.]+([eE][-+]?[0-9]+)?", tok):
            num = float(tok)
        else:
            j = index.setdefault(tok, len(index))
            coeffs[j] = coeffs.get(j, 0.0) + sign * num
            sign, num = 1.0, 1.0
    return coeffs


def solve_lp(path):
    text = open(path).read()
    obj_part = text.split("Subject To")[0].split(":", 1)[1]
    cons_part = text.split("Subject To")[1].split("Bounds")[0]
    bounds_part = text.split("Bounds")[1].split("End")[0]
    index = {}
    obj = parse_expr(obj_part, index)
    rows = []
    for line in cons_part.strip().splitlines():
        if ":" in line:
            rows.append(line.split(":", 1)[1])
        else:
            rows[-1] += " " + line
    parsed = []
    for r in rows:
        op = "<=" if "<=" in r else (">=" if ">=" in r else "=")
        lhs, rhs = r.split(op)
        parsed.append((parse_expr(lhs, index), op, float(rhs)))
    n = len(index)
    lo = [None] * n
    hi = [None] * n
    for line in bounds_part.strip().splitlines():
        t = line.split()
        if len(t) == 5:
            j = index[t[2]]
            lo[j], hi[j] = float(t[0]), float(t[4])
        elif len(t) == 3 and t[1] == ">=":
            lo[index[t[0]]] = float(t[2])
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for coeffs, op, rhs in parsed:
        row = np.zeros(n)
        for j, v in coeffs.items():
            row[j] = v
        if op == "<=":
            a_ub.append(row); b_ub.append(rhs)
        elif op == ">=":
            a_ub.append(-row); b_ub.append(-rhs)
        else:
            a_eq.append(row); b_eq.append(rhs)
    cvec = np.zeros(n)
    for j, v in obj.items():
        cvec[j] = -v
    res = linprog(cvec, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq or None, b_eq=b_eq or None,
                  bounds=list(zip(lo, hi)), method="highs")
    assert res.status == 0, res.message
    return -res.fun


if __name__ == "__main__":
    out = {
        "solvers": {"sdp": f"cvxpy {cp.__version__} / CLARABEL", "lp": "scipy HiGHS"},
        "triangle_k1_sdp": solve_sdpa("triangle_k1.dat-s"),
        "triangle_k1_lp": solve_lp("triangle_k1.lp"),
        "karate_k3_sdp": solve_sdpa("karate_k3.dat-s"),
        "karate_k3_lp": solve_lp("karate_k3.lp"),
    }
    json.dump(out, open("expected.json", "w"), indent=2)
    json.dump(out, sys.stdout, indent=2)
    print()
