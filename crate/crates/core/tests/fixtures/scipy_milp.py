"""External backend for tests: reads fixed-format MPS, solves with scipy's HiGHS.

usage: scipy_milp.py MPS SOLFILE TIMELIMIT GAP
"""
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def read_mps(path):
    rows, cols, coef, rhs, bounds = {}, {}, {}, {}, {}
    integer, maximize, section, in_int = set(), False, None, False
    for line in open(path):
        if line.startswith("*") or not line.strip():
            continue
        if not line[0].isspace():
            section = line.split()[0]
            continue
        f = line.split()
        if section == "OBJSENSE":
            maximize = f[0] == "MAX"
        elif section == "ROWS":
            rows[f[1]] = f[0]
        elif section == "COLUMNS":
            if len(f) > 1 and f[1] == "'MARKER'":
                in_int = f[2] == "'INTORG'"
                continue
            j = cols.setdefault(f[0], len(cols))
            if in_int:
                integer.add(j)
            for r, v in zip(f[1::2], f[2::2]):
                coef[(r, j)] = float(v)
        elif section == "RHS":
            for r, v in zip(f[1::2], f[2::2]):
                rhs[r] = float(v)
        elif section == "BOUNDS":
            kind, j = f[0], cols[f[2]]
            lo, hi = bounds.get(j, (0.0, np.inf))
            v = float(f[3]) if len(f) > 3 else None
            if kind == "UP":
                hi = v
            elif kind == "LO":
                lo = v
            elif kind == "FX":
                lo = hi = v
            elif kind == "FR":
                lo, hi = -np.inf, np.inf
            elif kind == "MI":
                lo = -np.inf
            bounds[j] = (lo, hi)
    n = len(cols)
    c = np.zeros(n)
    cons = [r for r, k in rows.items() if k != "N"]
    obj = next(r for r, k in rows.items() if k == "N")
    a = np.zeros((len(cons), n))
    index = {r: i for i, r in enumerate(cons)}
    for (r, j), v in coef.items():
        if r == obj:
            c[j] = v
        else:
            a[index[r], j] = v
    lo = np.full(len(cons), -np.inf)
    hi = np.full(len(cons), np.inf)
    for r, i in index.items():
        b = rhs.get(r, 0.0)
        if rows[r] in ("L", "E"):
            hi[i] = b
        if rows[r] in ("G", "E"):
            lo[i] = b
    lb = np.array([bounds.get(j, (0.0, np.inf))[0] for j in range(n)])
    ub = np.array([bounds.get(j, (0.0, np.inf))[1] for j in range(n)])
    integrality = np.array([1 if j in integer else 0 for j in range(n)])
    return cols, c, a, lo, hi, lb, ub, integrality, maximize


def main():
    mps, solfile, timelimit, gap = sys.argv[1], sys.argv[2], float(sys.argv[3]), float(sys.argv[4])
    cols, c, a, lo, hi, lb, ub, integrality, maximize = read_mps(mps)
    sign = -1.0 if maximize else 1.0
    cons = [LinearConstraint(a, lo, hi)] if len(lo) else []
    res = milp(sign * c, constraints=cons, integrality=integrality, bounds=Bounds(lb, ub),
               options={"time_limit": timelimit, "mip_rel_gap": gap})
    with open(solfile, "w") as out:
        if res.x is None:
            out.write("objective 0\nstatus infeasible\n" if res.status == 2 else "")
            return
        out.write(f"objective {float(sign * res.fun)!r}\n")
        out.write("status optimal\n" if res.status == 0 else "status feasible\n")
        for name, j in cols.items():
            out.write(f"{name} {float(res.x[j])!r}\n")


if __name__ == "__main__":
    main()
