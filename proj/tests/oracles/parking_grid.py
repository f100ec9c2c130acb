"""Dense duration-grid search for the parking OCP (x0=(0,1,0) -> origin, T=8,
at most 4 segments, cost |u|^2 + 0.5|u|_2, five-trim library).

Every canonical sequence is scanned on a grid over its free durations; the
best grid cells are refined with a bounded least-squares root solve and the
cheapest point meeting the endpoint to 1e-9 is reported. Independent of the
C++ code: flows are written out directly from the vector field.
"""
import itertools
import math

import numpy as np
from scipy.optimize import least_squares

TRIMS = {1: (0.0, 0.0), 2: (1.5, 0.0), 3: (-0.25, -1.0), 4: (-0.25, 1.0), 5: (0.0, 1.0)}
T = 8.0
X0 = np.array([0.0, 1.0, 0.0])


def rate(u):
    return u[0] ** 2 + u[1] ** 2 + 0.5 * math.hypot(*u)


def flow(x, u, t):
    x1, x2, x3 = x
    u1, u2 = u
    if u2 == 0.0:
        return x1 + u1 * t * np.cos(x3), x2 + u1 * t * np.sin(x3), x3 + 0.0 * t
    return (x1 + u1 / u2 * (np.sin(x3 + u2 * t) - np.sin(x3)),
            x2 + u1 / u2 * (np.cos(x3) - np.cos(x3 + u2 * t)),
            x3 + u2 * t)


def residual(seq, taus):
    x = (X0[0], X0[1], X0[2])
    for i, t in zip(seq, taus):
        x = flow(x, TRIMS[i], t)
    return np.stack([x[0], x[1], 2.0 * np.sin(0.5 * x[2])])


def sequences():
    seen = set()
    for raw in itertools.product(sorted(TRIMS), repeat=4):
        canon = [k for k, _ in itertools.groupby(raw)]
        if 1 in canon[:-1]:
            continue
        if tuple(canon) not in seen:
            seen.add(tuple(canon))
            yield canon


def solve(seq, h=0.04, keep=40):
    moving = [i for i in seq if i != 1]
    m = len(moving)
    has_rest = seq[-1] == 1
    free = m if has_rest else m - 1
    if m == 0:
        return None
    axes = np.arange(0.0, T + 1e-12, h)
    if free:
        grids = np.meshgrid(*([axes] * free), indexing="ij")
        pts = [g.ravel() for g in grids]
        ok = sum(pts) <= T + 1e-12
        pts = [p[ok] for p in pts]
    else:
        pts = []
    if not has_rest:
        pts.append(T - sum(pts) if pts else np.full(1, T))
    res = residual(moving, pts)
    norm = np.linalg.norm(res, axis=0)
    order = np.argsort(norm)[:keep]

    best = None
    for idx in order:
        start = np.array([p[idx] for p in pts[:free]]) if free else np.zeros(0)

        def full(z):
            taus = list(z)
            if not has_rest:
                taus.append(T - sum(z))
            return taus

        def fun(z):
            taus = full(z)
            pen = [0.0] if has_rest else [min(0.0, taus[-1])]
            if has_rest:
                pen = [max(0.0, sum(taus) - T)]
            return np.concatenate([residual(moving, taus), pen])

        if free:
            sol = least_squares(fun, start, bounds=(0.0, T), xtol=1e-15, ftol=1e-15, gtol=1e-15)
            z = sol.x
        else:
            z = start
        taus = full(z)
        if min(taus) < -1e-12 or np.max(np.abs(fun(z))) > 1e-9:
            continue
        cost = sum(t * rate(TRIMS[i]) for i, t in zip(moving, taus))
        if best is None or cost < best[0]:
            best = (cost, taus)
    return best


def main():
    results = []
    for seq in sequences():
        r = solve(seq)
        if r is not None:
            results.append((r[0], seq, r[1]))
    results.sort(key=lambda r: r[0])
    for cost, seq, taus in results[:8]:
        print(f"{cost:.10f}  {tuple(seq)}  {np.round(taus, 6)}")
    print(f"feasible sequences: {len(results)}")


if __name__ == "__main__":
    main()
