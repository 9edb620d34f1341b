#!/usr/bin/env python3
"""Regenerate the reference plans shipped under scenarios/.

Both plans are Bezier paths resampled to a smoothed trapezoidal speed
profile, then differentiated to the inputs the closed-loop controllers
track.  The script is deterministic; rerunning it reproduces the CSVs
byte for byte.
"""

import os

import numpy as np

OUT_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "scenarios")


def bezier(ctrl, s):
    pts = np.asarray(ctrl, float)
    while len(pts) > 1:
        pts = pts[:-1] * (1 - s) + pts[1:] * s
    return pts[0]


def trapezoid_profile(nsteps, ramp):
    w = np.ones(nsteps)
    for i in range(ramp):
        w[i] = w[nsteps - 1 - i] = 0.5 * (1 - np.cos(np.pi * (i + 0.5) / ramp))
    s = np.concatenate([[0.0], np.cumsum(w)])
    return s / s[-1]


def resample(ctrl, horizon, settle, ramp, samples):
    """Arc-length parameterized path positions for t = 0..horizon."""
    ss = trapezoid_profile(settle, ramp)
    uu = np.linspace(0, 1, samples)
    px = np.array([bezier(ctrl, q) for q in uu])
    al = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(px, axis=0), axis=1))])
    al /= al[-1]
    pts = np.zeros((horizon + 1, 2))
    for t in range(settle + 1):
        q = np.interp(ss[t], al, uu)
        pts[t] = bezier(ctrl, q)
    pts[settle:] = pts[settle]
    return pts


def write_rows(path, header, rows):
    lines = [header]
    for row in rows:
        lines.append(",".join("%d" % row[0:1][0] if i == 0 else "%.12g" % v
                              for i, v in enumerate(row)))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print("wrote", path)


def gen_double_integrator():
    dt, m = 0.01, 0.1
    horizon, settle = 100, 80
    ctrl = [(0.4, 0.4), (1.9, 0.1), (3.4, 0.55), (4.75, 1.6), (4.9, 3.2)]
    pts = resample(ctrl, horizon, settle, ramp=14, samples=8001)

    v = np.zeros((horizon + 1, 2))
    u = np.zeros((horizon + 1, 2))
    for t in range(horizon):
        v[t] = (pts[t + 1] - pts[t]) / dt
    for t in range(horizon):
        u[t] = m * (v[t + 1] - v[t]) / dt

    rows = [(t, pts[t, 0], pts[t, 1], v[t, 0], v[t, 1], u[t, 0], u[t, 1])
            for t in range(horizon + 1)]
    write_rows(os.path.join(OUT_DIR, "di_ref.csv"), "t,px,py,vx,vy,ux,uy", rows)


def gen_unicycle():
    dt = 0.05
    horizon, settle = 36, 32
    goal1 = np.array([-2.3, 2.5])
    start = np.array([0.0, 0.2])
    unit = (start - goal1) / np.linalg.norm(start - goal1)
    entry = goal1 + 0.48 * unit
    ctrl = [(0, 0.2), (0, 0.85), (entry[0] + 0.05, entry[1] - 0.95), tuple(entry)]
    pts = resample(ctrl, horizon, settle, ramp=5, samples=4001)

    th = np.zeros(horizon + 1)
    v = np.zeros(horizon + 1)
    om = np.zeros(horizon + 1)
    prev = np.pi / 2
    for t in range(horizon):
        d = pts[t + 1] - pts[t]
        n = np.linalg.norm(d)
        if n > 1e-9:
            th[t] = np.arctan2(d[1], d[0])
            v[t] = n / dt
            prev = th[t]
        else:
            th[t] = prev
            v[t] = 0.0
    th[horizon] = th[horizon - 1]
    for t in range(horizon):
        om[t] = (th[t + 1] - th[t]) / dt

    rows = [(t, pts[t, 0], pts[t, 1], th[t], v[t], om[t]) for t in range(horizon + 1)]
    write_rows(os.path.join(OUT_DIR, "uni_ref.csv"), "t,px,py,theta,v,omega", rows)


if __name__ == "__main__":
    gen_double_integrator()
    gen_unicycle()
