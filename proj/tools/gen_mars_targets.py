#!/usr/bin/env python3
"""Generate heliocentric Mars target states for the Earth-Mars scenarios.

Uses the JPL approximate Keplerian elements (Standish, "Keplerian Elements for
Approximate Positions of the Major Planets", table valid 1800-2050 AD) in the
J2000 ecliptic frame. Accuracy is of order an arcminute, far below the size of
the reachable sets these targets are tested against.

Departure epoch: 2007-04-10 12:00 TDB (JD 2454201.0); this epoch places the
Earth-Moon barycenter within ~1e4 km of the scenario departure state.
"""
import argparse
import math
import os

AU_KM = 149597870.7
MU_SUN = 1.32712440018e11
JD_J2000 = 2451545.0
JD_DEPARTURE = 2454201.0

# a [AU], e, I [deg], L [deg], long.peri [deg], long.node [deg]; value and rate per century
MARS = [(1.52371034, 0.00001847), (0.09339410, 0.00007882), (1.84969142, -0.00813131),
        (-4.55343205, 19140.30268499), (-23.94362959, 0.44441088), (49.55953891, -0.29257343)]
EM_BARY = [(1.00000261, 0.00000562), (0.01671123, -0.00004392), (-0.00001531, -0.01294668),
           (100.46457166, 35999.37244981), (102.93768193, 0.32327364), (0.0, 0.0)]


def position(elements, jd):
    t = (jd - JD_J2000) / 36525.0
    a, e, inc, mean_lon, peri, node = (v + r * t for v, r in elements)
    a *= AU_KM
    inc, mean_lon, peri, node = map(math.radians, (inc, mean_lon, peri, node))
    argp = peri - node
    m = math.remainder(mean_lon - peri, 2.0 * math.pi)
    ecc_anom = m + e * math.sin(m)
    for _ in range(50):
        d = (ecc_anom - e * math.sin(ecc_anom) - m) / (1.0 - e * math.cos(ecc_anom))
        ecc_anom -= d
        if abs(d) < 1e-15:
            break
    xp = a * (math.cos(ecc_anom) - e)
    yp = a * math.sqrt(1.0 - e * e) * math.sin(ecc_anom)
    co, so = math.cos(argp), math.sin(argp)
    cn, sn = math.cos(node), math.sin(node)
    ci, si = math.cos(inc), math.sin(inc)
    x = (co * cn - so * sn * ci) * xp + (-so * cn - co * sn * ci) * yp
    y = (co * sn + so * cn * ci) * xp + (-so * sn + co * cn * ci) * yp
    z = (so * si) * xp + (co * si) * yp
    return (x, y, z)


def state(elements, jd):
    # velocity by central difference of the element model (h = 60 s)
    h = 60.0 / 86400.0
    p = position(elements, jd)
    pp = position(elements, jd + h)
    pm = position(elements, jd - h)
    v = tuple((b - c) / (2.0 * 60.0) for b, c in zip(pp, pm))
    return p + v


HEADER = """# Mars heliocentric state, J2000 ecliptic, km and km/s
# source: JPL approximate Keplerian elements (Standish, 1800-2050 table)
# departure epoch JD 2454201.0 (2007-04-10 12:00 TDB); t_days counted from departure
# generated by tools/gen_mars_targets.py
"""


def fmt(v):
    return repr(float(v))


def write(path, rows):
    with open(path, "w") as f:
        f.write(HEADER)
        f.write("t_days,x,y,z,vx,vy,vz\n")
        for days, s in rows:
            f.write(",".join([fmt(days)] + [fmt(c) for c in s]) + "\n")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "targets"))
    args = ap.parse_args()
    os.makedirs(args.out, exist_ok=True)

    earth = state(EM_BARY, JD_DEPARTURE)
    print("Earth-Moon barycenter at departure:", earth)

    for days in (100, 150, 200, 250, 300, 307):
        write(os.path.join(args.out, f"mars_{days}d.csv"), [(days, state(MARS, JD_DEPARTURE + days))])
    write(os.path.join(args.out, "mars_daily.csv"),
          [(d, state(MARS, JD_DEPARTURE + d)) for d in range(0, 401)])


if __name__ == "__main__":
    main()
