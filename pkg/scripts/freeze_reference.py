"""Regenerate src/cpforce/data/reference.json by brute-force quadrature.

The coefficient integrals f2 and f3 are rebuilt here from the Fresnel
reflection amplitudes r_s and r_p with scipy.integrate.quad, sharing no code
with the package.
"""

import json
import math
from pathlib import Path

from scipy.integrate import quad

OUT = Path(__file__).resolve().parents[1] / "src" / "cpforce" / "data" / "reference.json"


def traveling_weight(t, eps):
    # 2 T_par + T_perp, with t the cosine of the vacuum angle
    root = math.sqrt(eps - 1 + t * t)
    rs = (t - root) / (t + root)
    rp = (eps * t - root) / (eps * t + root)
    return 0.5 * (rs - t * t * rp) + 0.5 * (1 - t * t) * rp


def evanescent_weight(t, eps):
    # 2 A_par + A_perp on the evanescent branch
    root = math.sqrt(eps - 1)
    u = math.sqrt(1 - t * t)
    den = (eps * eps - 1) * t * t + 1
    par = root * ((2 * eps + 1) * (eps - 1) * t * t + 1) / den * t * u
    perp = eps * root * ((eps - 1) * t * t + 1) / den * t * u
    return par + perp


def f2(eps):
    return 2 * quad(lambda t: t * t * traveling_weight(t, eps), 0, 1, epsabs=1e-14, epsrel=1e-12, limit=200)[0]


def f3(eps):
    val = quad(lambda t: t * t * evanescent_weight(t, eps), 0, 1, epsabs=1e-14, epsrel=1e-12, limit=200)[0]
    return 2 * (eps - 1) * val


def main():
    data = {"version": 1, "coeff_f": {}}
    for eps in (2.0, 4.0, 10.0):
        data["coeff_f"][f"2@{eps:g}"] = f2(eps)
        data["coeff_f"][f"3@{eps:g}"] = f3(eps)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
