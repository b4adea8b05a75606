"""Freeze the eigenvalue references used by validation and the acceptance tests.

Run once; the CSVs are committed.  Only the oracle module is used here, never
the corrector or theta pipelines.  Both the Fourier and the finite-difference
routes are evaluated and their disagreement is stored next to each value.
"""

import csv
import os
import sys

import numpy as np

from effham import oracles

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "effham", "fixtures")

POTENTIALS = {
    "zero": [0.0],
    "cos1": [1.0],
    "cos1_cos2": [1.0, 0.3],
}


def main():
    os.makedirs(OUT, exist_ok=True)
    rows = []
    for name, amps in POTENTIALS.items():
        V = oracles.cosine_potential(amps, 1.0)
        e_hill = oracles.hill_ground_energy(amps, 1.0, nmodes=64)
        e_fd = oracles.fd_ground_energy(V, 1.0, n=2048)
        rows.append((name, "E0", e_hill, abs(e_hill - e_fd)))
        for label, lam in (("mu_lam0_plus_1", -e_hill + 1.0), ("mu_lam_2", 2.0), ("mu_lam0_plus_0.1", -e_hill + 0.1)):
            mu = oracles.hill_mu(amps, 1.0, lam)
            lam_fd = oracles.fd_lambda(V, 1.0, mu, n=1024)
            rows.append((name, label, mu, abs(lam_fd - lam)))
        lam = -e_hill + 1.0
        x = np.linspace(0.0, 1.0, 257)
        fmax = oracles.hill_logderivative(amps, 1.0, lam, x, +1)
        fmin = oracles.hill_logderivative(amps, 1.0, lam, x, -1)
        mu = oracles.hill_mu(amps, 1.0, lam)
        xf, ffd = oracles.fd_logderivative(V, 1.0, mu, n=2048)
        dev = float(np.max(np.abs(np.interp(xf, x, fmax) - ffd)))
        rows.append((name, "profile_fd_deviation", dev, 0.0))
        with open(os.path.join(OUT, f"hopf_cole_profile_{name}.csv"), "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["x", "f_max", "f_min", "lambda"])
            for row in zip(x, fmax, fmin, np.full(x.size, lam)):
                w.writerow([repr(float(v)) for v in row])
    with open(os.path.join(OUT, "hopf_cole_scalars.csv"), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["potential", "quantity", "value", "route_disagreement"])
        for r in rows:
            w.writerow([r[0], r[1], repr(float(r[2])), repr(float(r[3]))])
    for r in rows:
        print(*r, sep="\t")
    return 0


if __name__ == "__main__":
    sys.exit(main())
