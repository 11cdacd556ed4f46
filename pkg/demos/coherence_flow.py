"""Coherence moving between resonant pairs in a three-SQUID chain.

In the first run rho_47 hands its weight to rho_14, which then decays
more slowly.  In the second, with a small-ring bath, rho_56 feeds rho_23,
which keeps a constant part that never decays.
"""

import numpy as np

from chainboson import dynamics as dyn
from chainboson import redfield as rf
from chainboson import scenario as sc


def show(name, pairs, times_us):
    cfg = sc.preset(name)
    es, _, gen, _ = sc.analyse(cfg)
    rho0 = dyn.DensityMatrix.from_amplitudes(cfg.initial_state, es,
                                             cfg.initial_basis).data
    print(f"\n{name}: " + ", ".join(
        f"Gamma_{a}{d} = {rf.decoherence_rate(gen, a - 1, d - 1):.2e}/ns"
        for a, d in pairs))
    print("   t [us]  " + "  ".join(f"|rho_{a}{d}|" for a, d in pairs))
    for t in times_us:
        rho = dyn.exact_state(gen, rho0, 1e3 * t) if t > 0 else rho0
        print(f"{t:9.3g}  " + "  ".join(f"{abs(rho[a - 1, d - 1]):8.2e}"
                                        for a, d in pairs))


def main():
    show("fig2", [(4, 7), (1, 4)], [0, 2, 5, 10, 20, 50, 100, 200, 400])
    show("fig7", [(2, 3), (5, 6)], np.geomspace(1e8, 4e14, 8))


if __name__ == "__main__":
    main()
