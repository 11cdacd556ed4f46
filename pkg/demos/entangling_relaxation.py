"""Two SQUIDs relaxing from |11> pass through entangled states.

Prints the entanglement of formation along the run and compares the end
state with the thermal state.
"""

import tempfile

import numpy as np

from chainboson import dynamics as dyn
from chainboson import entanglement as ent
from chainboson import scenario as sc


def main():
    cfg = sc.preset("fig1")
    es, _, gen, _ = sc.analyse(cfg)
    rho0 = dyn.DensityMatrix.from_amplitudes(cfg.initial_state, es,
                                             cfg.initial_basis).data
    traj = dyn.evolve(gen, rho0, cfg.t_max_ns, samples=400)
    eof = np.array([ent.entanglement_of_formation(es.basis @ s @ es.basis.conj().T)
                    for s in traj.states])
    k = int(np.argmax(eof))
    print(f"peak EoF {eof[k]:.3f} at t = {traj.times[k] / 1e3:.1f} us")
    for t_us in (0, 5, 20, 50, 100, 300, 1000, 3000):
        i = int(np.argmin(np.abs(traj.times - 1e3 * t_us)))
        bar = "#" * int(round(60 * eof[i]))
        print(f"{t_us:6d} us  {eof[i]:.4f}  {bar}")
    gibbs = dyn.gibbs_state(es, cfg.temperature_ghz).data
    print("trace distance to thermal state:",
          f"{dyn.trace_distance(traj.final, gibbs):.2e}")
    print("thermal-state EoF:",
          f"{ent.entanglement_of_formation(es.basis @ gibbs @ es.basis.T):.4f}")
    with tempfile.TemporaryDirectory() as out:
        rep = sc.run_scenario(cfg, out, "fig1")
        print(f"scenario status: {rep.status}")


if __name__ == "__main__":
    main()
