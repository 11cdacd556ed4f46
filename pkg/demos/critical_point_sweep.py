"""Sweep the field through the point where psi_1 and psi_2 cross.

At 2B/h = 8J/h the psi_1 <-> psi_2 gap closes and its rate vanishes, so
the transition network loses that link.  Values close to the crossing put
the gap into the intermediate regime and are reported as aborted.
"""

import sys
import tempfile

from chainboson import scenario as sc


def main(values=(0.6, 0.8, 0.95, 0.99, 1.0, 1.01, 1.05, 1.2, 1.5)):
    cfg = sc.preset("fig6").replace(t_max_ns=1e4, output_stride=10**6)
    with tempfile.TemporaryDirectory() as out:
        reports = sc.sweep(cfg, "splitting_GHz", values, out)
    print("2B/h [GHz]  status    edges")
    for v, rep in zip(values, reports):
        if rep.status != "ok":
            print(f"{v:9.3f}   aborted   ({rep.status.split(':', 1)[1].strip()})")
            continue
        edges = " ".join(f"{a}-{b}" for a, b in sorted(rep.edges))
        print(f"{v:9.3f}   ok        {edges}")


if __name__ == "__main__":
    if len(sys.argv) > 1:
        main(tuple(float(v) for v in sys.argv[1:]))
    else:
        main()
