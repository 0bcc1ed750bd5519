"""Compare the closed-form gate point (g1 = 2 sqrt2 g2) with the calibrated one (g2 = sqrt2 g1).

Prints the two-photon return probability and the device fidelity against
CZ for every dopant model, with and without single-qubit phase freedom.
"""
import argparse
import math

from crowgates.effective_dynamics import calibrated_gate_condition, exact_two_photon_oracle, gate_condition
from crowgates.gates_circuits import CZ, cz_device, gate_fidelity, truth_table


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--delta", type=float, default=1.0)
    parser.add_argument("--coupling", type=float, default=0.02, help="g2 for the closed-form point, g1 for calibrated")
    args = parser.parse_args()
    conditions = [gate_condition(args.coupling, args.delta), calibrated_gate_condition(args.delta, args.coupling)]
    print(f"{'condition':11s} {'model':10s} {'P_return':>9s} {'F':>9s} {'F_nophase':>9s}")
    for c in conditions:
        p_ret = abs(exact_two_photon_oracle(c.g1, c.g2, c.delta, c.t)[0, 0]) ** 2
        for model in ("paper", "effective", "cascade"):
            table = truth_table(*cz_device(model, c.params, c.t))
            free = gate_fidelity(table, CZ, True).fidelity
            fixed = gate_fidelity(table, CZ, False).fidelity
            print(f"{c.label:11s} {model:10s} {p_ret:9.6f} {free:9.6f} {fixed:9.6f}")
    print(f"kappa t = {conditions[0].kappa_t / math.pi:.3f} pi at both points")


if __name__ == "__main__":
    main()
