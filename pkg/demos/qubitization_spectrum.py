"""Recover a Hamiltonian's spectrum from the walk operator's eigenphases."""

from __future__ import annotations

import numpy as np

from fermiprep import qubitize

lcu = qubitize.LcuHamiltonian.from_paulis([(0.5, "XX"), (0.3, "ZI"), (0.2, "IY")])
report = qubitize.spectral_check(lcu)
print(f"lambda = {lcu.lam}")
print("eigenvalues of H:       ", np.round(report.reference_energies, 10))
print("recovered by lam*sin:   ", np.round(report.recovered_energies, 10))
print(f"max abs error: {report.max_abs_error:.2e}")
for e in report.reference_energies:
    print(f"  E = {e:+.4f}: energy error for phase error 1e-3 is {qubitize.error_propagation(1e-3, float(e), lcu.lam):.3e}")
