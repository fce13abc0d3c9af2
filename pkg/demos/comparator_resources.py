"""Resource counts of the comparison oracle and whole sorting networks."""

from __future__ import annotations

import numpy as np

from fermiprep import netgen, qcompare

ds = [2, 4, 8, 16, 32]
print(" d  T-count  Toffolis  depth(parallel)  depth(sequential)")
for d in ds:
    par = qcompare.build_comparison_oracle(d).resource_tally
    seq = qcompare.build_comparison_oracle(d, "sequential").resource_tally
    print(f"{d:2d}  {par['t_count']:7d}  {par['toffoli_count']:8d}  {par['depth']:15d}  {seq['depth']:17d}")
t = [qcompare.oracle_t_count(d) for d in ds[:4]]
slope, intercept = np.polyfit(ds[:4], t, 1)
print(f"T-count fit: {slope:.2f} d {intercept:+.2f}")

for family in ("bitonic", "odd-even-mergesort", "insertion"):
    rep = netgen.resource_summary(netgen.generate(family, 8), 4)
    print(f"{family:>18}: {rep['comparators']} comparators, {rep['rounds']} rounds, total T-count {rep['total']['t_count']}")
print("reference 20-input network:", netgen.REFERENCE_20_INPUTS)
