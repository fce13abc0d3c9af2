"""Compare the Fisher-Yates shuffle with the sort-based construction.

Both should give the same antisymmetric state; the script also prints
gate counts for the shuffle over a small grid of sizes.
"""

from __future__ import annotations

from fermiprep import antisym, fyshuffle

values = (1, 4, 6)
fy = fyshuffle.shuffle_antisymmetrize(fyshuffle.ShuffleJob(3, 8, values))
srt = antisym.antisymmetrize(antisym.AntisymJob(3, 8, values), rng_seed=0).state
print(f"fidelity(shuffle, sort) = {antisym.fidelity_up_to_phase(fy.amplitudes, srt.amplitudes):.15f}")

print("gate counts (eta x N):")
for eta in (2, 3, 4):
    row = []
    for n in (4, 8, 16):
        circ = fyshuffle.shuffle_circuit(fyshuffle.ShuffleJob(eta, n, tuple(range(eta))))
        row.append(circ.resource_tally["gate_count"])
    print(f"  eta={eta}: {row}")
for name, tally in fyshuffle.block_tallies(3, 8).items():
    print(f"  block {name}: {tally['gate_count']} gates, {tally['toffoli_count']} Toffolis")
