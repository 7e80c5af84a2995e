"""Frequency-band averaging and the classical graph features.

Starts from a stacked per-frequency connectivity tensor (one matrix per Hz),
averages it over the built-in bands, and computes the baseline descriptors on
each band matrix: edge weights, weighted clustering coefficients, and the
characteristic path length.
"""

import numpy as np

from ssgk import (
    BUILTIN_BANDS,
    StackedBandTensor,
    SymmetricMatrix,
    band_average,
    characteristic_path_length,
    clustering_coefficients,
    edge_features,
)


def random_connectivity(rng, dim):
    raw = rng.random((dim, dim))
    w = 0.5 * (raw + raw.T)
    np.fill_diagonal(w, 0.0)
    return SymmetricMatrix(w)


def main():
    rng = np.random.default_rng(30)
    dim, freqs = 6, 30
    tensor = StackedBandTensor(
        tuple(random_connectivity(rng, dim) for _ in range(freqs))
    )
    print(f"stacked tensor: {freqs} frequency slices of {dim}x{dim} connectivity\n")

    print(f"{'band':>6}  {'range':>9}  {'mean edge':>9}  {'mean cc':>8}  {'cpl':>6}")
    for name in ("delta", "theta", "alpha", "beta", "all"):
        band = BUILTIN_BANDS[name]
        averaged = band_average(tensor, band)
        edges = edge_features(averaged)
        cc = clustering_coefficients(averaged, mean=True)
        cpl = characteristic_path_length(averaged)
        print(
            f"{name:>6}  {band.lo_hz:>3}-{band.hi_hz:<3} Hz  "
            f"{edges.mean():>9.4f}  {cc:>8.4f}  {cpl:>6.3f}"
        )

    theta = band_average(tensor, BUILTIN_BANDS["theta"])
    print(f"\ntheta band matrix, first three rows:")
    for row in theta.values[:3]:
        print("  " + " ".join(f"{v:.3f}" for v in row))


if __name__ == "__main__":
    main()
