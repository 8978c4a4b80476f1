"""Lattice-vs-continuum error curves for both renormalization schemes."""

from latcft.erroranalysis import fit_decay, momentum_error_curve, two_point_error_curve, wavelet_error_curve

Ns = range(5, 11)
for k in (0, 1, 2):
    diag = momentum_error_curve(k, 4, Ns, "L2diagonal")
    off = momentum_error_curve(k, 4, Ns, "HSoffdiagonal")
    print(f"k={k}: diagonal " + " ".join(f"{v:.2e}" for v in diag.values))
    print(f"     off-diag " + " ".join(f"{v:.2e}" for v in off.values))

tp = two_point_error_curve(range(3, 9))
print(f"two-point error exponent {fit_decay(tp).exponent:.3f}")

for K in (4, 6, 10):
    curve = wavelet_error_curve(K, 3, range(4, 10), 0.45)
    print(f"D{K} bound: " + " ".join(f"{v:.3f}" for v in curve.values))
