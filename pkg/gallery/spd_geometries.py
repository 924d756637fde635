"""
Three geometries on SPD matrices
================================

Compare the affine-invariant, Bures-Wasserstein and Log-Euclidean distances
along each geodesic between two covariance matrices, then check that the
affine-invariant distance ignores a change of basis.
"""
import numpy as np

from geomlearn import spd_geometry as sg
from geomlearn.matfun import random_spd

rng = np.random.default_rng(0)
A, B = random_spd(rng, 3), random_spd(rng, 3)

print("t     " + "  ".join(f"{m:>8}" for m in sg.GEODESICS))
for t in np.linspace(0.0, 1.0, 6):
    # constant speed: d(A, gamma(t)) = t d(A, B) in each geodesic's own metric
    row = [sg.distance(m, A, sg.geodesic(m, A, B, t)) for m in sg.GEODESICS]
    print(f"{t:4.2f}  " + "  ".join(f"{d:8.4f}" for d in row))

# a change of basis A -> G A G' leaves the affine-invariant distance unchanged
G = rng.standard_normal((3, 3)) + 3 * np.eye(3)
GA, GB = G @ A @ G.T, G @ B @ G.T
moved = sg.ai_distance((GA + GA.T) / 2, (GB + GB.T) / 2)
print(f"\nd_ai(A, B) = {sg.ai_distance(A, B):.12f}")
print(f"d_ai(GAG', GBG') = {moved:.12f}")
