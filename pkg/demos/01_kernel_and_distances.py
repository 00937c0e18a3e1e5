"""Exact population geometry of ReLU units on the sphere.

The quantity that makes everything downstream computable is the closed
form of E[relu(<t1, X>) relu(<t2, X>)] for X uniform on the sphere: with
it, the population L2 distance between any two finite-width ReLU networks
is a finite, exact double sum over their atoms.  This script sanity-checks
the closed form against Monte Carlo and uses it to measure how far a
teacher network is from a randomly initialized student.
"""

import numpy as np

from tsblasso.geometry import relu_kernel, sample_uniform_sphere
from tsblasso.model import analytic_l2_distance, make_teacher, to_measure
from tsblasso.optimizer import init_params

rng = np.random.default_rng(0)

print("== closed-form kernel vs Monte Carlo ==")
d = 5
t1, t2 = sample_uniform_sphere(d, 2, rng)
x = sample_uniform_sphere(d, 200_000, rng)
mc = np.mean(np.maximum(x @ t1, 0) * np.maximum(x @ t2, 0))
exact = relu_kernel(t1, t2)
print(f"   exact {exact:.6f}   monte-carlo {mc:.6f}   (200k samples)")

print("== exact population distance, no sampling ==")
teacher = make_teacher(m=3, d=5, amplitudes=np.ones(3), seed=1)
student = init_params(M=20, d=5, seed=2)
dist2 = analytic_l2_distance(to_measure(student), teacher.measure())
print(f"   ||student - teacher||^2 in L2(P_X) = {dist2:.6f}")
print(f"   teacher self-distance              = "
      f"{analytic_l2_distance(teacher.measure(), teacher.measure()):.1e}")
