"""Certifying that the teacher is the sparse optimum, without training.

The minimum-norm dual vector that pins f*(p) to value 1 with stationarity
at the planted directions (the pre-certificate) solves a small linear
system.  If its induced function stays strictly inside (-1, 1) away from
the planted support, the teacher measure is the unique solution of the
measure-space program in the small-penalty limit.  As the sample grows the
sampled certificate converges to a closed-form population limit.
"""

import numpy as np

from tsblasso.certificate import (
    dual_eval_batch,
    ndsc_report,
    population_certificate,
    precertificate,
)
from tsblasso.geometry import sample_uniform_sphere
from tsblasso.model import make_dataset, make_teacher

teacher = make_teacher(m=2, d=4, amplitudes=np.ones(2), seed=3)
probes = sample_uniform_sphere(4, 2000, seed=9)
f_bar = np.array([population_certificate(t, teacher.directions) for t in probes])

for n in (500, 2000, 8000):
    data = make_dataset(teacher, n, seed=4)
    p = precertificate(teacher.directions, data)
    report = ndsc_report(p, teacher.directions, probes=5000, cap_radius=1e-3, seed=5)
    sup_gap = np.max(np.abs(dual_eval_batch(p, probes) - f_bar))
    print(f"n={n:>5}: value at planted dirs = {np.round(report.values_at_teacher, 10)}")
    print(f"         gradient residuals    = {np.max(report.gradient_residuals):.2e}")
    print(f"         off-support max |f*|  = {report.max_off_support:.4f}  (needs < 1)")
    print(f"         sup |f* - population| = {sup_gap:.4f}")
