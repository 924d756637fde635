"""
Learning a conditional distribution on a grid
=============================================

Regularized empirical risk minimization over Markov kernels on a 5x5 grid.
The distance to the true conditional shrinks as the sample grows while the
penalty weight decays like ``n^(-1/3)``.  Takes about ten seconds.
"""
from geomlearn.erm import GridModel, Schedule, learning_curve, lipschitz_truth

model = GridModel.uniform(5, 5)
truth = lipschitz_truth(model)
sizes = (50, 200, 800)
for point in learning_curve(model, truth, sizes, Schedule.power(sizes), seeds=range(10)):
    print(f"n={point.n:4d}  gamma={point.gamma:.3f}  median d_M={point.median_dM:.3f}  "
          f"P(d_M > 0.5)={point.failure_rate:.1f}")
