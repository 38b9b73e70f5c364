"""
Recovering a row shuffle from second-order statistics
=====================================================

Y = Pi A X + N with A known and X unknown. The covariance of Y is
Pi A A^T Pi^T + sigma^2 I, so its eigenvectors are the eigenvectors of
A A^T with their rows shuffled.  Matching the two sets undoes Pi.
"""
import numpy as np

from slr import generate_dense_problem, solve_shuffled_ls, oracle_solution
from slr.metrics import nmse_db, permutation_error_rate
from slr.solvers import estimate_permutation

problem, truth = generate_dense_problem(m=200, n=100, t=10_000, snr_db=20, p_e=0.5, seed=1)
print("Y:", problem.Y.shape, " A:", problem.A.shape, " sigma^2 =", truth.sigma2)
print("rows moved by the shuffle:", int(np.sum(truth.perm.map != np.arange(problem.m))))

# the matching step on its own
result, signal, measurement = estimate_permutation(problem, truth.C_X)
print("components used:", signal.k, " smallest eigen-gap:", round(signal.delta, 4))
print("permutation error rate:", permutation_error_rate(result.perm, truth.perm))

# then least squares on the un-shuffled rows, next to the known-permutation bound
sol = solve_shuffled_ls(problem, truth.C_X)
orac = oracle_solution(problem, truth)
print(f"NMSE spectral {nmse_db(sol.X_hat, truth.X):.2f} dB, oracle {nmse_db(orac.X_hat, truth.X):.2f} dB")

# fewer samples -> noisier covariance -> more mismatched rows
for t in (100, 1000, 10_000):
    problem, truth = generate_dense_problem(200, 100, t, 20, 0.5, seed=1)
    sol = solve_shuffled_ls(problem, truth.C_X)
    print(f"t={t:>6d}  error rate {permutation_error_rate(sol.perm, truth.perm):.3f}"
          f"  NMSE {nmse_db(sol.X_hat, truth.X):6.2f} dB")
