"""
Sparse features with fewer measurements than unknowns
=====================================================

m=10 rows, n=30 features, each feature vector has about s=2 non-zeros.
The permutation is estimated the same way; X is then found column by
column with an l1 penalty.
"""
import numpy as np

from slr import generate_sparse_problem, solve_shuffled_lasso, oracle_solution
from slr.baselines import threshold_match
from slr.metrics import nmse_db, permutation_error_rate
from slr.solvers import kkt_violation

problem, truth = generate_sparse_problem(m=10, n=30, t=1000, snr_db=20, s=2, seed=3)
print("average support size:", np.count_nonzero(truth.X, axis=0).mean())

sol = solve_shuffled_lasso(problem, truth.C_X)
orac = oracle_solution(problem, truth, sparse=True)
print("unconverged columns:", len(sol.unconverged))
print("error rate spectral :", permutation_error_rate(sol.perm, truth.perm))
print("error rate threshold:", permutation_error_rate(threshold_match(problem), truth.perm))
print(f"NMSE spectral {nmse_db(sol.X_hat, truth.X):.2f} dB, oracle {nmse_db(orac.X_hat, truth.X):.2f} dB")

# every column is a certified LASSO minimizer
b = problem.Y[sol.perm.inverse().map][:, 0]
print("KKT residual of column 0:", kkt_violation(problem.A, b, sol.X_hat[:, 0], problem.config.rho))
