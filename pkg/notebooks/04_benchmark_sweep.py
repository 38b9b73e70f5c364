"""
A small sweep through the experiment runner
===========================================

The same runner backs `slr bench`; here it is driven from Python and the
summary printed instead of written to CSV.
"""
from slr.bench import ExperimentSpec, run_experiment, summarize

spec = ExperimentSpec("ls_vs_pe", sweep=[0.1, 0.5, 0.9], trials=5, seed=0,
                      fixed=dict(m=100, n=50, t=5000))
rows = run_experiment(spec)
print(len(rows), "rows,", sum(r.error is not None for r in rows), "with errors")

for rec in summarize(rows):
    if rec["statistic"] == "mean":
        print(f"p_e={rec['sweep_value']:.1f}  {rec['method']:>9s}  error rate {rec['perm_error_rate']:.3f}")
