"""
Working from a survey file that has no indegrees
=================================================

Real studies record each respondent's number of contacts (outdegree) but not
how many people would name them (indegree). The attractivity ratio m is then
unknown, so the VH_m estimate is reported across a range of m with bootstrap
intervals.
"""

import io

from rds_lab import GenTarget, SamplerConfig, generate, run_rds
from rds_lab.estimators import vh_in, vh_out
from rds_lab.inference import BootstrapConfig, ingest_sample, sensitivity_sweep
from rds_lab.sampling import write_sample_csv

# %% Simulate a survey and drop the indegree column, as a field study would
g = generate(GenTarget("Net1", 5000, 10, 0.6, 1.2, rng_seed=4))
sample = run_rds(g, SamplerConfig(rng_seed=5))
buf = io.StringIO()
write_sample_csv(sample, buf)
lines = buf.getvalue().splitlines()
header = lines[0].split(",")
keep = [i for i, c in enumerate(header) if c != "in_degree"]
survey = "\n".join(",".join(row.split(",")[i] for i in keep) for row in lines) + "\n"

# %% Ingest and estimate
s = ingest_sample(survey)
print(f"{len(s)} respondents, share A in sample {s.n_a / len(s):.3f}, true share {g.is_a.mean():.3f}")
print(f"vh_out: {vh_out(s).estimate:.3f}")
try:
    vh_in(s)
except Exception as exc:
    print(f"vh_in: unavailable ({exc})")

# %% Sensitivity over m with 90% bootstrap bands
curve = sensitivity_sweep(s, 0.8, 1.6, steps=9, bootstrap_cfg=BootstrapConfig(1000, (0.90,), "vh_m", m=1.0))
print(f"\n{'m':>5} {'estimate':>9} {'90% interval':>18} {'slope':>8}")
for p in curve.points:
    print(f"{p.m:>5.2f} {p.estimate:>9.3f}   [{p.lo:.3f}, {p.hi:.3f}] {p.derivative:>8.3f}")
print(f"\nat the sample activity ratio w = {curve.w_hat:.3f}: slope {curve.derivative_at[curve.w_hat]:.3f}")
