"""
Undoing a measurement
=====================

With a quartic apparatus potential the branch overlap |Z(t)| decays quickly,
so <A> = alpha beta^* Z(t) goes to zero: the phase information looks lost.
The Heisenberg-conjugated operator A' = e^{-itH} A e^{itH} still has
expectation alpha beta^* at every time, and A does not commute with the
conserved s_z ([A, s_z] = A).
"""
from pathlib import Path

from macrophase import parse_config, run_peres

cfg = parse_config(Path(__file__).resolve().parents[1] / "configs" / "peres.json")
rep = run_peres(cfg)

print(f"alpha beta^* = {rep.alpha_beta_star:.4f}")
print("       t        |Z|                    <A>                   <A'>")
for r in rep.rows[::2]:
    print(f"{r.t:8.4f} {r.abs_z:10.2e} {r.expect_a:22.6f} {r.expect_a_prime:22.6f}")
print(f"\nfirst time with |Z| < {rep.decay_threshold}: t = {rep.decay_time:.4f}")
print(f"max |<A'> - alpha beta^*| = {max(r.a_prime_residual for r in rep.rows):.2e}")
print(f"max ||([A, s_z] - A) v|| over probes = {rep.commutator_residual:.2e}")
