"""
Stern-Gerlach measurement and the phase bounds
==============================================

A spin-1/2 with amplitudes alpha (up) and beta (down) displaces the pointer by
+L or -L. Under a linear field gradient the overlap keeps |Z| = 1 while its
phase winds, so the relative phase Phi = phi + theta(t) keeps moving. All
phase bounds are evaluated at every time; for a normalized state their
right-hand sides are never positive.
"""
import json
from pathlib import Path

from macrophase import config_from_dict, definite_state_check, run_stern_gerlach

raw = json.loads((Path(__file__).resolve().parents[1] / "configs" / "stern_gerlach.json").read_text())
cfg = config_from_dict(raw)
ts = run_stern_gerlach(cfg)

print(f"<s_z> = {ts.rows[0].expect_o:.6f}   (|alpha|^2 - |beta|^2)/2 = 0.2")
print(f"{'t':>5} {'|Z|':>6} {'theta':>8} {'Phi':>8} {'eq24 rhs':>10} {'eq25 rhs':>10}  verdicts")
for r in ts.rows:
    rec = r.record()
    verdicts = {n: r.bounds[n].verdict[0] for n in ("eq11", "eq15", "eq16", "eq24", "eq25")}
    print(f"{r.t:5.2f} {rec['abs_z']:6.3f} {rec['theta']:+8.3f} {r.phi:+8.3f} "
          f"{rec['eq24_rhs']:10.3g} {rec['eq25_rhs']:10.3g}  {verdicts}")

# Assigning a definite macrostate: the tightened bound has no finite value.
raw["branches"] = [{"c_re": 1.0}, {"c_re": 0.0}]
report = definite_state_check(config_from_dict(raw))
print(f"\ndefinite state |alpha|^2 = 1: verdict {report.verdict!r}\n  {report.note}")
