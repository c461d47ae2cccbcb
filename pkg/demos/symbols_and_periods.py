"""Modular symbols of the base change of 11a to Q(i).

Evaluates a few symbols <a/c> by two independent routes, then shows that the
symbols with 11 | c lie on a one-dimensional lattice Z * Omega while <0/1>
sits four fifths of the way along a period.

Run:  python demos/symbols_and_periods.py
"""
import numpy as np

from bianchi_modsym import FormSpec, QuadInt, enumerate_Q, eval_symbol, field, get_evaluator
from bianchi_modsym.modsym import eval_symbol_quadrature, period_lattice_estimate
from bianchi_modsym.verify import DEFAULT_FORM

fld = field(-1)
form = FormSpec.from_dict(DEFAULT_FORM)
form.load()
print(f"form: level {form.level} over Q(i), coefficient table to norm {form.load().norm_bound}")

print("\nsymbol              two-tail            quadrature          difference")
for a, c in [((0, 0), (1, 0)), ((1, 0), (4, 1)), ((2, 1), (3, 0)), ((5, 2), (7, 3))]:
    r = QuadInt(*a, fld), QuadInt(*c, fld)
    fast = eval_symbol(form, r)
    slow = eval_symbol_quadrature(form, r)
    label = f"<({r[0]})/({r[1]})>"
    print(f"{label:<19} {fast.value: .15f} {slow.value: .15f} "
          f"{abs(fast.value - slow.value):.1e}")

level = form.level
S = enumerate_Q(level, level, 20.0)
vals = get_evaluator(form, 1e-8).eval_set(S).values
omega, resid = period_lattice_estimate(vals)
print(f"\n{len(vals)} symbols with 11 | c and |c| < 20")
print(f"period Omega = {omega:.10f}, worst distance to Z*Omega = {resid / omega:.1e} Omega")
multiples = np.round(vals / omega).astype(int)
print("multiples of Omega seen:", sorted(set(multiples.tolist())))
zero = eval_symbol(form, (QuadInt(0, 0, fld), QuadInt(1, 0, fld))).value
print(f"<0/1> / Omega = {zero / omega:.8f}")
