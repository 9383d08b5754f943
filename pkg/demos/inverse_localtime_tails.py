"""Tails of the inverse local time: power laws and the hitting-time link.

The inverse local time at 0 is a subordinator; its Lévy measure has a
density nu_dot(t) computable from the killed spectral measure.  For the
Bessel-type presets the tail nu_bar(t) decays like a power t^(-alpha),
and the hitting-time tail from level x behaves like S(x) * nu_bar(t)
for large t.  This script prints both effects.
"""

import numpy as np

import levykit as lk
from levykit import spectral as sp


bm = lk.brownian_spec()
b15 = lk.bessel_spec(1.5)

# --- Levy density and tail ------------------------------------------------

print("nu_dot(t) and nu_bar(t) for the Brownian preset")
for t in (0.5, 1.0, 4.0):
    nd = sp.levy_density(bm, t)
    nb, nb_err = sp.levy_tail(bm, t, with_error=True)
    print(f"  t={t:4.1f}  nu_dot={nd:.10f}  nu_bar={nb:.10f} (+-{nb_err:.1e})")
print()

# --- log-log slope of the tail ---------------------------------------------
# nu_bar(t) ~ const * t^(-alpha), so the log-log slope estimates -alpha.

print("tail slope on t in [10, 1e4] (expect -alpha)")
ts = np.geomspace(10.0, 1e4, 25)
for spec in (bm, b15):
    tails = np.array([sp.levy_tail(spec, float(t)) for t in ts])
    slope = np.polyfit(np.log(ts), np.log(tails), 1)[0]
    print(f"  {spec.name}: slope={slope:+.6f}  (alpha={spec.alpha})")
print()

# --- hitting tail quotient --------------------------------------------------
# P_x(H_0 > t) / (S(x) nu_bar(t)) -> 1 as t -> infinity.

print("hitting tail over S(x)*nu_bar(t), x=1")
x = 1.0
for spec in (bm, b15):
    S = spec.scale(x)
    for t in (10.0, 100.0, 1000.0):
        ht = sp.hitting_tail(spec, x, t)
        nb = sp.levy_tail(spec, t)
        print(f"  {spec.name}: t={t:7.1f}  quotient={ht / (S * nb):.6f}")
print()

# --- Laplace exponent consistency -------------------------------------------
# Phi(lam) = integral (1 - e^{-lam t}) nu(dt); the closed form and the
# quadrature against nu_dot must agree.

print("Laplace exponent: closed form vs integral against the killed measure")
for spec in (bm, b15):
    measure = sp.bessel_killed_measure(spec.alpha)
    for lam in (0.5, 2.0):
        closed = lk.levy_exponent(spec, lam)
        quad = sp.levy_exponent_from_measure(measure, lam)
        print(f"  {spec.name}: lam={lam:3.1f}  closed={closed:.10f}  "
              f"quad={quad:.10f}  diff={abs(closed - quad):.2e}")
