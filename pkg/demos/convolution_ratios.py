"""Convolution-tail ratios that separate heavy tails from light ones.

For a subexponential tail F the ratio F*F-bar(x)/F-bar(x) tends to 2;
for the exponential it grows like 1+x instead.  The mixed ratio
(F*G)-bar / (F-bar + G-bar) tends to 1 when both factors are
tail-equivalent subexponential distributions.  All convolutions here go
through the same symmetric Stieltjes-sum routine with an a-posteriori
error estimate, so the printed digits are honest.
"""

import numpy as np

import levykit as lk
from levykit import subexp as sx

P = sx.pareto_tail(0.5)
E = sx.exponential_tail(1.0)

print("self-convolution ratio F*F-bar(x) / F-bar(x)")
print(f"{'x':>8} {'pareto(0.5)':>14} {'exp(1)':>14}")
for x in (5.0, 20.0, 100.0, 1e4):
    rp = sx.subexp_ratio(P, x)
    re = sx.subexp_ratio(E, x) if x <= 20 else float("nan")
    print(f"{x:8.0f} {rp:14.8f} {re:14.6f}")
print("  pareto heads to 2; exp tracks 1+x (21 at x=20) and never settles")
print()

# a-posteriori error from the Richardson pair inside the convolution
val, err = sx.conv_tail(P, P, 20.0, with_error=True)
print(f"conv tail at x=20: {val:.12f}  (error estimate {err:.2e})")
print()

# tail-equivalent mixtures: conv tail over the sum of the tails -> 1
Q = sx.scaled_tail(P, 3.0)
print("mixed ratio (F*G)-bar / (F-bar + G-bar), G = 3-scaled pareto")
for x in (100.0, 1e4):
    print(f"  x={x:8.0f}  ratio={sx.mixed_ratio(P, Q, x):.8f}")
print()

# the hitting-time tail of a preset is itself subexponential
print("hitting-time tail as a TailDistribution (brownian, x=1)")
H = sx.hitting_tail_distribution(lk.brownian_spec(), 1.0)
for x in (50.0, 500.0):
    print(f"  x={x:6.0f}  H-bar={float(H.value(x)):.8f}  "
          f"self-conv ratio={sx.subexp_ratio(H, x):.6f}")
print()

# weak Tauberian comparison: large lam localizes the Laplace integrals
# near gamma=0, where the two weights agree, so the quotient tends to 1
print("tauberian quotient, weights 1+g vs 1+g+g^2")
for lam in (1.0, 10.0, 100.0, 1000.0):
    r = sx.tauberian_ratio(lambda g: np.exp(-g), lambda g: 1.0 + g,
                           lambda g: 1.0 + g + g * g, lam=lam)
    print(f"  lam={lam:6.0f}  ratio={r:.10f}")
