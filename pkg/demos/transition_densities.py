"""Transition densities two ways: closed forms vs spectral quadrature.

Builds the reflecting Brownian and Bessel presets, evaluates their
transition/killed/hitting densities from the closed-form oracles, then
recomputes the same numbers by integrating the eigenfunction series
against the spectral measure.  The two routes share no code, so
agreement to ~1e-9 is a real check.
"""

import numpy as np

import levykit as lk
from levykit import spectral as sp


def main():
    bm = lk.brownian_spec()
    b15 = lk.bessel_spec(1.5)

    print("spec summary")
    for spec in (bm, b15):
        print(f"  {spec.name}: alpha={spec.alpha}, S(1)={spec.scale(1.0):.6f}, "
              f"m'(1)={spec.speed_density(1.0):.6f}")
    print()

    # full transition density, reflecting at 0
    print("p_t(x, y) wrt speed measure (full, reflecting)")
    print(f"{'spec':>8} {'t':>5} {'x':>5} {'y':>5} {'closed form':>16} "
          f"{'quadrature':>16} {'quad err bound':>14}")
    for spec in (bm, b15):
        for (t, x, y) in [(1.0, 0.5, 0.7), (2.0, 0.0, 1.0), (0.5, 1.2, 1.2)]:
            exact = spec.oracles.transition_density(t, x, y)
            quad, err = sp.transition_density(spec, x, y, t, with_error=True)
            print(f"{spec.name:>8} {t:5.2f} {x:5.2f} {y:5.2f} {exact:16.12f} "
                  f"{quad:16.12f} {err:14.2e}")
    print()

    # killed density (absorbed at 0) is always dominated by the full one
    print("killed density p^0_t(x, y) <= p_t(x, y)")
    for spec in (bm, b15):
        t, x, y = 1.0, 0.8, 1.1
        full = sp.transition_density(spec, x, y, t)
        killed = sp.transition_density(spec, x, y, t, killed=True)
        print(f"  {spec.name}: killed={killed:.10f}  full={full:.10f}  "
              f"ratio={killed / full:.4f}")
    print()

    # hitting time of 0: density integrates to the survival complement
    print("hitting density f_x(t) and its tail")
    for spec in (bm, b15):
        x = 1.0
        for t in (0.5, 2.0, 10.0):
            f = spec.oracles.hitting_density(x, t)
            tail = sp.hitting_tail(spec, x, t)
            print(f"  {spec.name}: t={t:5.1f}  f={f:.8f}  P(H0 > t)={tail:.8f}")
    print()

    # eigenfunction series coefficients decay factorially; eigen_value
    # refuses to evaluate unless the truncation bound clears tol
    print("eigenfunction series A(x; gamma), C(x; gamma) at x=1")
    series = sp.eigen_coefficients(b15, 1.0, kind="C", n_terms=12)
    print(f"  first C_n(1): "
          f"{np.array2string(series.coefficients[:4], precision=6)}")
    try:
        sp.eigen_value(series, 5.0)
    except lk.TruncationError as exc:
        print(f"  12 terms refused at gamma=5: {exc}")
    series = sp.eigen_coefficients(b15, 1.0, kind="C", n_terms=24)
    print(f"  series value at gamma=5: {sp.eigen_value(series, 5.0):.10f}")
    for gamma in (0.5, 5.0, 40.0):
        a = sp.eigenfunction(b15, 1.0, gamma, kind="A")
        c = sp.eigenfunction(b15, 1.0, gamma, kind="C")
        print(f"  gamma={gamma:5.1f}  A={a:12.6e}  C={c:12.6e}")


if __name__ == "__main__":
    main()
