#!/usr/bin/env python3
"""Recompute every frozen test constant independently, at high precision.

Deliberately imports nothing from covband: closed forms are evaluated with
mpmath at 50 digits, scan-defined integers by brute force, and densities by
numeric quadrature.  The printed values are frozen into the test suite.

Run:  python tools/derive_reference_values.py
"""

import math

import mpmath as mp

mp.mp.dps = 50


def show(name, value, digits=20):
    if isinstance(value, (int, bool, str)) or value is None:
        print(f"{name:48s} {value}")
    else:
        print(f"{name:48s} {mp.nstr(mp.mpf(value), digits)}")


print("# bound evaluators")
show("isr_bound(a=2,C=1,s=1,any n) = 1/(8e)", 1 / (8 * mp.e))
show("isr_bound(a=1,C=1,s=1,n=100)", mp.mpf(1) / 8 * mp.sqrt(1 / (2 * mp.e)) * 10)
show("isr_bound(a=1,C=1,s=1,n=400)", mp.mpf(1) / 8 * mp.sqrt(1 / (2 * mp.e)) * 20)
show(
    "regret_bound(a=1,C=1,s=1,x0=.5,any n)",
    (mp.mpf(1) / 8) ** 2 * (1 / (2 * mp.e)) / (2 * max(mp.mpf(2), mp.mpf(2))),
)
show("concentration(1,4,1) = 2/e", 2 / mp.e)
show("concentration(2,4s^2,s) = 2e^-4", 2 * mp.exp(-4))

print("\n# composition: regret bound == lemma5_floor(isr bound) at (a,C,s,x0,n)")
for a, C, s, x0, n in [(1, 1, 1, 0.5, 7), (0.5, 2, 1.5, 0.3, 100), (0.25, 0.7, 0.9, 0.49, 1000)]:
    a, C, s, x0 = mp.mpf(a), mp.mpf(C), mp.mpf(s), mp.mpf(x0)
    isr = mp.mpf(1) / 8 * (a / (2 * mp.e)) ** (a / 2) * C * s**a * mp.mpf(n) ** (1 - a / 2)
    reg = (
        (mp.mpf(1) / 8) ** (1 + 1 / a)
        * (a / (2 * mp.e)) ** ((a + 1) / 2)
        * C ** (1 + 1 / a)
        * s ** (a + 1)
        * mp.mpf(n) ** ((1 - a) / 2)
        / (2 * max(1 / x0, (2 * C) ** (1 / a)))
    )
    floor = isr ** (1 + 1 / a) * mp.mpf(n) ** (-1 / a) / (2 * max(1 / x0, (2 * C) ** (1 / a)))
    show(f"  |regret - lemma5(isr)| at a={float(a)}", abs(reg - floor))

print("\n# schedule: floor(exp(q t)) values (true value of exp at the exact double q)")
times = [1]
for t in range(2, 20):
    v = int(mp.floor(mp.e ** (mp.mpf(1.0) * t)))
    if v > 150:
        break
    if v != times[-1]:
        times.append(v)
show("times(q=1, horizon=150)", str(times))
show("N(20) for q=1", sum(1 for v in times if v <= 20))
show("(1/q)ln(21), q=1", mp.log(21))
show("N(1) vs bound ln(2) (q=1)  -- bound is violated", mp.log(2))

print("\n# nu and nu0")
Q12 = 1.0 / 12.0  # exact double used by the experiments
for q in [math.log(2), 2.0, Q12, 1.0]:
    qm = mp.mpf(q)
    ratio = 2 / mp.expm1(qm)
    nu = 1 + (mp.log(ratio) / qm if ratio > 1 else mp.mpf(0))
    show(f"nu(q={q!r})", nu, 25)
for q in [Q12, 1.0, math.log(2)]:
    t = 1
    while t < (2.0 / q) * math.log(t + 1.0):
        t += 1
    show(f"inner min t >= (2/q)ln(t+1), q={q!r}", t)

print("\n# theorem-1 scan times (brute force; inequality must hold on a 10-step window)")


def scan(holds, limit):
    t = 1
    while t <= limit:
        if all(holds(s) for s in range(t, t + 10)):
            return t
        t += 1
    return None


def t0_holds(p, sigma, x0):
    return lambda t: x0 * math.sqrt(p * t) >= 8 * sigma * math.sqrt(3 * math.log(t))


show("t0(p=.5,sigma=1,x0=.5)", scan(t0_holds(0.5, 1.0, 0.5), 100000))
show("t0(p=.5,sigma=.01,x0=.25)", scan(t0_holds(0.5, 0.01, 0.25), 1000))


def talpha_holds(alpha, sigma, p):
    expo = 4 * alpha / (alpha - 2)

    def h(t):
        return t >= (8 * math.sqrt(3) * sigma * math.sqrt(math.log(t) / p)) ** expo

    return h


show("t_alpha(a=4,sigma=.01,p=1)", scan(talpha_holds(4, 0.01, 1.0), 1000))

print("\n# adversarial construction")
for a, s, n in [(1, 1, 100), (2, 1, 400), (1, 1, 400)]:
    show(f"delta*(a={a},s={s},n={n}) = s*sqrt(a/n)", mp.sqrt(mp.mpf(a) / n) * s)

# piece masses for a=1, C=1, x0=0.45, delta=0.1 by numeric quadrature
a, C, x0, d = 1.0, 1.0, 0.45, 0.1
f1 = lambda x: 0.5 * C * a * abs(x) ** (a - 1)
f2 = lambda x: 0.5 * C * a * abs(x - d) ** (a - 1)
m1 = mp.quad(f1, [-x0, 0, d / 2])
m2 = mp.quad(f2, [d / 2, d, d + x0])
show("in-interval mass (quadrature)", m1 + m2)
show("atom mass each", (1 - (m1 + m2)) / 2)
# CDF at x=0 (atom_left + piece1 mass on [-x0, 0]); equal-atom split
show("F(0) = inverse-cdf round-trip target", (1 - (m1 + m2)) / 2 + mp.quad(f1, [-x0, 0]))
show("p(theta=0) = 1 - F(0)", 1 - ((1 - (m1 + m2)) / 2 + mp.quad(f1, [-x0, 0])))
show("p(theta=delta) = 1 - F(delta)", 1 - ((1 - (m1 + m2)) / 2 + mp.quad(f1, [-x0, 0, d / 2]) + mp.quad(f2, [d / 2, d])))
# mean absolute deviation about theta=0 (pieces + atoms at -(x0+1), d+x0+1)
mu_pieces = mp.quad(lambda x: abs(x) * f1(x), [-x0, 0, d / 2]) + mp.quad(lambda x: abs(x) * f2(x), [d / 2, d, d + x0])
atom = (1 - (m1 + m2)) / 2
show("mu(theta=0)", mu_pieces + atom * ((x0 + 1) + (d + x0 + 1)))

# certificate inflation for a<1: sup over x of mass((-x,x)) / (C x^a), by dense grid
print("\n# adversarial (2.3)-ratio sup for alpha<1 vs closed form (1+3^(1-a))/2")
for a in [0.5, 0.8]:
    C, x0, d = 1.0, 0.45, 0.1
    f1 = lambda x: 0.5 * C * a * abs(x) ** (a - 1)
    f2 = lambda x: 0.5 * C * a * abs(x - d) ** (a - 1)

    def mass(x):
        lo, hi = -x, x
        m = mp.quad(f1, [max(lo, -x0), 0, min(hi, d / 2)])
        if hi > d / 2:
            m += mp.quad(f2, [d / 2, min(hi, d), min(hi, d + x0)] if hi > d else [d / 2, hi])
        return m

    sup = max(mass(mp.mpf(x)) / (C * mp.mpf(x) ** a) for x in [i / 2000 * x0 for i in range(1, 2001)])
    show(f"  grid sup a={a}", sup)
    show(f"  closed form a={a}", (1 + mp.mpf(3) ** (1 - a)) / 2)

print("\n# margin certificates")
show("uniform[-1,1] theta=0: mu = E|X|", mp.mpf(1) / 2)
show("power(a=2,c=0,h=1) C* = 1/h^a", 1.0)
show("power(a=2,c=0,h=1) mu = a h/(a+1)", mp.mpf(2) / 3)

print("\n# policy constants")
show("2*sigma*sqrt(3) at sigma=1 (delta at ln t = 1)", 2 * mp.sqrt(3))
show("sd of theta-hat - theta at t=50 pure pulls", 1 / mp.sqrt(50))
