"""Symbolic oracle for values frozen into the C++ unit tests.

Everything here is derived from first principles with sympy: the metric
G = I + psi^2 grad grad^T, Christoffel symbols from the general Levi-Civita
formula, and the geodesic ODE theta'' = -v^T Gamma^m v. Jet coefficients are
obtained by differentiating the ODE right-hand side along its own flow, so
none of the matrix-free formulas in the library are reused.

Run: python3 tests/oracles/derive_values.py
"""
import mpmath as mp
import sympy as sp

mp.mp.dps = 40


def geometry(ell, th, sigma_sq):
    D = len(th)
    grad = sp.Matrix([sp.diff(ell, x) for x in th])
    g2 = (grad.T * grad)[0]
    psi_sq = g2 / (sigma_sq + g2)
    G = sp.eye(D) + psi_sq * grad * grad.T
    return grad, psi_sq, G


def christoffel(G, th):
    D = len(th)
    # Sherman-Morrison keeps the symbolic expressions small.
    u = G - sp.eye(D)
    Ginv = sp.eye(D) - u / (1 + u.trace())
    dG = [[[sp.diff(G[i, j], th[k]) for k in range(D)] for j in range(D)] for i in range(D)]
    Gam = [[[0] * D for _ in range(D)] for _ in range(D)]
    for m in range(D):
        for i in range(D):
            for j in range(D):
                Gam[m][i][j] = sp.Rational(1, 2) * sum(
                    Ginv[k, m] * (dG[j][k][i] + dG[k][i][j] - dG[i][j][k]) for k in range(D))
    return Gam


def jet(ell, th, sigma_sq, point, direction):
    D = len(th)
    v = sp.symbols(f"v0:{D}")
    _, _, G = geometry(ell, th, sigma_sq)
    Gam = christoffel(G, th)
    acc = sp.Matrix([-sum(Gam[m][i][j] * v[i] * v[j] for i in range(D) for j in range(D))
                     for m in range(D)])
    f = sp.lambdify(list(th) + list(v), list(acc), "mpmath")
    x0 = [mp.mpf(sp.Rational(c).p) / sp.Rational(c).q for c in point]
    v0 = [mp.mpf(sp.Rational(c).p) / sp.Rational(c).q for c in direction]
    q = f(*x0, *v0)

    # d/dt acc along (theta' = v, v' = acc), by high-precision differentiation.
    def along(t, m):
        return f(*[x0[i] + t * v0[i] for i in range(D)], *[v0[i] + t * q[i] for i in range(D)])[m]

    k = [mp.diff(lambda t: along(t, m), 0) for m in range(D)]
    return [mp.nstr(e, 20) for e in q], [mp.nstr(e, 20) for e in k]


def main():
    t1, t2 = sp.symbols("t1 t2")
    th = (t1, t2)

    # Rosenbrock (maximisation form) Hessian row at the optimum.
    a, b = 1, 100
    ros = -(b * (t2 - t1 ** 2) ** 2 + (a - t1) ** 2)
    H = sp.hessian(ros, th).subs({t1: 1, t2: 1})
    print("rosenbrock hess (1,1) * e1 =", list(H * sp.Matrix([1, 0])))
    print("rosenbrock value (0,0) =", ros.subs({t1: 0, t2: 0}))

    # Isotropic quadratic, sigma^2 = 1, theta = (1, 0).
    quad = -sp.Rational(1, 2) * (t1 ** 2 + t2 ** 2)
    grad, psi_sq, G = geometry(quad, th, 1)
    at = {t1: 1, t2: 0}
    grad_psi_sq = [sp.simplify(sp.diff(psi_sq, x).subs(at)) for x in th]
    print("quad cache: psi^2 =", psi_sq.subs(at), " W^2 =", (psi_sq * (grad.T * grad)[0] + 1).subs(at),
          " grad psi^2 =", grad_psi_sq)
    q, k = jet(quad, th, 1, (1, 0), (1, 0))
    print("quad accel v=(1,0):", q)
    q, k = jet(quad, th, 1, (1, 0), (0, 1))
    print("quad jet v=(0,1): q =", q, " k =", k)

    # Squiggle in the curved-geodesic figure configuration.
    sig = (20, sp.Rational(1, 10))
    aa = sp.Rational(13, 10)
    y = (t1, t2 + sp.sin(aa * t1))
    sq = -sp.log(2 * sp.pi) - sp.Rational(1, 2) * sp.log(sig[0] * sig[1]) \
        - sp.Rational(1, 2) * (y[0] ** 2 / sig[0] + y[1] ** 2 / sig[1])
    for s2 in (1, 10):
        q, k = jet(sq, th, s2, (sp.Rational(3), sp.Rational(14, 10)), (sp.Rational(-12, 10), -1))
        print(f"squiggle fig config sigma^2={s2}: q =", q, " k =", k)

    # Dai-Yuan coefficient on hand-built numbers.
    psi_n, gl_n = sp.Rational(1, 4), sp.Matrix([1, -2])      # next point
    psi_p, gl_p = sp.Rational(1, 2), sp.Matrix([sp.Rational(1, 2), 1])  # previous point
    V = sp.Matrix([sp.Rational(3, 10), sp.Rational(1, 5)])
    T = sp.Matrix([sp.Rational(1, 4), -sp.Rational(1, 10)])
    s = sp.Rational(9, 10)

    def inner(psi_sq_, gl, u, w):
        return (u.T * (sp.eye(2) + psi_sq_ * gl * gl.T) * w)[0]

    W2n = psi_n * (gl_n.T * gl_n)[0] + 1
    W2p = psi_p * (gl_p.T * gl_p)[0] + 1
    gn, gp = gl_n / W2n, gl_p / W2p
    beta = inner(psi_n, gl_n, gn, gn) / (s * inner(psi_n, gl_n, gn, T) - inner(psi_p, gl_p, gp, V))
    print("dai-yuan beta =", beta, "=", sp.N(beta, 20))


if __name__ == "__main__":
    main()
