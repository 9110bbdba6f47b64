"""Independent brute-force evaluation of the first-order operator criterion, in epsilon coordinates."""
from fractions import Fraction


def varpi_from_eps(mu):
    return [mu[i] - mu[i + 1] for i in range(len(mu) - 1)] + [mu[-1]]


def in_A_eps(mu):
    lam = varpi_from_eps(mu)
    n = len(lam)
    for x in lam[:-1]:
        if x.denominator != 1 or x < 0:
            return False
    if (2 * lam[-1]).denominator != 1 or (2 * lam[-1]) % 2 != 1:
        return False
    prev = lam[-2] if n > 1 else 0
    return lam[-1] + 2 * prev + 3 > 0


def gram_varpi(lam, nu):
    # <varpi_i, varpi_j> = min(i, j) when the epsilon_i are orthonormal
    n = len(lam)
    return sum(lam[i] * nu[j] * (min(i, j) + 1) for i in range(n) for j in range(n))


def casimir(lam):
    two_delta = [Fraction(2)] * len(lam)
    return gram_varpi(lam, [a + b for a, b in zip(lam, two_delta)])


def conformal(lam, nu, mu):
    return (casimir(lam) + casimir(nu) - casimir(mu)) / 2


def brute_dimension(lam, c, g, mu, d, h):
    """lam, mu in varpi coordinates (lists of Fraction)."""
    n = len(lam)
    lam_eps = [sum(lam[i:], Fraction(0)) for i in range(n)]
    mu_eps = [sum(mu[i:], Fraction(0)) for i in range(n)]
    near = False
    for i in range(n):
        for s in (1, -1):
            cand = list(lam_eps)
            cand[i] += s
            if cand == mu_eps and in_A_eps(cand):
                near = True
    if not near or g != h:
        return 0
    w1 = [Fraction(1)] + [Fraction(0)] * (n - 1)
    target = conformal(lam, w1, mu)
    return int(c == target and d - 1 == target)
