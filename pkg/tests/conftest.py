"""Brute-force oracles shared by the test modules.

These deliberately avoid the package's own arithmetic so they can act as an
independent check on it.
"""

from collections import defaultdict

import pytest


def naive_pow(base, exp, m):
    acc = 1 % m
    for _ in range(exp):
        acc = acc * base % m
    return acc


def naive_inverse(a, m):
    for b in range(1, m):
        if a * b % m == 1:
            return b
    return None


def naive_order(g, p):
    acc, r = g % p, 1
    while acc != 1:
        acc = acc * g % p
        r += 1
    return r


def naive_is_prime(n):
    return n >= 2 and all(n % d for d in range(2, int(n**0.5) + 1))


def naive_subgroup(g, p):
    """Map element -> exponent for the cyclic group generated by g."""
    out, acc, k = {}, 1, 0
    while acc not in out:
        out[acc] = k
        acc = acc * g % p
        k += 1
    return out


def all_param_triples(p_max):
    """Every (p, q, g) with p prime <= p_max, q prime | p-1, ord(g) = q."""
    out = []
    for p in range(3, p_max + 1):
        if not naive_is_prime(p):
            continue
        for q in range(2, p):
            if (p - 1) % q or not naive_is_prime(q):
                continue
            for g in range(2, p):
                if naive_order(g, p) == q:
                    out.append((p, q, g))
    return out


def grouped_triples(p_max):
    groups = defaultdict(list)
    for p, q, g in all_param_triples(p_max):
        groups[(p, q)].append(g)
    return dict(groups)


ACCEPTANCE_RESULTS = []


def record_acceptance(number, title, ok, detail):
    line = f"criterion {number:>3} {'PASS' if ok else 'FAIL'}: {title} -- {detail}"
    ACCEPTANCE_RESULTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def triples_200():
    return all_param_triples(200)


@pytest.fixture(scope="session")
def groups_200():
    return grouped_triples(200)
