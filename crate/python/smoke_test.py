"""Smoke test for the zs_tspec_py extension module."""

import cmath
import math

import zs_tspec_py as zs


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    zero = zs.Potential.zero()
    m = zs.fundamental_solution(zero, 0.7 + 0.2j, t=1.0)
    th = 2 * (0.7 + 0.2j) ** 2
    assert close(m[0][0], cmath.exp(-1j * th), 1e-9), m
    assert close(m[0][1], 0, 1e-12)

    n_min, eig = zs.spectrum(zero, kind="dirichlet", n_max=2)
    assert n_min >= 0 and len(eig) == 10, (n_min, len(eig))
    for e in eig:
        s = math.copysign(1, e["n"]) if e["n"] else 0
        a = math.sqrt(abs(e["n"]) * math.pi / 2) * s
        want = a if e["i"] == 1 else 1j * a
        assert close(e["value"], want, 1e-9), e

    psi = zs.Potential.random(7, k=3, modes=3, norm=0.5)
    mu = next(e["value"] for e in zs.spectrum(psi, kind="neumann", n_max=2)[1] if e["n"] == 1)
    d = zs.discriminant(psi, mu)
    a = zs.anti_discriminant(psi, mu)
    assert abs(d * d - 4 - a * a) < 1e-8

    fig = zs.Potential.figure("3b")
    assert fig.classify() in ("real", "imaginary")
    crossing, samples, _ = zs.trace_arc(fig, -1)
    assert abs(crossing.imag) < 1e-12 and len(samples) > 10

    drift = zs.plane_wave_drift(1.0, 0.5)
    assert max(drift) < 1e-7, drift

    again = zs.Potential.from_json(psi.to_json())
    assert close(again(0.3)[0], psi(0.3)[0], 1e-15)
    print("smoke test ok:", zs.__version__, repr(psi))


if __name__ == "__main__":
    main()
