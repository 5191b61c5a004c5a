"""Smoke test for the plasmonwire_py extension.

Build and install first, e.g. from crates/py:
    maturin develop --release      (or: pip install . --no-build-isolation)
then run:
    python python/smoke_test.py
"""

import math

import plasmonwire_py as pw


def main():
    wire = pw.Wire(0.01, -75.0, 0.6)
    kz = wire.plasmon_kz()
    assert 1.9 < kz < 2.1, kz
    assert wire.mode_roots(1) == []

    q = pw.Quadrature(rel_tol=1e-5)
    close = pw.Emitter(0.015)
    total, err = pw.gamma_total(wire, close, q)
    assert total > 100.0 and err < 1e-3 * total, (total, err)
    far, _ = pw.gamma_total(wire, pw.Emitter(1.0), q)
    assert abs(far - 1.0) < 0.1, far

    period = 1.0 / kz
    g12 = pw.gamma_cross(wire, close, close.shifted(period), q)
    assert abs(g12) <= total * (1 + 1e-9)

    omega, fid = pw.gate_fidelity(0.01, 1.99)
    assert 0.0 < fid < 1.0 and omega > 0.0

    try:
        pw.Emitter(0.0105).shifted(0.0)
        pw.gamma_total(wire, pw.Emitter(0.0105), q)
    except ValueError:
        pass
    else:
        raise AssertionError("emitter inside the minimum gap was accepted")

    checks = pw.selftest()
    assert all(passed for _, _, passed, _ in checks), checks
    print(f"ok: k_pl/k0 = {kz:.5f}, Gamma/Gamma0 = {total:.2f}, "
          f"Gamma12/Gamma11 at one plasmon period = {g12 / total:.3f}, F = {fid:.4f}, "
          f"{len(checks)} invariants pass, 2 pi/k_pl = {2 * math.pi / (kz * pw.K0):.4f}")


if __name__ == "__main__":
    main()
