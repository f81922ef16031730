"""Smoke test for the sudlerlab extension module.

Build first, e.g. `maturin develop -m crates/py/Cargo.toml --features extension-module`.
"""
import math

import sudlerlab as sl


def main():
    phi = sl.Alpha("golden")
    assert phi.partial_quotients(5) == [1, 1, 1, 1, 1]
    conv = phi.convergents(10)
    assert conv[-1][2] == 89, conv[-1]
    assert abs(phi.frac() - (math.sqrt(5) - 1) / 2) < 1e-15

    logp = sl.prefix_stream(phi, 1000)
    assert len(logp) == 1000
    # log P_1 = log|2 sin(pi alpha)|
    assert abs(logp[0] - math.log(2 * math.sin(math.pi * phi.frac()))) < 1e-12

    direct = sum(math.log(abs(2 * math.sin(math.pi * n * phi.frac()))) for n in range(1, 101))
    assert abs(logp[99] - direct) < 1e-9

    mean, var, lo, hi, argmin, argmax = sl.moments(logp)
    assert lo <= mean <= hi and var > 0

    v = sl.v_constant(1e-8)
    assert abs(v - 0.16153) < 1e-4, v

    assert abs(sl.levy_cdf(1.0) - math.erfc(1 / math.sqrt(2))) < 1e-14

    try:
        sl.Alpha("sqrt:4")
    except ValueError as e:
        assert "perfect square" in str(e)
    else:
        raise AssertionError("sqrt:4 accepted")

    print("sudlerlab", sl.__version__, "smoke test OK")


if __name__ == "__main__":
    main()
