"""Independent high-precision oracle for the frozen values in the test suite.

Uses mpmath only (no package code). Run ``python3 tests/oracles/derive.py``
to regenerate; the printed literals are pasted into ``tests/oracle_values.py``.
"""

import mpmath as mp

mp.mp.dps = 40


def c(z):
    z = mp.mpc(z)
    return complex(float(z.real), float(z.imag))


def main():
    out = {}

    # K = -A_1 exp(-s tau_1) with A_1 = I, tau_1 = 1, s = i pi
    out["delay_unit_entry"] = c(-mp.exp(-mp.mpc(0, mp.pi) * 1))

    # scalar K(s) = s - a at s = 2a, a = 3
    out["scalar_solution"] = float(1 / (2 * mp.mpf(3) - 3))

    # H(s) = 1 / (s - a), a = -2, f = 0.25 Hz
    s = 2 * mp.pi * mp.mpf("0.25") * mp.j
    out["scalar_transfer"] = c(1 / (s - (-2)))

    # two-state delay system, entries fixed in tests/test_system.py
    # K(s) = s (E0 + E1 e^{-s tau}) - (A0 + A1 e^{-s tau}), tau = 0.5, f = 0.3
    E0 = mp.matrix([[1, 0], [0, 2]])
    E1 = mp.matrix([[0, "0.1"], [0, 0]])
    A0 = mp.matrix([[-1, 3], [-3, -1]])
    A1 = mp.matrix([["0.2", 0], [0, "-0.3"]])
    B = mp.matrix([[1], [1]])
    C = mp.matrix([[1, -1]])
    s = 2 * mp.pi * mp.mpf("0.3") * mp.j
    e = mp.exp(-s * mp.mpf("0.5"))
    K = s * (E0 + E1 * e) - (A0 + A1 * e)
    H = C * mp.lu_solve(K, B)
    out["two_state_transfer"] = c(H[0, 0])

    # IMQ kernel at distance 1/30 with a = 30
    out["imq_half"] = float(1 / (1 + (30 * (mp.mpf(1) / 30)) ** 2))

    # two centers at 0 and 0.05, both values 1, a = 30: w = 1 / (1 + phi12)
    phi12 = 1 / (1 + (30 * mp.mpf("0.05")) ** 2)
    out["rbf_pair_weight"] = float(1 / (1 + phi12))

    # surrogate value at the midpoint 0.025 of that pair
    phim = 1 / (1 + (30 * mp.mpf("0.025")) ** 2)
    out["rbf_pair_midpoint"] = float(2 * phim / (1 + phi12))

    for k, v in out.items():
        print(f"{k.upper()} = {v!r}")


if __name__ == "__main__":
    main()
