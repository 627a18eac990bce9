"""Reference STOI values for the synthetic pairs used by the C++ tests.

Runs the independent `pystoi` implementation on signals generated by the
same integer recipe as `stoi_pair` in tests/support/stoi_pairs.hpp and prints
the scores to paste into that header.

    pip install pystoi==0.4.1
    python3 tests/oracles/stoi_reference.py
"""

import numpy as np
from pystoi import stoi

MASK = (1 << 64) - 1
FS = 16000
N = 2 * FS


class Lcg:
    def __init__(self, seed):
        self.s = seed & MASK

    def uniform(self):
        self.s = (self.s * 6364136223846793005 + 1442695040888963407) & MASK
        return (self.s >> 11) / float(1 << 53)


def pair(i):
    f0 = 110.0 + 15.0 * i
    amp = 0.003 * 1.8**i
    rng = Lcg(1000 + i)
    clean = np.zeros(N)
    test = np.zeros(N)
    for n in range(N):
        t = n / FS
        env = max(0.0, np.sin(2 * np.pi * 1.5 * t)) ** 2
        v = 0.0
        for h in range(1, 26):
            v += np.sin(2 * np.pi * f0 * h * t + 0.7 * h) / np.sqrt(h)
        clean[n] = 0.1 * env * v
        test[n] = clean[n] + amp * (2.0 * rng.uniform() - 1.0)
    return clean, test


if __name__ == "__main__":
    for i in range(10):
        c, t = pair(i)
        print(f"{float(stoi(c, t, FS, extended=False))!r},")
