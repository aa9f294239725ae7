"""Regenerate the bundled demo dataset (demos/data/indices6.csv).

Six synthetic equity-index daily return series, 750 trading days. A
two-factor model (global + regional) with Student-t innovations and a
slow volatility cycle gives the columns fat tails and realistic
cross-dependence without using any proprietary market data. The file is
deterministic: rerunning this script reproduces it byte for byte.
"""

from pathlib import Path

import numpy as np

OUT = Path(__file__).parent / "data" / "indices6.csv"

NAMES = ["SPX", "NDX", "DAX", "FTSE", "NKY", "HSI"]
GLOBAL_LOAD = np.array([0.78, 0.74, 0.66, 0.62, 0.50, 0.46])
REGION = np.array([0, 0, 1, 1, 2, 2])          # Americas, Europe, Asia
REGION_LOAD = np.array([0.42, 0.38, 0.45, 0.40, 0.52, 0.48])
DAILY_VOL = np.array([0.010, 0.013, 0.012, 0.009, 0.012, 0.014])


def build(n: int = 750, seed: int = 20240315) -> np.ndarray:
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    # Slow common volatility cycle, calm-to-stressed roughly twice a year.
    cycle = 1.0 + 0.45 * np.sin(2 * np.pi * t / 260.0 + 0.7)

    world = rng.standard_t(6, size=n)
    regional = rng.standard_t(8, size=(n, 3))
    own = rng.standard_t(10, size=(n, 6))

    resid = np.sqrt(np.clip(1.0 - GLOBAL_LOAD**2 - REGION_LOAD**2, 0.05, None))
    shocks = (GLOBAL_LOAD * world[:, None]
              + REGION_LOAD * regional[:, REGION]
              + resid * own)
    returns = DAILY_VOL * cycle[:, None] * shocks
    return np.round(returns, 6)


def main():
    returns = build()
    OUT.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(NAMES)]
    lines += [",".join(f"{v:.6f}" for v in row) for row in returns]
    OUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"wrote {returns.shape[0]} x {returns.shape[1]} -> {OUT}")


if __name__ == "__main__":
    main()
