"""Regenerate crates/core/data/raman_silica.csv.

The effective spontaneous Raman cross-section is modelled as

    rho(dnu) = K * g(|dnu|) * (n_th(|dnu|) + 1)   Stokes (quantum redder than pump)
    rho(dnu) = K * g(|dnu|) * n_th(|dnu|)         anti-Stokes

with g the normalized fused-silica Raman gain shape (coarse digitization,
peak at 13.2 THz), n_th the Bose-Einstein occupation at 300 K and
K = 4e-9 / (nm km).  Replace the output with measured data for
quantitative work.
"""

import math

H = 6.62607015e-34
KB = 1.380649e-23
C = 2.99792458e8
TEMP = 300.0
K_SCALE = 4.0e-9

# (detuning THz, normalized gain)
GAIN = [
    (0.0, 0.0), (1.0, 0.07), (2.0, 0.15), (3.0, 0.23), (4.0, 0.30),
    (5.0, 0.38), (6.0, 0.45), (7.0, 0.52), (8.0, 0.60), (9.0, 0.68),
    (10.0, 0.76), (11.0, 0.85), (12.0, 0.93), (13.2, 1.00), (14.0, 0.95),
    (15.0, 0.75), (16.0, 0.55), (17.0, 0.45), (18.0, 0.42), (19.0, 0.40),
    (20.0, 0.35), (22.0, 0.25), (24.0, 0.28), (26.0, 0.12), (28.0, 0.06),
    (30.0, 0.04), (32.0, 0.03), (35.0, 0.015), (40.0, 0.005), (45.0, 0.0),
]


def gain(dnu_thz):
    if dnu_thz >= GAIN[-1][0]:
        return 0.0
    for (x0, y0), (x1, y1) in zip(GAIN, GAIN[1:]):
        if x0 <= dnu_thz <= x1:
            return y0 + (y1 - y0) * (dnu_thz - x0) / (x1 - x0)
    return 0.0


def occupation(dnu_thz):
    x = H * dnu_thz * 1e12 / (KB * TEMP)
    return 1.0 / math.expm1(x)


def rho(classical_nm, quantum_nm):
    dnu = (C / (classical_nm * 1e-9) - C / (quantum_nm * 1e-9)) / 1e12
    if dnu == 0.0:
        # occupation diverges while gain -> 0; use the limit K * g'(0) * kT/h
        return K_SCALE * (GAIN[1][1] / GAIN[1][0]) * KB * TEMP / H / 1e12
    n = occupation(abs(dnu))
    factor = n + 1.0 if dnu > 0 else n
    return K_SCALE * gain(abs(dnu)) * factor


def main():
    classical = [1515.0 + i for i in range(56)]
    quantum = [1300.0, 1310.0, 1320.0] + sorted(
        [1515.0 + i for i in range(56)] + [1536.61, 1537.40]
    )
    lines = [
        "# Effective spontaneous Raman cross-section of standard single-mode fiber.",
        "# Model-derived (not measured): normalized fused-silica Raman gain shape,",
        "# Bose-Einstein thermal factor at 300 K (n+1 Stokes, n anti-Stokes),",
        "# scale 4e-9 /(nm km).  Generated by scripts/gen_raman_table.py.",
        "# Replace with measured cross-sections for quantitative work.",
        "classical_wavelength_nm,quantum_wavelength_nm,rho_per_nm_per_km",
    ]
    for q in quantum:
        for cl in classical:
            lines.append(f"{cl:.2f},{q:.2f},{rho(cl, q):.6e}")
    with open("crates/core/data/raman_silica.csv", "w") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main()
