"""Reference values for the benchmark tables, with per-cell tolerances.

Each table entry records the published value, the comparison mode and its
tolerance, so reproduction is a checked test rather than a claim:

``iters``      iteration counts, +-15 % band (implementation-sensitive);
``cond``       condition numbers, tight relative band per table;
``eig``        eigenvalues, tight relative band;
``eig_small``  coefficient-ratio-scale eigenvalues, factor band
               (figure-derived geometry);
``zero``       exact zeros, absolute tolerance;
``count``      integer-exact coarse sizes;
``info``       reported alongside but not asserted.
"""

# Table 1: smallest four generalized eigenvalues (exact interface matrix) of
# the comb subdomains (ratio 1e6, H=1/2, H/h=16) and string subdomains
# (ratio 1e12, H/h=8).  Asserted: small-eigenvalue magnitudes within a
# factor of 3, first O(1) eigenvalue within 10 %; later entries reported.
TABLE1 = {
    "comb#1": [
        (2.14e-7, "eig_small", 3.0),
        (1.68e-6, "eig_small", 3.0),
        (0.0907, "cond", 0.10),
        (0.1572, "info", None),
    ],
    "comb#2": [
        (8.71e-7, "eig_small", 3.0),
        (0.0594, "cond", 0.10),
        (0.1572, "info", None),
        (0.2296, "info", None),
    ],
    "string#1": [
        (0.0, "zero", 1e-10),
        (0.2000, "cond", 0.10),
        (0.2727, "info", None),
        (0.3072, "info", None),
    ],
    "string#2": [
        (0.0, "zero", 1e-10),
        (1.24e-11, "eig_small", 3.0),
        (1.51e-11, "eig_small", 3.0),
        (0.3072, "cond", 0.10),
    ],
}

# Table 2: channel-subdomain spectra (lambda_1..3 and lambda_max) at the
# calibrated H/4 offset; 1 % relative (zeros absolute).
TABLE2 = {
    8: {"exact": (0.0, 0.1548, 0.2500, 1.0000), "diagonal": (0.0, 0.0719, 0.1250, 1.4724)},
    16: {"exact": (0.0, 0.0630, 0.1250, 1.0000), "diagonal": (0.0, 0.0302, 0.0595, 1.4707)},
    32: {"exact": (0.0, 0.0284, 0.0583, 1.0000), "diagonal": (0.0, 0.0139, 0.0282, 1.4706)},
}
TABLE2_RTOL = 0.01

# Table 3: MES on the channel mesh, (iterations, condition number) per
# (H/h, H).  Condition tolerance 5 % for H/h in {4, 8} and 10 % at 16;
# iterations +-15 %.
TABLE3 = {
    4: {2: (13, 7.00), 4: (23, 9.39), 8: (28, 10.88), 16: (28, 11.69)},
    8: {2: (21, 13.92), 4: (31, 16.31), 8: (34, 16.93), 16: (36, 17.09)},
    16: {2: (31, 29.96), 4: (56, 51.38), 8: (60, 60.25), 16: (60, 64.74)},
}
TABLE3_COND_RTOL = {4: 0.05, 8: 0.05, 16: 0.10}

# Table 4: inclusion-grid mesh, (iterations, condition number) per variant,
# H/h and H.  Condition numbers 2 %, iterations +-15 %, and the condition
# number must be H-independent to 3 significant digits.
TABLE4 = {
    "nosas_exact": {
        8: {2: (9, 4.76), 4: (10, 4.76), 8: (11, 4.76)},
        16: {2: (13, 9.74), 4: (16, 9.74), 8: (16, 9.74)},
        32: {2: (19, 20.53), 4: (25, 20.53), 8: (25, 20.53)},
    },
    "nosas_block_diagonal": {
        8: {2: (10, 4.76), 4: (12, 4.76), 8: (12, 4.76)},
        16: {2: (14, 9.74), 4: (17, 9.74), 8: (17, 9.74)},
        32: {2: (21, 20.53), 4: (26, 20.53), 8: (26, 20.53)},
    },
    "nosas_diagonal": {
        8: {2: (9, 6.47), 4: (11, 6.47), 8: (12, 6.47)},
        16: {2: (15, 13.46), 4: (18, 13.46), 8: (18, 13.46)},
        32: {2: (22, 28.06), 4: (27, 28.06), 8: (27, 28.06)},
    },
}
TABLE4_COND_RTOL = 0.02

# Table 5: dual-stripe mesh, diagonal variant at eta = 0.25 h/H:
# (iterations, condition number, coarse size) per H.  Coarse sizes are
# integer-exact, condition numbers 5 %.
TABLE5 = {4: (52, 71.93, 11), 8: (72, 68.25, 43), 16: (72, 66.71, 203)}
TABLE5_COND_RTOL = 0.05

# Table 6: added-channels mesh (H=1/4, H/h=16, diagonal variant):
# (iterations, condition number, coarse size) per c and channel count.
# Asserted: the no-channel coarse sizes exactly, and for >=1 channel the
# measured condition number decreases monotonically with c; the channel
# rows are positional stretch goals (the extra-channel placement is not
# specified numerically).
TABLE6 = {
    0.25: {0: (18, 13.46, 84), 1: (36, 177.58, 80), 2: (87, 155.53, 70),
           3: (95, 147.28, 64), 4: (102, 148.97, 58)},
    0.64: {0: (18, 13.46, 84), 1: (24, 14.42, 84), 2: (57, 53.28, 77),
           3: (63, 59.48, 73), 4: (67, 59.47, 69)},
    1.60: {0: (18, 13.46, 84), 1: (24, 14.42, 84), 2: (41, 25.32, 82),
           3: (39, 25.08, 84), 4: (41, 25.08, 84)},
}

# Table 7: permeability-slice rasters (diagonal variant, 33 subdomains in
# the published setup).  The dataset is not bundled; the runner ingests a
# user-supplied raster and reports (iterations, condition number, coarse
# size) per threshold without asserting against these reference rows.
TABLE7 = {
    "Kxx_06": {0.25: (94, 123.18, 26), 0.64: (75, 80.10, 35), 1.60: (53, 33.72, 66)},
    "Kxx_85": {0.25: (115, 187.32, 40), 0.64: (77, 84.88, 64), 1.60: (51, 37.31, 110)},
}

ITERS_RTOL = 0.15
