"""Per-configuration scalars accumulated by the ensemble kernels.

The order of :data:`FEATURES` is the column order of every accumulator array
and is shared by the compiled kernel and the numpy fallback.
"""

AXES = "xyz"

FEATURES = (
    "m1x", "m1y", "m1z", "m2x", "m2y", "m2z",
    "m1_len", "m2_len", "m1_len_sq", "m2_len_sq",
    "m1_xy", "m2_xy",
    *(f"t_{i}{j}" for i in AXES for j in AXES),
    *(f"n_{i}{j}" for i in AXES for j in AXES),
    "cos_big_phi", "cos_az", "sin_az",
    "kinetic", "qpot", "m1_dot_m2", "m_sum_sq", "len_diff",
    "cos_polar1", "m1z_sq", "m1x_sq",
    "e1_dot_m1", "e2_dot_m2", "mz_sum",
)
N_FEATURES = len(FEATURES)
INDEX = {name: k for k, name in enumerate(FEATURES)}

# user-facing observable names
ALIASES = {
    "m_len": "m1_len",
    "m_len_sq": "m1_len_sq",
    "mxy": "m1_xy",
    "m1x_m2x": "t_xx",
    "m1y_m2x": "t_yx",
    "m1z_m2z": "t_zz",
    "norm_prod_z": "n_zz",
    "norm_prod_x": "n_xx",
    "cos_polar": "cos_polar1",
    "m1z_sq": "m1z_sq",
}

# monitor columns, all reduced with max except MON_MIN_LEN (min)
MONITORS = ("e1_residual", "e2_residual", "mz_sum_residual", "min_len", "len_diff_abs")
MON_MIN_LEN = 3

# per-chunk totals
TOTALS = ("weight", "weight_sq", "points", "excluded")


def feature_index(name: str) -> int:
    name = ALIASES.get(name, name)
    try:
        return INDEX[name]
    except KeyError:
        raise KeyError(f"unknown observable {name!r}") from None
