"""Small numerical helpers shared by detection and precoding."""

import numpy as np


def full_column_rank(H: np.ndarray) -> bool:
    """Rank test on column-normalised ``H``.

    Normalising first keeps users with very weak channels from being
    mistaken for linear dependence.
    """
    m, k = H.shape
    if k == 0:
        return True
    if k > m:
        return False
    norms = np.linalg.norm(H, axis=0)
    if np.any(norms == 0):
        return False
    s = np.linalg.svd(H / norms, compute_uv=False)
    return bool(s[-1] > s[0] * max(m, k) * np.finfo(float).eps)
