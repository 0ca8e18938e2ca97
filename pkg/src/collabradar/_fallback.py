"""Pure numpy implementations of the hot kernels.

Signatures mirror the compiled ``_kernels`` module exactly.
"""

import numpy as np


def bilinear_rows(a, m, b):
    """c[t] = a[t]^H m b[t] for row-stacked vectors ``a``, ``b``."""
    return np.einsum("td,td->t", a.conj(), b @ m.T)


def grouped_auc(group, label, weight):
    """Weighted AUC of scores pre-sorted ascending.

    ``group`` holds nondecreasing tie-group ids, ``label`` is 1 for positives,
    ``weight`` is the per-sample multiplicity. Ties count one half.
    """
    ng = int(group[-1]) + 1 if len(group) else 0
    pos = label.astype(bool)
    wpos = np.bincount(group[pos], weights=weight[pos], minlength=ng)
    wneg = np.bincount(group[~pos], weights=weight[~pos], minlength=ng)
    tot_pos = wpos.sum()
    tot_neg = wneg.sum()
    if tot_pos == 0 or tot_neg == 0:
        return np.nan
    below = np.cumsum(wneg) - wneg
    return float(np.dot(wpos, below + 0.5 * wneg) / (tot_pos * tot_neg))


def bootstrap_auc(group, label, counts):
    """AUC for every row of a (B, n) resampling-count matrix."""
    out = np.empty(counts.shape[0])
    for k in range(counts.shape[0]):
        out[k] = grouped_auc(group, label, counts[k].astype(np.float64))
    return out
