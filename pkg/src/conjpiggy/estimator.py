"""scikit-learn style wrapper around the functional API.

Rows of ``X`` are flattened ``k x r`` data arrays (row-major, so feature
``(s-1)*r + c-1`` is ``a_{s,c}``); rows of the transformed output are
flattened ``n x r`` stripes. Erased stripe entries are marked ``-1``.

>>> import numpy as np
>>> code = ConjugatePiggybackCode(n=6, k=4, L=2).fit()
>>> X = np.arange(8).reshape(1, 8)
>>> Y = code.transform(X)
>>> Y[:, :2 * 2] = -1          # lose node 1 and 2
>>> bool((code.inverse_transform(Y) == X).all())
True
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .code import encode, make_params
from .decode import decode_generic, decode_structured, verify_mds
from .repair import repair_node

__all__ = ["ConjugatePiggybackCode"]


class ConjugatePiggybackCode(TransformerMixin, BaseEstimator):
    """Encoder/decoder for a ``(n, k)`` conjugate-piggybacking code with
    ``L`` groups over GF(2^m).

    Parameters
    ----------
    n, k, L, m : int
        Code length, dimension, number of piggyback groups, field degree.
    verify : bool
        Run the exhaustive MDS search in :meth:`fit` and refuse non-MDS
        parameters.
    decoder : {"structured", "generic"}
        Decoder used by :meth:`inverse_transform`. The structured decoder
        falls back to the generic one on a singular column solve.
    """

    def __init__(self, n=14, k=10, L=3, m=8, verify=False, decoder="structured"):
        self.n = n
        self.k = k
        self.L = L
        self.m = m
        self.verify = verify
        self.decoder = decoder

    def fit(self, X=None, y=None):
        if self.decoder not in ("structured", "generic"):
            raise ValueError(f"decoder must be 'structured' or 'generic', got {self.decoder!r}")
        params = make_params(self.n, self.k, self.L, self.m, warn=False)
        if self.verify:
            report = verify_mds(params)
            if not report.is_mds:
                raise ValueError(f"parameters are not MDS over GF(2^{self.m}): {report.summary()}")
            self.mds_report_ = report
        self.params_ = params
        self.n_features_in_ = params.k * params.r
        if X is not None:
            self._check_X(X)
        return self

    def _check_X(self, X):
        X = check_array(X, dtype=np.int64)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(f"X has {X.shape[1]} features, expected {self.n_features_in_}")
        if X.min(initial=0) < 0 or X.max(initial=0) >= self.params_.field.order:
            raise ValueError(f"symbols must lie in [0, {self.params_.field.order})")
        return X

    def transform(self, X):
        """Encode each row into a flattened ``n x r`` stripe."""
        check_is_fitted(self, "params_")
        X = self._check_X(X)
        p = self.params_
        out = np.empty((X.shape[0], p.n * p.r), dtype=np.int64)
        for i, row in enumerate(X):
            out[i] = encode(p, row.reshape(p.k, p.r)).symbols.ravel()
        return out

    def inverse_transform(self, Y):
        """Decode flattened stripes; a node with any ``-1`` entry counts as erased."""
        check_is_fitted(self, "params_")
        p = self.params_
        Y = check_array(Y, dtype=np.int64)
        if Y.shape[1] != p.n * p.r:
            raise ValueError(f"Y has {Y.shape[1]} features, expected {p.n * p.r}")
        out = np.empty((Y.shape[0], p.k * p.r), dtype=np.int64)
        for i, row in enumerate(Y):
            rows = row.reshape(p.n, p.r)
            shares = {node: rows[node - 1] for node in range(1, p.n + 1) if (rows[node - 1] >= 0).all()}
            if len(shares) < p.k:
                raise ValueError(f"sample {i}: only {len(shares)} intact nodes, need {p.k}")
            if self.decoder == "generic":
                data = decode_generic(p, shares)
            else:
                data = decode_structured(p, shares, fallback=True)
            out[i] = np.asarray(data).ravel()
        return out

    def repair(self, stripe_row, node):
        """Rebuild ``node`` of one flattened stripe; returns a ``RepairReport``."""
        check_is_fitted(self, "params_")
        p = self.params_
        rows = np.asarray(stripe_row, dtype=np.int64).reshape(p.n, p.r)
        shares = {i: rows[i - 1] for i in range(1, p.n + 1) if i != node}
        return repair_node(p, node, shares)
