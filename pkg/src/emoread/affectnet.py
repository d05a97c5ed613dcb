"""Bi-LSTM with additive attention over affect-enriched word vectors.

The forward pass produces per-token hidden states (forward/backward halves
concatenated), additive attention scores against the document summary (the
hidden state at the final position), and the attention-weighted document
vector. The backward pass is fully analytic and is checked against central
finite differences in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError
from .params import uniform_init

# Gate slices in the stacked (4H, .) LSTM matrices: input, forget, output, candidate.
_GATES = ("i", "f", "o", "g")


def init_affectnet_params(input_dim: int, hidden_size: int = 100,
                          attn_dim: int | None = None, seed: int = 0
                          ) -> dict[str, np.ndarray]:
    """Seeded uniform(-1/sqrt(fan_in), ..) initialization of all tensors."""
    if input_dim < 1 or hidden_size < 1:
        raise DataError("init_affectnet_params: dims must be positive")
    rng = np.random.default_rng(seed)
    h = hidden_size
    a = attn_dim if attn_dim is not None else 2 * h
    params: dict[str, np.ndarray] = {}
    for direction in ("fwd", "bwd"):
        params[f"lstm_{direction}/W"] = uniform_init((4 * h, input_dim), input_dim, rng)
        params[f"lstm_{direction}/U"] = uniform_init((4 * h, h), h, rng)
        params[f"lstm_{direction}/b"] = np.zeros(4 * h)
    params["attn/W_h"] = uniform_init((a, 2 * h), 2 * h, rng)
    params["attn/W_z"] = uniform_init((a, 2 * h), 2 * h, rng)
    params["attn/v"] = uniform_init((a,), a, rng)
    return params


def hidden_size_of(params: dict[str, np.ndarray]) -> int:
    return params["lstm_fwd/U"].shape[1]


@dataclass
class LstmCache:
    x: np.ndarray
    gates: dict[str, np.ndarray]  # each (n, H) post-activation
    c: np.ndarray                 # (n, H) cell states
    tanh_c: np.ndarray            # (n, H)
    h: np.ndarray                 # (n, H)


def _lstm_direction(x: np.ndarray, W: np.ndarray, U: np.ndarray, b: np.ndarray
                    ) -> LstmCache:
    """Single-direction LSTM from zero initial state; gate order i, f, o, g."""
    n, _ = x.shape
    hsz = U.shape[1]
    pre_x = x @ W.T + b  # (n, 4H), input contributions hoisted out of the loop
    gates = {name: np.zeros((n, hsz)) for name in _GATES}
    c = np.zeros((n, hsz))
    tanh_c = np.zeros((n, hsz))
    h = np.zeros((n, hsz))
    h_prev = np.zeros(hsz)
    c_prev = np.zeros(hsz)
    for t in range(n):
        z = pre_x[t] + U @ h_prev
        i = _sigmoid(z[0 * hsz:1 * hsz])
        f = _sigmoid(z[1 * hsz:2 * hsz])
        o = _sigmoid(z[2 * hsz:3 * hsz])
        g = np.tanh(z[3 * hsz:4 * hsz])
        c_t = f * c_prev + i * g
        tc = np.tanh(c_t)
        h_t = o * tc
        gates["i"][t], gates["f"][t], gates["o"][t], gates["g"][t] = i, f, o, g
        c[t], tanh_c[t], h[t] = c_t, tc, h_t
        h_prev, c_prev = h_t, c_t
    return LstmCache(x=x, gates=gates, c=c, tanh_c=tanh_c, h=h)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _lstm_direction_backward(dh_seq: np.ndarray, cache: LstmCache,
                             W: np.ndarray, U: np.ndarray
                             ) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Backprop through time for one direction; returns grads and d(input)."""
    n, hsz = cache.h.shape
    dW = np.zeros_like(W)
    dU = np.zeros_like(U)
    db = np.zeros(4 * hsz)
    dx = np.zeros_like(cache.x)
    dh_next = np.zeros(hsz)
    dc_next = np.zeros(hsz)
    g = cache.gates
    for t in range(n - 1, -1, -1):
        dh = dh_seq[t] + dh_next
        c_prev = cache.c[t - 1] if t > 0 else np.zeros(hsz)
        h_prev = cache.h[t - 1] if t > 0 else np.zeros(hsz)
        do = dh * cache.tanh_c[t]
        dc = dh * g["o"][t] * (1.0 - cache.tanh_c[t] ** 2) + dc_next
        di = dc * g["g"][t]
        dg = dc * g["i"][t]
        df = dc * c_prev
        dz = np.concatenate([
            di * g["i"][t] * (1.0 - g["i"][t]),
            df * g["f"][t] * (1.0 - g["f"][t]),
            do * g["o"][t] * (1.0 - g["o"][t]),
            dg * (1.0 - g["g"][t] ** 2),
        ])
        dW += np.outer(dz, cache.x[t])
        dU += np.outer(dz, h_prev)
        db += dz
        dx[t] = W.T @ dz
        dh_next = U.T @ dz
        dc_next = dc * g["f"][t]
    return {"W": dW, "U": dU, "b": db}, dx


@dataclass
class BilstmCache:
    fwd: LstmCache
    bwd: LstmCache
    n: int


def bilstm_forward(x: np.ndarray, params: dict[str, np.ndarray]
                   ) -> tuple[np.ndarray, BilstmCache]:
    """Hidden states (n, 2H): forward half then backward half per position."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 1:
        raise DataError(f"bilstm_forward: expected (n, d) with n >= 1, got {x.shape}")
    if x.shape[1] != params["lstm_fwd/W"].shape[1]:
        raise DataError(f"bilstm_forward: input dim {x.shape[1]} does not match "
                        f"params dim {params['lstm_fwd/W'].shape[1]}")
    fwd = _lstm_direction(x, params["lstm_fwd/W"], params["lstm_fwd/U"], params["lstm_fwd/b"])
    bwd_rev = _lstm_direction(x[::-1], params["lstm_bwd/W"], params["lstm_bwd/U"],
                              params["lstm_bwd/b"])
    hidden = np.concatenate([fwd.h, bwd_rev.h[::-1]], axis=1)
    if not np.all(np.isfinite(hidden)):
        bad = int(np.argwhere(~np.isfinite(hidden).all(axis=1))[0][0])
        raise NumericalError(f"bilstm_forward: non-finite hidden state at step {bad}")
    return hidden, BilstmCache(fwd=fwd, bwd=bwd_rev, n=x.shape[0])


def bilstm_backward(dhidden: np.ndarray, cache: BilstmCache,
                    params: dict[str, np.ndarray]
                    ) -> tuple[dict[str, np.ndarray], np.ndarray]:
    hsz = params["lstm_fwd/U"].shape[1]
    grads_f, dx_f = _lstm_direction_backward(
        dhidden[:, :hsz], cache.fwd, params["lstm_fwd/W"], params["lstm_fwd/U"])
    grads_b, dx_b_rev = _lstm_direction_backward(
        dhidden[:, hsz:][::-1], cache.bwd, params["lstm_bwd/W"], params["lstm_bwd/U"])
    grads = {f"lstm_fwd/{k}": v for k, v in grads_f.items()}
    grads.update({f"lstm_bwd/{k}": v for k, v in grads_b.items()})
    return grads, dx_f + dx_b_rev[::-1]


@dataclass
class AttentionOutput:
    """Attention weights, the per-token states they act on, and the document vector."""

    weights: np.ndarray        # (n,), non-negative, sums to 1
    hidden_states: np.ndarray  # (n, 2H)
    doc_vector: np.ndarray     # (2H,)

    @property
    def weighted_states(self) -> np.ndarray:
        """The row of weighted hidden states, kept for behavior analysis."""
        return self.weights[:, None] * self.hidden_states


@dataclass
class AttentionCache:
    hidden: np.ndarray
    z: np.ndarray
    pre_tanh: np.ndarray
    t: np.ndarray
    alpha: np.ndarray
    mask: np.ndarray | None
    last_real: int


def attention(hidden: np.ndarray, params: dict[str, np.ndarray],
              mask: np.ndarray | None = None
              ) -> tuple[AttentionOutput, AttentionCache]:
    """Additive attention against the final-position summary vector.

    ``mask`` (boolean, True = real token) removes padded positions from the
    softmax; the summary is the hidden state at the last real position.
    """
    hidden = np.asarray(hidden, dtype=np.float64)
    n = hidden.shape[0]
    if n < 1:
        raise DataError("attention: empty hidden-state sequence")
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (n,):
            raise DataError(f"attention: mask shape {mask.shape} does not match n={n}")
        if not mask.any():
            raise DataError("attention: mask removes every position")
        last_real = int(np.max(np.nonzero(mask)[0]))
    else:
        last_real = n - 1
    z = hidden[last_real]
    pre = hidden @ params["attn/W_h"].T + z @ params["attn/W_z"].T  # (n, a)
    t = np.tanh(pre)
    scores = t @ params["attn/v"]
    if mask is not None:
        scores = np.where(mask, scores, -np.inf)
    scores_max = np.max(scores)
    exp = np.exp(scores - scores_max)
    alpha = exp / exp.sum()
    doc = alpha @ hidden
    if not np.all(np.isfinite(doc)):
        raise NumericalError("attention: non-finite document vector")
    out = AttentionOutput(weights=alpha, hidden_states=hidden, doc_vector=doc)
    cache = AttentionCache(hidden=hidden, z=z, pre_tanh=pre, t=t, alpha=alpha,
                           mask=mask, last_real=last_real)
    return out, cache


def attention_backward(ddoc: np.ndarray, dalpha_extra: np.ndarray | None,
                       cache: AttentionCache, params: dict[str, np.ndarray]
                       ) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients wrt attention parameters and the hidden-state sequence.

    ``dalpha_extra`` allows callers to inject an additional upstream gradient
    on the weights themselves (unused by training, handy for analysis).
    """
    hidden, alpha, t = cache.hidden, cache.alpha, cache.t
    dalpha = hidden @ ddoc
    if dalpha_extra is not None:
        dalpha = dalpha + dalpha_extra
    dhidden = np.outer(alpha, ddoc)
    # softmax backward: ds = alpha * (dalpha - sum(dalpha * alpha))
    dscores = alpha * (dalpha - float(dalpha @ alpha))
    if cache.mask is not None:
        dscores = np.where(cache.mask, dscores, 0.0)
    dv = t.T @ dscores
    dpre = np.outer(dscores, params["attn/v"]) * (1.0 - t ** 2)  # (n, a)
    dW_h = dpre.T @ hidden
    dW_z = np.outer(dpre.sum(axis=0), cache.z)
    dhidden += dpre @ params["attn/W_h"]
    dz = dpre.sum(axis=0) @ params["attn/W_z"]
    dhidden[cache.last_real] += dz
    grads = {"attn/W_h": dW_h, "attn/W_z": dW_z, "attn/v": dv}
    return grads, dhidden


@dataclass
class AffectForwardCache:
    bilstm: BilstmCache
    attn: AttentionCache
    dropout_mask: np.ndarray | None
    n_tokens: int


def affect_forward(x: np.ndarray, params: dict[str, np.ndarray],
                   dropout: float = 0.0, rng: np.random.Generator | None = None,
                   mask: np.ndarray | None = None
                   ) -> tuple[AttentionOutput, AffectForwardCache]:
    """Bi-LSTM then (optionally dropped-out) hidden states into attention.

    Inverted dropout between the Bi-LSTM and attention is applied only when
    ``dropout > 0`` and an ``rng`` is supplied (training); evaluation and
    gradient checks run with dropout disabled.
    """
    hidden, bcache = bilstm_forward(x, params)
    drop_mask = None
    if dropout > 0.0 and rng is not None:
        drop_mask = (rng.random(hidden.shape) >= dropout) / (1.0 - dropout)
        hidden = hidden * drop_mask
    out, acache = attention(hidden, params, mask=mask)
    return out, AffectForwardCache(bilstm=bcache, attn=acache,
                                   dropout_mask=drop_mask, n_tokens=x.shape[0])


def affect_backward(ddoc: np.ndarray, cache: AffectForwardCache,
                    params: dict[str, np.ndarray]
                    ) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients wrt every parameter and the input embedding sequence."""
    ddoc = np.asarray(ddoc, dtype=np.float64)
    if ddoc.shape != cache.attn.hidden.shape[1:]:
        raise DataError("affect_backward: upstream gradient does not match cache")
    grads, dhidden = attention_backward(ddoc, None, cache.attn, params)
    if cache.dropout_mask is not None:
        dhidden = dhidden * cache.dropout_mask
    lstm_grads, dx = bilstm_backward(dhidden, cache.bilstm, params)
    grads.update(lstm_grads)
    return grads, dx
