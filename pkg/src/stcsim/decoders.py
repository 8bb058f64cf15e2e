"""Exact maximum-likelihood decoders with search-effort instrumentation.

Four decoders share a common contract: given an EffectiveChannel, a received
stack y and a square QAM alphabet, return the cost-minimizing symbol vector
together with the achieved cost ||y - H x_hat||^2 and two effort counters.

Counting convention (normative for all reported numbers):

* ``nodes_visited`` increments once per candidate branch-metric evaluation
  during the tree walk - every iteration entered in an enumeration loop,
  including the one that triggers a pruning break, and every slicer decision
  at a final stage. Metric evaluations performed inside a sorting pass are
  not nodes.
* ``full_sorts`` counts full-alphabet child-ordering operations. The zigzag
  PAM lists of the final stages are not sorts.

With pruning disabled the fast golden decoder therefore visits exactly
M + M^2 + 4*M^2.5 nodes and the conventional four-level decoder
M + M^2 + 2*M^3.

Decoders are deterministic: candidate ties resolve by enumeration order
(stable sorts, zigzag lower-level-first, lexicographic scan). Each call owns
its workspace, so instances may decode concurrently; the two final-stage
real searches of the fast decoder are data-independent and could themselves
run in parallel without changing any result.
"""

import math
from dataclasses import dataclass

import numpy as np

from .codes import GOLDEN_VARIANTS, EffectiveChannel
from .constellation import QamAlphabet, slice_pam, sort_alphabet_by_metric, sorted_pam_list
from .matrixkit import frobenius_norm, qr_decompose

EXHAUSTIVE_CAP = 2 ** 24

# Column permutations that keep the two real diagonal blocks of R real; fast
# decoding is possible only for these.
FAST_PERMUTATIONS = (
    (0, 1, 2, 3),
    (0, 1, 3, 2),
    (1, 0, 2, 3),
    (1, 0, 3, 2),
    (2, 3, 0, 1),
    (2, 3, 1, 0),
    (3, 2, 0, 1),
    (3, 2, 1, 0),
)

IDENTITY_PERMUTATION = (0, 1, 2, 3)


@dataclass(frozen=True, eq=False)
class DecodeResult:
    """Decoder output: decision, achieved cost, and effort counters."""

    x_hat: np.ndarray
    indices: tuple
    cost: float
    nodes_visited: int
    full_sorts: int
    permutation_used: tuple


def check_fast_permutation(perm) -> bool:
    """True iff ``perm`` (zero-based column order) admits fast decoding."""
    return tuple(perm) in FAST_PERMUTATIONS


def _require_square_qam(alphabet: QamAlphabet) -> None:
    width = alphabet.pam.size
    if len(alphabet.symbols) != width * width:
        raise ValueError("fast path requires square QAM")
    grid = np.asarray(alphabet.pam.values)
    expected = np.tile(grid, width) + 1j * np.repeat(grid, width)
    if not np.array_equal(alphabet.symbols, expected):
        raise ValueError("fast path requires square QAM")


def _unpermute(perm, symbols, indices):
    x = np.empty(4, dtype=complex)
    idx = [0, 0, 0, 0]
    for pos, col in enumerate(perm):
        x[col] = symbols[pos]
        idx[col] = indices[pos]
    return x, tuple(idx)


def decode_exhaustive(
    eff: EffectiveChannel, y: np.ndarray, alphabet: QamAlphabet
) -> DecodeResult:
    """Scan all M^4 candidate vectors; the reference decoder for the others.

    Ties in cost resolve to the lexicographically smallest index tuple.
    """
    h = np.asarray(eff.h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    syms = alphabet.symbols
    m = len(syms)
    if m ** 4 > EXHAUSTIVE_CAP:
        raise ValueError("exhaustive search cap exceeded (M^4 > 2^24)")
    contrib = [np.outer(h[:, t], syms) for t in range(4)]
    tail = (
        contrib[1][:, :, None, None]
        + contrib[2][:, None, :, None]
        + contrib[3][:, None, None, :]
    )
    best_cost = math.inf
    best_idx = None
    for i1 in range(m):
        resid = (y - contrib[0][:, i1])[:, None, None, None] - tail
        costs = np.sum(resid.real ** 2 + resid.imag ** 2, axis=0)
        flat = int(np.argmin(costs))
        cost = float(costs.flat[flat])
        if cost < best_cost:
            best_cost = cost
            i2, rem = divmod(flat, m * m)
            i3, i4 = divmod(rem, m)
            best_idx = (i1, i2, i3, i4)
    x_hat = syms[list(best_idx)]
    return DecodeResult(
        x_hat=x_hat,
        indices=best_idx,
        cost=best_cost,
        nodes_visited=m ** 4,
        full_sorts=0,
        permutation_used=IDENTITY_PERMUTATION,
    )


def decode_fast_golden(
    eff: EffectiveChannel,
    y: np.ndarray,
    alphabet: QamAlphabet,
    perm=None,
    prune: bool = True,
) -> DecodeResult:
    """Fast exact-ML decoder for golden-variant effective channels.

    A two-level complex search over the trailing symbol pair (candidates
    pre-ordered by exactly two full-alphabet sorts, one per real component),
    followed by interference cancellation and two independent two-level real
    searches over the leading pair's real and imaginary parts. Correctness
    rests on the leading and trailing diagonal blocks of R being real for
    golden channels under the allowed column permutations.

    Args:
        perm: zero-based column order, one of FAST_PERMUTATIONS.
        prune: disable to force full enumeration (worst-case instrumentation).
    """
    if eff.variant not in GOLDEN_VARIANTS:
        raise ValueError("fast golden decoder requires a golden-variant effective channel")
    _require_square_qam(alphabet)
    if perm is None:
        perm = IDENTITY_PERMUTATION
    perm = tuple(perm)
    if not check_fast_permutation(perm):
        raise ValueError(f"permutation not fast-decodable: {perm!r}")

    factors = qr_decompose(np.asarray(eff.h, dtype=complex)[:, perm])
    r = factors.r
    z = factors.q.conj().T @ np.asarray(y, dtype=complex)
    r11 = float(r[0, 0].real)
    r12 = float(r[0, 1].real)
    r22 = float(r[1, 1].real)
    r33 = float(r[2, 2].real)
    r34 = float(r[2, 3].real)
    r44 = float(r[3, 3].real)
    r13 = complex(r[0, 2])
    r14 = complex(r[0, 3])
    r23 = complex(r[1, 2])
    r24 = complex(r[1, 3])
    z1 = complex(z[0])
    z2 = complex(z[1])
    z3 = complex(z[2])
    z4 = complex(z[3])

    # The trailing-pair branch metrics are functions of one real component
    # pair each, which the separable alphabet puts in bijection with the
    # complex symbols: Re(a) plays x3's component, Im(a) plays x4's.
    order_re, m_re = sort_alphabet_by_metric(
        alphabet,
        lambda a: (z3.real - r33 * a.real - r34 * a.imag) ** 2
        + (z4.real - r44 * a.imag) ** 2,
    )
    order_im, m_im = sort_alphabet_by_metric(
        alphabet,
        lambda a: (z3.imag - r33 * a.real - r34 * a.imag) ** 2
        + (z4.imag - r44 * a.imag) ** 2,
    )
    sym_re = alphabet.symbols.real.tolist()
    sym_im = alphabet.symbols.imag.tolist()
    ord_re = order_re.tolist()
    ord_im = order_im.tolist()
    m_re = m_re.tolist()
    m_im = m_im.tolist()

    pam = alphabet.pam
    width = pam.size
    m = len(sym_re)
    nodes = 0
    best = math.inf
    best_pick = None
    for k in range(m):
        nodes += 1
        tail_re = m_re[k]
        if prune and tail_re > best:
            break
        sk = ord_re[k]
        x3r = sym_re[sk]
        x4r = sym_im[sk]
        for l in range(m):
            nodes += 1
            tail = m_im[l] + tail_re
            if prune and tail > best:
                break
            sl = ord_im[l]
            x3 = complex(x3r, sym_re[sl])
            x4 = complex(x4r, sym_im[sl])
            v1 = z1 - r13 * x3 - r14 * x4
            v2 = z2 - r23 * x3 - r24 * x4

            best_re = math.inf
            pick_re = None
            v2c = v2.real
            v1c = v1.real
            for x2sym, x2idx in sorted_pam_list(v2c / r22, pam):
                nodes += 1
                t = (v2c - r22 * x2sym) ** 2
                if prune and t > best_re:
                    break
                u = v1c - r12 * x2sym
                x1sym, x1idx = slice_pam(u / r11, pam)
                nodes += 1
                t += (u - r11 * x1sym) ** 2
                if t < best_re:
                    best_re = t
                    pick_re = (x1sym, x1idx, x2sym, x2idx)

            best_im = math.inf
            pick_im = None
            v2c = v2.imag
            v1c = v1.imag
            for x2sym, x2idx in sorted_pam_list(v2c / r22, pam):
                nodes += 1
                t = (v2c - r22 * x2sym) ** 2
                if prune and t > best_im:
                    break
                u = v1c - r12 * x2sym
                x1sym, x1idx = slice_pam(u / r11, pam)
                nodes += 1
                t += (u - r11 * x1sym) ** 2
                if t < best_im:
                    best_im = t
                    pick_im = (x1sym, x1idx, x2sym, x2idx)

            total = best_re + best_im + tail
            if total < best:
                best = total
                best_pick = (pick_re, pick_im, sk, sl)

    (x1r, i1r, x2r, i2r), (x1i, i1i, x2i, i2i), sk, sl = best_pick
    symbols = (
        complex(x1r, x1i),
        complex(x2r, x2i),
        complex(sym_re[sk], sym_re[sl]),
        complex(sym_im[sk], sym_im[sl]),
    )
    indices = (
        alphabet.index_of(i1r, i1i),
        alphabet.index_of(i2r, i2i),
        alphabet.index_of(sk % width, sl % width),
        alphabet.index_of(sk // width, sl // width),
    )
    x_hat, out_idx = _unpermute(perm, symbols, indices)
    return DecodeResult(
        x_hat=x_hat,
        indices=out_idx,
        cost=best,
        nodes_visited=nodes,
        full_sorts=2,
        permutation_used=perm,
    )


def _slice_complex(value: complex, alphabet: QamAlphabet) -> tuple:
    """Nearest QAM symbol via one PAM slice per axis."""
    re_sym, re_idx = slice_pam(value.real, alphabet.pam)
    im_sym, im_idx = slice_pam(value.imag, alphabet.pam)
    return complex(re_sym, im_sym), alphabet.index_of(re_idx, im_idx)


def decode_sphere_conventional(
    eff: EffectiveChannel,
    y: np.ndarray,
    alphabet: QamAlphabet,
    ordering: str = "none",
    prune: bool = True,
) -> DecodeResult:
    """Four-level complex sphere decoder with child ordering at every level.

    Depth-first search assigning one complex symbol per level, children
    visited in ascending branch-metric order (a full-alphabet sort per
    expanded node at the first three levels), radius updates at leaves and
    pruning on partial sums. The final level needs no enumeration: the best
    leaf under a node comes from one complex slicer decision.

    Args:
        ordering: "none" for natural column order, "blast" for the
            weakest-last successive-selection permutation.
    """
    if ordering == "none":
        perm = IDENTITY_PERMUTATION
    elif ordering == "blast":
        perm = blast_ordering(eff)
    else:
        raise ValueError(f"unknown ordering mode: {ordering!r}")
    h = np.asarray(eff.h, dtype=complex)[:, perm]
    factors = qr_decompose(h)
    z = factors.q.conj().T @ np.asarray(y, dtype=complex)
    r = factors.r
    syms = alphabet.symbols
    rdiag = [float(r[i, i].real) for i in range(4)]

    nodes = 0
    sorts = 0
    best = math.inf
    best_syms = None
    best_idx = None
    chosen = [0j] * 4
    chosen_idx = [0] * 4

    def expand(level: int, acc: float) -> None:
        nonlocal nodes, sorts, best, best_syms, best_idx
        w = complex(z[level])
        for j in range(level + 1, 4):
            w -= complex(r[level, j]) * chosen[j]
        if level == 0:
            sym, idx = _slice_complex(w / rdiag[0], alphabet)
            nodes += 1
            total = acc + abs(w - rdiag[0] * sym) ** 2
            if total < best:
                chosen[0] = sym
                chosen_idx[0] = idx
                best = total
                best_syms = tuple(chosen)
                best_idx = tuple(chosen_idx)
            return
        diff = w - rdiag[level] * syms
        metrics = diff.real ** 2 + diff.imag ** 2
        order = np.argsort(metrics, kind="stable")
        sorts += 1
        metrics = metrics.tolist()
        for t in order.tolist():
            nodes += 1
            cum = acc + metrics[t]
            if prune and cum > best:
                break
            chosen[level] = complex(syms[t])
            chosen_idx[level] = t
            expand(level - 1, cum)

    expand(3, 0.0)
    x_hat, out_idx = _unpermute(perm, best_syms, best_idx)
    return DecodeResult(
        x_hat=x_hat,
        indices=out_idx,
        cost=best,
        nodes_visited=nodes,
        full_sorts=sorts,
        permutation_used=perm,
    )


ALAMOUTI_STRUCTURE_TOLERANCE = 1e-6


def decode_alamouti_fast(
    eff: EffectiveChannel,
    y: np.ndarray,
    alphabet: QamAlphabet,
    prune: bool = True,
) -> DecodeResult:
    """Fast exact-ML decoder for the overlaid Alamouti code, quasistatic only.

    Quasistatic fading makes columns 1-2 and 3-4 of the effective channel
    orthogonal, so R carries zeros at (1,2) and (3,4): the trailing-pair
    branch metrics separate per symbol and the leading pair falls to four
    independent PAM slices per candidate pair. Enumerates the M^2 trailing
    pairs with sorted-metric pruning.

    Raises:
        ValueError: when the zero structure is absent (time-varying channel);
            callers should fall back to decode_sphere_conventional.
    """
    if eff.variant != "overlaid-alamouti":
        raise ValueError("decoder requires an overlaid-alamouti effective channel")
    _require_square_qam(alphabet)
    h = np.asarray(eff.h, dtype=complex)
    factors = qr_decompose(h)
    r = factors.r
    scale = float(frobenius_norm(h))
    if (
        abs(complex(r[0, 1])) > ALAMOUTI_STRUCTURE_TOLERANCE * scale
        or abs(complex(r[2, 3])) > ALAMOUTI_STRUCTURE_TOLERANCE * scale
    ):
        raise ValueError("fast Alamouti path invalid for this channel")
    z = factors.q.conj().T @ np.asarray(y, dtype=complex)
    z1 = complex(z[0])
    z2 = complex(z[1])
    z3 = complex(z[2])
    z4 = complex(z[3])
    r11 = float(r[0, 0].real)
    r22 = float(r[1, 1].real)
    r33 = float(r[2, 2].real)
    r44 = float(r[3, 3].real)
    r13 = complex(r[0, 2])
    r14 = complex(r[0, 3])
    r23 = complex(r[1, 2])
    r24 = complex(r[1, 3])

    order4, m4 = sort_alphabet_by_metric(
        alphabet, lambda a: abs(z4 - r44 * a) ** 2
    )
    order3, m3 = sort_alphabet_by_metric(
        alphabet, lambda a: abs(z3 - r33 * a) ** 2
    )
    syms = alphabet.symbols.tolist()
    order4 = order4.tolist()
    order3 = order3.tolist()
    m4 = m4.tolist()
    m3 = m3.tolist()

    nodes = 0
    best = math.inf
    best_syms = None
    best_idx = None
    m = len(syms)
    for k in range(m):
        nodes += 1
        t4 = m4[k]
        if prune and t4 > best:
            break
        i4 = order4[k]
        x4 = syms[i4]
        for l in range(m):
            nodes += 1
            tail = t4 + m3[l]
            if prune and tail > best:
                break
            i3 = order3[l]
            x3 = syms[i3]
            v1 = z1 - r13 * x3 - r14 * x4
            v2 = z2 - r23 * x3 - r24 * x4
            x1, i1 = _slice_complex(v1 / r11, alphabet)
            nodes += 2
            x2, i2 = _slice_complex(v2 / r22, alphabet)
            nodes += 2
            total = tail + abs(v1 - r11 * x1) ** 2 + abs(v2 - r22 * x2) ** 2
            if total < best:
                best = total
                best_syms = (x1, x2, x3, x4)
                best_idx = (i1, i2, i3, i4)

    return DecodeResult(
        x_hat=np.array(best_syms),
        indices=best_idx,
        cost=best,
        nodes_visited=nodes,
        full_sorts=2,
        permutation_used=IDENTITY_PERMUTATION,
    )


def blast_ordering(h, allowed=None) -> tuple:
    """Detection-order permutation by successive weakest-last selection.

    Working from the detected-last position forward, each step picks the
    remaining column with the smallest norm orthogonal to the columns
    already placed (ties to the lowest index), which greedily maximizes the
    minimum post-cancellation gain. The returned tuple is a column order;
    its last entry is detected first.

    Args:
        h: 4x4 effective matrix or an EffectiveChannel.
        allowed: optional collection of permutations to restrict to; the
            selection criterion (largest minimum diagonal of R) is then
            evaluated over exactly those, which is how the fast decoder's
            eight admissible permutations are handled.
    """
    h = np.asarray(getattr(h, "h", h), dtype=complex)
    if allowed is not None:
        best_perm = None
        best_score = -math.inf
        for perm in allowed:
            perm = tuple(perm)
            score = float(
                np.min(np.diagonal(qr_decompose(h[:, perm]).r).real)
            )
            if score > best_score:
                best_score = score
                best_perm = perm
        return best_perm

    scale = float(frobenius_norm(h))
    remaining = [0, 1, 2, 3]
    basis = []
    perm = []
    for _ in range(4):
        best_col = None
        best_norm = math.inf
        for col in remaining:
            v = h[:, col]
            for q in basis:
                v = v - q * np.vdot(q, v)
            norm = float(np.linalg.norm(v))
            if norm < best_norm:
                best_norm = norm
                best_col = col
                best_resid = v
        if best_norm < 1e-12 * scale:
            raise ValueError("degenerate channel: column pivot below rank tolerance")
        perm.append(best_col)
        remaining.remove(best_col)
        basis.append(best_resid / best_norm)
    return tuple(perm)
