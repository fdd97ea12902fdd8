"""Independent reference implementations used only by the tests.

Everything here recomputes package quantities through a different route
(numpy elimination, itertools subset scans, scalar recursions), so agreement
with the package is a meaningful check rather than a tautology.
"""

import itertools

import numpy as np


def rank_gf2_numpy(mat) -> int:
    """GF(2) rank by plain numpy row reduction."""
    a = (np.array(mat, dtype=np.uint8) % 2).copy()
    if a.size == 0:
        return 0
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if a[i, c]:
                piv = i
                break
        if piv is None:
            continue
        a[[r, piv]] = a[[piv, r]]
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] ^= a[r]
        r += 1
        if r == rows:
            break
    return r


def row_span_size(mat) -> int:
    """Number of distinct vectors in the row span, by explicit enumeration."""
    rows = np.array(mat, dtype=np.uint8) % 2
    k = rows.shape[0]
    span = set()
    for mask in range(1 << k):
        v = np.zeros(rows.shape[1], dtype=np.uint8)
        for i in range(k):
            if (mask >> i) & 1:
                v ^= rows[i]
        span.add(tuple(v.tolist()))
    return len(span)


def all_codewords(gen_rows):
    """All (input tuple, codeword array) pairs via explicit matrix products."""
    g = np.array(gen_rows, dtype=np.uint8)
    k = g.shape[0]
    out = []
    for bits in itertools.product((0, 1), repeat=k):
        cw = (np.array(bits, dtype=np.uint8) @ g) % 2
        out.append((bits, cw))
    return out


def naive_weight2_pairs(gen_rows, socket_types, with_input_weight):
    counts = {}
    for bits, cw in all_codewords(gen_rows):
        support = np.flatnonzero(cw)
        if len(support) != 2 or cw.sum() != 2:
            continue
        i, j = int(support[0]), int(support[1])
        u = sum(bits)
        for a, b in ((i, j), (j, i)):
            key = (
                (socket_types[a], socket_types[b], u)
                if with_input_weight
                else (socket_types[a], socket_types[b])
            )
            counts[key] = counts.get(key, 0) + 1
    return counts


def naive_info_table(gen_rows, socket_types, n_edge_types, puncture=None):
    """Rank-sum table by brute-force selection scans (no shared iterator)."""
    g = np.array(gen_rows, dtype=np.uint8)
    k = g.shape[0]
    by_type = [
        [j for j in range(g.shape[1]) if socket_types[j] == l + 1]
        for l in range(n_edge_types)
    ]
    dims = [len(c) for c in by_type]
    identity = np.eye(k, dtype=np.uint8)
    if puncture is None:
        supp = []
    else:
        supp = [i for i, b in enumerate(puncture) if b]
    w = len(supp)
    shape = tuple(d + 1 for d in dims) + ((w + 1,) if puncture is not None else ())
    table = np.zeros(shape, dtype=np.int64)

    u_range = range(w + 1) if puncture is not None else (None,)
    for gtuple in itertools.product(*(range(d + 1) for d in dims)):
        for u in u_range:
            total = 0
            group_choices = [
                list(itertools.combinations(by_type[l], gtuple[l]))
                for l in range(n_edge_types)
            ]
            id_choices = (
                list(itertools.combinations(supp, u)) if u is not None else [tuple()]
            )
            for id_pick in id_choices:
                id_cols = identity[:, list(id_pick)] if id_pick else np.zeros((k, 0), np.uint8)
                for picks in itertools.product(*group_choices):
                    cols = [c for grp in picks for c in grp]
                    sel = g[:, cols] if cols else np.zeros((k, 0), np.uint8)
                    total += rank_gf2_numpy(np.hstack([sel, id_cols]))
            idx = gtuple + ((u,) if u is not None else ())
            table[idx] = total
    return table


def semantic_extrinsic_known_probability(
    gen_rows, socket_types, i_av, edge_type, eps=None, puncture=None
):
    """Extrinsic known probability straight from its operational definition.

    Average over the sockets j of the requested edge type of the probability
    that position j is determined by the span of the known functionals, when
    every other socket of type l is independently known with probability
    i_av[l-1] and (for VNs) every transmitted information bit survives the
    channel with probability 1 - eps.
    """
    g = np.array(gen_rows, dtype=np.uint8)
    k, q = g.shape
    supp = [i for i, b in enumerate(puncture) if b] if puncture is not None else []
    identity = np.eye(k, dtype=np.uint8)
    targets = [j for j in range(q) if socket_types[j] == edge_type]
    total = 0.0
    for j in targets:
        others = [i for i in range(q) if i != j]
        p_recover = 0.0
        for chan_mask in range(1 << len(supp)):
            p_chan = 1.0
            chan_cols = []
            for idx, pos in enumerate(supp):
                if (chan_mask >> idx) & 1:
                    p_chan *= 1.0 - eps
                    chan_cols.append(identity[:, pos])
                else:
                    p_chan *= eps
            for inc_mask in range(1 << len(others)):
                p_inc = 1.0
                known_cols = list(chan_cols)
                for idx, pos in enumerate(others):
                    p_known = i_av[socket_types[pos] - 1]
                    if (inc_mask >> idx) & 1:
                        p_inc *= p_known
                        known_cols.append(g[:, pos])
                    else:
                        p_inc *= 1.0 - p_known
                if p_chan * p_inc == 0.0:
                    continue
                if known_cols:
                    known = np.stack(known_cols, axis=1)
                    base = rank_gf2_numpy(known)
                    augmented = rank_gf2_numpy(np.hstack([known, g[:, [j]]]))
                else:
                    base = 0
                    augmented = rank_gf2_numpy(g[:, [j]])
                if augmented == base:
                    p_recover += p_chan * p_inc
        total += p_recover
    return total / len(targets)


def scalar_de_converges(eps, dv, dc, max_iters=20000, tol=1e-10):
    """Erasure-domain recursion for (dv, dc)-regular codes, mirroring the
    engine's convergence and stall rules."""
    y = eps
    if y <= tol:
        return True
    for _ in range(max_iters):
        y_next = eps * (1.0 - (1.0 - y) ** (dc - 1)) ** (dv - 1)
        if y_next <= tol:
            return True
        if abs(y_next - y) < 1e-15:
            return False
        y = y_next
    return False


def scalar_de_threshold(dv, dc, tol_eps=1e-6, max_iters=20000, tol=1e-10):
    lo, hi = 0.0, 1.0
    while hi - lo > 2 * tol_eps:
        mid = 0.5 * (lo + hi)
        if scalar_de_converges(mid, dv, dc, max_iters=max_iters, tol=tol):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def classic_peeling_history(code, erased):
    """Classical erasure message passing for repetition-VN / SPC-CN graphs.

    Returns (per-iteration copies of the VN-to-CN known flags, residual).
    Only valid when every VN is a repetition code with one transmitted bit
    and every CN a single parity check.
    """
    spec = code.spec
    msg_vc = np.zeros(code.n_edges, dtype=bool)
    msg_cv = np.zeros(code.n_edges, dtype=bool)

    chan = []
    offset = 0
    for i, vn in enumerate(spec.vn_types):
        assert vn.n_info_bits == 1 and vn.n_transmitted == 1
        cnt = code.vn_counts[i]
        chan.append(~erased[offset : offset + cnt])
        offset += cnt

    def vn_pass():
        for i, vn in enumerate(spec.vn_types):
            eids = code.vn_edges[i]
            inc = msg_cv[eids]
            sums = inc.sum(axis=1)
            out = chan[i][:, None] | ((sums[:, None] - inc.astype(np.int64)) > 0)
            msg_vc[eids] = out

    def cn_pass():
        for i, cn in enumerate(spec.cn_types):
            s = cn.n_sockets
            eids = code.cn_edges[i]
            inc = msg_vc[eids]
            sums = inc.sum(axis=1)
            out = (sums[:, None] - inc.astype(np.int64)) == (s - 1)
            msg_cv[eids] = out

    history = []
    vn_pass()
    history.append(msg_vc.copy())
    prev = (int(msg_vc.sum()), int(msg_cv.sum()))
    while True:
        cn_pass()
        vn_pass()
        history.append(msg_vc.copy())
        cur = (int(msg_vc.sum()), int(msg_cv.sum()))
        if cur == prev:
            break
        prev = cur

    residual = 0
    for i, vn in enumerate(spec.vn_types):
        eids = code.vn_edges[i]
        recovered = chan[i] | msg_cv[eids].any(axis=1)
        residual += int(np.sum(~chan[i] & ~recovered))
    return history, residual
