"""Finite-length erasure decoding of codes sampled from an ensemble.

A code instance is one uniform interleaver per edge type matching VN sockets
to CN sockets of the same type.  Decoding iterates exact local erasure
decoding at every node: a quantity is recovered as soon as its coordinate
functional lies in the span of the known ones, which is the decoder the
asymptotic EXIT analysis models.  Message flags only ever turn on, so the
iteration stops at the first pass that adds nothing.

Local decoding maps are memoized per component type and keyed by the known
input pattern, which keeps the per-pass work to table lookups and lets
passes run vectorized over all nodes of a type at once.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .ensemble import EnsembleSpec
from .errors import ValidationError

_RNG_NAME = "philox"


def _philox(seed: int, stream: int) -> np.random.Generator:
    # 128-bit key: the user seed in one word, a derived stream id in the other.
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _trial_rng(seed: int, eps_index: int, trial_index: int) -> np.random.Generator:
    if not 0 <= trial_index < 1 << 32 or not 0 <= eps_index < 1 << 16:
        raise ValidationError("trial or grid index out of range for stream derivation")
    return _philox(seed, (1 << 63) | (eps_index << 32) | trial_index)


@dataclass
class SampledCode:
    """One Tanner-graph realization at a given scale."""

    spec: EnsembleSpec
    scale: int
    n_edges: int
    edge_type0: np.ndarray
    vn_counts: tuple[int, ...]
    cn_counts: tuple[int, ...]
    vn_edges: list[np.ndarray]
    cn_edges: list[np.ndarray]
    n_transmitted: int

    @property
    def n_vn(self) -> int:
        return sum(self.vn_counts)

    @property
    def n_cn(self) -> int:
        return sum(self.cn_counts)


def _socket_blocks(counts_per_type, n_edge_types, socket_type_vectors):
    """Per edge type, the (type index, position, node count) blocks in slot order."""
    blocks: list[list[tuple[int, int, int]]] = [[] for _ in range(n_edge_types)]
    for ti, st in enumerate(socket_type_vectors):
        for pos, l in enumerate(st):
            blocks[l - 1].append((ti, pos, counts_per_type[ti]))
    return blocks


def sample_code(spec: EnsembleSpec, scale: int, seed: int) -> SampledCode:
    """Draw one code: deterministic in (spec, scale, seed)."""
    return _sample_code(spec, scale, _philox(seed, 0))


def _sample_code(spec: EnsembleSpec, scale: int, rng: np.random.Generator) -> SampledCode:
    if scale < 1:
        raise ValidationError("scale must be a positive integer")
    n_e = spec.n_edge_types
    vn_counts = tuple(vn.count * scale for vn in spec.vn_types)
    cn_counts = tuple(cn.count * scale for cn in spec.cn_types)

    vn_blocks = _socket_blocks(vn_counts, n_e, [vn.socket_types for vn in spec.vn_types])
    cn_blocks = _socket_blocks(cn_counts, n_e, [cn.socket_types for cn in spec.cn_types])

    edge_offsets = []
    total = 0
    for l0 in range(n_e):
        edge_offsets.append(total)
        total += spec.edge_counts[l0] * scale
    n_edges = total

    edge_type0 = np.empty(n_edges, dtype=np.int64)
    for l0 in range(n_e):
        lo = edge_offsets[l0]
        hi = lo + spec.edge_counts[l0] * scale
        edge_type0[lo:hi] = l0

    vn_edges = [
        np.empty((vn_counts[i], vn.n_sockets), dtype=np.int64)
        for i, vn in enumerate(spec.vn_types)
    ]
    cn_edges = [
        np.empty((cn_counts[i], cn.n_sockets), dtype=np.int64)
        for i, cn in enumerate(spec.cn_types)
    ]

    for l0 in range(n_e):
        count_l = spec.edge_counts[l0] * scale
        perm = rng.permutation(count_l)
        inv = np.empty(count_l, dtype=np.int64)
        inv[perm] = np.arange(count_l)
        # VN slot k of this type carries edge (offset + k); CN slot j carries
        # the edge whose VN slot maps to it under the interleaver.
        base = 0
        for ti, pos, cnt in vn_blocks[l0]:
            vn_edges[ti][:, pos] = edge_offsets[l0] + base + np.arange(cnt)
            base += cnt
        base = 0
        for ti, pos, cnt in cn_blocks[l0]:
            cn_edges[ti][:, pos] = edge_offsets[l0] + inv[base + np.arange(cnt)]
            base += cnt

    n_tx = sum(c * vn.n_transmitted for c, vn in zip(vn_counts, spec.vn_types))
    return SampledCode(
        spec=spec,
        scale=scale,
        n_edges=n_edges,
        edge_type0=edge_type0,
        vn_counts=vn_counts,
        cn_counts=cn_counts,
        vn_edges=vn_edges,
        cn_edges=cn_edges,
        n_transmitted=n_tx,
    )


class _LocalMaps:
    """Memoized exact local erasure decoding for one component type.

    Key layout: (channel-known mask << n_sockets) | incoming-known mask.
    Values: extrinsic outgoing-known mask and (non-extrinsic) recovered
    information-bit mask.
    """

    def __init__(self, column_bits: list[int], n_rows: int, chan_positions: tuple[int, ...]):
        self.cols = column_bits
        self.q = len(column_bits)
        self.kb = len(chan_positions)
        self.n_rows = n_rows
        self.chan_positions = chan_positions
        width = self.q + self.kb
        # array tables cap at 2 x 8 MiB; wider types fall back to a dict memo
        self._array_backed = width <= 20
        if self._array_backed:
            self.out_table = np.full(1 << width, -1, dtype=np.int64)
            self.info_table = np.full(1 << width, -1, dtype=np.int64)
        else:
            self._dict: dict[int, tuple[int, int]] = {}

    def lookup_many(self, keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if self._array_backed:
            missing = np.unique(keys[self.out_table[keys] < 0])
            for key in missing.tolist():
                out, info = self._solve(int(key))
                self.out_table[key] = out
                self.info_table[key] = info
            return self.out_table[keys], self.info_table[keys]
        out = np.empty(len(keys), dtype=np.int64)
        info = np.empty(len(keys), dtype=np.int64)
        for i, key in enumerate(keys.tolist()):
            pair = self._dict.get(key)
            if pair is None:
                pair = self._solve(int(key))
                self._dict[key] = pair
            out[i], info[i] = pair
        return out, info

    def _known_funcs(self, chan: int) -> tuple[list[int], list[int]]:
        pivots: list[int] = []
        vecs: list[int] = []
        for idx, pos in enumerate(self.chan_positions):
            if (chan >> idx) & 1:
                gf2.basis_insert(1 << pos, pivots, vecs)
        return pivots, vecs

    def _solve(self, key: int) -> tuple[int, int]:
        inc = key & ((1 << self.q) - 1)
        chan = key >> self.q
        inc_list = [j for j in range(self.q) if (inc >> j) & 1]

        pivots, vecs = self._known_funcs(chan)
        for j in inc_list:
            gf2.basis_insert(self.cols[j], pivots, vecs)

        info = 0
        for i in range(self.n_rows):
            if gf2.reduce_vector(1 << i, pivots, vecs) == 0:
                info |= 1 << i

        out = 0
        for j in range(self.q):
            if (inc >> j) & 1:
                # Extrinsic output: rebuild the span without this socket's input.
                p2, v2 = self._known_funcs(chan)
                for j2 in inc_list:
                    if j2 != j:
                        gf2.basis_insert(self.cols[j2], p2, v2)
                determined = gf2.reduce_vector(self.cols[j], p2, v2) == 0
            else:
                determined = gf2.reduce_vector(self.cols[j], pivots, vecs) == 0
            if determined:
                out |= 1 << j
        return out, info


_local_maps_cache: dict = {}


def _vn_maps(spec: EnsembleSpec, i: int) -> _LocalMaps:
    vn = spec.vn_types[i]
    key = ("vn", vn.generator.row_bits, vn.generator.n_cols, vn.puncture)
    maps = _local_maps_cache.get(key)
    if maps is None:
        maps = _LocalMaps(vn.generator.column_bits(), vn.n_info_bits, vn.transmitted_positions)
        _local_maps_cache[key] = maps
    return maps


def _cn_maps(spec: EnsembleSpec, i: int) -> _LocalMaps:
    cn = spec.cn_types[i]
    key = ("cn", cn.generator.row_bits, cn.generator.n_cols)
    maps = _local_maps_cache.get(key)
    if maps is None:
        maps = _LocalMaps(cn.generator.column_bits(), cn.dimension, ())
        _local_maps_cache[key] = maps
    return maps


@dataclass
class DecodeResult:
    success: bool
    residual_erasures: int
    iterations: int
    trajectory: np.ndarray | None = None
    vc_history: list[np.ndarray] | None = None


def decode(
    code: SampledCode,
    erasure_pattern,
    max_iters: int | None = None,
    record_trajectory: bool = False,
    keep_history: bool = False,
) -> DecodeResult:
    """Run iterative local erasure decoding on one received word.

    erasure_pattern flags the erased transmitted bits, ordered by (VN type,
    node, transmitted position).  Runs to the message fixpoint unless
    max_iters cuts it short.
    """
    spec = code.spec
    n_e = spec.n_edge_types
    erased = np.asarray(erasure_pattern, dtype=bool)
    if erased.shape != (code.n_transmitted,):
        raise ValidationError(
            f"erasure pattern has shape {erased.shape}, expected ({code.n_transmitted},)"
        )

    # Per VN type: channel-known masks (bit j = j-th transmitted position).
    chan_masks: list[np.ndarray] = []
    chan_bits: list[np.ndarray] = []
    offset = 0
    for i, vn in enumerate(spec.vn_types):
        cnt, w = code.vn_counts[i], vn.n_transmitted
        block = ~erased[offset : offset + cnt * w].reshape(cnt, w)
        offset += cnt * w
        chan_bits.append(block)
        chan_masks.append((block.astype(np.int64) << np.arange(w, dtype=np.int64)).sum(axis=1))

    vn_maps = [_vn_maps(spec, i) for i in range(len(spec.vn_types))]
    cn_maps = [_cn_maps(spec, i) for i in range(len(spec.cn_types))]

    msg_vc = np.zeros(code.n_edges, dtype=bool)
    msg_cv = np.zeros(code.n_edges, dtype=bool)
    info_masks: list[np.ndarray] = [np.zeros(c, dtype=np.int64) for c in code.vn_counts]

    edge_totals = np.bincount(code.edge_type0, minlength=n_e).astype(float)

    def vn_pass() -> None:
        for i, vn in enumerate(spec.vn_types):
            if code.vn_counts[i] == 0:
                continue
            q = vn.n_sockets
            eids = code.vn_edges[i]
            shifts = np.arange(q, dtype=np.int64)
            inc = (msg_cv[eids].astype(np.int64) << shifts).sum(axis=1)
            keys = (chan_masks[i] << q) | inc
            out, info = vn_maps[i].lookup_many(keys)
            info_masks[i] = info
            msg_vc[eids] = ((out[:, None] >> shifts) & 1).astype(bool)

    def cn_pass() -> None:
        for i, cn in enumerate(spec.cn_types):
            if code.cn_counts[i] == 0:
                continue
            s = cn.n_sockets
            eids = code.cn_edges[i]
            shifts = np.arange(s, dtype=np.int64)
            inc = (msg_vc[eids].astype(np.int64) << shifts).sum(axis=1)
            out, _ = cn_maps[i].lookup_many(inc)
            msg_cv[eids] = ((out[:, None] >> shifts) & 1).astype(bool)

    def known_fractions() -> np.ndarray:
        return np.bincount(code.edge_type0, weights=msg_vc, minlength=n_e) / edge_totals

    trajectory = [] if record_trajectory else None
    history = [] if keep_history else None

    vn_pass()
    if record_trajectory:
        trajectory.append(known_fractions())
    if keep_history:
        history.append(msg_vc.copy())

    iterations = 0
    prev = (int(msg_vc.sum()), int(msg_cv.sum()))
    while max_iters is None or iterations < max_iters:
        cn_pass()
        vn_pass()
        iterations += 1
        if record_trajectory:
            trajectory.append(known_fractions())
        if keep_history:
            history.append(msg_vc.copy())
        cur = (int(msg_vc.sum()), int(msg_cv.sum()))
        if cur == prev:
            break
        prev = cur

    residual = 0
    for i, vn in enumerate(spec.vn_types):
        if code.vn_counts[i] == 0 or vn.n_transmitted == 0:
            continue
        pos = np.array(vn.transmitted_positions, dtype=np.int64)
        recovered = ((info_masks[i][:, None] >> pos) & 1).astype(bool)
        residual += int(np.sum(~chan_bits[i] & ~recovered))

    return DecodeResult(
        success=residual == 0,
        residual_erasures=residual,
        iterations=iterations,
        trajectory=np.array(trajectory) if record_trajectory else None,
        vc_history=history,
    )


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p_hat = successes / trials
    denom = 1.0 + z * z / trials
    center = (p_hat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p_hat * (1 - p_hat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _run_trial(args):
    spec, scale, seed, eps_index, trial_index, eps, record_iters, max_iters = args
    rng = _trial_rng(seed, eps_index, trial_index)
    code = _sample_code(spec, scale, rng)
    pattern = rng.random(code.n_transmitted) < eps
    res = decode(
        code,
        pattern,
        max_iters=max_iters,
        record_trajectory=record_iters > 0,
    )
    traj = None
    if record_iters > 0:
        traj = res.trajectory
        want = record_iters + 1
        if traj.shape[0] < want:
            # The fixpoint was reached early; later iterations repeat it.
            pad = np.repeat(traj[-1:], want - traj.shape[0], axis=0)
            traj = np.vstack([traj, pad])
        else:
            traj = traj[:want]
    return res.success, res.residual_erasures, traj


@dataclass
class SweepResult:
    rows: list[dict]
    rng_name: str = _RNG_NAME
    seed: int = 0
    # False when the ensemble is outside the assumptions of the asymptotic
    # stability analysis (punctured bits or distance-1 component codes), in
    # which case no threshold or stability prediction applies to the sweep.
    stability_prediction: bool = True
    trajectories: dict = field(default_factory=dict)


def sweep(
    spec: EnsembleSpec,
    scale: int,
    eps_grid,
    trials: int,
    seed: int,
    jobs: int = 1,
    record_exit_iters: int = 0,
    max_iters: int | None = None,
) -> SweepResult:
    """Monte Carlo block/bit erasure rates over a grid of channel parameters.

    Each trial draws a fresh code and a fresh erasure pattern from a
    counter-based stream keyed by (seed, grid index, trial index), so results
    do not depend on scheduling or on the number of workers.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    result = SweepResult(rows=[], seed=seed, stability_prediction=spec.stability_eligible)
    n_tx_per_scale = sum(vn.count * vn.n_transmitted for vn in spec.vn_types)
    n_bits = n_tx_per_scale * scale
    for eps_index, eps in enumerate(eps_grid):
        args = [
            (spec, scale, seed, eps_index, t, float(eps), record_exit_iters, max_iters)
            for t in range(trials)
        ]
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                outcomes = list(pool.map(_run_trial, args, chunksize=max(1, trials // (4 * jobs))))
        else:
            outcomes = [_run_trial(a) for a in args]
        failures = sum(1 for ok, _, _ in outcomes if not ok)
        residual_total = sum(r for _, r, _ in outcomes)
        ci_lo, ci_hi = wilson_interval(failures, trials)
        result.rows.append(
            {
                "eps": float(eps),
                "ber": residual_total / (n_bits * trials),
                "bler": failures / trials,
                "ci_lo": ci_lo,
                "ci_hi": ci_hi,
                "trials": trials,
            }
        )
        if record_exit_iters > 0:
            result.trajectories[float(eps)] = np.stack([t for _, _, t in outcomes])
    return result
