"""EXIT density evolution over the binary erasure channel.

The decoder average is tracked as one extrinsic known-bit probability per
edge type, i.e. an n_e-dimensional discrete dynamical system.  One step is a
CN update followed by a VN update; the channel enters only the VN side.

Every node type contributes through a precomputed coefficient array built
from its information-function table.  Evaluating an extrinsic function is
then a tensor contraction of that array against per-axis weight vectors, so
a step costs a handful of small numpy contractions regardless of how often
the threshold search calls it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ensemble import CnType, EnsembleSpec, VnType
from .errors import InternalError
from .infofuncs import cn_info_table, vn_info_table

_BOUNDS_SLACK = 1e-9
_STALL_TOL = 1e-15


@dataclass
class ExitState:
    """Tracked vector of per-edge-type extrinsic known probabilities."""

    i_ev: np.ndarray
    iteration: int
    epsilon: float


def _exit_coefficients(table: np.ndarray, axis: int, n_axis: int) -> np.ndarray:
    """Coefficient array for one (node type, edge type) pair.

    Index t along `axis` runs over 0..n_axis-1 (one socket of that type is
    excluded as the output); the remaining axes keep the table layout but
    reversed, so that position t reads table entry (dim - t).
    """
    rev = table[tuple(slice(None, None, -1) for _ in table.shape)]
    sl1 = [slice(None)] * rev.ndim
    sl1[axis] = slice(0, n_axis)
    sl2 = [slice(None)] * rev.ndim
    sl2[axis] = slice(1, n_axis + 1)
    shape = [1] * rev.ndim
    shape[axis] = n_axis
    dec = np.arange(n_axis, 0, -1, dtype=np.int64).reshape(shape)
    inc = np.arange(1, n_axis + 1, dtype=np.int64).reshape(shape)
    coeff = dec * rev[tuple(sl1)] - inc * rev[tuple(sl2)]
    if coeff.min() < 0:
        raise InternalError("negative extrinsic coefficient; table construction is broken")
    if coeff.max() > 2**53:
        raise InternalError("extrinsic coefficient exceeds exact float64 range")
    return coeff.astype(np.float64)


def _socket_weights(value: float, n: int) -> np.ndarray:
    t = np.arange(n + 1)
    return (1.0 - value) ** t * value ** (n - t)


def _channel_weights(epsilon: float, b: int) -> np.ndarray:
    z = np.arange(b + 1)
    return epsilon**z * (1.0 - epsilon) ** (b - z)


def _contract(arr: np.ndarray, vectors: list[np.ndarray]) -> float:
    out = arr
    for v in vectors:
        out = np.tensordot(out, v, axes=(0, 0))
    return float(out)


def _checked(value: float, what: str) -> float:
    if value < -_BOUNDS_SLACK or value > 1.0 + _BOUNDS_SLACK:
        raise InternalError(f"{what} left [0,1] by more than {_BOUNDS_SLACK}: {value!r}")
    return min(1.0, max(0.0, value))


def vn_exit(
    vn: VnType,
    n_edge_types: int,
    i_av,
    epsilon: float,
    edge_type: int,
) -> float:
    """Extrinsic known probability on a type-`edge_type` socket of one VN type.

    i_av holds the incoming per-edge-type known probabilities (0-indexed by
    edge type - 1); edge_type is 1-based and must label at least one socket.
    """
    e0 = edge_type - 1
    q_e = vn.sockets_of_type(edge_type)
    if q_e < 1:
        raise ValueError(f"VN type {vn.name!r} has no sockets of edge type {edge_type}")
    table = vn_info_table(vn, n_edge_types)
    arr = _exit_coefficients(table, e0, q_e)
    vectors = []
    for l0 in range(n_edge_types):
        n = vn.sockets_of_type(l0 + 1) - (1 if l0 == e0 else 0)
        vectors.append(_socket_weights(float(i_av[l0]), n))
    vectors.append(_channel_weights(epsilon, vn.n_transmitted))
    return _checked(1.0 - _contract(arr, vectors) / q_e, f"vn_exit({vn.name})")


def cn_exit(cn: CnType, n_edge_types: int, i_ac, edge_type: int) -> float:
    """Extrinsic known probability on a type-`edge_type` socket of one CN type."""
    e0 = edge_type - 1
    s_e = cn.sockets_of_type(edge_type)
    if s_e < 1:
        raise ValueError(f"CN type {cn.name!r} has no sockets of edge type {edge_type}")
    table = cn_info_table(cn, n_edge_types)
    arr = _exit_coefficients(table, e0, s_e)
    vectors = []
    for l0 in range(n_edge_types):
        n = cn.sockets_of_type(l0 + 1) - (1 if l0 == e0 else 0)
        vectors.append(_socket_weights(float(i_ac[l0]), n))
    return _checked(1.0 - _contract(arr, vectors) / s_e, f"cn_exit({cn.name})")


def cn_exit_via_punctured_vn(cn: CnType, n_edge_types: int, i_ac, edge_type: int) -> float:
    """Same quantity through the VN formula: a CN behaves like a VN whose
    information bits are all punctured, on a fully unreliable channel."""
    pseudo = VnType(
        name=f"{cn.name}:as-vn",
        generator=cn.generator,
        puncture=(0,) * cn.generator.n_rows,
        socket_types=cn.socket_types,
        count=1,
    )
    return vn_exit(pseudo, n_edge_types, i_ac, 1.0, edge_type)


class ExitEngine:
    """Precomputed evaluator of the EXIT recursion for one validated spec."""

    def __init__(self, spec: EnsembleSpec):
        self.spec = spec
        self.n_edge_types = spec.n_edge_types
        n_e = spec.n_edge_types
        # Per edge type e0, lists of (mix weight, socket count, coeff array,
        # per-axis vector descriptors).  A descriptor (l0, n) asks for the
        # socket weight vector of value x[l0] and length n + 1; (-1, b) asks
        # for the channel weight vector.
        self.vn_parts: list[list] = [[] for _ in range(n_e)]
        self.cn_parts: list[list] = [[] for _ in range(n_e)]
        for vi, vn in enumerate(spec.vn_types):
            table = vn_info_table(vn, n_e)
            for e0 in range(n_e):
                q_e = spec.vn_socket_counts[vi][e0]
                if q_e == 0:
                    continue
                arr = _exit_coefficients(table, e0, q_e)
                dims = [
                    (l0, spec.vn_socket_counts[vi][l0] - (1 if l0 == e0 else 0))
                    for l0 in range(n_e)
                ]
                dims.append((-1, vn.n_transmitted))
                lam = float(spec.vn_edge_fractions[vi][e0])
                self.vn_parts[e0].append((lam, q_e, arr, dims))
        for ci, cn in enumerate(spec.cn_types):
            table = cn_info_table(cn, n_e)
            for e0 in range(n_e):
                s_e = spec.cn_socket_counts[ci][e0]
                if s_e == 0:
                    continue
                arr = _exit_coefficients(table, e0, s_e)
                dims = [
                    (l0, spec.cn_socket_counts[ci][l0] - (1 if l0 == e0 else 0))
                    for l0 in range(n_e)
                ]
                rho = float(spec.cn_edge_fractions[ci][e0])
                self.cn_parts[e0].append((rho, s_e, arr, dims))

    def _mixture(self, parts, x: np.ndarray, epsilon=None) -> np.ndarray:
        n_e = self.n_edge_types
        out = np.zeros(n_e)
        cache: dict = {}
        for e0 in range(n_e):
            total = 0.0
            for weight, n_sockets, arr, dims in parts[e0]:
                vectors = []
                for l0, n in dims:
                    key = (l0, n)
                    v = cache.get(key)
                    if v is None:
                        if l0 < 0:
                            v = _channel_weights(epsilon, n)
                        else:
                            v = _socket_weights(x[l0], n)
                        cache[key] = v
                    vectors.append(v)
                val = _checked(1.0 - _contract(arr, vectors) / n_sockets, "exit value")
                total += weight * val
            out[e0] = total
        return out

    def cn_update(self, i_ac: np.ndarray) -> np.ndarray:
        return self._mixture(self.cn_parts, np.asarray(i_ac, dtype=float))

    def vn_update(self, i_av: np.ndarray, epsilon: float) -> np.ndarray:
        return self._mixture(self.vn_parts, np.asarray(i_av, dtype=float), epsilon)

    def step(self, i_ev, epsilon: float) -> np.ndarray:
        """One application of the recursion: CN pass, then VN pass."""
        return self.vn_update(self.cn_update(i_ev), epsilon)

    def initial_state(self, epsilon: float) -> ExitState:
        x0 = self.step(np.zeros(self.n_edge_types), epsilon)
        return ExitState(x0, 0, epsilon)

    def run(
        self,
        epsilon: float,
        max_iters: int = 20000,
        tol: float = 1e-10,
        record: bool = False,
    ) -> tuple[bool, list[ExitState], ExitState]:
        """Iterate to the all-known fixed point or a stall.

        Returns (converged, trajectory, final state); the trajectory is
        empty unless record is set.  Non-convergence is a result, not an
        error.
        """
        if tol <= 0:
            raise ValueError("tol must be positive")
        state = self.initial_state(epsilon)
        trajectory = [state] if record else []
        x = state.i_ev
        converged = bool(x.min() >= 1.0 - tol)
        it = 0
        while not converged and it < max_iters:
            x_next = self.step(x, epsilon)
            it += 1
            state = ExitState(x_next, it, epsilon)
            if record:
                trajectory.append(state)
            converged = bool(x_next.min() >= 1.0 - tol)
            if not converged and np.max(np.abs(x_next - x)) < _STALL_TOL:
                x = x_next
                break
            x = x_next
        return converged, trajectory, state

    def threshold(
        self,
        tol_eps: float = 1e-6,
        max_iters: int = 20000,
        tol_fp: float = 1e-10,
    ) -> tuple[float, int]:
        """Bisection for the largest erasure probability that still converges."""
        lo, hi = 0.0, 1.0
        probes = 0
        while hi - lo > 2.0 * tol_eps:
            mid = 0.5 * (lo + hi)
            converged, _, _ = self.run(mid, max_iters=max_iters, tol=tol_fp)
            probes += 1
            if converged:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi), probes

    def jacobian(self, at, epsilon: float, step_size: float = 1e-5) -> np.ndarray:
        """Finite-difference Jacobian of the one-step map at a state.

        Central differences inside [0,1]; second-order one-sided at the
        boundaries so the state never leaves the valid box.
        """
        if step_size <= 0:
            raise ValueError("step size must be positive")
        h = step_size
        n_e = self.n_edge_types
        x = np.asarray(at, dtype=float)
        jac = np.empty((n_e, n_e))
        for m in range(n_e):
            if x[m] + h <= 1.0 and x[m] - h >= 0.0:
                xp = x.copy()
                xp[m] += h
                xm = x.copy()
                xm[m] -= h
                col = (self.step(xp, epsilon) - self.step(xm, epsilon)) / (2.0 * h)
            elif x[m] + h > 1.0:
                x1 = x.copy()
                x1[m] -= h
                x2 = x.copy()
                x2[m] -= 2.0 * h
                col = (
                    3.0 * self.step(x, epsilon)
                    - 4.0 * self.step(x1, epsilon)
                    + self.step(x2, epsilon)
                ) / (2.0 * h)
            else:
                x1 = x.copy()
                x1[m] += h
                x2 = x.copy()
                x2[m] += 2.0 * h
                col = (
                    -3.0 * self.step(x, epsilon)
                    + 4.0 * self.step(x1, epsilon)
                    - self.step(x2, epsilon)
                ) / (2.0 * h)
            jac[:, m] = col
        return jac


def run_to_fixed_point(
    spec: EnsembleSpec,
    epsilon: float,
    max_iters: int = 20000,
    tol: float = 1e-10,
) -> tuple[bool, list[ExitState]]:
    converged, trajectory, _ = ExitEngine(spec).run(
        epsilon, max_iters=max_iters, tol=tol, record=True
    )
    return converged, trajectory


def threshold(
    spec: EnsembleSpec,
    tol_eps: float = 1e-6,
    max_iters: int = 20000,
    tol_fp: float = 1e-10,
) -> float:
    value, _ = ExitEngine(spec).threshold(tol_eps=tol_eps, max_iters=max_iters, tol_fp=tol_fp)
    return value


def numerical_jacobian(
    spec: EnsembleSpec,
    at,
    epsilon: float,
    step_size: float = 1e-5,
) -> np.ndarray:
    return ExitEngine(spec).jacobian(at, epsilon, step_size=step_size)
