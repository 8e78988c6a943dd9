"""Mean-field approximation of the snapshot likelihood.

The set function ``I -> rho[I -> O]`` is replaced by a product of per-node
factors ``b_j``; fitting them to the forward recursion in least squares
reduces to one symmetric linear system ``S b = z`` in |O| unknowns.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .graph import Graph, NodeSet, as_nodeset, induced_dense, induced_matrix, two_path_volume
from .ranking import Ranking

DIRECT_SOLVE_LIMIT = 2000
DENSE_BUILD_LIMIT = 400
NORMAL_EQUATIONS_LIMIT = 12
RESIDUAL_RTOL = 1e-8
# Cholesky pivots below this fraction of the largest count as rank deficient
RCOND = 1e-7


@dataclass(frozen=True)
class MeanFieldSystem:
    """``S = base + outer(u, u)`` and right-hand side ``z``, indexed like O's members.

    ``base`` is a dense array for small snapshots and a CSR matrix otherwise.
    Both are scaled so that ``S = Q^T Q / 2^(|O|-4)`` and ``z = Q^T r / 2^(|O|-4)``.
    """

    snapshot: NodeSet
    base: np.ndarray | sp.csr_matrix
    u: np.ndarray
    z: np.ndarray

    @property
    def size(self) -> int:
        return self.z.size

    def dense(self) -> np.ndarray:
        base = self.base.toarray() if sp.issparse(self.base) else self.base
        return base + np.outer(self.u, self.u)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.base @ x + self.u * (self.u @ x)

    def diagonal(self) -> np.ndarray:
        return self.base.diagonal() + self.u ** 2


@dataclass(frozen=True)
class MeanFieldSolution:
    snapshot: NodeSet
    b: np.ndarray
    residual: float
    flagged: bool
    method: str


def normal_equations(g: Graph, O, limit: int = NORMAL_EQUATIONS_LIMIT):
    """``(Q^T Q, Q^T r)`` by listing every subset I of O as a row.

    ``Q[I, j] = vol(I, j)`` for j outside I (0 otherwise), ``r[I] = vol(I, I^c)``.
    """
    ns = as_nodeset(O, g)
    k = len(ns)
    if k > limit:
        raise ValueError(f"row enumeration capped at |O| <= {limit}")
    ns, idx, A = induced_dense(g, ns)
    deg = g.degrees[idx].astype(np.float64)
    masks = np.arange(1 << k, dtype=np.int64)
    X = ((masks[:, None] >> np.arange(k)) & 1).astype(np.float64)
    into = X @ A
    Q = (1.0 - X) * into
    r = X @ deg - (into * X).sum(axis=1)
    return Q.T @ Q, Q.T @ r


def _direct_system(g: Graph, O) -> MeanFieldSystem:
    ns = as_nodeset(O, g)
    k = len(ns)
    QQ, Qr = normal_equations(g, ns)
    scale = 2.0 ** (4 - k)
    return MeanFieldSystem(ns, QQ * scale, np.zeros(k), Qr * scale)


def build_system(g: Graph, O) -> MeanFieldSystem:
    """Assemble S and z from sparse products on the induced adjacency.

    With ``u = A_OO 1`` (degree inside O) and ``v = A_OO^c 1`` (degree to the
    outside):

        S = Xi(A + A^2 - A * (u 1^T + 1 u^T) + u u^T)      (Xi doubles the diagonal)
        z = (1^T u + 2 1^T v) u - 2 v * u + 2 (A v + u)

    The rank-one term stays factored. Snapshots with fewer than four nodes are
    built from explicit subset enumeration instead, with the same scaling.
    """
    ns = as_nodeset(O, g)
    ns, idx, A = induced_dense(g, ns) if len(ns) <= DENSE_BUILD_LIMIT else induced_matrix(g, ns)
    k = len(ns)
    if k == 0:
        raise ValueError("snapshot is empty")
    if k < 4:
        return _direct_system(g, ns)
    if not sp.issparse(A):
        u = A.sum(axis=1)
        v = g.degrees[idx] - u
        C = A + A @ A - A * (u[:, None] + u[None, :])
        C[np.diag_indices(k)] += u + u ** 2
        z = (u.sum() + 2.0 * v.sum()) * u - 2.0 * v * u + 2.0 * (A @ v + u)
        return MeanFieldSystem(ns, C, u, z)
    u = np.asarray(A.sum(axis=1)).ravel()
    v = g.degrees[idx].astype(np.float64) - u
    rows = np.repeat(np.arange(k), np.diff(A.indptr))
    hadamard = sp.csr_matrix((u[rows] + u[A.indices], A.indices, A.indptr), shape=(k, k))
    C = (A + A @ A - hadamard + sp.diags(u + u ** 2)).tocsr()
    C.eliminate_zeros()
    z = (u.sum() + 2.0 * v.sum()) * u - 2.0 * v * u + 2.0 * (A @ v + u)
    return MeanFieldSystem(ns, C, u, z)


def build_system_entrywise(g: Graph, O) -> tuple[np.ndarray, np.ndarray]:
    """Dense S and z from per-entry degree and two-path counts.

    ``S[j, j] = 2 d(j) (d(j) + 1)`` and, for ``j != j'``,
    ``S[j, j'] = d_{O-j'}(j) d_{O-j}(j') + paths2_{O-{j,j'}}(j, j')``;
    ``z[j] = [vol(O-j) + 2 vol((O-j)^c, O-j)] d(j) + 2 vol(N_O(j), (O-j)^c)``,
    where d is the degree inside O. Quadratic in |O|; used to cross-check
    :func:`build_system`.
    """
    ns = as_nodeset(O, g)
    members = ns.members
    k = len(members)
    inside = set(members)
    adj = g.adj
    nb_in = [set(w for w in adj[v] if w in inside) for v in members]
    d = [len(s) for s in nb_in]
    S = np.zeros((k, k))
    for a in range(k):
        S[a, a] = 2 * d[a] * (d[a] + 1)
        for c in range(a + 1, k):
            ja, jc = members[a], members[c]
            linked = int(jc in nb_in[a])
            rest = [w for w in members if w not in (ja, jc)]
            val = (d[a] - linked) * (d[c] - linked) + two_path_volume(g, ja, jc, rest)
            S[a, c] = S[c, a] = val
    z = np.zeros(k)
    for a, j in enumerate(members):
        rest = inside - {j}
        vol_rest = sum(sum(1 for w in adj[v] if w in rest) for v in rest)
        # edges leaving O - j, seen from the outside
        out_rest = sum(sum(1 for w in adj[v] if w not in rest) for v in rest)
        nb_out = sum(sum(1 for w in adj[v] if w not in rest) for v in nb_in[a])
        z[a] = (vol_rest + 2 * out_rest) * d[a] + 2 * nb_out
    return S, z


def solve_system(system: MeanFieldSystem, direct_limit: int = DIRECT_SOLVE_LIMIT) -> MeanFieldSolution:
    """Solve ``S b = z``; singular or ill-conditioned systems get the minimum-norm
    least-squares solution and are flagged."""
    k = system.size
    z = system.z
    znorm = max(np.linalg.norm(z), 1e-300)
    flagged = False
    if k <= direct_limit:
        S = system.dense()
        method = "cholesky"
        ok = False
        try:
            d = np.diag(np.linalg.cholesky(S))
            if d.min() > RCOND * d.max():
                b = np.linalg.solve(S, z)
                residual = float(np.linalg.norm(S @ b - z))
                ok = residual <= RESIDUAL_RTOL * znorm  # False for NaN too
        except np.linalg.LinAlgError:
            pass
        if not ok:
            b, *_ = sla.lstsq(S, z, lapack_driver="gelsd")
            method, flagged = "lstsq", True
            residual = float(np.linalg.norm(S @ b - z))
    else:
        op = spla.LinearOperator((k, k), matvec=system.matvec, dtype=np.float64)
        diag = system.diagonal()
        inv = np.where(diag > 0, 1.0 / np.where(diag > 0, diag, 1.0), 1.0)
        M = spla.LinearOperator((k, k), matvec=lambda x: inv * x, dtype=np.float64)
        b, info = spla.cg(op, z, rtol=1e-12, atol=0.0, M=M, maxiter=10 * k)
        method = "cg"
        residual = float(np.linalg.norm(system.matvec(b) - z))
        if info != 0 or residual > RESIDUAL_RTOL * znorm:
            b, *_ = spla.minres(op, z, rtol=1e-12, maxiter=10 * k)
            method, flagged = "minres", True
            residual = float(np.linalg.norm(system.matvec(b) - z))
    return MeanFieldSolution(system.snapshot, b, residual, flagged, method)


def mfa_solve(g: Graph, O) -> MeanFieldSolution:
    return solve_system(build_system(g, O))


def mfa_rank(g: Graph, O) -> Ranking:
    """Members of O by decreasing mean-field factor ``b_j``; the top one is the estimate."""
    sol = mfa_solve(g, O)
    return Ranking.from_scores(sol.snapshot.members, sol.b, flagged=sol.flagged)


def write_system(system: MeanFieldSystem, s_path, z_path, label=str) -> None:
    """S as ``row,col,value`` triplets (nonzeros only) and z, u as ``node,z,u``.

    ``label`` maps internal node ids to the names written out.
    """
    members = [label(v) for v in system.snapshot.members]
    S = sp.coo_matrix(system.dense()) if system.size <= DIRECT_SOLVE_LIMIT else None
    with open(s_path, "w") as fh:
        fh.write("row,col,value\n")
        if S is not None:
            for i, j, x in zip(S.row, S.col, S.data):
                fh.write(f"{members[i]},{members[j]},{x:.17g}\n")
        else:
            # too large to densify: write the sparse part, then u for the rank-one term
            C = system.base.tocoo()
            for i, j, x in zip(C.row, C.col, C.data):
                fh.write(f"{members[i]},{members[j]},{x:.17g}\n")
    with open(z_path, "w") as fh:
        fh.write("node,z,u\n")
        for node, zi, ui in zip(members, system.z, system.u):
            fh.write(f"{node},{zi:.17g},{ui:.17g}\n")
