"""Static output feedback, admissibility, and the internal loop A_S.

The internal loop constrains the loop channel of an extended operator
through e = S f, producing the operator A_S on the state channel.  The
same operator arises from the external Cayley node by closing the static
output feedback u = K y + v with K the Cayley transform of S; computing
it both ways and comparing is the package's main theorem check.

Inadmissibility of a feedback and unsolvability of a loop are ordinary
result states, not exceptions: the corrected diag(0, -i) fixture has an
inadmissible K while its loop is perfectly solvable (A_S = 0).
"""

from collections import namedtuple

import numpy as np

from .cayley import AccretiveOperator, ContractionOperator, cayley_of_accretive
from .numkernel import COND_LIMIT, as_complex_matrix, op_norm, svd_solve
from .sysnode import ExtendedOperator, SystemNode, external_cayley, main_operator

__all__ = [
    "FeedbackResult",
    "InternalLoopResult",
    "InadmissibleFeedbackError",
    "internal_loop",
    "check_admissible",
    "a_s_via_feedback",
]

FeedbackResult = namedtuple(
    "FeedbackResult", ["admissible", "closed_loop", "m_condition"])
FeedbackResult.__doc__ = """Outcome of closing a static output feedback.

closed_loop is a SystemNode when admissible, None otherwise;
m_condition is the condition number of I - K D.
"""

InternalLoopResult = namedtuple(
    "InternalLoopResult", ["a_s", "loop_solve_condition"])
InternalLoopResult.__doc__ = """Outcome of the internal loop through S.

a_s is the n1-square matrix when the loop effect is uniquely determined,
None when the loop is unsolvable (empty or multi-valued);
loop_solve_condition is the condition number of I - A22 S.
"""


class InadmissibleFeedbackError(ValueError):
    """Raised when a closed-loop computation requires an admissible K."""

    def __init__(self, m_condition):
        super().__init__(
            "feedback operator is not admissible: cond(I - K D) = %g"
            % m_condition)
        self.m_condition = m_condition


def _operator_matrix(op, name):
    if isinstance(op, (AccretiveOperator, ContractionOperator)):
        return op.matrix
    return as_complex_matrix(op, name)


def internal_loop(ext, s):
    """Close the internal loop e = S f of an extended operator.

    Eliminating f = A21 x + A22 S f gives, when W = I - A22 S is
    invertible, A_S = A11 + A12 S W^{-1} A21.  A singular W is a
    legitimate outcome, not an error: the loop is still solvable when
    A21 maps into the range of W and the kernel ambiguity is annihilated
    by A12 S (rank-revealing test); otherwise a_s is None because the
    loop is empty or multi-valued on part of the state space.
    """
    if not isinstance(ext, ExtendedOperator):
        raise TypeError("internal_loop expects an ExtendedOperator")
    sm = _operator_matrix(s, "S")
    if sm.shape != (ext.n2, ext.n2):
        raise ValueError("S has shape %s, loop channel has dimension %d"
                         % ((sm.shape,), ext.n2))
    if not ext.a22.any():
        # triangular case: f = A21 x directly
        a_s = ext.a11 + ext.a12 @ (sm @ ext.a21)
        return InternalLoopResult(a_s, 1.0)
    ident = np.eye(ext.n2, dtype=complex)
    w = ident - ext.a22 @ sm
    u, sv, vh = np.linalg.svd(w)
    # anchored at the unit scale of I so a uniformly tiny W counts as
    # ill conditioned (a bare sigma_max/sigma_min of a scalar is always 1)
    cond = np.inf if sv[-1] == 0.0 else float(max(sv[0], 1.0) / sv[-1])
    if cond < COND_LIMIT:
        f, _ = svd_solve(w, ext.a21, name="I - A22 S")
        return InternalLoopResult(ext.a11 + ext.a12 @ (sm @ f), cond)
    # rank-revealing split of the singular loop equation
    scale = sv[0] if len(sv) and sv[0] > 0.0 else 1.0
    rank = int(np.sum(sv > scale * max(w.shape) * np.finfo(float).eps * 10))
    u_r, sv_r, vh_r = u[:, :rank], sv[:rank], vh[:rank]
    # solvable for every x iff range(A21) lies in range(W)
    residual = ext.a21 - u_r @ (u_r.conj().T @ ext.a21)
    if op_norm(residual) > 1e-10 * (1.0 + op_norm(ext.a21)):
        return InternalLoopResult(None, cond)
    # unique effect iff A12 S annihilates the kernel ambiguity of f
    kernel = vh[rank:].conj().T
    if kernel.size and op_norm(ext.a12 @ (sm @ kernel)) > \
            1e-10 * (1.0 + op_norm(ext.a12 @ sm)):
        return InternalLoopResult(None, cond)
    if rank:
        f = vh_r.conj().T @ ((u_r.conj().T @ ext.a21) / sv_r[:, None])
    else:
        f = np.zeros((ext.n2, ext.n1), dtype=complex)
    return InternalLoopResult(ext.a11 + ext.a12 @ (sm @ f), cond)


def check_admissible(node, k):
    """Close the static output feedback u = K y + v around a node.

    K is admissible iff I - K D is invertible (condition number below
    1e12); the closed loop then has blocks

        A^f = A + B K (I - D K)^{-1} C,   B^f = B (I - K D)^{-1},
        C^f = (I - D K)^{-1} C,           D^f = (I - D K)^{-1} D.

    Inadmissibility is reported in the result, never raised.
    """
    if not isinstance(node, SystemNode):
        raise TypeError("check_admissible expects a SystemNode")
    km = _operator_matrix(k, "K")
    if km.shape != (node.ninputs, node.noutputs):
        raise ValueError("K must be %s, got %s"
                         % ((node.ninputs, node.noutputs), km.shape))
    ident_m = np.eye(node.ninputs, dtype=complex)
    ident_p = np.eye(node.noutputs, dtype=complex)
    kd = ident_m - km @ node.d
    sv = np.linalg.svd(kd, compute_uv=False)
    # unit-scale anchor: I - K D lives at scale >= 1 for contractive pairs,
    # so a uniformly tiny factor signals an unbounded loop, not a benign one
    if len(sv) == 0 or sv[-1] == 0.0:
        cond = np.inf
    else:
        cond = float(max(sv[0], 1.0) / sv[-1])
    if not cond < COND_LIMIT:
        return FeedbackResult(False, None, cond)
    dk = ident_p - node.d @ km
    cf, _ = svd_solve(dk, node.c, name="I - D K")
    df, _ = svd_solve(dk, node.d, name="I - D K")
    bf, _ = svd_solve(kd.T, node.b.T, name="I - K D")
    bf = bf.T
    af = node.a + node.b @ (km @ cf)
    return FeedbackResult(True, SystemNode(af, bf, cf, df), cond)


def a_s_via_feedback(ext, s):
    """Compute A_S through the external Cayley node and output feedback.

    Transforms ext to its Cayley node, closes the feedback K =
    cayley_of_accretive(S), and returns the closed-loop main operator.
    Exists to test the theorem that this equals internal_loop(ext, S);
    the internal loop is the canonical computation path.

    Raises InadmissibleFeedbackError (carrying the condition number of
    I - K D) when K is not admissible for the node.
    """
    if not isinstance(s, AccretiveOperator):
        s = AccretiveOperator(s)
    node = external_cayley(ext)
    k = cayley_of_accretive(s)
    result = check_admissible(node, k)
    if not result.admissible:
        raise InadmissibleFeedbackError(result.m_condition)
    return main_operator(result.closed_loop)
