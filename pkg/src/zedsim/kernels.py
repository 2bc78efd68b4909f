"""Compiled slot loops for the abstract workloads.

These mirror the reference loops in :mod:`zedsim.engine` statement for
statement and consume the same pre-drawn arrays, so both routes produce
bit-identical counters.  Without numba the plain-Python functions are still
importable but the engine prefers its reference loop.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap(args[0]) if args and callable(args[0]) else wrap

# policy codes (same values as zedsim.policies)
BLIND, PERIODIC, FULLY_AWARE, THRESHOLD = 0, 1, 2, 3

# task-workload state columns
T_E, T_BUF, T_EST, T_ARR, T_DONE, T_FAILED, T_FATT, T_DROP, T_HARV, T_DELIV, T_SPILL, \
    T_OVH, T_MFAIL, T_MEAS = range(14)
T_COLS = 14

# packet-workload state columns
P_E, P_PKT, P_GEN, P_TXGEN, P_AOI, P_AOISUM, P_EVENTS, P_REPL, P_TX, P_SUCC, P_ERAS, \
    P_COLL, P_FATT, P_HARV, P_DELIV, P_SPILL, P_OVH, P_MFAIL, P_MEAS = range(19)
P_COLS = 19


@njit(cache=True)
def tasks_block(start, n, energy, tasks, st, policy, a, b, cap, buf_size, cost, discard):
    """Advance every device ``n`` slots from absolute slot ``start``.

    policy BLIND: a = F.  PERIODIC: a = Q, b = E_c.  Energies are integers.
    """
    n_dev = st.shape[0]
    period = np.int64(a)
    mcost = np.int64(b)
    for d in range(n_dev):
        for s in range(n):
            slot = start + s
            # arrivals
            e_in = energy[d, s]
            st[d, T_HARV] += e_in
            st[d, T_E] += e_in
            if st[d, T_E] > cap:
                st[d, T_SPILL] += st[d, T_E] - cap
                st[d, T_E] = cap
            if tasks[d, s]:
                st[d, T_ARR] += 1
                if st[d, T_BUF] < buf_size:
                    st[d, T_BUF] += 1
                else:
                    st[d, T_DROP] += 1
            # observe and decide
            act = False
            if policy == PERIODIC:
                if (slot + 1) % period == 0:
                    if st[d, T_E] >= mcost:
                        st[d, T_E] -= mcost
                        st[d, T_DELIV] += mcost
                        st[d, T_OVH] += mcost
                        st[d, T_MEAS] += 1
                        st[d, T_EST] = st[d, T_E]
                    else:
                        st[d, T_MFAIL] += 1
                        st[d, T_EST] = 0
                if st[d, T_BUF] > 0 and st[d, T_EST] >= cost:
                    act = True
            else:
                if st[d, T_BUF] > 0 and (slot + 1) % period == 0:
                    act = True
            # act
            if act:
                if st[d, T_E] >= cost:
                    st[d, T_E] -= cost
                    st[d, T_DELIV] += cost
                    st[d, T_DONE] += 1
                    st[d, T_BUF] -= 1
                    spent = cost
                elif st[d, T_E] > 0:
                    spent = st[d, T_E]
                    st[d, T_DELIV] += spent
                    st[d, T_E] = 0
                    st[d, T_FATT] += 1
                    if discard:
                        st[d, T_BUF] -= 1
                        st[d, T_FAILED] += 1
                else:
                    spent = 0
                if policy == PERIODIC:
                    st[d, T_EST] = max(st[d, T_EST] - spent, 0)


@njit(cache=True)
def packets_block(start, n, energy, events, st, u_tx, c_tx, u_er, c_er, erasure, tx_prob,
                  policy, a, b, c, cap):
    """Advance the shared channel ``n`` slots.

    policy BLIND: a = F, b = E_t.  FULLY_AWARE: b = sampling cost, c = 1 to
    sample only in slots where a new packet was generated.  THRESHOLD: a = delta.
    """
    n_dev = st.shape[0]
    heard = np.zeros(n_dev, dtype=np.bool_)
    for s in range(n):
        slot = start + s
        for d in range(n_dev):
            heard[d] = False
            e_in = energy[d, s]
            st[d, P_HARV] += e_in
            st[d, P_E] += e_in
            if st[d, P_E] > cap:
                st[d, P_SPILL] += st[d, P_E] - cap
                st[d, P_E] = cap
            if events[d, s]:
                st[d, P_EVENTS] += 1
                if st[d, P_PKT]:
                    st[d, P_REPL] += 1
                st[d, P_PKT] = 1
                st[d, P_GEN] = slot
        clear = 0
        for d in range(n_dev):
            if not st[d, P_PKT]:
                continue
            spend = 0
            if policy == FULLY_AWARE:
                if c > 0 and not events[d, s]:
                    continue
                mcost = np.int64(b)
                if st[d, P_E] >= mcost:
                    st[d, P_E] -= mcost
                    st[d, P_DELIV] += mcost
                    st[d, P_OVH] += mcost
                    st[d, P_MEAS] += 1
                    if st[d, P_E] > 0:
                        u = u_tx[d, c_tx[d]]
                        c_tx[d] += 1
                        if u < tx_prob[st[d, P_E]]:
                            spend = st[d, P_E]
                else:
                    st[d, P_MFAIL] += 1
            elif policy == THRESHOLD:
                if st[d, P_E] >= np.int64(a):
                    spend = np.int64(a)
            else:
                if (slot + 1) % np.int64(a) == 0:
                    e_t = np.int64(b)
                    if st[d, P_E] >= e_t:
                        spend = e_t
                    elif st[d, P_E] > 0:
                        st[d, P_DELIV] += st[d, P_E]
                        st[d, P_E] = 0
                        st[d, P_PKT] = 0
                        st[d, P_FATT] += 1
            if spend > 0:
                st[d, P_E] -= spend
                st[d, P_DELIV] += spend
                st[d, P_PKT] = 0
                st[d, P_TX] += 1
                st[d, P_TXGEN] = st[d, P_GEN]
                u = u_er[d, c_er[d]]
                c_er[d] += 1
                if u < erasure[spend]:
                    st[d, P_ERAS] += 1
                else:
                    clear += 1
                    heard[d] = True
        for d in range(n_dev):
            if heard[d] and clear == 1:
                st[d, P_SUCC] += 1
                st[d, P_AOI] = slot - st[d, P_TXGEN] + 1
            else:
                if heard[d]:
                    st[d, P_COLL] += 1
                st[d, P_AOI] += 1
            st[d, P_AOISUM] += st[d, P_AOI]
