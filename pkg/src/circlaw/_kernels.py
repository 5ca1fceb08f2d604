"""Compiled inner loops: additively weighted nearest-atom queries on a bucket
grid, and an exact integer transportation simplex.

Everything here is deliberately allocation-free inside the hot loops and uses
deterministic tie-breaking (lowest atom index, lowest arc index) so repeated
runs are bit-identical.
"""

from __future__ import annotations

import math

import numba
import numpy as np


@numba.njit(cache=True)
def nearest_distance(node_re, node_im, atom_re, atom_im,
                     start, order, g, cell, ox, oy, out):
    """Unweighted distance from each node to its nearest atom.

    Atoms are pre-bucketed on a g x g grid (CSR layout: ``order`` holds atom
    indices grouped by bucket, ``start`` the per-bucket offsets) with square
    cells of side ``cell`` anchored at (ox, oy).  Ring search: after
    finishing Chebyshev ring R, any unvisited atom is at distance at least
    R*cell, so the scan stops as soon as the current best is below that.
    """
    for t in range(node_re.size):
        x = node_re[t]
        y = node_im[t]
        bx = int((x - ox) / cell)
        by = int((y - oy) / cell)
        if bx < 0:
            bx = 0
        elif bx >= g:
            bx = g - 1
        if by < 0:
            by = 0
        elif by >= g:
            by = g - 1
        best = 1e300
        for ring in range(0, 2 * g + 2):
            x0 = bx - ring
            x1 = bx + ring
            y0 = by - ring
            y1 = by + ring
            for cx in range(max(0, x0), min(g - 1, x1) + 1):
                if cx == x0 or cx == x1:
                    cy = max(0, y0)
                    cy_hi = min(g - 1, y1)
                    cstep = 1
                else:
                    cy = y0
                    cy_hi = y1
                    cstep = y1 - y0 if y1 > y0 else 1
                while cy <= cy_hi:
                    if 0 <= cy < g:
                        b = cx * g + cy
                        for q in range(start[b], start[b + 1]):
                            j = order[q]
                            dx = x - atom_re[j]
                            dy = y - atom_im[j]
                            d2 = dx * dx + dy * dy
                            if d2 < best:
                                best = d2
                    cy += cstep
            covered = x0 <= 0 and y0 <= 0 and x1 >= g - 1 and y1 >= g - 1
            if best < 1e300:
                reach = ring * cell
                if best <= reach * reach or covered:
                    break
            elif covered:
                break
        out[t] = math.sqrt(best)


@numba.njit(cache=True)
def assign_weighted(node_re, node_im, atom_re, atom_im, w, wmax,
                    start, order, g, cell, ox, oy, out):
    """Index of the atom minimizing |z - atom_j| - w_j for each node z.

    Two-phase per node: (1) ring search for the unweighted nearest atom j1
    at distance d1; (2) exhaustive scan of all atoms within
    d1 + (max w - w_{j1}), which provably contains the weighted argmin
    (any winner j needs d_j - w_j <= d1 - w_{j1}).  Ties break to the
    lowest atom index.
    """
    for t in range(node_re.size):
        x = node_re[t]
        y = node_im[t]
        bx = int((x - ox) / cell)
        by = int((y - oy) / cell)
        if bx < 0:
            bx = 0
        elif bx >= g:
            bx = g - 1
        if by < 0:
            by = 0
        elif by >= g:
            by = g - 1
        best = 1e300
        j1 = -1
        for ring in range(0, 2 * g + 2):
            x0 = bx - ring
            x1 = bx + ring
            y0 = by - ring
            y1 = by + ring
            for cx in range(max(0, x0), min(g - 1, x1) + 1):
                if cx == x0 or cx == x1:
                    cy = max(0, y0)
                    cy_hi = min(g - 1, y1)
                    cstep = 1
                else:
                    cy = y0
                    cy_hi = y1
                    cstep = y1 - y0 if y1 > y0 else 1
                while cy <= cy_hi:
                    if 0 <= cy < g:
                        b = cx * g + cy
                        for q in range(start[b], start[b + 1]):
                            j = order[q]
                            dx = x - atom_re[j]
                            dy = y - atom_im[j]
                            d2 = dx * dx + dy * dy
                            if d2 < best:
                                best = d2
                                j1 = j
                    cy += cstep
            covered = x0 <= 0 and y0 <= 0 and x1 >= g - 1 and y1 >= g - 1
            if best < 1e300:
                reach = ring * cell
                if best <= reach * reach or covered:
                    break
            elif covered:
                break
        radius = math.sqrt(best) + (wmax - w[j1])
        rings = int(radius / cell) + 1
        if rings > g:
            rings = g
        bval = 1e300
        bidx = -1
        for cx in range(max(0, bx - rings), min(g - 1, bx + rings) + 1):
            for cy in range(max(0, by - rings), min(g - 1, by + rings) + 1):
                b = cx * g + cy
                for q in range(start[b], start[b + 1]):
                    j = order[q]
                    dx = x - atom_re[j]
                    dy = y - atom_im[j]
                    val = math.sqrt(dx * dx + dy * dy) - w[j]
                    if val < bval or (val == bval and j < bidx):
                        bval = val
                        bidx = j
        out[t] = bidx


@numba.njit(cache=True)
def boundary_jacobian(owner, ix, iy, id_grid, node_re, node_im,
                      atom_re, atom_im, h, jac):
    """Jacobian of cell masses in the dual weights, from the raster owners.

    The mass of cell i responds to weight changes through its boundary
    arcs: d m_i / d w_i = (1/pi) int_{boundary} dH^1 / |e_i - e_j| where
    e_k is the unit vector from atom k to the boundary point.  Each pair
    of 4-adjacent pixels with different owners contributes one edge of
    length h at the shared side, evaluated at the node midpoint.  The
    result accumulates into ``jac`` as a weighted graph Laplacian
    (rows sum to zero, positive semi-definite).
    """
    res = id_grid.shape[0]
    for t in range(owner.size):
        i = owner[t]
        cx = ix[t]
        cy = iy[t]
        for s in range(2):
            if s == 0:
                if cx + 1 >= res:
                    continue
                q = id_grid[cx + 1, cy]
            else:
                if cy + 1 >= res:
                    continue
                q = id_grid[cx, cy + 1]
            if q < 0:
                continue
            j = owner[q]
            if j == i:
                continue
            zx = 0.5 * (node_re[t] + node_re[q])
            zy = 0.5 * (node_im[t] + node_im[q])
            ax = zx - atom_re[i]
            ay = zy - atom_im[i]
            na = math.sqrt(ax * ax + ay * ay)
            bx2 = zx - atom_re[j]
            by2 = zy - atom_im[j]
            nb = math.sqrt(bx2 * bx2 + by2 * by2)
            if na < 1e-15 or nb < 1e-15:
                den = 2.0
            else:
                ex = ax / na - bx2 / nb
                ey = ay / na - by2 / nb
                den = math.sqrt(ex * ex + ey * ey)
                if den < 0.05:
                    den = 0.05
            k = h / (math.pi * den)
            jac[i, i] += k
            jac[j, j] += k
            jac[i, j] -= k
            jac[j, i] -= k


@numba.njit(cache=True)
def transport_simplex(cost, supply, demand, col_order, max_pivots):
    """Exact transportation simplex with integer data.

    cost: int64 (ns, nd) arc costs; supply/demand: balanced int64 totals;
    col_order: column processing order for the northwest-corner start.
    Returns (status, objective): status 0 = optimal, 1 = pivot cap hit.
    The basis tree keeps parent/children pointers, potentials and flows
    updated incrementally per pivot (re-root the detached component, shift
    its potentials by the entering reduced cost).  Anti-cycling: after 64
    consecutive degenerate pivots, entering and leaving arcs switch to
    lowest-arc-index selection (Bland) until a nondegenerate pivot occurs.
    """
    ns = supply.size
    nd = demand.size
    n_nodes = ns + nd  # rows 0..ns-1, columns ns..ns+nd-1
    nbasic = ns + nd - 1
    bi = np.empty(nbasic, np.int64)
    bj = np.empty(nbasic, np.int64)
    flow = np.empty(nbasic, np.int64)
    rs = supply.copy()
    a = 0
    i = 0
    for jj in range(nd):
        j = col_order[jj]
        need = demand[j]
        while True:
            take = rs[i] if rs[i] < need else need
            bi[a] = i
            bj[a] = j
            flow[a] = take
            a += 1
            rs[i] -= take
            need -= take
            if need == 0:
                break
            i += 1
    # --- build the initial tree (root = row 0) from the basis arcs ---
    parent = np.full(n_nodes, -1, np.int64)
    parent_arc = np.full(n_nodes, -1, np.int64)
    first_child = np.full(n_nodes, -1, np.int64)
    next_sib = np.full(n_nodes, -1, np.int64)
    prev_sib = np.full(n_nodes, -1, np.int64)
    pot = np.zeros(n_nodes, np.int64)
    adj_start = np.zeros(n_nodes + 1, np.int64)
    adj_arc = np.empty(2 * nbasic, np.int64)
    for t in range(nbasic):
        adj_start[bi[t] + 1] += 1
        adj_start[ns + bj[t] + 1] += 1
    for t in range(n_nodes):
        adj_start[t + 1] += adj_start[t]
    fill = adj_start[:n_nodes].copy()
    for t in range(nbasic):
        adj_arc[fill[bi[t]]] = t
        fill[bi[t]] += 1
        adj_arc[fill[ns + bj[t]]] = t
        fill[ns + bj[t]] += 1
    stack = np.empty(n_nodes, np.int64)
    seen = np.zeros(n_nodes, numba.boolean)
    top = 0
    stack[top] = 0
    top += 1
    seen[0] = True
    count = 0
    while top > 0:
        top -= 1
        node = stack[top]
        count += 1
        for s in range(adj_start[node], adj_start[node + 1]):
            arc = adj_arc[s]
            other = ns + bj[arc] if node == bi[arc] else bi[arc]
            if not seen[other]:
                seen[other] = True
                parent[other] = node
                parent_arc[other] = arc
                pot[other] = cost[bi[arc], bj[arc]] - pot[node]
                next_sib[other] = first_child[node]
                if first_child[node] >= 0:
                    prev_sib[first_child[node]] = other
                first_child[node] = other
                prev_sib[other] = -1
                stack[top] = other
                top += 1
    if count != n_nodes:
        return 2, np.int64(0)
    # --- pivot loop ---
    stamp = np.zeros(n_nodes, np.int64)
    walk_a = np.empty(n_nodes, np.int64)
    walk_b = np.empty(n_nodes, np.int64)
    block = 1024
    jb = 0
    degenerate_run = 0
    pivots = np.int64(0)
    while True:
        ei = -1
        ej = -1
        if degenerate_run >= 64:
            for ii in range(ns):
                pi = pot[ii]
                for j in range(nd):
                    if cost[ii, j] - pi - pot[ns + j] < 0:
                        ei = ii
                        ej = j
                        break
                if ei >= 0:
                    break
        else:
            scanned = 0
            while scanned < nd:
                hi = jb + block
                if hi > nd:
                    hi = nd
                best_rc = np.int64(0)
                for ii in range(ns):
                    pi = pot[ii]
                    for j in range(jb, hi):
                        rc = cost[ii, j] - pi - pot[ns + j]
                        if rc < best_rc:
                            best_rc = rc
                            ei = ii
                            ej = j
                scanned += hi - jb
                jb = hi if hi < nd else 0
                if ei >= 0:
                    break
        if ei < 0:
            obj = np.int64(0)
            for t in range(nbasic):
                obj += flow[t] * cost[bi[t], bj[t]]
            return 0, obj
        if pivots >= max_pivots:
            return 1, np.int64(0)
        pivots += 1
        rc_enter = cost[ei, ej] - pot[ei] - pot[ns + ej]
        # --- find the tree path between ei and ns+ej via stamped walk ---
        na = ei
        nb = ns + ej
        stamp[na] = pivots
        stamp[nb] = pivots
        lca = -1
        while lca < 0:
            moved = False
            if parent[na] >= 0:
                na = parent[na]
                moved = True
                if stamp[na] == pivots:
                    lca = na
                    break
                stamp[na] = pivots
            if parent[nb] >= 0:
                nb = parent[nb]
                moved = True
                if stamp[nb] == pivots:
                    lca = nb
                    break
                stamp[nb] = pivots
            if not moved:
                return 2, np.int64(0)
        la = 0
        node = ei
        while node != lca:
            walk_a[la] = node
            la += 1
            node = parent[node]
        lb = 0
        node = ns + ej
        while node != lca:
            walk_b[lb] = node
            lb += 1
            node = parent[node]
        # cycle walk B -> LCA -> A; minus arcs sit at even positions
        cyc_len = la + lb
        theta = np.int64(-1)
        leave_arc = -1
        leave_k = -1
        bland = degenerate_run >= 64
        for k in range(cyc_len):
            child = walk_b[k] if k < lb else walk_a[cyc_len - 1 - k]
            arc = parent_arc[child]
            if k % 2 == 0:
                f = flow[arc]
                better = False
                if theta < 0 or f < theta:
                    better = True
                elif f == theta and bland:
                    ai = bi[arc] * nd + bj[arc]
                    al = bi[leave_arc] * nd + bj[leave_arc]
                    if ai < al:
                        better = True
                if better:
                    theta = f
                    leave_arc = arc
                    leave_k = k
        if theta > 0:
            for k in range(cyc_len):
                child = walk_b[k] if k < lb else walk_a[cyc_len - 1 - k]
                arc = parent_arc[child]
                if k % 2 == 0:
                    flow[arc] -= theta
                else:
                    flow[arc] += theta
            degenerate_run = 0
        else:
            degenerate_run += 1
        # child-side node of the leaving arc, and the entering endpoint in
        # the detached component
        if leave_k < lb:
            c_leave = walk_b[leave_k]
            x = ns + ej
            y = ei
        else:
            c_leave = walk_a[cyc_len - 1 - leave_k]
            x = ei
            y = ns + ej
        # replace the leaving slot with the entering arc
        bi[leave_arc] = ei
        bj[leave_arc] = ej
        flow[leave_arc] = theta
        # detach c_leave from its parent
        pp = parent[c_leave]
        if prev_sib[c_leave] >= 0:
            next_sib[prev_sib[c_leave]] = next_sib[c_leave]
        else:
            first_child[pp] = next_sib[c_leave]
        if next_sib[c_leave] >= 0:
            prev_sib[next_sib[c_leave]] = prev_sib[c_leave]
        # re-root the detached component at x, hanging it under y
        prev = y
        prev_arc = leave_arc
        node = x
        while True:
            p = parent[node]
            pa = parent_arc[node]
            if node != c_leave:
                # detach node from p's child list (p is inside the component)
                if prev_sib[node] >= 0:
                    next_sib[prev_sib[node]] = next_sib[node]
                else:
                    first_child[p] = next_sib[node]
                if next_sib[node] >= 0:
                    prev_sib[next_sib[node]] = prev_sib[node]
            parent[node] = prev
            parent_arc[node] = prev_arc
            next_sib[node] = first_child[prev]
            if first_child[prev] >= 0:
                prev_sib[first_child[prev]] = node
            first_child[prev] = node
            prev_sib[node] = -1
            if node == c_leave:
                break
            prev = node
            prev_arc = pa
            node = p
        # shift potentials on the re-rooted component so the entering arc
        # becomes tight: columns move by +rc, rows by -rc (or the mirror
        # image when x is a row)
        if x >= ns:
            col_delta = rc_enter
        else:
            col_delta = -rc_enter
        top = 0
        stack[top] = x
        top += 1
        while top > 0:
            top -= 1
            node = stack[top]
            if node >= ns:
                pot[node] += col_delta
            else:
                pot[node] -= col_delta
            ch = first_child[node]
            while ch >= 0:
                stack[top] = ch
                top += 1
                ch = next_sib[ch]
