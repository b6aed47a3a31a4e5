"""Exact enumeration of rooted planar maps and triangulations with boundary.

Ground truth for every generating-series convention in the package.  Three
independent paths are implemented and must agree exactly on overlaps:

1. `rooted_map_census`: brute force over vertex rotations sigma in S_{2e}
   with a fixed edge involution, filtered to connected genus-0 pairs.  The
   rooted count is the raw count divided by (2e-1)!/(2e-1)!!, exact because
   rooted maps have no nontrivial automorphisms fixing the root dart.

2. `GluingEnumerator`: depth-first gluing of a fixed face skeleton (one
   root k-gon plus f triangles).  Partial gluings keep an explicit boundary
   structure; a gluing step is admitted only when it provably preserves
   genus 0 (same boundary cycle, or distinct connected components), so the
   search tree never leaves the sphere.  This scales far beyond path 1 and
   produces the full dart structure of every map (needed to extract
   percolation clusters).

3. `peeling_census`: a recursion derived from scratch.  Triangulations of a
   k-gon whose boundary walk visits k distinct vertices are generated by
   deterministic edge peeling (apex on a new vertex, apex on a boundary
   position splitting the hole, or closing an empty 2-gon by identifying
   its two sides).  Arbitrary boundary walks are then assembled from these
   simple-walk pieces over non-crossing pinch patterns of the k corners.

A map is stored as (sigma, alpha) on darts 0..2e-1: sigma = counterclockwise
rotation, alpha = edge involution, faces = orbits of sigma o alpha.
"""

from __future__ import annotations

import itertools
from collections import Counter, defaultdict
from fractions import Fraction

from .polyp import PolyP


# ---------------------------------------------------------------------------
# permutation utilities


def perm_cycles(perm):
    n = len(perm)
    seen = [False] * n
    cycles = []
    for start in range(n):
        if seen[start]:
            continue
        cyc = []
        d = start
        while not seen[d]:
            seen[d] = True
            cyc.append(d)
            d = perm[d]
        cycles.append(cyc)
    return cycles


def compose(p, q):
    """(p o q)(i) = p[q[i]]."""
    return [p[q[i]] for i in range(len(p))]


def is_transitive(sigma, alpha):
    n = len(sigma)
    seen = [False] * n
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        d = stack.pop()
        for e in (sigma[d], alpha[d]):
            if not seen[e]:
                seen[e] = True
                count += 1
                stack.append(e)
    return count == n


def genus(sigma, alpha):
    n = len(sigma)
    v = len(perm_cycles(sigma))
    f = len(perm_cycles(compose(sigma, alpha)))
    e = n // 2
    euler = v - e + f
    return (2 - euler) // 2, v, f


def _double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


# ---------------------------------------------------------------------------
# path 1: brute force over rotations


def rooted_map_census(e: int):
    """Counts of rooted planar maps with exactly e edges (e <= 4).

    Returns (total, by_root_face_degree) where the root face is the
    sigma-alpha orbit of dart 0.
    """
    if e < 1 or e > 4:
        raise ValueError("brute-force census limited to 1 <= e <= 4")
    n = 2 * e
    alpha = [i ^ 1 for i in range(n)]
    divisor = Fraction(_factorial(n - 1), _double_factorial(n - 1))
    raw_total = 0
    raw_by_degree = Counter()
    for sigma in itertools.permutations(range(n)):
        if not is_transitive(sigma, alpha):
            continue
        g, _v, _f = genus(sigma, alpha)
        if g != 0:
            continue
        raw_total += 1
        phi = compose(list(sigma), alpha)
        deg = _orbit_length(phi, 0)
        raw_by_degree[deg] += 1
    total = Fraction(raw_total) / divisor
    by_degree = {k: Fraction(v) / divisor for k, v in raw_by_degree.items()}
    assert total.denominator == 1
    assert all(c.denominator == 1 for c in by_degree.values())
    return int(total), {k: int(v) for k, v in by_degree.items()}


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _orbit_length(perm, start):
    d = perm[start]
    length = 1
    while d != start:
        d = perm[d]
        length += 1
    return length


def boundary_census_bruteforce(k: int, e: int):
    """Rooted k-gon triangulations with e edges via the S_{2e} loop (e <= 4).

    Root face = face of dart 0, required to have degree k; all other faces
    must be triangles.  Keyed by the number of distinct vertices on the
    root face walk.  Independent anchor for the gluing enumerator.
    """
    if e > 4:
        raise ValueError("brute-force boundary census limited to e <= 4")
    n = 2 * e
    alpha = [i ^ 1 for i in range(n)]
    divisor = Fraction(_factorial(n - 1), _double_factorial(n - 1))
    raw = Counter()
    for sigma in itertools.permutations(range(n)):
        if not is_transitive(sigma, alpha):
            continue
        g, _v, _f = genus(sigma, alpha)
        if g != 0:
            continue
        phi = compose(list(sigma), alpha)
        cycles = perm_cycles(phi)
        root_cycle = next(c for c in cycles if 0 in c)
        if len(root_cycle) != k:
            continue
        if any(len(c) != 3 for c in cycles if 0 not in c):
            continue
        vout = _distinct_vertices(sigma, root_cycle)
        raw[vout] += 1
    out = {}
    for vout, c in raw.items():
        val = Fraction(c) / divisor
        assert val.denominator == 1
        out[vout] = int(val)
    return out


def _distinct_vertices(sigma, darts):
    n = len(sigma)
    vertex_of = [-1] * n
    for i, cyc in enumerate(perm_cycles(list(sigma))):
        for d in cyc:
            vertex_of[d] = i
    return len({vertex_of[d] for d in darts})


# ---------------------------------------------------------------------------
# path 2: planarity-pruned gluing of a fixed face skeleton


class GluingEnumerator:
    """Enumerate planar gluings (alpha) of a fixed face skeleton phi.

    Faces are given as dart cycles; dart 0 is the root.  Boundary state:
    `succ[d]` links unpaired darts along boundary walks of the partially
    glued complex.  Gluing darts a, b rewires succ(pred(a)) -> succ(b) and
    succ(pred(b)) -> succ(a): this merges two boundary cycles of distinct
    components or splits one cycle in two; gluing distinct cycles of one
    component would create a handle and is pruned.  A complete alpha is
    therefore planar by construction (asserted via Euler's formula).

    Rooted counts: gluings are counted with the skeleton labeled, so each
    rooted map is produced once per skeleton symmetry fixing dart 0
    (independent triangle rotations and triangle swaps); `multiplicity()`
    returns that factor.
    """

    def __init__(self, face_degrees):
        self.face_degrees = list(face_degrees)
        self.n = sum(face_degrees)
        if self.n % 2:
            raise ValueError("odd total degree cannot be glued")
        self.phi = [0] * self.n
        self.face_of = [0] * self.n
        start = 0
        self.faces = []
        for fi, deg in enumerate(self.face_degrees):
            cyc = list(range(start, start + deg))
            self.faces.append(cyc)
            for i, d in enumerate(cyc):
                self.phi[d] = cyc[(i + 1) % deg]
                self.face_of[d] = fi
            start += deg
        self.results = []

    def multiplicity(self) -> int:
        """Gluings per rooted map: skeleton relabelings fixing dart 0.

        The root face is pinned by dart 0; the remaining faces may be
        rotated independently and permuted within equal-degree classes.
        """
        rest = self.face_degrees[1:]
        out = 1
        for deg in rest:
            out *= deg
        counts = Counter(rest)
        for c in counts.values():
            out *= _factorial(c)
        return out

    def run(self, visit):
        n = self.n
        succ = [0] * n
        pred = [0] * n
        # Boundary of a lone face traverses its darts in reverse phi order.
        for cyc in self.faces:
            m = len(cyc)
            for i, d in enumerate(cyc):
                succ[d] = cyc[(i - 1) % m]
                pred[succ[d]] = d
        alpha = [-1] * n
        comp = list(range(len(self.faces)))  # union-find over faces

        def find(x):
            while comp[x] != x:
                comp[x] = comp[comp[x]]
                x = comp[x]
            return x

        paired = [False] * n

        def same_cycle(a, b, limit):
            d = succ[a]
            steps = 0
            while steps <= limit:
                if d == b:
                    return True
                if d == a:
                    return False
                d = succ[d]
                steps += 1
            return False

        def dfs(unpaired_count):
            if unpaired_count == 0:
                visit(alpha)
                return
            a = paired.index(False)
            fa = find(self.face_of[a])
            # Candidate partners: remaining unpaired darts.
            for b in range(a + 1, n):
                if paired[b]:
                    continue
                fb = find(self.face_of[b])
                if fa == fb and not same_cycle(a, b, n):
                    continue  # same component, different cycle: handle
                # glue
                pa, pb = pred[a], pred[b]
                sa, sb = succ[a], succ[b]
                alpha[a], alpha[b] = b, a
                paired[a] = paired[b] = True
                # Rewire the boundary around the removed darts a, b: the
                # walk ... pa a ... now continues at succ[b] and vice versa.
                old = (pa, pb, sa, sb, comp[:])
                if sa == b and sb == a:
                    pass  # a two-dart boundary cycle closes completely
                elif sa == a and sb == b:
                    pass  # two one-dart cycles cap each other off
                elif sa == a:
                    # a alone on its cycle: splice it away, drop b normally
                    succ[pb] = sb
                    pred[sb] = pb
                elif sb == b:
                    succ[pa] = sa
                    pred[sa] = pa
                elif sa == b:
                    # ... pa a b sb ...  ->  ... pa sb ...
                    succ[pa] = sb
                    pred[sb] = pa
                elif sb == a:
                    # ... pb b a sa ...  ->  ... pb sa ...
                    succ[pb] = sa
                    pred[sa] = pb
                else:
                    succ[pa] = sb
                    pred[sb] = pa
                    succ[pb] = sa
                    pred[sa] = pb
                ra, rb = find(fa), find(fb)
                if ra != rb:
                    comp[ra] = rb
                dfs(unpaired_count - 2)
                # undo
                pa, pb, sa, sb, saved = old
                comp[:] = saved
                paired[a] = paired[b] = False
                alpha[a] = alpha[b] = -1
                succ[pa] = a
                pred[a] = pa
                succ[pb] = b
                pred[b] = pb
                succ[a] = sa
                pred[sa] = a
                succ[b] = sb
                pred[sb] = b

        dfs(n)

    def enumerate_maps(self):
        """Yield (sigma, alpha) for every planar connected gluing."""
        out = []

        def visit(alpha):
            sigma = self._sigma(alpha)
            if not is_transitive(sigma, alpha):
                return  # several disjoint closed spheres
            g, _v, _f = genus(sigma, alpha)
            if g != 0:
                raise AssertionError("planarity filter leaked a handle")
            out.append((sigma, alpha[:]))

        self.run(visit)
        return out

    def enumerate_rooted(self):
        """Yield (sigma, alpha) once per rooted map (symmetry broken).

        Interchangeable skeleton triangles are introduced canonically: a
        fresh triangle may only enter as the lowest-indexed unused one,
        glued at its first dart.  The active dart is always chosen on a
        face already connected to the root face, so completed gluings are
        connected and each rooted map has exactly one transcript.
        """
        n = self.n
        succ = [0] * n
        pred = [0] * n
        for cyc in self.faces:
            m = len(cyc)
            for i, d in enumerate(cyc):
                succ[d] = cyc[(i - 1) % m]
                pred[succ[d]] = d
        alpha = [-1] * n
        paired = [False] * n
        touched = [False] * len(self.faces)
        touched[0] = True
        out = []

        def same_cycle(a, b):
            d = succ[a]
            while True:
                if d == b:
                    return True
                if d == a:
                    return False
                d = succ[d]

        def glue_candidates(a):
            cands = []
            for b in range(n):
                if b == a or paired[b]:
                    continue
                if touched[self.face_of[b]]:
                    if same_cycle(a, b):
                        cands.append(b)
            # one canonical fresh face per degree class (equal-degree faces
            # are interchangeable, so only the lowest-indexed may enter)
            seen_deg = set()
            for fi in range(len(self.faces)):
                if touched[fi]:
                    continue
                deg = self.face_degrees[fi]
                if deg not in seen_deg:
                    seen_deg.add(deg)
                    cands.append(self.faces[fi][0])
            return cands

        def dfs(unpaired_count):
            if unpaired_count == 0:
                sigma = self._sigma(alpha)
                g, _v, _f = genus(sigma, alpha)
                assert g == 0, "planarity filter leaked a handle"
                out.append((sigma, alpha[:]))
                return
            a = -1
            for d in range(n):
                if not paired[d] and touched[self.face_of[d]]:
                    a = d
                    break
            if a < 0:
                return  # untouched faces left: would disconnect
            for b in glue_candidates(a):
                fb = self.face_of[b]
                fresh_face = not touched[fb]
                pa, pb = pred[a], pred[b]
                sa, sb = succ[a], succ[b]
                alpha[a], alpha[b] = b, a
                paired[a] = paired[b] = True
                touched[fb] = True
                if sa == b and sb == a:
                    pass
                elif sa == a and sb == b:
                    pass
                elif sa == a:
                    succ[pb] = sb
                    pred[sb] = pb
                elif sb == b:
                    succ[pa] = sa
                    pred[sa] = pa
                elif sa == b:
                    succ[pa] = sb
                    pred[sb] = pa
                elif sb == a:
                    succ[pb] = sa
                    pred[sa] = pb
                else:
                    succ[pa] = sb
                    pred[sb] = pa
                    succ[pb] = sa
                    pred[sa] = pb
                dfs(unpaired_count - 2)
                if fresh_face:
                    touched[fb] = False
                paired[a] = paired[b] = False
                alpha[a] = alpha[b] = -1
                succ[pa] = a
                pred[a] = pa
                succ[pb] = b
                pred[b] = pb
                succ[a] = sa
                pred[sa] = a
                succ[b] = sb
                pred[sb] = b

        dfs(n)
        return out

    def _sigma(self, alpha):
        # phi = sigma o alpha  =>  sigma = phi o alpha (alpha involutive).
        return [self.phi[alpha[d]] for d in range(self.n)]


def boundary_census_gluing(k: int, e: int):
    """Rooted k-gon triangulations with e edges via skeleton gluing.

    Same key convention as `boundary_census_bruteforce`.
    """
    f3 = 2 * e - k
    if f3 < 0 or f3 % 3:
        return {}
    f = f3 // 3
    if f == 0 and k % 2:
        return {}
    enum = GluingEnumerator([k] + [3] * f)
    mult = enum.multiplicity()
    raw = Counter()
    for sigma, alpha in enum.enumerate_maps():
        phi = compose(sigma, alpha)
        root_cycle = next(c for c in perm_cycles(phi) if 0 in c)
        if len(root_cycle) != k:
            # A gluing can merge boundary edges so that the root face walk
            # degenerates; with the skeleton fixed this cannot happen, so
            # treat it as a logic error.
            raise AssertionError("root face degree changed during gluing")
        vout = _distinct_vertices(sigma, root_cycle)
        raw[vout] += 1
    out = {}
    for vout, c in raw.items():
        q, r = divmod(c, mult)
        assert r == 0, (k, e, vout, c, mult)
        out[vout] = q
    return out


def sphere_triangulations(n_faces: int):
    """All rooted sphere triangulations with n_faces triangles.

    Returns a list of (sigma, alpha); each rooted map appears exactly once.
    """
    if n_faces % 2:
        return []
    enum = GluingEnumerator([3] * n_faces)
    maps = enum.enumerate_rooted()
    keys = {canonical_key(sigma, alpha) for sigma, alpha in maps}
    assert len(keys) == len(maps), "symmetry breaking produced a duplicate"
    return sorted(keys)


def canonical_key(sigma, alpha, root=0):
    """Canonical relabeling of a rooted map by BFS from the root dart.

    Rooted maps are rigid, so the relabeled (sigma, alpha) is a complete
    isomorphism invariant.
    """
    n = len(sigma)
    label = {root: 0}
    order = [root]
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        for nxt in (sigma[d], alpha[d]):
            if nxt not in label:
                label[nxt] = len(order)
                order.append(nxt)
    assert len(order) == n
    new_sigma = [0] * n
    new_alpha = [0] * n
    for d in range(n):
        new_sigma[label[d]] = label[sigma[d]]
        new_alpha[label[d]] = label[alpha[d]]
    return tuple(new_sigma), tuple(new_alpha)


# ---------------------------------------------------------------------------
# path 3: peeling recursion for simple-walk boundaries + pinch assembly


def _peel_counts(hole_sizes, tri_budget, memo):
    """Number of fillings of independent holes by `f` triangles, f <= budget.

    A hole of degree d >= 1 is filled by peeling its first side: glue a
    triangle whose apex is a new vertex (hole degree d+1) or the boundary
    vertex at position j (splitting the hole, degrees (d, 1) for j = 0 and
    (j, d + 1 - j) for 1 <= j <= d - 1); a hole of degree 2 may instead be
    closed by identifying its two sides.  Every filling of a polygon with
    pairwise-distinct boundary vertices arises from exactly one transcript.

    Returns a dict {f: count} over triangle counts.
    """
    key = (tuple(sorted(hole_sizes)), tri_budget)
    if key in memo:
        return memo[key]
    if not hole_sizes:
        return {0: 1}
    first, rest = hole_sizes[0], hole_sizes[1:]
    out = Counter()
    if first == 2:
        for f, c in _peel_counts(rest, tri_budget, memo).items():
            out[f] += c
    if tri_budget >= 1:
        moves = [[first + 1]]
        d = first
        moves.append([d, 1])          # apex at position 0
        for j in range(1, d):
            moves.append([j, d + 1 - j])
        for new_holes in moves:
            sizes = [h for h in new_holes if h > 0] + list(rest)
            for f, c in _peel_counts(sizes, tri_budget - 1, memo).items():
                out[f + 1] += c
    memo[key] = dict(out)
    return memo[key]


def _peel_counts_p(hole_sizes, tri_budget, memo):
    """Like `_peel_counts` but also tracking how many NEW vertices appear.

    Interior vertices are exactly the apex-on-new-vertex moves; the piece
    assembly needs filling counts refined by that number.  Returns
    {(f, new_vertices): count}.
    """
    key = (tuple(sorted(hole_sizes)), tri_budget)
    if key in memo:
        return memo[key]
    if not hole_sizes:
        return {(0, 0): 1}
    first, rest = hole_sizes[0], hole_sizes[1:]
    out = Counter()
    if first == 2:
        for (f, nv), c in _peel_counts_p(rest, tri_budget, memo).items():
            out[(f, nv)] += c
    if tri_budget >= 1:
        sizes = [first + 1] + list(rest)
        for (f, nv), c in _peel_counts_p(sizes, tri_budget - 1, memo).items():
            out[(f + 1, nv + 1)] += c
        d = first
        split_moves = [[d, 1]] + [[j, d + 1 - j] for j in range(1, d)]
        for new_holes in split_moves:
            sizes = [h for h in new_holes if h > 0] + list(rest)
            for (f, nv), c in _peel_counts_p(sizes, tri_budget - 1, memo).items():
                out[(f + 1, nv)] += c
    memo[key] = dict(out)
    return memo[key]


def simple_walk_census(k: int, e_max: int):
    """Triangulations of a k-gon whose boundary walk has k distinct vertices.

    Returns {e: count}; every such map has v_out = k.  Derived by the
    peeling recursion, independent of the gluing enumerator.
    """
    out = {}
    memo = {}
    f_max = max(0, (2 * e_max - k) // 3)
    counts = _peel_counts([k] if k > 0 else [], f_max, memo)
    for f, c in counts.items():
        if (k + 3 * f) % 2:
            continue
        e = (k + 3 * f) // 2
        if e <= e_max:
            out[e] = out.get(e, 0) + c
    return out


def simple_walk_census_by_vertices(k: int, e_max: int):
    """{(e, interior_new_vertices): count} for simple-walk k-gon fillings."""
    memo = {}
    f_max = max(0, (2 * e_max - k) // 3)
    counts = _peel_counts_p([k] if k > 0 else [], f_max, memo)
    out = {}
    for (f, nv), c in counts.items():
        if (k + 3 * f) % 2:
            continue
        e = (k + 3 * f) // 2
        if e <= e_max:
            out[(e, nv)] = out.get((e, nv), 0) + c
    return out


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _noncrossing_partitions(k: int):
    """Non-crossing partitions of the cycle positions 0..k-1.

    Linear and cyclic non-crossing coincide, so the linear test suffices.
    """
    out = []
    for part in _set_partitions(list(range(k))):
        blocks = [sorted(b) for b in part]
        if _is_noncrossing(blocks):
            out.append(sorted(blocks))
    return out


def _is_noncrossing(blocks):
    for i, b1 in enumerate(blocks):
        for b2 in blocks[i + 1:]:
            for lo in b1:
                for hi in b1:
                    if lo >= hi:
                        continue
                    inside = sum(1 for x in b2 if lo < x < hi)
                    if 0 < inside < len(b2):
                        return False
    return True


def _pieces_of_pattern(k: int, blocks):
    """Arc lengths of the disks cut out by a pinch pattern on a k-cycle.

    Corner positions in the same block are the same vertex; they cut the
    closed boundary walk into closed sub-walks, each bounding its own disk
    with pairwise-distinct walk vertices.  Peel off a minimal-gap repeated
    pair at a time: for a non-crossing pattern the minimal-gap sub-walk has
    distinct interior classes, hence is a single piece.
    """
    cls = list(range(k))
    for b in blocks:
        for x in b:
            cls[x] = min(b)
    current = cls[:]
    pieces = []
    while True:
        best = None
        for i in range(len(current)):
            for j in range(i + 1, len(current)):
                if current[i] == current[j]:
                    if best is None or j - i < best[1] - best[0]:
                        best = (i, j)
        if best is None:
            break
        i, j = best
        pieces.append(j - i)
        current = current[:i + 1] + current[j + 1:]
    if current:
        pieces.append(len(current))
    assert sum(pieces) == k
    return pieces


def full_boundary_census(k: int, e_max: int):
    """{(e, v_out): count} for all rooted k-gon triangulations, by assembly.

    Pinched boundary walks are sums over non-crossing pinch patterns of
    independent simple-walk pieces.  Cross-checked exactly against the
    gluing enumerator in the tests; this is the scalable oracle path.
    """
    out = Counter()
    for blocks in _noncrossing_partitions(k):
        vout_boundary = len(blocks)
        pieces = _pieces_of_pattern(k, blocks)
        # product over pieces of their simple-walk censuses
        acc = {(0, 0): 1}
        ok = True
        for piece in pieces:
            picked = simple_walk_census_by_vertices(piece, e_max)
            if not picked:
                ok = False
                break
            nxt = Counter()
            for (e1, nv1), c1 in acc.items():
                for (e2, nv2), c2 in picked.items():
                    if e1 + e2 <= e_max:
                        nxt[(e1 + e2, nv1 + nv2)] += c1 * c2
            acc = nxt
        if not ok:
            continue
        for (e, _nv), c in acc.items():
            out[(e, vout_boundary)] += c
    return dict(out)


# ---------------------------------------------------------------------------
# percolated censuses


def vertex_labels(sigma):
    n = len(sigma)
    label = [-1] * n
    for i, cyc in enumerate(perm_cycles(list(sigma))):
        for d in cyc:
            label[d] = i
    return label


def submap_of_cluster(sigma, alpha, black):
    """Root-cluster submap of a colored triangulation.

    `black` maps vertex id -> bool; the root edge's two ends must be black.
    Returns (sigma_c, alpha_c, dart_map) of the cluster as a rooted map on
    compacted dart indices, root dart 0.
    """
    n = len(sigma)
    vlab = vertex_labels(sigma)
    nv = max(vlab) + 1
    adj = defaultdict(set)
    for d in range(n):
        a, b = vlab[d], vlab[alpha[d]]
        if black[a] and black[b]:
            adj[a].add(b)
            adj[b].add(a)
    root_v = vlab[0]
    comp = {root_v}
    stack = [root_v]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in comp:
                comp.add(w)
                stack.append(w)
    keep = [d for d in range(n)
            if vlab[d] in comp and vlab[alpha[d]] in comp]
    keep_set = set(keep)
    assert 0 in keep_set, "root edge must lie in the cluster"
    index = {d: i for i, d in enumerate(keep)}
    sigma_c = [0] * len(keep)
    alpha_c = [0] * len(keep)
    for d in keep:
        nxt = sigma[d]
        while nxt not in keep_set:
            nxt = sigma[nxt]
        sigma_c[index[d]] = index[nxt]
        alpha_c[index[d]] = index[alpha[d]]
    return sigma_c, alpha_c, index


def face_degrees(sigma, alpha):
    phi = compose(list(sigma), list(alpha))
    return sorted(len(c) for c in perm_cycles(phi))


def percolated_census(n_max: int):
    """Exact percolated data for sphere triangulations with <= 3 n_max edges.

    For every rooted sphere triangulation with e = 3n edges (n <= n_max)
    and every coloring with the root edge's ends black, accumulates the
    weight p^{blacks} (1-p)^{whites} as a polynomial:

      * `mass_total[n]`: the full percolated mass (p^2 Z check);
      * `by_cluster[key][n]`: mass grouped by the root cluster's rooted
        isomorphism class (gasket identity check); `key` includes the
        cluster's face degrees;
      * `by_root_face_degree[l][n]`: mass grouped by the degree of the
        cluster face to the left of the root dart.
    """
    mass_total = defaultdict(PolyP)
    by_cluster = defaultdict(lambda: defaultdict(PolyP))
    cluster_faces = {}
    for n in range(1, n_max + 1):
        f = 2 * n
        for sigma, alpha in sphere_triangulations(f):
            vlab = vertex_labels(sigma)
            nv = max(vlab) + 1
            root_ends = {vlab[0], vlab[alpha[0]]}
            free = [v for v in range(nv) if v not in root_ends]
            for mask in range(1 << len(free)):
                black = [False] * nv
                for v in root_ends:
                    black[v] = True
                for i, v in enumerate(free):
                    if (mask >> i) & 1:
                        black[v] = True
                nb = sum(black)
                weight = PolyP.p_power(nb) * PolyP.one_minus_p_power(nv - nb)
                mass_total[n] = mass_total[n] + weight
                sig_c, alf_c, _ = submap_of_cluster(sigma, alpha, black)
                key = canonical_key(sig_c, alf_c)
                by_cluster[key][n] = by_cluster[key][n] + weight
                if key not in cluster_faces:
                    cluster_faces[key] = face_degrees(sig_c, alf_c)
    return {
        "mass_total": dict(mass_total),
        "by_cluster": {k: dict(v) for k, v in by_cluster.items()},
        "cluster_faces": cluster_faces,
    }


def rooted_maps_by_key(e: int):
    """All rooted planar maps with e edges (e <= 4), one per canonical key.

    Derived from the S_{2e} loop; validates that every key is hit exactly
    (2e-1)!/(2e-1)!! times.
    """
    n = 2 * e
    alpha = [i ^ 1 for i in range(n)]
    expected = _factorial(n - 1) // _double_factorial(n - 1)
    seen = Counter()
    reps = {}
    for sigma in itertools.permutations(range(n)):
        if not is_transitive(sigma, alpha):
            continue
        g, _v, _f = genus(sigma, alpha)
        if g != 0:
            continue
        key = canonical_key(list(sigma), alpha)
        seen[key] += 1
        reps[key] = key
    for key, c in seen.items():
        assert c == expected, (key, c, expected)
    return sorted(reps)


def census_dump_csv(census, path):
    """Write a percolated census as CSV with exact integer coefficients."""
    rows = []
    max_deg = 0
    for key, masses in census["by_cluster"].items():
        faces = census["cluster_faces"][key]
        for n, poly in sorted(masses.items()):
            max_deg = max(max_deg, poly.degree())
            rows.append((len(key[0]) // 2, "-".join(map(str, faces)), n, poly))
    with open(path, "w") as fh:
        header = ["cluster_edges", "cluster_face_degrees", "x_order"]
        header += [f"p^{i}" for i in range(max_deg + 1)]
        fh.write(",".join(header) + "\n")
        for edges, faces, n, poly in sorted(rows):
            cs = [str(c) for c in poly.coeffs] + ["0"] * (max_deg + 1 - len(poly.coeffs))
            fh.write(f"{edges},{faces},{n}," + ",".join(cs) + "\n")


def _partitions(total, max_part=None):
    if max_part is None:
        max_part = total
    if total == 0:
        yield []
        return
    for part in range(min(total, max_part), 0, -1):
        for rest in _partitions(total - part, part):
            yield [part] + rest


def rooted_maps_all(e: int):
    """All rooted planar maps with e edges via face-profile gluing.

    Face-degree profiles run over partitions of 2e; the root face (degree
    of dart 0's face) is distinguished, the rest enter symmetry-broken.
    Scales far beyond the S_{2e} loop.
    """
    out = []
    for root_deg in range(1, 2 * e + 1):
        for rest in _partitions(2 * e - root_deg):
            enum = GluingEnumerator([root_deg] + rest)
            for sigma, alpha in enum.enumerate_rooted():
                out.append((sigma, alpha))
    return out
