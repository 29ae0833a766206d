"""Independent brute-force reference implementations used by the tests.

These deliberately share no code with the package: plain loops and
recursion over the same definitions. Weighted sums iterate tokens in
sorted order, which is the canonical order the engine also uses, so
matching results are bit-identical.
"""

import math
from collections import Counter

ARTICLES = {"the", "a", "an"}
ALMOST_ONE = math.nextafter(1.0, 0.0)


def o_normalize(raw):
    s = raw.lower()
    while s and s[-1] in ".!?,;: \t\r\n":
        s = s[:-1]
    return s.split()


def o_idf(kb):
    docs = []
    for scs in kb.seed_commands.values():
        for sc in scs:
            if sc.provenance.kind == "authored":
                docs.append([t for t in sc.tokens if t not in sc.covered_args])
    n = len(docs)
    df = {}
    for doc in docs:
        for tok in set(doc):
            df[tok] = df.get(tok, 0) + 1
    idf = {tok: 1.0 + math.log((1.0 + n) / (1.0 + d)) for tok, d in df.items()}
    default = max(idf.values()) if idf else 1.0
    return idf, default


def o_weight(tok, idf_pair):
    idf, default = idf_pair
    return idf.get(tok, default)


def o_spans(tokens, kb, type_name):
    """All (value, span) slot matches, including article-absorbed variants."""
    gaz = kb.gazetteers.get(type_name)
    if gaz is None:
        return []
    out = []
    phrases = [tuple(p.split()) for p in gaz.values]
    for i in range(len(tokens)):
        for p in phrases:
            if tuple(tokens[i : i + len(p)]) == p and i + len(p) <= len(tokens):
                out.append((" ".join(p), (i, i + len(p))))
                if i > 0 and tokens[i - 1] in ARTICLES:
                    out.append((" ".join(p), (i - 1, i + len(p))))
    return out


def o_assignments(tokens, sc, kb):
    """Every consistent subset assignment of the template's variables."""
    api = kb.apis[sc.api_id]
    types = {a.name: a.type_name for a in api.args}
    names = sorted(sc.covered_args)
    options = {name: o_spans(tokens, kb, types[name]) for name in names}
    results = []

    def rec(i, current):
        if i == len(names):
            results.append(dict(current))
            return
        name = names[i]
        rec(i + 1, current)  # leave unbound
        for value, (s, e) in options[name]:
            ok = True
            for _, (_, (s2, e2)) in current.items():
                if not (e <= s2 or s >= e2):
                    ok = False
                    break
            if ok:
                current[name] = (value, (s, e))
                rec(i + 1, current)
                del current[name]

    rec(0, {})
    return results


def o_dice(u_counts, s_counts, weight):
    u_sum = sum(weight(t) * c for t, c in sorted(u_counts.items()))
    s_sum = sum(weight(t) * c for t, c in sorted(s_counts.items()))
    if u_sum == 0.0 and s_sum == 0.0:
        return 1.0
    small, big = (u_counts, s_counts) if len(u_counts) <= len(s_counts) else (s_counts, u_counts)
    inter = sum(weight(t) * min(c, big[t]) for t, c in sorted(small.items()) if t in big)
    if inter == 0.0:
        return 0.0
    return (2.0 * inter) / (u_sum + s_sum)


def o_score(tokens, sc, assignment, kb, uniform=False, idf_pair=None):
    """Score one (template, assignment) pair; assignment: name -> (value, span)."""
    removed = set()
    for _, (s, e) in assignment.values():
        removed.update(range(s, e))
    residual = Counter(t for i, t in enumerate(tokens) if i not in removed)
    sc_words = Counter(t for t in sc.tokens if t not in sc.covered_args)
    if uniform:
        weight = lambda t: 1.0  # noqa: E731
    else:
        if idf_pair is None:
            idf_pair = o_idf(kb)
        pair = idf_pair
        weight = lambda t: o_weight(t, pair)  # noqa: E731
    score = o_dice(residual, sc_words, weight)
    if score >= 1.0 and (set(sc.covered_args) - set(assignment)):
        return ALMOST_ONE
    return score


def o_ground_ranking(tokens, kb):
    """Full (api_id, sc_id, score) ranking by exhaustive enumeration."""
    idf_pair = o_idf(kb)
    per_sc = []
    for api_id in kb.apis:
        for sc in kb.seed_commands.get(api_id, ()):
            best = None
            for assignment in o_assignments(tokens, sc, kb):
                s = o_score(tokens, sc, assignment, kb, idf_pair=idf_pair)
                if best is None or s > best:
                    best = s
            if best is not None and best > 0.0:
                per_sc.append((api_id, sc.sc_id, best))
    per_sc.sort(key=lambda row: (-row[2], row[0], row[1]))
    return per_sc


def o_api_scores(tokens, kb):
    scores = {api_id: 0.0 for api_id in kb.apis}
    for api_id, _, s in o_ground_ranking(tokens, kb):
        if s > scores[api_id]:
            scores[api_id] = s
    return scores


def o_masked_counts(tokens, kb):
    masked = set()
    for type_name in kb.gazetteers:
        for _, (s, e) in o_spans(tokens, kb, type_name):
            masked.update(range(s, e))
    return Counter(t for i, t in enumerate(tokens) if i not in masked)


def o_components(utterances, kb, delta):
    """Connected components of the similarity >= delta graph (BFS)."""
    idf_pair = o_idf(kb)
    weight = lambda t: o_weight(t, idf_pair)  # noqa: E731
    items = sorted(utterances)
    counts = [o_masked_counts(tuple(o_normalize(u)), kb) for u in items]
    n = len(items)
    adj = {i: [] for i in range(n)}
    for i in range(n):
        for j in range(i + 1, n):
            if o_dice(counts[i], counts[j], weight) >= delta:
                adj[i].append(j)
                adj[j].append(i)
    seen = set()
    comps = []
    for i in range(n):
        if i in seen:
            continue
        queue = [i]
        comp = []
        seen.add(i)
        while queue:
            cur = queue.pop()
            comp.append(items[cur])
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        comps.append(sorted(comp))
    return sorted(comps, key=lambda c: c[0])


def o_smoothed_probability(kb, context, api_id):
    total = sum(n for (prev, _), n in kb.usage.items() if prev == context)
    count = kb.usage.get((context, api_id), 0)
    return (count + 1) / (total + len(kb.apis))
