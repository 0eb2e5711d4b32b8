#!/usr/bin/env python3
"""Small-model reference values: vocabulary, TF-IDF, LSI projection,
embedding mean and a TF-IDF 2AFC triplet.

Writes tests/fixtures/models_cases.json.
"""
import json
import math
import random

import reference as ref

CORPUS = [
    {"sales": 3, "region": 1, "profit": 2},
    {"sales": 1, "medal": 4, "country": 2},
    {"sales": 2, "rainfall": 1, "station": 1, "region": 1},
    {"medal": 1, "athlete": 3},
    {"profit": 1, "margin": 2, "sales": 1, "segment": 1},
]


def vocabulary(docs, min_df):
    df = {}
    for d in docs:
        for t in d:
            df[t] = df.get(t, 0) + 1
    return {t: n for t, n in sorted(df.items()) if n >= min_df}


def lsi_case(rng):
    k, dim = 4, 9
    proj = [[rng.uniform(-1, 1) for _ in range(dim)] for _ in range(k)]
    idx = sorted(rng.sample(range(dim), 5))
    vals = [rng.uniform(-2, 2) for _ in idx]
    out = [sum(proj[r][i] * v for i, v in zip(idx, vals)) for r in range(k)]
    return {"projection": proj, "indices": idx, "values": vals, "expected": out}


def embedding_case(rng):
    va = [rng.uniform(-1, 1) for _ in range(5)]
    vb = [rng.uniform(-1, 1) for _ in range(5)]
    return {"a": va, "b": vb, "counts": {"a": 2, "b": 1},
            "expected": [(2 * x + y) / 3 for x, y in zip(va, vb)]}


def twoafc_case():
    docs = {
        "ref": {"rainfall": 3, "station": 2, "monthly": 1, "average": 1},
        "alt_a": {"rainfall": 2, "station": 1, "coastal": 2},
        "alt_b": {"sales": 3, "region": 2, "station": 1},
        "d4": {"profit": 2, "region": 1, "segment": 2},
        "d5": {"rainfall": 1, "temperature": 3, "monthly": 1},
    }
    idf = ref.fit_idf(list(docs.values()))
    vec = {k: ref.tfidf(idf, v) for k, v in docs.items()}
    sa, sb = ref.dot(vec["ref"], vec["alt_a"]), ref.dot(vec["ref"], vec["alt_b"])
    return {"docs": docs, "score_a": sa, "score_b": sb, "choice": "A" if sa >= sb else "B"}


def main():
    rng = random.Random(7331)
    three = [{"a": 1, "b": 1}, {"b": 2, "c": 1}, {"b": 1, "c": 1}]
    idf3 = ref.fit_idf(three)
    cases = {
        "vocabulary": {"docs": CORPUS, "min_df_1": vocabulary(CORPUS, 1), "min_df_2": vocabulary(CORPUS, 2)},
        "tfidf_three": {"docs": three, "query": {"a": 2, "b": 1},
                        "value_a_raw": 2 * math.log(3), "value_b_raw": 0.0,
                        "expected": ref.tfidf(idf3, {"a": 2, "b": 1})},
        "lsi_project": [lsi_case(rng) for _ in range(5)],
        "embedding": embedding_case(rng),
        "twoafc": twoafc_case(),
    }
    (ref.FIXTURES / "models_cases.json").write_text(json.dumps(cases, indent=1) + "\n")


if __name__ == "__main__":
    main()
