import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from evgr.errors import EmptyVocabulary
from evgr.features import (
    FeatureConfig,
    Vocabulary,
    build_vocabulary,
    default_stopwords,
    extract_ngrams,
    process,
    remove_stopwords,
    tokenize,
    vectorize,
)
from evgr.porter import stem

RAW = FeatureConfig(stemming=False, stopword_list_id="none")


def test_tokenize_examples():
    assert tokenize("") == []
    assert tokenize("passing on genes!") == ["passing", "on", "genes"]
    assert tokenize("had to, had to") == ["had", "to", "had", "to"]


def test_tokenize_separators_and_apostrophes():
    assert tokenize("Don't mutate2times", lowercase=False) == ["Don't", "mutate", "times"]
    assert tokenize("the cell's 'wall'") == ["the", "cell's", "wall"]
    assert tokenize("1234 -- ...") == []


def test_stopword_examples():
    assert remove_stopwords(["the", "of", "and", "it"]) == []
    assert remove_stopwords(["survival", "of", "the", "fittest"]) == ["survival", "fittest"]
    toks = ["the", "of", "zebra"]
    assert remove_stopwords(toks, "none") == toks


def test_default_list_size():
    stop = default_stopwords()
    assert 100 <= len(stop) <= 140
    assert {"the", "of", "and", "it"} <= stop


def test_ngram_examples():
    assert extract_ngrams(["had", "to"], {2}) == ["had to"]
    assert extract_ngrams(["a"], {1, 2}) == ["a"]
    assert extract_ngrams(["x", "y", "z"], {1, 2}) == ["x", "y", "z", "x y", "y z"]


def test_stopwords_removed_before_bigrams():
    cfg = FeatureConfig(stemming=False, ngram_orders=(2,))
    assert process("survival of the fittest", cfg) == ["survival fittest"]


def test_exemplar_bigrams_survive_default_pipeline():
    cfg = FeatureConfig(ngram_orders=(2,))
    assert process("They had to keep passing on the trait", cfg) == ["had to", "to keep", "keep pass", "pass on", "on trait"]


def test_stemming_after_stopwords():
    cfg = FeatureConfig(ngram_orders=(1, 2))
    assert process("The bacteria were passing genes", cfg) == [
        "bacteria", "pass", "gene", "bacteria pass", "pass gene",
    ]


def test_vocabulary_examples():
    assert build_vocabulary(["cats cats dogs"], RAW).terms == ("cats", "dogs")
    with pytest.raises(EmptyVocabulary):
        build_vocabulary(["cats cats dogs"], FeatureConfig(stemming=False, stopword_list_id="none", min_document_frequency=2))


def test_min_df_matches_brute_force_count():
    texts = ["a b", "b c"]
    cfg = FeatureConfig(stemming=False, stopword_list_id="none", min_document_frequency=2)
    df = {t: sum(t in set(x.split()) for x in texts) for t in "abc"}
    assert build_vocabulary(texts, cfg).terms == tuple(t for t in "abc" if df[t] >= 2) == ("b",)


def test_vocabulary_index_and_serialization():
    v = build_vocabulary(["zeta alpha", "alpha beta"], RAW)
    assert v.terms == ("zeta", "alpha", "beta")
    assert v.index == {"zeta": 0, "alpha": 1, "beta": 2}
    assert v.document_count == 2
    again = Vocabulary.from_dict(v.to_dict())
    assert again == v and again.fingerprint == v.fingerprint


def test_stemmed_vocabulary_terms_are_stems():
    text = "Populations were mutating rapidly"
    v = build_vocabulary([text], FeatureConfig())
    assert v.terms == tuple(stem(t) for t in remove_stopwords(tokenize(text)))
    assert "mutat" in v.terms


def test_vectorize_examples():
    v = build_vocabulary(["cats cats dogs"], RAW)
    assert vectorize("cats cats dogs", v).entries == {0: 2, 1: 1}
    empty = vectorize("zebras", v)
    assert empty.entries == {} and empty.dimension == 2


def test_remove_misclassified_is_a_flag():
    assert FeatureConfig(remove_misclassified=True).remove_misclassified


@pytest.mark.parametrize("kwargs", [{"ngram_orders": ()}, {"ngram_orders": (3,)}, {"min_document_frequency": 0},
                                    {"stopword_list_id": "french"}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        FeatureConfig(**kwargs)


# --- properties -------------------------------------------------------------------

_words = st.lists(st.sampled_from(
    ["the", "of", "bacteria", "mutate", "mutations", "survive", "had", "to", "cells", "it", "Resistant", "food"]),
    min_size=0, max_size=12)
_configs = st.builds(
    FeatureConfig,
    lowercase=st.booleans(),
    stemming=st.booleans(),
    stopword_list_id=st.sampled_from(["none", "default"]),
    ngram_orders=st.sampled_from([(1,), (2,), (1, 2)]),
)


@given(st.lists(_words, min_size=1, max_size=6), _configs, _words)
def test_vectorize_recount(docs, cfg, probe):
    texts = [" ".join(d) + " anchor marker" for d in docs]
    vocab = build_vocabulary(texts, cfg)
    text = " ".join(probe)
    fv = vectorize(text, vocab)
    terms = process(text, cfg)
    assert all(0 <= i < len(vocab) and n >= 1 for i, n in fv.entries.items())
    assert fv.to_dense().sum() == sum(t in vocab.index for t in terms)
    for i, n in fv.entries.items():
        assert terms.count(vocab.terms[i]) == n
    assert vectorize(text, vocab) == fv


@given(st.lists(_words, min_size=1, max_size=6), _configs, st.randoms(use_true_random=False))
def test_vocabulary_permutation_invariance(docs, cfg, rnd):
    texts = [" ".join(d) + " anchor marker" for d in docs]
    shuffled = texts[:]
    rnd.shuffle(shuffled)
    v1, v2 = build_vocabulary(texts, cfg), build_vocabulary(shuffled, cfg)
    assert set(v1.terms) == set(v2.terms)
    perm = [v2.index[t] for t in v1.terms]
    for text in texts:
        d1, d2 = vectorize(text, v1).to_dense(), vectorize(text, v2).to_dense()
        assert np.array_equal(d1, d2[perm])
