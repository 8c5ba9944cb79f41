import numpy as np
import pytest

from skewmorph import _kernels as K
from skewmorph import fpalg
from skewmorph import group_engine as ge
from skewmorph import skew_core as sc


def _law_holds(sk):
    """Direct recheck of s(x+y) = s(x) + s^pi(x)(y), all pairs, via tables."""
    add, _, _ = K.index_tables(sk.p, sk.n)
    S = sk.power_table()
    lhs = sk.images[add]
    rhs = add[sk.images[:, None], S[np.asarray(sk.pi, dtype=np.int64)]]
    return (lhs == rhs).all()


def test_identity_validates():
    sk = sc.validate(3, 2, np.arange(9))
    assert sk.order == 1 and sk.k == 1 and sk.m == 0
    assert sk.is_automorphism()
    assert (sk.pi == 0).all()


def test_from_matrix_is_automorphism():
    M = fpalg.canonical_unipotent(2, 3)
    sk = sc.from_matrix(M)
    assert sk.order == 3
    assert sk.is_automorphism()
    assert (sk.pi == 1).all()
    assert _law_holds(sk)


def test_brute_set_satisfies_law_directly(brute32):
    # independent of the validator: replay the defining identity in numpy
    for sk in brute32.skews:
        assert _law_holds(sk)
        assert sk.order == K.perm_order_capped(sk.images, sk.N)


def test_validation_rejections():
    with pytest.raises(sc.SkewValidationError):
        sc.validate(3, 2, np.arange(8))
    bad = np.arange(9)
    bad[3] = 4
    with pytest.raises(sc.SkewValidationError) as ei:
        sc.validate(3, 2, bad)
    assert ei.value.status == K.NOT_PERMUTATION
    swap = np.arange(9)
    swap[[1, 2, 3, 4]] = [2, 1, 4, 3]
    with pytest.raises(sc.SkewValidationError) as ei:
        sc.validate(3, 2, swap)
    assert ei.value.status == K.NO_POWER_MATCH
    assert ei.value.witness >= 0


def test_pi_of_zero_is_one(brute32):
    for sk in brute32.skews:
        if sk.order > 1:
            assert sk.pi[0] == 1


def test_aut_conjugate_round_trip(brute32):
    M = fpalg.FpMatrix(3, ((1, 2), (1, 1)))
    assert M.det() != 0
    keys = {sk.key() for sk in brute32.skews}
    for sk in brute32.skews[:20]:
        c = sc.aut_conjugate(sk, M)
        assert c.key() in keys
        back = sc.aut_conjugate(c, M.inverse())
        assert back == sk


def test_power_coprime(brute32):
    keys = {sk.key() for sk in brute32.skews}
    for sk in brute32.skews:
        for j in range(1, sk.order):
            if np.gcd(j, sk.order) == 1:
                q = sc.power_coprime(sk, j)
                assert q.key() in keys
    six = next(s for s in brute32.skews if s.order == 6)
    with pytest.raises(ValueError):
        sc.power_coprime(six, 3)


def test_skew_product_group_law(brute32):
    for sk in brute32.skews[::7]:
        spg = sc.SkewProductGroup(sk)  # self_test on, full associativity
        assert spg.M == sk.N * sk.order
        # closed-form inverse agrees with the table inverse
        T = spg.table()
        inv = spg.inv_table()
        for ident in range(0, spg.M, 5):
            pair = spg.id_pair(ident)
            gi = spg.inv_pair(pair)
            assert spg.pair_id(*gi) == inv[ident]
            assert spg.mult_pairs(pair, gi) == (0, 0)
        # P = G<sigma^k> ids form a subgroup of index k
        pids = spg.p_ids()
        assert len(pids) * sk.k == spg.M
        sub = T[np.ix_(pids, pids)]
        assert set(sub.ravel().tolist()) <= set(pids.tolist())


def test_power_sum_zero_is_exponent(brute32):
    # PS_i(0) = i: multiplying (0,i) by (0,j) must add exponents
    for sk in brute32.skews:
        if sk.order == 1:
            continue
        spg = sc.SkewProductGroup(sk, check=False)
        assert (spg.PS[:, 0] == np.arange(sk.order)).all()


def test_derived_is_abelian_matches_group_engine(brute32):
    for sk in brute32.skews[::9]:
        spg = sc.SkewProductGroup(sk, check=False)
        fast = spg.derived_is_abelian()
        slow = ge.is_metabelian(spg.as_finite_group())
        assert fast == slow


def test_build_extract_round_trip(brute32):
    for sk in brute32.skews[::5]:
        spg = sc.SkewProductGroup(sk, check=False)
        X = spg.as_finite_group()
        gens = X.generators[: sk.n]
        G = X.subgroup(gens)
        s = (0, 1) if sk.order > 1 else X.identity
        sk2 = sc.extract_skew(X, G, s, gens)
        assert sk2 == sk
        assert (np.asarray(sk2.pi) == np.asarray(sk.pi)).all()


def test_extract_rejects_bad_factorizations(brute32):
    sk = next(s for s in brute32.skews if s.order == 6)
    spg = sc.SkewProductGroup(sk, check=False)
    X = spg.as_finite_group()
    gens = X.generators[:2]
    G = X.subgroup(gens)
    # s inside G: <s> meets G nontrivially
    with pytest.raises(ValueError):
        sc.extract_skew(X, G, (1, 0), gens)
    # s of too small an order: |G| * order(s) < |X|
    with pytest.raises(ValueError):
        sc.extract_skew(X, G, (0, 2), gens)


def test_jsonl_round_trip(tmp_path, brute32):
    path = tmp_path / "set.jsonl"
    wrote = sc.write_jsonl(brute32.skews, path)
    assert wrote == 64
    back = sc.read_jsonl(path)
    assert back == sorted(brute32.skews, key=lambda s: tuple(s.images))
    # byte determinism, input order irrelevant
    path2 = tmp_path / "set2.jsonl"
    sc.write_jsonl(list(reversed(brute32.skews)), path2)
    assert path.read_bytes() == path2.read_bytes()


def test_parse_record_rejections(brute32):
    sk = brute32.skews[1]
    obj = sc.skew_to_obj(sk)
    for missing in ("p", "n", "sigma"):
        broken = dict(obj)
        del broken[missing]
        with pytest.raises(sc.SkewValidationError):
            sc.parse_record(broken)
    broken = dict(obj)
    broken["order"] = obj["order"] + 1
    with pytest.raises(sc.SkewValidationError):
        sc.parse_record(broken)
    broken = dict(obj)
    broken["pi"] = [0] * len(obj["pi"])
    with pytest.raises(sc.SkewValidationError):
        sc.parse_record(broken)


def test_generating_orbits_contract(brute32):
    V = K.index_vectors(3, 2)
    _, _, neg = K.index_tables(3, 2)
    for sk in brute32.skews:
        for orbit in sc.inverse_closed_generating_orbits(sk):
            oset = set(orbit)
            assert all(int(sk.images[x]) in oset for x in orbit)
            assert all(int(neg[x]) in oset for x in orbit)
            assert fpalg.rank_mod(V[list(orbit)], 3) == 2
