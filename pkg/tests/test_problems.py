import pytest
from hypothesis import given
from hypothesis import strategies as st

from earlab.bitstring import BitString
from earlab.errors import ConfigError
from earlab.problems import (
    ObjectiveId,
    ProblemKind,
    ProblemSpec,
    aux_value,
    evaluate,
    onemax,
    optimum_value,
    parse_problem,
    target_value,
    zeromax,
)

B = BitString.from_string
AUX1, AUX2, TARGET = ObjectiveId.AUX1, ObjectiveId.AUX2, ObjectiveId.TARGET


def with_ones(n, x):
    return B("1" * x + "0" * (n - x))


@pytest.mark.parametrize("text, om, zm", [("0000", 0, 4), ("1011", 3, 1), ("1111", 4, 0)])
def test_onemax_zeromax(text, om, zm):
    assert onemax(B(text)) == om
    assert zeromax(B(text)) == zm


@pytest.mark.parametrize("x, a1, a2", [(3, 3, 7), (7, 3, 7), (5, 5, 5)])
def test_aux_values_around_switch(x, a1, a2):
    y = with_ones(10, x)
    assert aux_value(AUX1, y, 5) == a1
    assert aux_value(AUX2, y, 5) == a2


def test_aux_switch_is_strict():
    # below p the pair is (OneMax, ZeroMax); from x = p on it is swapped
    y = with_ones(10, 4)
    assert (aux_value(AUX1, y, 4), aux_value(AUX2, y, 4)) == (6, 4)
    assert (aux_value(AUX1, y, 5), aux_value(AUX2, y, 5)) == (4, 6)


def test_aux_rejects_target():
    with pytest.raises(ValueError):
        aux_value(TARGET, B("01"), 1)


def test_target_values():
    omd = ProblemSpec.omd(4, 2)
    assert str(omd.mask) == "0011"
    assert target_value(omd, B("0011")) == 4
    assert target_value(ProblemSpec.xdivk(4, 2), B("1111")) == 2
    assert target_value(ProblemSpec.xdivk(6, 3), B("111110")) == 1
    assert target_value(ProblemSpec.leadingones(4), B("1101")) == 2
    assert target_value(ProblemSpec.leadingones(4), B("1111")) == 4
    assert target_value(ProblemSpec.leadingones(4), B("0111")) == 0


def test_target_length_mismatch():
    with pytest.raises(ValueError):
        target_value(ProblemSpec.leadingones(4), B("111"))


def test_optimum_values():
    assert optimum_value(ProblemSpec.omd(100, 50)) == 100
    assert optimum_value(ProblemSpec.xdivk(40, 2)) == 20
    assert optimum_value(ProblemSpec.leadingones(11)) == 11


def test_evaluate_dispatch():
    assert evaluate(TARGET, ProblemSpec.xdivk(4, 2), B("1100")) == 1
    assert evaluate(AUX2, ProblemSpec.leadingones(4, p=0), B("1011")) == 3


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40).filter(lambda b: not all(b)))
def test_aux1_is_onemax_when_p_is_n(bits):
    # the all-ones string sits at x = p and is scored by ZeroMax
    y = BitString.from_bits(bits)
    assert evaluate(AUX1, ProblemSpec.leadingones(y.n, p=y.n), y) == onemax(y)


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40), st.data())
def test_aux_pair_sums_to_n(bits, data):
    y = BitString.from_bits(bits)
    p = data.draw(st.integers(0, y.n))
    assert aux_value(AUX1, y, p) + aux_value(AUX2, y, p) == y.n
    assert onemax(y) + zeromax(y) == y.n


@given(st.lists(st.integers(0, 1), min_size=2, max_size=40), st.randoms())
def test_xdivk_permutation_invariant(bits, rnd):
    n = len(bits)
    k = next(k for k in range(1, n) if n % k == 0)
    shuffled = list(bits)
    rnd.shuffle(shuffled)
    spec = ProblemSpec.xdivk(n, k)
    assert target_value(spec, BitString.from_bits(bits)) == target_value(spec, BitString.from_bits(shuffled))


@given(st.lists(st.integers(0, 1), min_size=1, max_size=40))
def test_omd_without_zeros_is_onemax(bits):
    y = BitString.from_bits(bits)
    assert target_value(ProblemSpec.omd(y.n, 0), y) == onemax(y)


@pytest.mark.parametrize(
    "args",
    [
        dict(kind="xdivk", n=5, p=2, k=2),
        dict(kind="xdivk", n=4, p=2, k=4),
        dict(kind="omd", n=4, p=2, d=5),
        dict(kind="leadingones", n=4, p=5),
        dict(kind="leadingones", n=0, p=0),
    ],
)
def test_invalid_specs(args):
    with pytest.raises(ValueError):
        ProblemSpec(**args)


def test_parse_descriptors():
    assert parse_problem("leadingones:n=11") == ProblemSpec(ProblemKind.LEADINGONES, 11, 5)
    assert parse_problem("xdivk:n=40,k=2,p=39") == ProblemSpec.xdivk(40, 2, 39)
    assert parse_problem("xdivk:n=40,k=2,p=end").p == 39
    assert parse_problem("xdivk:n=60,k=3,p=middle").p == 30
    assert parse_problem("omd:n=100,d=50,p=50") == ProblemSpec.omd(100, 50, 50)
    spec = parse_problem("omd:n=100,d=50,p=50")
    assert parse_problem(spec.descriptor) == spec


@pytest.mark.parametrize(
    "text",
    [
        "jump:n=10",
        "xdivk:n=40",
        "xdivk:n=40,k=2,q=3",
        "leadingones:n=11,k=2",
        "omd:n=10,d=3,p=end",
        "xdivk:n=40,k=3",
        "leadingones:n=ten",
        "leadingones:n",
    ],
)
def test_parse_errors(text):
    with pytest.raises(ConfigError):
        parse_problem(text)
