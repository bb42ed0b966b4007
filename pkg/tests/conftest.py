import pytest

from app.geometry.windows import interval
from app.pressure.potentials import Potential, single_site_potential, zero_potential
from app.pressure.weights import ExponentVector
from app.runner.instance import parse_instance
from app.symbolic.codes import BlockCode, SystemChain, identity_code, point_code, symbol_map_code
from app.symbolic.subshift import full_shift, golden_mean_shift


def collapse_chain(k: int = 4) -> SystemChain:
    """Full k-shift onto the full 2-shift, the first k//2 symbols to 0 and the rest to 1."""
    source, target = full_shift(k), full_shift(2)
    code = symbol_map_code(source, target, {i: 0 if i < k // 2 else 1 for i in range(k)}, name="collapse")
    return SystemChain(systems=(source, target), codes=(code,))


@pytest.fixture
def full4_to_2():
    """Full 4-shift → full 2-shift; every fiber of a length-n word has 2^n points."""
    return collapse_chain(4)


@pytest.fixture
def full3_to_2():
    """Full 3-shift with 0, 1 ↦ 0 and 2 ↦ 1."""
    source, target = full_shift(3), full_shift(2)
    code = symbol_map_code(source, target, {0: 0, 1: 0, 2: 1}, name="merge")
    return SystemChain(systems=(source, target), codes=(code,))


@pytest.fixture
def identity_chain():
    s = full_shift(2)
    return SystemChain(systems=(s, s), codes=(identity_code(s),))


@pytest.fixture
def to_point_chain():
    """Full 2-shift onto the one-point system."""
    s = full_shift(2)
    code = point_code(s)
    return SystemChain(systems=(s, code.target), codes=(code,))


@pytest.fixture
def golden_to_point():
    s = golden_mean_shift()
    code = point_code(s)
    return SystemChain(systems=(s, code.target), codes=(code,))


@pytest.fixture
def three_level_chain():
    """Full 4-shift → full 2-shift → point."""
    base = collapse_chain(4)
    top = point_code(base.system(2))
    return SystemChain(systems=base.systems + (top.target,), codes=base.codes + (top,))


@pytest.fixture
def planar_to_point():
    """Full 2-shift on Z^2 onto the point."""
    s = full_shift(2, dimension=2)
    code = point_code(s)
    return SystemChain(systems=(s, code.target), codes=(code,))


@pytest.fixture
def xor_chain():
    """Full 2-shift → full 2-shift by x_0 XOR x_1 → point; every 2-word has two preimages."""
    s = full_shift(2)
    rule = {(i, j): i ^ j for i in range(2) for j in range(2)}
    xor = BlockCode(source=s, target=s, window=interval(0, 2), rule=rule, name="xor")
    top = point_code(s)
    return SystemChain(systems=(s, s, top.target), codes=(xor, top))


@pytest.fixture
def pair_f():
    """Asymmetric two-site potential on the binary alphabet."""
    table = {(0, 0): 0.0, (0, 1): 1.0, (1, 0): 0.3, (1, 1): -0.5}
    return Potential(alphabet=full_shift(2).alphabet, window=interval(0, 2), table=table, name="pair")


@pytest.fixture
def half():
    return ExponentVector.of([0.5])


@pytest.fixture
def zero_f():
    return zero_potential(full_shift(2))


@pytest.fixture
def step_f():
    """Single-site potential f(0)=0, f(1)=1 on the binary alphabet."""
    return single_site_potential(full_shift(2).alphabet, [0.0, 1.0])


TINY_TOML = """
name = "tiny"
seed = 4
exponents = [0.5]

[[systems]]
name = "full-2"
alphabet = ["0", "1"]

[[systems]]
name = "point"
alphabet = ["*"]

[[codes]]
name = "to-point"
rule = { "0" = "*", "1" = "*" }

[potential]
values = { "0" = 0.0, "1" = 1.0 }

[schedule]
n_max = 4

[measure]
family = "bernoulli"
probabilities = [0.5, 0.5]

[optimizer]
restarts = 2
max_iterations = 30
scale = 2

[duality]
symbol = "1"

[verify]
identity_instances = 3
identity_n = 3
walters_draws = 50
subadditivity_draws = 20
variational_draws = 5
variational_n = 4
weight_draws = 20
folner_n = 6
oracle_n_max = 3
count_n_max = 6
grid_resolution = 0.01

[expect]
pressure = 0.65663084375911140
objective = 0.65663084375911140
"""


@pytest.fixture
def tiny_toml():
    """Full 2-shift onto a point with f = 1[x_0 = 1]; P = a_1 log(1 + e)."""
    return TINY_TOML


@pytest.fixture
def tiny_instance(tiny_toml):
    return parse_instance(tiny_toml, "tiny.toml")


@pytest.fixture
def tiny_config(tmp_path, tiny_toml):
    path = tmp_path / "tiny.toml"
    path.write_text(tiny_toml + f"\n[output]\ndir = \"{tmp_path / 'out'}\"\n", encoding="utf-8")
    return path
