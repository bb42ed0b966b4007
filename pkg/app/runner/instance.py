"""
Declarative instance files.

An instance is a TOML document; it is parsed with ``tomllib``, validated by
the pydantic models below and then turned into domain objects. Every
problem found on the way is reported at once, tagged with the TOML line of
the offending key.
"""

from typing import Dict, List, Literal, Optional, Tuple, Union
from pathlib import Path
import itertools
import logging
import re

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from pydantic import BaseModel, Field, ValidationError, field_validator

from app.errors import ConfigError, WeightedPressureError
from app.geometry.windows import FolnerSchedule, Window
from app.measures.specs import Bernoulli, Markov, MeasureSpec, check_family, parry_measure
from app.pressure.partition import CylinderScheme
from app.pressure.potentials import Potential, indicator_potential
from app.pressure.weights import ExponentVector
from app.symbolic.codes import BlockCode, SystemChain
from app.symbolic.patterns import Alphabet, Pattern
from app.symbolic.subshift import Subshift
from app.variational.optimizer import OptimizerConfig

logger = logging.getLogger(__name__)

Point = List[int]


class ForbiddenPatternConfig(BaseModel):
    points: List[Point]
    symbols: List[str]


class SystemConfig(BaseModel):
    name: str
    alphabet: List[str] = Field(min_length=1)
    dimension: Literal[1, 2] = 1
    forbidden: List[Union[str, ForbiddenPatternConfig]] = Field(default_factory=list)


class CodeConfig(BaseModel):
    name: str = "π"
    window: List[Point] = Field(default_factory=lambda: [[0]])
    rule: Dict[str, str]


class PotentialConfig(BaseModel):
    name: str = "f"
    window: Optional[List[Point]] = None
    values: Dict[str, float] = Field(default_factory=dict)


class ScheduleConfig(BaseModel):
    kind: Literal["origin", "centered"] = "origin"
    n_min: int = Field(1, ge=1)
    n_max: int = Field(8, ge=1)


class SchemeConfig(BaseModel):
    refine_min: int = Field(1, ge=1)
    refine_max: int = Field(1, ge=1)


class MeasureConfig(BaseModel):
    family: Literal["bernoulli", "markov", "uniform", "parry"] = "uniform"
    probabilities: Optional[List[float]] = None
    transition: Optional[List[List[float]]] = None


class OptimizerSection(BaseModel):
    family: Literal["bernoulli", "markov"] = "bernoulli"
    restarts: Optional[int] = Field(None, ge=1)
    max_iterations: Optional[int] = Field(None, ge=1)
    step: float = Field(0.5, gt=0)
    tolerance: Optional[float] = Field(None, gt=0)
    scale: Optional[int] = Field(None, ge=1)


class DualityConfig(BaseModel):
    symbol: Optional[str] = None
    coefficients: List[float] = Field(default_factory=lambda: [-1.0, -0.5, 0.0, 0.5, 1.0])
    tight: bool = False


class VerifyConfig(BaseModel):
    identity_instances: int = Field(50, ge=0)
    identity_n: int = Field(4, ge=1)
    walters_draws: int = Field(10_000, ge=0)
    subadditivity_draws: int = Field(1_000, ge=0)
    variational_draws: int = Field(100, ge=0)
    variational_n: int = Field(10, ge=1)
    weight_draws: int = Field(1_000, ge=0)
    folner_n: int = Field(14, ge=1)
    folner_tolerance: float = Field(1e-2, gt=0)
    oracle_n_max: int = Field(5, ge=1)
    count_n_max: int = Field(14, ge=1)
    grid_resolution: float = Field(0.01, gt=0, le=0.01)


class ExpectConfig(BaseModel):
    pressure: Optional[float] = None
    objective: Optional[float] = None
    pressure_tolerance: float = Field(1e-9, gt=0)
    objective_tolerance: float = Field(1e-3, gt=0)


class OutputConfig(BaseModel):
    dir: str = "out"


class InstanceConfig(BaseModel):
    """Schema of an instance file (see CONFIG_SCHEMA.md)."""
    name: str
    seed: int = Field(0, ge=0)
    budget: Optional[int] = Field(None, gt=0)
    exponents: List[float] = Field(min_length=1)
    systems: List[SystemConfig] = Field(min_length=2)
    codes: List[CodeConfig] = Field(min_length=1)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    schedule: ScheduleConfig = Field(default_factory=ScheduleConfig)
    scheme: SchemeConfig = Field(default_factory=SchemeConfig)
    measure: MeasureConfig = Field(default_factory=MeasureConfig)
    optimizer: OptimizerSection = Field(default_factory=OptimizerSection)
    duality: DualityConfig = Field(default_factory=DualityConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    expect: ExpectConfig = Field(default_factory=ExpectConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @field_validator("exponents")
    @classmethod
    def exponents_in_range(cls, v: List[float]) -> List[float]:
        for i, a in enumerate(v, start=1):
            if not 0.0 <= a <= 1.0:
                raise ValueError(f"exponent outside [0,1]: a_{i}={a}")
        return v


class Instance:
    """A validated instance with its domain objects built."""

    def __init__(self, config: InstanceConfig, source: Optional[str] = None):
        self.config = config
        self.source = source
        self.chain = _build_chain(config)
        self.exponents = ExponentVector.of(config.exponents)
        if len(self.exponents) != self.chain.r - 1:
            raise ValueError(f"{len(self.exponents)} exponents for a chain of {self.chain.r} systems")
        self.potential = _build_potential(config.potential, self.chain)
        self.potential.validate(self.chain.system(1))
        self.schedule = FolnerSchedule(
            kind=config.schedule.kind,
            dimension=self.chain.dimension,
            n_min=config.schedule.n_min,
            n_max=config.schedule.n_max,
        )
        if config.scheme.refine_min > config.scheme.refine_max:
            raise ValueError("scheme.refine_min exceeds scheme.refine_max")
        CylinderScheme.refined(self.chain, config.scheme.refine_min).validate(self.chain)
        self.measure = _build_measure(config.measure, self.chain.system(1))
        check_family(self.measure, self.chain.system(1))
        self.optimizer = self.optimizer_config(config.seed)
        if self.optimizer.family == "markov" and self.chain.dimension != 1:
            raise ValueError("family/system mismatch: Markov optimizer family needs d=1")

    @property
    def name(self) -> str:
        return self.config.name

    @property
    def seed(self) -> int:
        return self.config.seed

    @property
    def budget(self) -> Optional[int]:
        return self.config.budget

    def refinements(self) -> List[int]:
        return list(range(self.config.scheme.refine_min, self.config.scheme.refine_max + 1))

    def scheme(self, refinement: Optional[int] = None) -> CylinderScheme:
        return CylinderScheme.refined(self.chain, refinement or self.config.scheme.refine_min)

    def optimizer_config(self, seed: int) -> OptimizerConfig:
        section = self.config.optimizer
        overrides = {
            k: v for k, v in {
                "restarts": section.restarts,
                "max_iterations": section.max_iterations,
                "tolerance": section.tolerance,
                "scale": section.scale,
            }.items() if v is not None
        }
        return OptimizerConfig(family=section.family, step=section.step, seed=seed, **overrides)

    def with_overrides(
        self,
        seed: Optional[int] = None,
        n_max: Optional[int] = None,
        refine_max: Optional[int] = None,
        budget: Optional[int] = None,
        out: Optional[str] = None,
    ) -> "Instance":
        """Copy with command-line overrides applied and revalidated."""
        cfg = self.config
        update: Dict[str, object] = {}
        if seed is not None:
            update["seed"] = seed
        if budget is not None:
            update["budget"] = budget
        if n_max is not None:
            update["schedule"] = cfg.schedule.model_copy(update={"n_max": n_max})
        if refine_max is not None:
            update["scheme"] = cfg.scheme.model_copy(update={"refine_max": refine_max})
        if out is not None:
            update["output"] = cfg.output.model_copy(update={"dir": out})
        if not update:
            return self
        try:
            config = InstanceConfig.model_validate(cfg.model_copy(update=update).model_dump())
            return Instance(config, self.source)
        except (ValidationError, WeightedPressureError, ValueError) as e:
            raise ConfigError("command-line overrides are invalid", [str(e)]) from e

    def duality_family(self) -> List[Potential]:
        s = self.chain.system(1)
        symbol = s.alphabet.code(self.config.duality.symbol) if self.config.duality.symbol else 0
        return [
            indicator_potential(s.alphabet, symbol, c, s.dimension)
            for c in self.config.duality.coefficients
        ]


def _points(raw: List[Point], dimension: int, where: str) -> Window:
    for p in raw:
        if len(p) != dimension:
            raise ValueError(f"{where}: point {p} is not {dimension}-dimensional")
    return Window.of([tuple(p) for p in raw], dimension=dimension)


def _tokens(word: str) -> List[str]:
    word = word.strip()
    return word.split() if " " in word else list(word)


def _build_subshift(cfg: SystemConfig) -> Subshift:
    alphabet = Alphabet(tuple(cfg.alphabet))
    forbidden = []
    for entry in cfg.forbidden:
        if isinstance(entry, str):
            if cfg.dimension != 1:
                raise ValueError(f"system {cfg.name}: word-style forbidden patterns need dimension 1")
            forbidden.append(Pattern.from_word(alphabet, entry))
        else:
            window = _points(entry.points, cfg.dimension, f"system {cfg.name}")
            if len(entry.symbols) != len(window):
                raise ValueError(f"system {cfg.name}: forbidden pattern needs one symbol per point")
            mapping = {tuple(p): alphabet.code(sym) for p, sym in zip(entry.points, entry.symbols)}
            forbidden.append(Pattern.from_mapping(mapping, cfg.dimension))
    return Subshift(alphabet=alphabet, dimension=cfg.dimension, forbidden=tuple(forbidden), name=cfg.name)


def _build_chain(config: InstanceConfig) -> SystemChain:
    systems = [_build_subshift(s) for s in config.systems]
    if len(config.codes) != len(systems) - 1:
        raise ValueError(f"{len(systems)} systems need {len(systems) - 1} codes, got {len(config.codes)}")
    codes = []
    for i, c in enumerate(config.codes):
        source, target = systems[i], systems[i + 1]
        window = _points(c.window, source.dimension, f"code {c.name}")
        rule: Dict[Tuple[int, ...], int] = {}
        for key, image in c.rule.items():
            tokens = _tokens(key)
            if len(tokens) != len(window):
                raise ValueError(f"code {c.name}: rule key '{key}' does not fit a window of {len(window)} sites")
            rule[tuple(source.alphabet.code(t) for t in tokens)] = target.alphabet.code(image)
        codes.append(BlockCode(source=source, target=target, window=window, rule=rule, name=c.name))
    return SystemChain(systems=tuple(systems), codes=tuple(codes))


def _build_potential(cfg: PotentialConfig, chain: SystemChain) -> Potential:
    s = chain.system(1)
    d = chain.dimension
    window = _points(cfg.window or [[0] * d], d, f"potential {cfg.name}")
    if not cfg.values:
        table = {}
        for p in itertools.product(range(len(s.alphabet)), repeat=len(window)):
            table[p] = 0.0
        return Potential(alphabet=s.alphabet, window=window, table=table, name=cfg.name)
    table = {}
    for key, value in cfg.values.items():
        tokens = _tokens(key)
        if len(tokens) != len(window):
            raise ValueError(f"potential {cfg.name}: key '{key}' does not fit a window of {len(window)} sites")
        table[tuple(s.alphabet.code(t) for t in tokens)] = float(value)
    return Potential(alphabet=s.alphabet, window=window, table=table, name=cfg.name)


def _build_measure(cfg: MeasureConfig, s: Subshift) -> MeasureSpec:
    k = len(s.alphabet)
    if cfg.family == "uniform":
        return Bernoulli.uniform(k)
    if cfg.family == "parry":
        return parry_measure(s)
    if cfg.family == "bernoulli":
        if cfg.probabilities is None:
            raise ValueError("measure.probabilities is required for a Bernoulli measure")
        return Bernoulli.of(cfg.probabilities)
    if cfg.transition is None:
        raise ValueError("measure.transition is required for a Markov measure")
    return Markov.from_transition(cfg.transition)


_TABLE = re.compile(r"^\s*(\[\[?)\s*([A-Za-z0-9_.\-]+)\s*\]\]?")
_KEY = re.compile(r"^\s*([A-Za-z0-9_\-]+|\"[^\"]*\")\s*=")


def key_lines(text: str) -> Dict[Tuple[Union[str, int], ...], int]:
    """Line number of every table header and key, keyed by its path (array tables carry their index)."""
    lines: Dict[Tuple[Union[str, int], ...], int] = {}
    counters: Dict[Tuple[str, ...], int] = {}
    current: Tuple[Union[str, int], ...] = ()
    for number, line in enumerate(text.splitlines(), start=1):
        table = _TABLE.match(line)
        if table:
            parts = tuple(table.group(2).split("."))
            if table.group(1) == "[[":
                counters[parts] = counters.get(parts, -1) + 1
                current = parts + (counters[parts],)
            else:
                current = parts
            lines.setdefault(current, number)
            continue
        key = _KEY.match(line)
        if key:
            lines.setdefault(current + (key.group(1).strip('"'),), number)
    return lines


def _line_for(loc: Tuple[Union[str, int], ...], lines: Dict[Tuple[Union[str, int], ...], int]) -> Optional[int]:
    for end in range(len(loc), 0, -1):
        if loc[:end] in lines:
            return lines[loc[:end]]
    return None


def _diagnostics(exc: ValidationError, lines: Dict[Tuple[Union[str, int], ...], int], source: str) -> List[str]:
    out = []
    for err in exc.errors():
        loc = tuple(p for p in err["loc"] if not (isinstance(p, str) and p in ("str", "ForbiddenPatternConfig")))
        where = ".".join(str(p) for p in loc) or "<root>"
        line = _line_for(loc, lines)
        prefix = f"{source}:{line}" if line else source
        out.append(f"{prefix}: {where}: {err['msg']}")
    return out


def parse_instance(text: str, source: str = "<string>") -> Instance:
    """
    Parse, validate and build an instance from TOML text.

    Raises:
        ConfigError: syntax errors, schema violations or domain precondition failures
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        logger.error(f"Config {source} is not valid TOML: {e}")
        raise ConfigError(f"invalid TOML in {source}", [f"{source}: {e}"]) from e

    lines = key_lines(text)
    try:
        config = InstanceConfig.model_validate(raw)
    except ValidationError as e:
        diagnostics = _diagnostics(e, lines, source)
        logger.error(f"Config {source} failed validation with {len(diagnostics)} problems")
        raise ConfigError(f"config validation failed for {source}", diagnostics) from e

    try:
        return Instance(config, source)
    except (WeightedPressureError, ValueError) as e:
        line = _line_for(("exponents",), lines) if "exponent" in str(e) else None
        prefix = f"{source}:{line}" if line else source
        logger.error(f"Config {source} violates a precondition: {e}")
        raise ConfigError(f"config validation failed for {source}", [f"{prefix}: {e}"]) from e


def load_instance(path: Union[str, Path]) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config {path}", [str(e)]) from e
    return parse_instance(text, str(path))
