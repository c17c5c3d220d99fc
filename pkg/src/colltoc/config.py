"""Pipeline configuration: a TOML file mapped onto ``PipelineConfig``.

Example::

    corpus_dir = "corpus"
    output_dir = "run"
    profile = "ordered-flexible"   # lambda preset; [lambdas] overrides it
    k = 6
    seed = 0

    [headers]
    profile = "english"            # or "hebrew"
    max_header_tokens = 12

    [embedding]
    kind = "deterministic"         # or "remote" with endpoint = "http://..."
    dim = 256

    [louvain]
    resolution = 1.0

Relative paths are resolved against the config file's directory.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .communities import LouvainConfig
from .embed import EmbeddingProviderConfig
from .errors import ConfigError
from .graph import DEFAULT_POS_CAP, PROFILES, SimilarityWeights
from .headers import HEADER_PROFILES, HeaderRuleConfig

DEFAULT_PROFILE = "ordered-flexible"


def stage_seed(seed: int, stage: str) -> int:
    """Derive a per-stage seed so one pipeline seed drives every random stage."""
    digest = hashlib.sha256(f"{seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:4], "big") & 0x7FFFFFFF


@dataclass(frozen=True)
class PipelineConfig:
    corpus_dir: Path
    output_dir: Path
    k: int
    headers: HeaderRuleConfig = field(default_factory=HeaderRuleConfig)
    embedding: EmbeddingProviderConfig = field(default_factory=EmbeddingProviderConfig)
    lambdas: SimilarityWeights = PROFILES[DEFAULT_PROFILE]
    pos_cap: float = DEFAULT_POS_CAP
    sparsify_top_m: int | None = None
    louvain: LouvainConfig = field(default_factory=LouvainConfig)
    restarts: int = 1
    seed: int = 0
    profile: str | None = DEFAULT_PROFILE
    export_graph: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be a positive integer")
        if self.restarts < 1:
            raise ConfigError("restarts must be a positive integer")
        if self.pos_cap <= 0:
            raise ConfigError("pos_cap must be positive")
        if self.sparsify_top_m is not None and self.sparsify_top_m < 1:
            raise ConfigError("sparsify_top_m must be positive when set")

    def to_json(self) -> dict:
        def conv(value):
            if dataclasses.is_dataclass(value):
                return {f.name: conv(getattr(value, f.name)) for f in dataclasses.fields(value) if not f.name.startswith("_")}
            if isinstance(value, Path):
                return str(value)
            if isinstance(value, (tuple, list)):
                return [conv(v) for v in value]
            return value

        return conv(self)

    def config_hash(self) -> str:
        """Hash of every setting that influences the artifacts (paths excluded)."""
        data = self.to_json()
        data.pop("corpus_dir")
        data.pop("output_dir")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()

    def with_overrides(self, seed=None, profile=None, k=None, output_dir=None) -> PipelineConfig:
        changes = {}
        if seed is not None:
            changes["seed"] = seed
            changes["louvain"] = dataclasses.replace(self.louvain, seed=stage_seed(seed, "communities"))
            changes["embedding"] = dataclasses.replace(self.embedding, seed=stage_seed(seed, "embed"))
        if profile is not None:
            changes["profile"] = profile
            changes["lambdas"] = _profile_lambdas(profile)
        if k is not None:
            changes["k"] = k
        if output_dir is not None:
            changes["output_dir"] = Path(output_dir)
        return dataclasses.replace(self, **changes)


def _profile_lambdas(name: str) -> SimilarityWeights:
    try:
        return PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(f"[{name}] must be a table")
    return dict(value)


def _build(cls, values: dict, what: str):
    names = {f.name for f in dataclasses.fields(cls) if f.init}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown {what} settings: {sorted(unknown)}")
    try:
        return cls(**values)
    except TypeError as exc:
        raise ConfigError(f"bad {what} settings: {exc}") from exc


def config_from_dict(data: dict, base_dir: Path | None = None) -> PipelineConfig:
    base_dir = base_dir or Path.cwd()
    data = dict(data)
    known = {
        "corpus_dir", "output_dir", "k", "profile", "seed", "restarts", "pos_cap",
        "sparsify_top_m", "export_graph", "headers", "embedding", "lambdas", "louvain",
    }
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown top-level settings: {sorted(unknown)}")
    for required in ("corpus_dir", "output_dir", "k"):
        if required not in data:
            raise ConfigError(f"missing required setting {required!r}")

    seed = int(data.get("seed", 0))

    headers = _section(data, "headers")
    header_profile = headers.pop("profile", "english")
    if header_profile not in HEADER_PROFILES:
        raise ConfigError(f"unknown header profile {header_profile!r}")
    if "numbering_patterns" in headers:
        headers["numbering_patterns"] = tuple(headers["numbering_patterns"])
    try:
        header_rules = HEADER_PROFILES[header_profile](**headers)
    except TypeError as exc:
        raise ConfigError(f"bad header settings: {exc}") from exc

    embedding = _section(data, "embedding")
    embedding.setdefault("seed", stage_seed(seed, "embed"))
    if "ngram_sizes" in embedding:
        embedding["ngram_sizes"] = tuple(embedding["ngram_sizes"])

    profile = data.get("profile", DEFAULT_PROFILE)
    lambdas_table = _section(data, "lambdas")
    if lambdas_table:
        try:
            lambdas = SimilarityWeights(
                float(lambdas_table.pop("head")), float(lambdas_table.pop("body")), float(lambdas_table.pop("pos"))
            )
        except KeyError as exc:
            raise ConfigError(f"[lambdas] needs head, body and pos; missing {exc}") from None
        if lambdas_table:
            raise ConfigError(f"unknown lambda settings: {sorted(lambdas_table)}")
        profile = None
    else:
        lambdas = _profile_lambdas(profile)

    louvain = _section(data, "louvain")
    louvain.setdefault("seed", stage_seed(seed, "communities"))

    sparsify = data.get("sparsify_top_m")
    return PipelineConfig(
        corpus_dir=(base_dir / data["corpus_dir"]).resolve(),
        output_dir=(base_dir / data["output_dir"]).resolve(),
        k=int(data["k"]),
        headers=header_rules,
        embedding=_build(EmbeddingProviderConfig, embedding, "embedding"),
        lambdas=lambdas,
        pos_cap=float(data.get("pos_cap", DEFAULT_POS_CAP)),
        sparsify_top_m=int(sparsify) if sparsify else None,
        louvain=_build(LouvainConfig, louvain, "louvain"),
        restarts=int(data.get("restarts", 1)),
        seed=seed,
        profile=profile,
        export_graph=bool(data.get("export_graph", False)),
    )


def load_config(path: str | Path) -> PipelineConfig:
    path = Path(path)
    try:
        data = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(data, base_dir=path.resolve().parent)


def render_config(corpus_dir: str, output_dir: str, k: int, profile: str = DEFAULT_PROFILE, seed: int = 0) -> str:
    """A minimal config file body."""
    return (
        f'corpus_dir = "{corpus_dir}"\n'
        f'output_dir = "{output_dir}"\n'
        f'profile = "{profile}"\n'
        f"k = {k}\n"
        f"seed = {seed}\n"
    )
