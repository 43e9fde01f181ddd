"""Run configuration: paths, priority order, thresholds, institution registry.

Validated fully before any stage runs. The canonical hash of the validated
configuration is echoed into every report header and output file so results
stay interpretable.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from concordia import __version__
from concordia.matcher import Thresholds
from concordia.model import (
    AuthorityRegistry,
    ConfigError,
    PriorityOrder,
    default_registry,
    parse_priority_spec,
)

DEFAULT_NAMESPACE = "https://kg.example.org/"
DEFAULT_PRIORITY_SPEC = "loc,gnd,rkd,ulan,wikidata;exclude=viaf"


@dataclass
class InstitutionEntry:
    id: str
    base_uri: str = ""
    token: str = ""


@dataclass
class RunConfig:
    data_dir: Path = Path("data")
    fixture_dir: Optional[Path] = None  # defaults to data_dir / "provider"
    cache_dir: Optional[Path] = None  # defaults to data_dir / "cache"
    namespace: str = DEFAULT_NAMESPACE
    priority_spec: str = DEFAULT_PRIORITY_SPEC
    threshold_confident: float = 0.93
    threshold_review: float = 0.75
    date_slack_years: int = 5
    depth_limit: int = 3
    offline: bool = True
    endpoint_template: str = ""  # required for online runs
    seed: int = 1
    timestamp: str = "1970-01-01T00:00:00Z"  # provenance timestamp for ingests
    institutions: list[InstitutionEntry] = field(default_factory=list)
    authority_table: Optional[Path] = None  # custom namespace table (TSV)

    def __post_init__(self) -> None:
        self.data_dir = Path(self.data_dir)
        if self.fixture_dir is None:
            self.fixture_dir = self.data_dir / "provider"
        if self.cache_dir is None:
            self.cache_dir = self.data_dir / "cache"
        self.validate()

    def validate(self) -> None:
        if not self.namespace.endswith("/"):
            raise ConfigError("namespace must end in '/'")
        if not (0.0 < self.threshold_review < self.threshold_confident <= 1.0):
            raise ConfigError("thresholds must satisfy 0 < review < confident <= 1")
        if self.date_slack_years < 0:
            raise ConfigError("date slack must be >= 0")
        if self.depth_limit < 1:
            raise ConfigError("depth limit must be >= 1")
        if not self.offline and not self.endpoint_template:
            raise ConfigError("online runs require an endpoint template")
        parse_priority_spec(self.priority_spec)
        seen = set()
        for inst in self.institutions:
            if inst.id in seen:
                raise ConfigError(f"duplicate institution id {inst.id!r}")
            seen.add(inst.id)

    # -- derived objects

    def thresholds(self) -> Thresholds:
        return Thresholds(confident=self.threshold_confident, review=self.threshold_review)

    def institution_base(self, institution_id: str) -> str:
        for inst in self.institutions:
            if inst.id == institution_id and inst.base_uri:
                return inst.base_uri
        return f"{self.namespace}{institution_id}/"

    def registry(self) -> AuthorityRegistry:
        if self.authority_table is not None:
            try:
                table = Path(self.authority_table).read_text(encoding="utf-8")
            except FileNotFoundError:
                raise ConfigError(f"authority table not found: {self.authority_table}")
            registry = AuthorityRegistry.from_table(table)
        else:
            registry = default_registry()
        for inst in self.institutions:
            if registry.get(f"local:{inst.id}") is None:
                registry.register_institution(inst.id, self.institution_base(inst.id))
        return registry

    def priority(self) -> PriorityOrder:
        institutions = frozenset(f"local:{i.id}" for i in self.institutions)
        if self.authority_table is not None and self.priority_spec == DEFAULT_PRIORITY_SPEC:
            # a custom namespace table carries its own ranks; an explicit
            # --priority flag still overrides it
            base = self.registry().priority()
        else:
            base = parse_priority_spec(self.priority_spec)
        return PriorityOrder(
            ranked=base.ranked,
            excluded=base.excluded,
            institutions=base.institutions | institutions,
        )

    def institution_ids(self) -> list[str]:
        return [inst.id for inst in self.institutions]

    def token_table(self) -> dict[str, str]:
        return {inst.token: inst.id for inst in self.institutions if inst.token}

    # -- serialization

    def to_json(self) -> dict:
        return {
            "data_dir": str(self.data_dir),
            "fixture_dir": str(self.fixture_dir),
            "cache_dir": str(self.cache_dir),
            "namespace": self.namespace,
            "priority": self.priority_spec,
            "threshold_confident": self.threshold_confident,
            "threshold_review": self.threshold_review,
            "date_slack_years": self.date_slack_years,
            "depth_limit": self.depth_limit,
            "offline": self.offline,
            "endpoint_template": self.endpoint_template,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "institutions": [
                {"id": i.id, "base_uri": i.base_uri, "token": i.token}
                for i in self.institutions
            ],
            "authority_table": str(self.authority_table) if self.authority_table else None,
        }

    @classmethod
    def from_json(cls, data: dict, base_dir: Optional[Path] = None) -> "RunConfig":
        def path_of(key, default):
            raw = data.get(key)
            if raw is None:
                return default
            p = Path(raw)
            if base_dir is not None and not p.is_absolute():
                p = base_dir / p
            return p

        return cls(
            data_dir=path_of("data_dir", Path("data")),
            fixture_dir=path_of("fixture_dir", None),
            cache_dir=path_of("cache_dir", None),
            namespace=data.get("namespace", DEFAULT_NAMESPACE),
            priority_spec=data.get("priority", DEFAULT_PRIORITY_SPEC),
            threshold_confident=data.get("threshold_confident", 0.93),
            threshold_review=data.get("threshold_review", 0.75),
            date_slack_years=data.get("date_slack_years", 5),
            depth_limit=data.get("depth_limit", 3),
            offline=data.get("offline", True),
            endpoint_template=data.get("endpoint_template", ""),
            seed=data.get("seed", 1),
            timestamp=data.get("timestamp", "1970-01-01T00:00:00Z"),
            institutions=[
                InstitutionEntry(
                    id=i["id"], base_uri=i.get("base_uri", ""), token=i.get("token", "")
                )
                for i in data.get("institutions", [])
            ],
            authority_table=path_of("authority_table", None),
        )

    @classmethod
    def load(cls, path: Path | str) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        return cls.from_json(data, base_dir=path.parent)

    def save(self, path: Path | str) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(
            json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_json(), sort_keys=True)
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:12]

    def header_lines(self) -> list[str]:
        return [
            f"concordia {__version__}",
            f"config {self.config_hash()} priority={self.priority_spec} "
            f"thresholds confident={self.threshold_confident} review={self.threshold_review} "
            f"slack={self.date_slack_years}y depth={self.depth_limit}",
        ]

    def header_json(self) -> dict:
        return {
            "tool": "concordia",
            "version": __version__,
            "config_hash": self.config_hash(),
            "priority": self.priority_spec,
            "threshold_confident": self.threshold_confident,
            "threshold_review": self.threshold_review,
            "date_slack_years": self.date_slack_years,
            "depth_limit": self.depth_limit,
        }
