from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class LogicpodConfig:
    services: dict[str, str] = field(default_factory=dict)  # name -> base url
    anchor_set_name: str | None = None
    anchor_set_version: str = "latest"
    edge_timeout_seconds: int = 300
    similar_slice_k: int = 3
    root: str = "./logicpod-root"
    static_dir: str | None = None

    @classmethod
    def from_file(cls, path: str) -> "LogicpodConfig":
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        anchor = data.get("anchor_set") or {}
        return cls(
            services=data.get("services", {}),
            anchor_set_name=anchor.get("name"),
            anchor_set_version=str(anchor.get("version", "latest")),
            edge_timeout_seconds=data.get("edge_timeout_seconds", 300),
            similar_slice_k=data.get("similar_slice_k", 3),
            root=data.get("root", "./logicpod-root"),
            static_dir=data.get("static_dir"),
        )
