# component_id: schemas_pkg_init
# kind: code
# area: schemas
# status: stable
# purpose: JSON Schemas for module configs and weights manifests.

import json
from pathlib import Path
from typing import Any, Dict

SCHEMA_DIR = Path(__file__).resolve().parent
CONFIG_SCHEMA = "mhs_config.schema.json"
MANIFEST_SCHEMA = "weights_manifest.schema.json"


def load_schema(name: str) -> Dict[str, Any]:
    with (SCHEMA_DIR / name).open("r", encoding="utf-8") as f:
        return json.load(f)


__all__ = ["SCHEMA_DIR", "CONFIG_SCHEMA", "MANIFEST_SCHEMA", "load_schema"]
