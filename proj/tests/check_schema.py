"""Every shipped config validates against docs/config-schema.json."""
import json
import pathlib
import sys

import jsonschema

root = pathlib.Path(sys.argv[1])
schema = json.loads((root / "docs/config-schema.json").read_text())
jsonschema.Draft202012Validator.check_schema(schema)
validator = jsonschema.Draft202012Validator(schema)
bad = 0
for path in sorted(root.glob("configs/**/*.json")):
    errors = list(validator.iter_errors(json.loads(path.read_text())))
    print(f"{path.relative_to(root)}: {'ok' if not errors else errors[0].message}")
    bad += bool(errors)
broken = {"experiment": "scattering-table", "potential": {"exponent": -4}}
if validator.is_valid(broken):
    print("schema accepted a negative exponent")
    bad += 1
sys.exit(1 if bad else 0)
