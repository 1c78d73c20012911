"""Validates one JSON report per subcommand against docs/report_schema.json."""
import json
import subprocess
import sys

import jsonschema

cltlab, schema_path = sys.argv[1], sys.argv[2]
with open(schema_path) as f:
    schema = json.load(f)
jsonschema.Draft7Validator.check_schema(schema)
validator = jsonschema.Draft7Validator(schema)

commands = [
    ["phi", "--t", "-2,0,2"],
    ["transition", "--points", "51", "--direction", "drop-after"],
    ["swap-chain", "--dist", "exp", "--n", "8", "--samples", "1e4"],
    ["lindeberg", "--array", "spike:uniform"],
    ["clt-verify", "--dist", "rademacher", "--n", "1,100", "--samples", "1e4"],
    ["moments", "--samples", "1e4"],
]
failures = 0
for args in commands:
    out = subprocess.run([cltlab, *args], capture_output=True, text=True)
    report = json.loads(out.stdout)
    errors = list(validator.iter_errors(report))
    for err in errors:
        print(f"{args[0]}: {err.message} at {list(err.absolute_path)}")
    failures += len(errors)
    # Also reject the body of one subcommand under another's header.
    wrong = dict(report, header=dict(report["header"], subcommand="moments" if args[0] != "moments" else "phi"))
    if validator.is_valid(wrong):
        print(f"{args[0]}: body accepted under the wrong subcommand")
        failures += 1
sys.exit(1 if failures else 0)
