"""Runs every subcommand with --output json on the bundled datasets and
validates the result against the shipped schema files.

usage: validate_schemas.py QCM_BINARY SCHEMA_DIR DATA_DIR
"""

import json
import pathlib
import subprocess
import sys

import jsonschema
from referencing import Registry, Resource

INVOCATIONS = [
    ("classicality", ["classicality", "--input", "goldfish.csv"]),
    ("classicality", ["classicality", "--input", "negation_mix.csv"]),
    ("classicality", ["classicality", "--input", "combinations.csv"]),
    ("fock-fit", ["fock-fit", "--input", "combinations.csv"]),
    ("fock-fit", ["fock-fit", "--input", "combinations.csv", "--policy", "fixed", "--m2", "0.2"]),
    ("fock-fit", ["fock-fit", "--input", "goldfish.csv", "--mode", "general"]),
    ("chsh", ["chsh", "--input", "table1.json"]),
    ("chsh", ["chsh", "--input", "table1.json", "--model", "animal_acts_model.json"]),
    ("stats-fit", ["stats-fit", "--input", "uniform11.json"]),
    ("stats-fit", ["stats-fit", "--input", "planted.json"]),
    ("report", ["report", "--manifest", "manifest.json"]),
]


def main() -> int:
    binary, schema_dir, data_dir = str(pathlib.Path(sys.argv[1]).resolve()), pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    schemas = {p.name: json.loads(p.read_text()) for p in schema_dir.glob("*.schema.json")}
    registry = Registry().with_resources(
        (name, Resource.from_contents(body)) for name, body in schemas.items()
    )
    failures = 0
    for command, args in INVOCATIONS:
        proc = subprocess.run([binary, *args, "--output", "json"], cwd=data_dir, capture_output=True, text=True)
        label = " ".join(args)
        if proc.returncode != 0:
            print(f"FAIL {label}: exit {proc.returncode}: {proc.stderr.strip()}")
            failures += 1
            continue
        validator = jsonschema.Draft202012Validator(schemas[f"{command}.schema.json"], registry=registry)
        errors = sorted(validator.iter_errors(json.loads(proc.stdout)), key=lambda e: list(e.path))
        for e in errors[:5]:
            print(f"FAIL {label}: {'/'.join(map(str, e.path))}: {e.message}")
        failures += bool(errors)
        if not errors:
            print(f"PASS {label}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
