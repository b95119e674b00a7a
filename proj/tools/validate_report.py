#!/usr/bin/env python3
"""Validate fairtest report JSON files against schema/report.schema.json."""
import json
import sys

import jsonschema


def main(argv):
    if len(argv) < 3:
        print("usage: validate_report.py SCHEMA REPORT...", file=sys.stderr)
        return 2
    with open(argv[1]) as f:
        schema = json.load(f)
    for path in argv[2:]:
        with open(path) as f:
            jsonschema.validate(json.load(f), schema)
        print(f"{path}: valid")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
