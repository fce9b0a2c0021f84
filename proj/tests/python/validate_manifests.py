"""Validate run manifests against the published schema and recheck their output checksums."""
import hashlib
import json
import pathlib
import sys

import jsonschema


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def main(argv):
    if len(argv) < 3:
        print("usage: validate_manifests.py SCHEMA MANIFEST_OR_DIR...", file=sys.stderr)
        return 2
    schema = json.loads(pathlib.Path(argv[1]).read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    validator = jsonschema.Draft202012Validator(schema)
    manifests = []
    for arg in argv[2:]:
        p = pathlib.Path(arg)
        manifests += sorted(p.rglob("manifest.json")) if p.is_dir() else [p]
    if not manifests:
        print("no manifests found", file=sys.stderr)
        return 1
    failed = 0
    for m in manifests:
        doc = json.loads(m.read_text())
        errors = [f"{'/'.join(map(str, e.path))}: {e.message}" for e in validator.iter_errors(doc)]
        for o in doc.get("outputs", []):
            f = m.parent / o["path"]
            if not f.exists() or sha256(f) != o["sha256"]:
                errors.append(f"checksum mismatch: {o['path']}")
        status = "ok" if not errors else "FAIL"
        print(f"{status} {m}")
        for e in errors:
            print(f"    {e}")
        failed += bool(errors)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
