"""Run manifests: resolved parameters and input digests per output file."""

import hashlib
import json

from langsep import __version__


def file_digest64(path):
    """64-bit BLAKE2b digest of a file's bytes, as 16 hex characters."""
    h = hashlib.blake2b(digest_size=8)
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def build_manifest(subcommand, parameters, input_paths):
    """Manifest dict for one invocation; deterministic for fixed inputs."""
    return {
        "subcommand": subcommand,
        "parameters": {k: parameters[k] for k in sorted(parameters)},
        "input_digests": {str(p): file_digest64(p) for p in input_paths},
        "tool_version": __version__,
    }


def write_manifest(manifest, out_path):
    """Write the side manifest for an output file (<out>.manifest.json)."""
    path = f"{out_path}.manifest.json"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, sort_keys=True, ensure_ascii=False, indent=2)
        fh.write("\n")
    return path
