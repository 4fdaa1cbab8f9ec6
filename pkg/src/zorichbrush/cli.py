"""Command-line front door.

Subcommands wrap the library modules one-to-one; every run writes its
outputs atomically under an output directory together with a JSON manifest
listing the config echo, the certified parameter bundle, per-file sha256
checksums and version info.  Identical config and seed reproduce identical
output bytes; wall-clock time lives in a single excluded manifest field.

Exit codes: 0 success, 2 domain/regime errors, 3 numeric failures, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .brush import box_chain, brush_membership, phi, t_min
from .errors import (
    BoundaryAmbiguityError,
    BoxChainBrokenError,
    DomainError,
    LeftJuliaShadowError,
    MembershipError,
    NoHairError,
    RangeOverflowError,
    RationalCollisionError,
    ZorichBrushError,
)
from .geometry import estimate_L, spherical_ray_length
from .hairs import DEFAULT_GRID_COUNT, DEFAULT_GRID_SPAN, default_t_grid, embed_H, trace_hair
from .surfaces import mesh_export, soshs_build, wild_hair_chain
from .symbolic import Address, decode, encode, itinerary
from .zorich import Params, classify_point, lambda_max, orbit, zorich_eval

ENV_OUTPUT_DIR = "ZORICHBRUSH_OUTPUT_DIR"

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_DOMAIN_ERRORS = (
    DomainError,
    MembershipError,
    RationalCollisionError,
    BoundaryAmbiguityError,
    LeftJuliaShadowError,
)
_NUMERIC_ERRORS = (RangeOverflowError, BoxChainBrokenError, NoHairError)


@dataclass
class RunConfig:
    lam: float | None = None  # default 0.9 * lambda_max(L_hat) after estimation
    L_samples: int = 100_000
    seed: int = 7
    depth: int = 20
    tolerances: dict = field(default_factory=lambda: {"t_min": 1e-9})
    output_dir: Path = Path("runs")

    @classmethod
    def load(cls, args: argparse.Namespace) -> "RunConfig":
        cfg = cls()
        if args.config:
            for key, value in _parse_config_file(Path(args.config)).items():
                if key == "lambda":
                    cfg.lam = float(value)
                elif key == "L_samples":
                    cfg.L_samples = int(value)
                elif key == "seed":
                    cfg.seed = int(value)
                elif key == "depth":
                    cfg.depth = int(value)
                elif key == "output_dir":
                    cfg.output_dir = Path(value)
                elif key.startswith("tol."):
                    cfg.tolerances[key[4:]] = float(value)
                else:
                    raise DomainError(f"unknown config key {key!r}")
        if ENV_OUTPUT_DIR in os.environ:
            cfg.output_dir = Path(os.environ[ENV_OUTPUT_DIR])
        # flags win over config file and environment
        if getattr(args, "lam", None) is not None:
            cfg.lam = args.lam
        if getattr(args, "L_samples", None) is not None:
            cfg.L_samples = args.L_samples
        if getattr(args, "seed", None) is not None:
            cfg.seed = args.seed
        if getattr(args, "depth", None) is not None:
            cfg.depth = args.depth
        if getattr(args, "output_dir", None) is not None:
            cfg.output_dir = Path(args.output_dir)
        if cfg.depth < 1:
            raise DomainError("depth must be at least 1")
        return cfg

    def echo(self) -> dict:
        return {
            "lambda": self.lam,
            "L_samples": self.L_samples,
            "seed": self.seed,
            "depth": self.depth,
            "tolerances": self.tolerances,
            "output_dir": str(self.output_dir),
        }


def _parse_config_file(path: Path) -> dict:
    out = {}
    for raw in path.read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DomainError(f"config line without '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


class RunManifest:
    """Collects outputs and writes a deterministic manifest.json."""

    def __init__(self, cfg: RunConfig, command: str):
        self.cfg = cfg
        self.command = command
        self.started = time.time()
        self.doc = {
            "command": command,
            "config": cfg.echo(),
            "params": None,
            "outputs": [],
            "tables": {},
            "versions": {
                "zorichbrush": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
        }

    def set_params(self, params: Params) -> None:
        self.doc["params"] = params.as_dict()

    def add_table(self, name: str, table) -> None:
        self.doc["tables"][name] = table

    def write_file(self, name: str, data: bytes) -> Path:
        path = self.cfg.output_dir / name
        _atomic_write(path, data)
        self.doc["outputs"].append(
            {"path": str(path), "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )
        return path

    def finalize(self) -> Path:
        # wall clock is the single nondeterministic field
        self.doc["wall_clock_seconds"] = time.time() - self.started
        data = (json.dumps(self.doc, sort_keys=True, indent=2) + "\n").encode()
        path = self.cfg.output_dir / "manifest.json"
        _atomic_write(path, data)
        return path


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _certify(cfg: RunConfig) -> Params:
    L_hat = estimate_L(cfg.L_samples, cfg.seed)
    lam = cfg.lam if cfg.lam is not None else 0.9 * lambda_max(L_hat)
    lmax = lambda_max(L_hat)
    if not 0.0 < lam < lmax:
        raise DomainError(
            f"lambda regime violated: need 0 < lambda < exp(-L_hat)/L_hat = {lmax:.6g}, "
            f"got lambda = {lam:.6g} (L_hat = {L_hat:.6g})"
        )
    return Params.certify(lam, L_hat)


def _parse_point(text: str) -> np.ndarray:
    try:
        vals = [float(part) for part in text.split(",")]
    except ValueError as exc:
        raise DomainError(f"cannot parse point {text!r}") from exc
    if len(vals) != 3:
        raise DomainError("a point needs exactly three comma-separated coordinates")
    return np.array(vals)


def _load_addresses(path: Path) -> list[Address]:
    doc = json.loads(path.read_text())
    if not isinstance(doc, list) or not doc:
        raise DomainError("address file must be a nonempty JSON list")
    if isinstance(doc[0][0], (int, float)):
        doc = [doc]  # single address given as a flat list of pairs
    return [Address(tuple((int(a), int(b)) for a, b in symbols)) for symbols in doc]


def _csv_bytes(header: list[str], rows: list[list]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode()


# ---------------------------------------------------------------------------
# subcommands

def cmd_params(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "params")
    params = _certify(cfg)
    manifest.set_params(params)
    bundle = json.dumps(params.as_dict(), sort_keys=True, indent=2) + "\n"
    manifest.write_file("params.json", bundle.encode())
    manifest.finalize()
    sys.stdout.write(bundle)
    return EXIT_OK


def cmd_eval(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "eval")
    params = _certify(cfg)
    manifest.set_params(params)
    point = _parse_point(args.point)
    image = zorich_eval(point, params)
    doc = {"point": point.tolist(), "image": image.tolist(), "norm": float(np.linalg.norm(image))}
    manifest.write_file("eval.json", (json.dumps(doc, sort_keys=True) + "\n").encode())
    manifest.finalize()
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_orbit(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "orbit")
    params = _certify(cfg)
    manifest.set_params(params)
    point = _parse_point(args.point)
    result = orbit(point, args.steps, params)
    rows = [[k, *map(float, p)] for k, p in enumerate(result.points)]
    manifest.write_file("orbit.csv", _csv_bytes(["k", "x1", "x2", "x3"], rows))
    cls = classify_point(point, params, max_iter=max(args.steps, 1))
    manifest.add_table("orbit", {"truncated": result.truncated, "classification": cls.value})
    manifest.finalize()
    sys.stdout.write(f"orbit: {len(result.points)} points, truncated={result.truncated}, "
                     f"classification={cls.value}\n")
    return EXIT_OK


def cmd_itinerary(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "itinerary")
    params = _certify(cfg)
    manifest.set_params(params)
    point = _parse_point(args.point)
    addr = itinerary(point, args.depth if args.depth is not None else cfg.depth, params)
    doc = {"point": point.tolist(), "symbols": [list(s) for s in addr.symbols]}
    manifest.write_file("itinerary.json", (json.dumps(doc, sort_keys=True) + "\n").encode())
    manifest.finalize()
    sys.stdout.write(json.dumps(doc["symbols"]) + "\n")
    return EXIT_OK


def cmd_farey(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "farey")
    if args.action == "encode":
        target = Fraction(args.target)
        symbols = encode(target, args.depth if args.depth is not None else cfg.depth)
        payload = json.dumps(symbols) + "\n"
        manifest.write_file("farey_encode.json", payload.encode())
        manifest.finalize()
        sys.stdout.write(payload)
    else:
        seq = json.loads(args.seq if args.seq else Path(args.seq_file).read_text())
        interval = decode(seq)
        doc = {"lo": f"{interval.lo.numerator}/{interval.lo.denominator}",
               "hi": f"{interval.hi.numerator}/{interval.hi.denominator}"}
        payload = json.dumps(doc, sort_keys=True) + "\n"
        manifest.write_file("farey_decode.json", payload.encode())
        manifest.finalize()
        sys.stdout.write(payload)
    return EXIT_OK


def cmd_hair(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "hair")
    params = _certify(cfg)
    manifest.set_params(params)
    address = _load_addresses(Path(args.address))[0]
    depth = args.depth if args.depth is not None else cfg.depth
    tol = cfg.tolerances.get("t_min", 1e-9)
    tm = t_min(address, depth, tol, params)
    if math.isinf(tm):
        raise NoHairError("address has no finite hair base in the search window")
    grid = default_t_grid(tm, args.grid_span, args.grid_count)
    hair = trace_hair(address, grid, depth, params, tol=tol)
    rows = [[float(t), *map(float, p)] for t, p in hair.samples]
    manifest.write_file("hair.csv", _csv_bytes(["t", "x1", "x2", "x3"], rows))
    sidecar = {"t_min": hair.t_min, "length_spherical": hair.length_spherical,
               "tail_estimate": hair.tail_estimate}
    manifest.write_file("hair.json", (json.dumps(sidecar, sort_keys=True) + "\n").encode())
    manifest.finalize()
    sys.stdout.write(json.dumps(sidecar, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_brush(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "brush")
    params = _certify(cfg)
    manifest.set_params(params)
    addresses = _load_addresses(Path(args.addresses))
    depth = args.depth if args.depth is not None else cfg.depth
    tol = cfg.tolerances.get("t_min", 1e-9)
    tmin_rows = []
    cloud_rows = []
    for idx, address in enumerate(addresses):
        tm = t_min(address, depth, tol, params)
        tmin_rows.append([f"{tm:.12g}" if math.isfinite(tm) else "inf", idx])
        if math.isfinite(tm):
            for t in default_t_grid(tm, args.grid_span, args.grid_count):
                point = phi(float(t), address, depth, params)
                cloud_rows.append([*map(float, point), idx, float(t)])
    manifest.write_file("t_min.csv", _csv_bytes(["t_min", "address_id"], tmin_rows))
    manifest.write_file(
        "brush_points.csv", _csv_bytes(["x1", "x2", "x3", "address_id", "t"], cloud_rows)
    )
    manifest.finalize()
    sys.stdout.write(f"brush: {len(addresses)} addresses, {len(cloud_rows)} points\n")
    return EXIT_OK


def cmd_soshs(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "soshs")
    tree = soshs_build(args.tree_depth)
    data = mesh_export(tree, args.format)
    manifest.write_file(f"soshs_depth{args.tree_depth}.{args.format}", data)
    manifest.finalize()
    sys.stdout.write(f"soshs: depth {args.tree_depth}, {tree.leaf_count()} cuboids\n")
    return EXIT_OK


def cmd_wild(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "wild")
    chain = wild_hair_chain(args.levels)
    data = mesh_export(chain, args.format)
    manifest.write_file(f"wild_levels{args.levels}.{args.format}", data)
    manifest.finalize()
    sys.stdout.write(f"wild: {args.levels} levels\n")
    return EXIT_OK


def cmd_embed(cfg: RunConfig, args) -> int:
    manifest = RunManifest(cfg, "embed")
    rows = []
    with open(args.input, newline="") as fh:
        for record in csv.reader(fh):
            if not record or not _is_float(record[0]):
                continue  # header or blank
            x, y, z = (float(record[0]), float(record[1]), float(record[2]))
            e = embed_H(x, y, z)
            rows.append([float(e[0]), float(e[1]), float(e[2])])
    manifest.write_file("embedded.csv", _csv_bytes(["e1", "e2", "e3"], rows))
    manifest.finalize()
    sys.stdout.write(f"embed: {len(rows)} points\n")
    return EXIT_OK


def _is_float(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zorichbrush",
        description="Zorich exponential maps: certified regime, brush dynamics, hairy surfaces.",
        epilog=(
            "CSV conventions: hair.csv has columns t,x1,x2,x3; t_min.csv has t_min,address_id; "
            "brush_points.csv has x1,x2,x3,address_id,t; embedded.csv has e1,e2,e3. "
            "Config file: flat key=value lines (lambda, L_samples, seed, depth, output_dir, "
            "tol.<name>); command-line flags win. "
            f"The environment variable {ENV_OUTPUT_DIR} overrides the default output_dir."
        ),
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--output-dir", help="directory for outputs and manifest")
    parser.add_argument("--lambda", dest="lam", type=float, help="family parameter")
    parser.add_argument("--L-samples", dest="L_samples", type=int, help="samples for L_hat")
    parser.add_argument("--seed", type=int, help="RNG seed for L_hat estimation")
    parser.add_argument("--depth", type=int, help="default symbolic depth")
    sub = parser.add_subparsers(dest="cmd", required=True)

    sub.add_parser("params", help="certify and print the parameter bundle")

    p = sub.add_parser("eval", help="evaluate the map at a point")
    p.add_argument("--point", required=True, help="x1,x2,x3")

    p = sub.add_parser("orbit", help="forward orbit of a point")
    p.add_argument("--point", required=True)
    p.add_argument("--steps", type=int, default=20)

    p = sub.add_parser("itinerary", help="cell itinerary of a point")
    p.add_argument("--point", required=True)
    p.add_argument("--depth", type=int)

    p = sub.add_parser("farey", help="exact Farey coding")
    p.add_argument("action", choices=["encode", "decode"])
    p.add_argument("--target", help="rational target p/q (encode)")
    p.add_argument("--depth", type=int)
    p.add_argument("--seq", help="JSON list of symbols (decode)")
    p.add_argument("--seq-file", help="file with a JSON list of symbols (decode)")

    p = sub.add_parser("hair", help="trace one hair")
    p.add_argument("--address", required=True, help="JSON file with integer-pair symbols")
    p.add_argument("--depth", type=int)
    p.add_argument("--grid-count", type=int, default=DEFAULT_GRID_COUNT)
    p.add_argument("--grid-span", type=float, default=DEFAULT_GRID_SPAN)

    p = sub.add_parser("brush", help="t_min table and point cloud for addresses")
    p.add_argument("--addresses", required=True, help="JSON file with one or more addresses")
    p.add_argument("--depth", type=int)
    p.add_argument("--grid-count", type=int, default=16)
    p.add_argument("--grid-span", type=float, default=DEFAULT_GRID_SPAN)

    p = sub.add_parser("soshs", help="export the hairy-square cuboid tree")
    p.add_argument("--depth", dest="tree_depth", type=int, default=3)
    p.add_argument("--format", choices=["obj", "ply", "csv", "json"], default="obj")

    p = sub.add_parser("wild", help="export the knotted hair chain")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--format", choices=["obj", "ply", "csv", "json"], default="obj")

    p = sub.add_parser("embed", help="map a CSV point cloud through the cube embedding")
    p.add_argument("--input", required=True)

    return parser


_COMMANDS = {
    "params": cmd_params,
    "eval": cmd_eval,
    "orbit": cmd_orbit,
    "itinerary": cmd_itinerary,
    "farey": cmd_farey,
    "hair": cmd_hair,
    "brush": cmd_brush,
    "soshs": cmd_soshs,
    "wild": cmd_wild,
    "embed": cmd_embed,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.load(args)
        return _COMMANDS[args.cmd](cfg, args)
    except _DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except _NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ZorichBrushError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
