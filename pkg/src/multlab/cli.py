"""Thin command-line client for the laboratory service.

``multlab run`` parses a key = value config file, submits it to the service
(in-process by default, or a remote ``--server`` URL), and writes the
report, optional CSV, and the run manifest to the output directory.
``multlab registry`` prints the builtin catalog; ``multlab serve`` starts
the HTTP service.

Exit codes: 0 success, 2 config error, 3 numeric-domain error, 4 resource
error.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
from pathlib import Path

_EXIT_BY_CATEGORY = {"config": 2, "numeric": 3, "resource": 4}


def _client(server: str | None):
    """An httpx-compatible client: remote when a server URL is given,
    otherwise the app mounted in-process."""
    if server:
        import httpx

        return httpx.Client(base_url=server)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app)


def load_config(path: Path) -> dict:
    """Read an experiment config: INI-style key = value sections, or JSON
    (a previous run's manifest is accepted and its config echo reused)."""
    if not path.exists():
        raise ValueError(f"config file not found: {path}")
    if path.suffix == ".json":
        data = json.loads(path.read_text())
        return data["config"] if "config" in data else data
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str  # keep case (A vs a are distinct parameters)
    parser.read(path)
    if "experiment" not in parser:
        raise ValueError("config needs an [experiment] section")
    cfg: dict = {}
    exp = dict(parser["experiment"])
    if "kind" not in exp:
        raise ValueError("config needs kind = <experiment> under [experiment]")
    cfg["experiment"] = exp.pop("kind")
    cfg.update(exp)
    if "params" in parser:
        cfg.update(dict(parser["params"]))
    if "functions" in parser:
        cfg["functions"] = dict(parser["functions"])
    if "output" in parser:
        out = parser["output"]
        if "name" in out:
            cfg["output_name"] = out["name"]
        if "format" in out:
            cfg["format"] = out["format"]
    if "checkpoints" in cfg and isinstance(cfg["checkpoints"], str):
        cfg["checkpoints"] = [int(tok) for tok in cfg["checkpoints"].split(",") if tok.strip()]
    return cfg


def _write_outputs(result: dict, out_dir: Path, name: str, fmt: str) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv" and result.get("csv"):
        path = out_dir / f"{name}.csv"
        path.write_text(result["csv"], newline="")
        written.append(path)
    else:
        path = out_dir / f"{name}.json"
        path.write_text(json.dumps(result["report"], indent=2, sort_keys=True) + "\n")
        written.append(path)
    manifest_path = out_dir / f"{name}.manifest.json"
    manifest_path.write_text(json.dumps(result["manifest"], indent=2, sort_keys=True) + "\n")
    written.append(manifest_path)
    return written


def cmd_run(args) -> int:
    path = Path(args.config)
    try:
        cfg = load_config(path)
    except (ValueError, KeyError, json.JSONDecodeError, configparser.Error) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads
    if args.format is not None:
        cfg["format"] = args.format
    with _client(args.server) as client:
        resp = client.post("/run", json=cfg)
        if resp.status_code != 200:
            detail = {}
            try:
                body = resp.json().get("detail", {})
                # pydantic validation failures arrive as a list of records
                detail = body if isinstance(body, dict) else {"message": str(body)}
            except Exception:
                pass
            category = detail.get("category", "config")
            print(f"{category} error: {detail.get('message', resp.text)}", file=sys.stderr)
            return _EXIT_BY_CATEGORY.get(category, 2)
        result = resp.json()
    name = cfg.get("output_name") or path.stem
    fmt = cfg.get("format", "csv")
    for written in _write_outputs(result, Path(args.out), name, fmt):
        print(written)
    scalars = {k: v for k, v in result["report"].items()
               if isinstance(v, (int, float)) and k != "schema"}
    if scalars:
        width = max(len(k) for k in scalars)
        for key, value in scalars.items():
            print(f"  {key:<{width}} = {value}")
    return 0


def cmd_registry(args) -> int:
    with _client(args.server) as client:
        resp = client.get("/registry")
        print(json.dumps(resp.json(), indent=2, sort_keys=True))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    uvicorn.run("multlab.service:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multlab",
                                     description="mean-value laboratory client")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one experiment config")
    run_p.add_argument("--config", required=True, help="key = value config file or manifest JSON")
    run_p.add_argument("--threads", type=int, default=None,
                       help="worker threads (1 = bit-exact reference mode)")
    run_p.add_argument("--out", default=".", help="output directory")
    run_p.add_argument("--format", choices=["csv", "json"], default=None)
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--server", default=None, help="remote service URL (default: in-process)")
    run_p.set_defaults(func=cmd_run)

    reg_p = sub.add_parser("registry", help="list builtin rules and prime sets")
    reg_p.add_argument("--server", default=None)
    reg_p.set_defaults(func=cmd_registry)

    serve_p = sub.add_parser("serve", help="start the HTTP service")
    serve_p.add_argument("--host", default="127.0.0.1")
    serve_p.add_argument("--port", type=int, default=8000)
    serve_p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
