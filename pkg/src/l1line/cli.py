"""Command-line client for the fitting service.

Subcommands build JSON requests and send them to the service — by default
an in-process instance (no sockets involved), or a remote server given
--server URL — then render the response as text or JSON. CSV reading and
validation happen locally so that input problems are reported with 1-based
row/column positions before anything is sent.

Exit codes: 0 success, 1 certification failure, 2 unreadable input or
unreachable server, 3 CSV parse error, 4 validation/usage error.
"""

from __future__ import annotations

import argparse
import asyncio
import json
import sys

import httpx

from .core import ContractError
from .ingest import CsvParseError, load_csv_file
from .synth import SimConfig

__all__ = ["main"]

EXIT_OK = 0
EXIT_CERTIFY = 1
EXIT_IO = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4


class _Parser(argparse.ArgumentParser):
    # Usage problems are validation failures, not I/O failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_VALIDATION)


class _CliFailure(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        self.message = message
        super().__init__(message)


def _f12(x) -> str:
    if x is None:
        return "none"
    if isinstance(x, str):
        return x
    return format(float(x), ".12g")


def _vec(values) -> str:
    return " ".join(_f12(c) for c in values)


async def _post_async(server: str | None, route: str, payload: dict) -> dict:
    if server:
        client = httpx.AsyncClient(base_url=server, timeout=None)
    else:
        from .service import create_app

        client = httpx.AsyncClient(
            transport=httpx.ASGITransport(app=create_app()),
            base_url="http://l1line.internal",
            timeout=None,
        )
    async with client:
        response = await client.post(route, json=payload)
    if response.status_code == 422:
        try:
            detail = response.json().get("detail")
        except ValueError:
            detail = response.text
        raise _CliFailure(EXIT_VALIDATION, f"request rejected: {detail}")
    if response.status_code >= 400:
        raise _CliFailure(
            EXIT_IO, f"server error {response.status_code}: {response.text}"
        )
    return response.json()


def _post(args, route: str, payload: dict) -> dict:
    try:
        return asyncio.run(_post_async(args.server, route, payload))
    except httpx.HTTPError as exc:
        raise _CliFailure(EXIT_IO, f"cannot reach server: {exc}")


def _load(path: str):
    try:
        return load_csv_file(path)
    except OSError as exc:
        raise _CliFailure(EXIT_IO, f"cannot read {path}: {exc}")
    except CsvParseError as exc:
        raise _CliFailure(EXIT_PARSE, f"{path}: {exc}")
    except ContractError as exc:
        raise _CliFailure(EXIT_VALIDATION, f"{path}: {exc}")


def _emit(doc: dict, args, render_text) -> None:
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    else:
        for line in render_text(doc):
            print(line)


def _render_fit(doc: dict):
    yield f"lambda: {_f12(doc['lambda'])}"
    pc = doc["preserved_column"]
    yield f"preserved_column: {pc if pc is not None else 'none'}"
    yield f"v: {_vec(doc['v'])}"
    yield f"z: {_f12(doc['z'])}"
    yield f"l0: {doc['l0']}"


def _render_path(doc: dict):
    yield f"fingerprint: {doc['fingerprint']}"
    yield f"intervals: {len(doc['intervals'])}"
    for k, iv in enumerate(doc["intervals"], start=1):
        pc = iv["preserved_column"]
        yield (
            f"{k}: lo={_f12(iv['lo'])} hi={_f12(iv['hi'])} "
            f"preserved_column={pc if pc is not None else 'none'} "
            f"intercept={_f12(iv['error_intercept'])} "
            f"slope={_f12(iv['l1_slope'])} v= {_vec(iv['v_star'])}"
        )
    crossings = doc.get("diagnostics", {}).get("multi_crossing")
    if crossings:
        for e in crossings:
            yield (
                f"multi_crossing: lo={_f12(e['lo'])} hi={_f12(e['hi'])} "
                f"crossings={e['crossings']}"
            )
    for p in doc.get("per_coordinate") or []:
        yield (
            f"preserved {p['preserved_column']}: "
            f"breakpoints= {_vec(p['breakpoints'])}"
        )
        for seg in p["segments"]:
            yield (
                f"  lo={_f12(seg['lo'])} hi={_f12(seg['hi'])} "
                f"intercept={_f12(seg['error_intercept'])} "
                f"slope={_f12(seg['l1_slope'])} v= {_vec(seg['v'])}"
            )


def _render_simulate(doc: dict):
    cfg = doc["config"]
    yield (
        "config: "
        f"n={cfg['n']} m={cfg['m']} nc={cfg['nc']} mc={cfg['mc']} "
        f"noise_scale={_f12(cfg['noise_scale'])} "
        f"outlier_scale={_f12(cfg['outlier_scale'])} seed={cfg['seed']} "
        f"reps={doc['reps']}"
    )
    stats = doc["lambda_stats"]
    yield (
        "lambda: "
        f"min_mean={_f12(stats['lambda_min']['mean'])} "
        f"avg_mean={_f12(stats['lambda_avg']['mean'])} "
        f"max_mean={_f12(stats['lambda_max']['mean'])} "
        f"degenerate_reps={stats['degenerate_reps']}"
    )
    for row in doc["rows"]:
        yield (
            f"{row['label']}: "
            f"l0={_f12(row['l0_mean'])} (sd {_f12(row['l0_sd'])}) "
            f"discordance={_f12(row['discordance_mean'])} "
            f"(sd {_f12(row['discordance_sd'])})"
        )


def _render_certify(doc: dict):
    yield f"lambda: {_f12(doc['lambda'])}"
    yield f"pairs: {doc['pairs']}"
    yield f"ok: {'yes' if doc['ok'] else 'no'}"
    for failure in doc["failures"]:
        yield f"failure: {failure}"


def _cmd_fit(args) -> int:
    loaded = _load(args.input)
    payload = {
        "matrix": loaded.data.x.tolist(),
        "lambda": args.lam,
        "zero_tol": args.tol,
        "threads": args.threads,
    }
    doc = _post(args, "/fit", payload)
    _emit(doc, args, _render_fit)
    return EXIT_OK


def _cmd_path(args) -> int:
    loaded = _load(args.input)
    payload = {
        "matrix": loaded.data.x.tolist(),
        "fingerprint": loaded.fingerprint,
        "per_coordinate": args.per_coordinate,
        "threads": args.threads,
    }
    doc = _post(args, "/path", payload)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                json.dump(doc, fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise _CliFailure(EXIT_IO, f"cannot write {args.output}: {exc}")
    _emit(doc, args, _render_path)
    return EXIT_OK


def _cmd_simulate(args) -> int:
    try:
        SimConfig(
            n=args.n,
            m=args.m,
            nc=args.nc,
            mc=args.mc,
            noise_scale=args.noise_scale,
            outlier_scale=args.outlier_scale,
            seed=args.seed,
        )
    except ContractError as exc:
        raise _CliFailure(EXIT_VALIDATION, str(exc))
    payload = {
        "n": args.n,
        "m": args.m,
        "nc": args.nc,
        "mc": args.mc,
        "noise_scale": args.noise_scale,
        "outlier_scale": args.outlier_scale,
        "seed": args.seed,
        "reps": args.reps,
        "zero_tol": args.tol,
        "threads": args.threads,
    }
    doc = _post(args, "/simulate", payload)
    _emit(doc, args, _render_simulate)
    return EXIT_OK


def _cmd_certify(args) -> int:
    loaded = _load(args.input)
    payload = {
        "matrix": loaded.data.x.tolist(),
        "lambda": args.lam,
        "corrupt": args.selftest_corrupt,
    }
    doc = _post(args, "/certify", payload)
    _emit(doc, args, _render_certify)
    return EXIT_OK if doc["ok"] else EXIT_CERTIFY


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port)
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, tol: bool = True) -> None:
    p.add_argument(
        "--format", choices=("text", "json"), default="text", help="output format"
    )
    p.add_argument(
        "--threads", type=int, default=1, help="worker threads (best effort)"
    )
    p.add_argument(
        "--server",
        default=None,
        help="base URL of a running server (default: run in-process)",
    )
    if tol:
        p.add_argument(
            "--tol",
            type=float,
            default=1e-12,
            help="zero threshold for coefficient counts",
        )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="l1line", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="best line at one penalty")
    p_fit.add_argument("input", help="CSV file of points, one per row")
    p_fit.add_argument(
        "--lambda", dest="lam", type=float, required=True, help="penalty value"
    )
    _add_common(p_fit)
    p_fit.set_defaults(func=_cmd_fit)

    p_path = sub.add_parser("path", help="full penalty path")
    p_path.add_argument("input", help="CSV file of points, one per row")
    p_path.add_argument(
        "--per-coordinate",
        action="store_true",
        help="include each preserved coordinate's own sweep",
    )
    p_path.add_argument("--output", default=None, help="also write JSON to a file")
    _add_common(p_path, tol=False)
    p_path.set_defaults(func=_cmd_path)

    p_sim = sub.add_parser("simulate", help="robustness study on synthetic data")
    p_sim.add_argument("--n", type=int, required=True, help="points per draw")
    p_sim.add_argument("--m", type=int, required=True, help="coordinates")
    p_sim.add_argument("--nc", type=int, default=0, help="contaminated points")
    p_sim.add_argument(
        "--mc", type=int, default=0, help="contaminated coordinates per point"
    )
    p_sim.add_argument("--noise-scale", type=float, default=1.0)
    p_sim.add_argument(
        "--outlier-scale",
        type=float,
        default=None,
        help="default: 50x noise scale",
    )
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--reps", type=int, default=1, help="replications")
    _add_common(p_sim)
    p_sim.set_defaults(func=_cmd_simulate)

    p_cert = sub.add_parser(
        "certify", help="validate optimality certificates for every pair"
    )
    p_cert.add_argument("input", help="CSV file of points, one per row")
    p_cert.add_argument(
        "--lambda", dest="lam", type=float, required=True, help="penalty value"
    )
    p_cert.add_argument(
        "--selftest-corrupt",
        action="store_true",
        help="tamper with one certificate first; a working checker must then fail",
    )
    _add_common(p_cert, tol=False)
    p_cert.set_defaults(func=_cmd_certify)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _CliFailure as failure:
        print(f"l1line: {failure.message}", file=sys.stderr)
        return failure.code


if __name__ == "__main__":
    sys.exit(main())
