"""``binshare`` command line: split, combine, verify, bench.

Share file layout (little-endian)::

    magic "BSS1" | u8 version | u8 scheme | u32 N | u32 t | u32 r | u32 ell
    | u64 block_count | u32 player_index | 32-byte params hash
    | ceil(block_count / 8) bytes: bit i = this player's symbol in block i

The params file is the scheme parameter record plus a ``split`` section (input
length, public control seed) and a final ``sha256 = ...`` line over everything
above it.  The header's params hash is that digest.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import random
import secrets
import struct
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import (
    all_sets,
    default_pairs,
    erasure_patterns_for,
    exact_privacy_report,
    extractor_pairwise_check,
    mc_view_distance,
    rate_bound_check,
    reconstruction_report,
    shipped_strategies,
)
from .bitlinalg import BitVector
from .errors import CertificationUnavailable, ParameterError, RateBoundViolation
from .extractors import Certificate, certify_almost_perfect, certify_seeded_on_affine
from .saecc import decode_coset, draw_trace, encode_with_trace
from .sss import (
    SCHEMES,
    SchemeParams,
    combine_blocks,
    derive_params,
    encoder_message,
    frame_blocks,
    reconstruct_secret,
    secret_of_message,
    share_blocks,
    share_secret,
    unframe_blocks,
)

MAGIC = b"BSS1"
FORMAT_VERSION = 1
HEADER = struct.Struct("<4sBBIIIIQI32s")
PARAMS_NAME = "params.txt"
THREADS_ENV = "BINSHARE_THREADS"
CHUNK = 256
RATE_GRID = range(10, 14)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RECONSTRUCT = 3


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# params file


@dataclass(frozen=True)
class SplitRecord:
    params: SchemeParams
    input_bits: int = 0
    control_seed: int = 0

    def body(self) -> str:
        return (
            self.params.to_text()
            + f"split.input_bits = {self.input_bits}\n"
            + f"split.control_seed = {self.control_seed:#x}\n"
        )

    def digest(self) -> bytes:
        return hashlib.sha256(self.body().encode()).digest()

    def to_text(self) -> str:
        return self.body() + f"sha256 = {self.digest().hex()}\n"


def parse_params_file(text: str) -> SplitRecord:
    """Check the self-hash, then parse; any mismatch is a usage error."""
    lines = text.splitlines(keepends=True)
    if not lines or not lines[-1].startswith("sha256 = "):
        raise CliError("params file has no sha256 line")
    body = "".join(lines[:-1])
    claimed = lines[-1].split(" = ", 1)[1].strip()
    if hashlib.sha256(body.encode()).hexdigest() != claimed:
        raise CliError("params file hash mismatch: file is corrupted or edited")
    scheme_lines, extra = [], {}
    for ln in body.splitlines():
        if ln.startswith("split."):
            key, _, value = ln.partition(" = ")
            extra[key] = value
        else:
            scheme_lines.append(ln)
    try:
        params = SchemeParams.from_text("\n".join(scheme_lines))
    except (ParameterError, KeyError, ValueError) as exc:
        raise CliError(f"malformed params file: {exc}") from None
    return SplitRecord(
        params,
        int(extra.get("split.input_bits", "0")),
        int(extra.get("split.control_seed", "0"), 0),
    )


def load_params(path: Path) -> SplitRecord:
    try:
        return parse_params_file(path.read_text())
    except OSError as exc:
        raise CliError(f"cannot read params file: {exc}") from None


# ---------------------------------------------------------------------------
# share files


@dataclass(frozen=True)
class ShareFileHeader:
    version: int
    scheme: int
    N: int
    t: int
    r: int
    ell: int
    block_count: int
    player_index: int
    params_hash: bytes

    def pack(self) -> bytes:
        return HEADER.pack(
            MAGIC, self.version, self.scheme, self.N, self.t, self.r, self.ell,
            self.block_count, self.player_index, self.params_hash,
        )

    @classmethod
    def unpack(cls, data: bytes) -> "ShareFileHeader":
        if len(data) < HEADER.size:
            raise CliError("share file shorter than its header")
        magic, *fields = HEADER.unpack_from(data)
        if magic != MAGIC:
            raise CliError("not a share file (bad magic)")
        head = cls(*fields)
        if head.version != FORMAT_VERSION:
            raise CliError(f"unsupported share file version {head.version}")
        return head

    def shared_fields(self) -> tuple:
        return (self.version, self.scheme, self.N, self.t, self.r, self.ell, self.block_count, self.params_hash)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def _share_chunk(args) -> np.ndarray:
    text, blocks, sharing_seed, control_seed, start = args
    params = parse_params_file(text).params
    return share_blocks(params, blocks, sharing_seed, control_seed, start)


def _combine_chunk(args) -> list:
    text, rows, control_seed, start = args
    params = parse_params_file(text).params
    return combine_blocks(params, rows, control_seed, start)


def _chunked(items, size):
    for start in range(0, len(items), size):
        yield start, items[start:start + size]


def _map_chunks(fn, jobs):
    if _threads() > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=_threads()) as pool:
            return list(pool.map(fn, jobs))
    return [fn(job) for job in jobs]


def split_bytes(data: bytes, record: SplitRecord, sharing_seed: int | None) -> list[bytes]:
    """Share files (header plus packed bits) for every player, in player order."""
    params = record.params
    blocks = frame_blocks(data, params.ell)
    text = record.to_text()
    jobs = [(text, chunk, sharing_seed, record.control_seed, start) for start, chunk in _chunked(blocks, CHUNK)]
    parts = _map_chunks(_share_chunk, jobs)
    matrix = np.concatenate(parts) if parts else np.zeros((0, params.N), dtype=np.uint8)
    digest = record.digest()
    files = []
    for player in range(params.N):
        head = ShareFileHeader(
            FORMAT_VERSION, SCHEMES.index(params.scheme), params.N, params.t, params.r,
            params.ell, len(blocks), player, digest,
        )
        bits = np.packbits(matrix[:, player], bitorder="little").tobytes()
        files.append(head.pack() + bits)
    return files


def combine_files(shares: list[bytes], record: SplitRecord) -> tuple[bytes | None, list[int]]:
    """Reconstructed bytes and the failed block indices (bytes is ``None`` on any failure)."""
    params = record.params
    heads = [ShareFileHeader.unpack(s) for s in shares]
    if not heads:
        raise CliError(f"need r={params.r} shares, got 0")
    first = heads[0]
    if any(h.shared_fields() != first.shared_fields() for h in heads):
        raise CliError("share headers disagree: files come from different splits")
    if first.params_hash != record.digest():
        raise CliError("share files were not produced with this params file")
    players = [h.player_index for h in heads]
    if len(set(players)) != len(players) or any(not 0 <= p < params.N for p in players):
        raise CliError("duplicate or out-of-range player index")
    if len(players) < params.r:
        raise CliError(f"need r={params.r} shares, got {len(players)}")
    blocks = first.block_count
    received = np.full((blocks, params.N), -1, dtype=np.int8)
    need = (blocks + 7) // 8
    for head, data in zip(heads, shares):
        payload = data[HEADER.size:]
        if len(payload) != need:
            raise CliError(f"share file for player {head.player_index} is truncated")
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8), bitorder="little")[:blocks]
        received[:, head.player_index] = bits
    text = record.to_text()
    jobs = [(text, chunk, record.control_seed, start) for start, chunk in _chunked(received, CHUNK)]
    secrets_out = [s for part in _map_chunks(_combine_chunk, jobs) for s in part]
    failed = [i for i, s in enumerate(secrets_out) if s is None]
    if failed:
        return None, failed
    return unframe_blocks(secrets_out, params.ell, record.input_bits), []


# ---------------------------------------------------------------------------
# commands


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def cmd_split(args) -> int:
    data = Path(args.input).read_bytes()
    if args.params:
        params = load_params(Path(args.params)).params
    else:
        try:
            extra = {}
            if args.target_delta is not None:
                # enough trials that a clean run certifies the target at 99%
                extra = {"target_delta": args.target_delta, "trials": max(20_000, math.ceil(10 / args.target_delta))}
            params = derive_params(
                args.N, args.tau, args.rho, args.scheme, mode=args.mode, xi=args.xi, certify=not args.no_certify, **extra
            )
        except ParameterError as exc:
            raise CliError(f"cannot derive parameters: {exc}") from None
    if args.seed is None:
        sharing_seed, control_seed = None, secrets.randbits(128)
    else:
        sharing_seed = args.seed
        control_seed = int.from_bytes(hashlib.sha256(f"control/{args.seed}".encode()).digest()[:16], "little")
    record = SplitRecord(params, 8 * len(data), control_seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / PARAMS_NAME).write_text(record.to_text())
    files = split_bytes(data, record, sharing_seed)
    width = max(3, len(str(params.N - 1)))
    for i, blob in enumerate(files):
        (out / f"share_{i:0{width}d}.bss").write_bytes(blob)
    print(
        f"split {len(data)} bytes into {len(frame_blocks(data, params.ell))} blocks of {params.ell} bits "
        f"for N={params.N} players (t={params.t}, r={params.r}) in {out}"
    )
    return EXIT_OK


def _share_paths(inputs: list[str]) -> list[Path]:
    paths: list[Path] = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.bss")))
        else:
            paths.append(p)
    return paths


def cmd_combine(args) -> int:
    paths = _share_paths(args.shares)
    if args.params:
        params_path = Path(args.params)
    else:
        dirs = {p.parent for p in paths}
        if len(dirs) != 1:
            raise CliError("pass --params when shares come from several directories")
        params_path = dirs.pop() / PARAMS_NAME
    record = load_params(params_path)
    shares = [p.read_bytes() for p in paths]
    data, failed = combine_files(shares, record)
    if failed:
        shown = ", ".join(str(i) for i in failed[:50])
        more = "" if len(failed) <= 50 else f" (+{len(failed) - 50} more)"
        print(f"reconstruction failed for {len(failed)} block(s): {shown}{more}", file=sys.stderr)
        return EXIT_RECONSTRUCT
    Path(args.output).write_bytes(data)
    print(f"reconstructed {len(data)} bytes from {len(shares)} shares")
    return EXIT_OK


SUITES = ("privacy-exact", "privacy-mc", "reconstruction", "rate", "lemma-checks")


def run_suites(params: SchemeParams, suites, seed: int = 0, rcs: int = 32) -> tuple[bool, str]:
    """Run the selected suites; guard-exceeded suites are reported as skipped, not failed."""
    rng = random.Random(seed)
    lines = ["binshare-verify-report 1", f"params = {params.fingerprint()}"]
    ok = True

    def outcome(name: str, passed: bool | None, body: str) -> None:
        nonlocal ok
        status = "skipped" if passed is None else ("pass" if passed else "fail")
        if passed is False:
            ok = False
        lines.append(f"[suite {name}] {status}")
        lines.extend("  " + ln for ln in body.rstrip("\n").splitlines())

    for suite in suites:
        try:
            if suite == "privacy-exact":
                if params.eps_budget is None:
                    outcome(suite, None, "no certified privacy budget")
                    continue
                traces = [draw_trace(params.ecc, rng) for _ in range(rcs)]
                targets = all_sets(params.N, params.t) if params.scheme == "nonadaptive" else shipped_strategies(params.t)
                rep = exact_privacy_report(params, targets, default_pairs(params.ell, 20, rng), traces)
                outcome(suite, rep.passed, rep.to_text())
            elif suite == "privacy-mc":
                s0 = BitVector(params.ell, 0)
                s1 = BitVector(params.ell, (1 << params.ell) - 1)
                body = []
                passed = True
                for strat in shipped_strategies(params.t):
                    est, hw = mc_view_distance(params, s0, s1, strat, 1000, rng)
                    body.append(f"{strat.name} estimate={est:.6g} half_width={hw:.6g}")
                    if params.eps_budget is not None and est - hw > params.eps_budget:
                        passed = False
                outcome(suite, passed if params.eps_budget is not None else None, "\n".join(body))
            elif suite == "reconstruction":
                patterns = erasure_patterns_for(params, rng)
                rep = reconstruction_report(params, patterns, 20 if params.N <= 16 else 2, rng)
                outcome(suite, rep.passed, rep.to_text())
            elif suite == "rate":
                # small N is dominated by rounding, so the trend is checked on a fixed large grid
                here = rate_bound_check([params], require_monotone=False)
                plist = [
                    derive_params(1 << e, params.tau, params.rho, params.scheme, xi=params.xi, measure=False, certify=False)
                    for e in RATE_GRID
                ]
                rep = rate_bound_check(plist)
                outcome(suite, True, here.to_text() + rep.to_text())
            elif suite == "lemma-checks":
                outcome(suite, *_lemma_checks(params))
            else:
                raise CliError(f"unknown suite {suite!r}")
        except (CertificationUnavailable, ParameterError) as exc:
            outcome(suite, None, f"guard: {exc}")
        except RateBoundViolation as exc:
            outcome(suite, False, str(exc))
    lines.append(f"result = {'pass' if ok else 'fail'}")
    return ok, "\n".join(lines) + "\n"


def _lemma_checks(params: SchemeParams) -> tuple[bool | None, str]:
    body = []
    passed = True
    for text in params.certificates:
        cert = Certificate.from_text(text)
        if cert.extractor_id == "seeded":
            again = certify_seeded_on_affine(params.seeded, cert.k)
            hash_ok = cert.construction_hash == params.seeded.construction_hash()
        else:
            again = certify_almost_perfect(params.lifted, cert.k)
            hash_ok = cert.construction_hash == params.lifted.construction_hash()
        same = again == cert.eps and hash_ok
        passed &= same
        body.append(f"certificate {cert.extractor_id} k={cert.k} eps={cert.eps} reproduced={'yes' if same else 'no'}")
    if params.scheme == "nonadaptive" and params.eps_certified is not None:
        sd = extractor_pairwise_check(params.seeded, params.entropy_k)
        ok = sd <= 8 * params.eps_certified
        passed &= ok
        body.append(f"pairwise max_sd={sd} bound={8 * params.eps_certified} ok={'yes' if ok else 'no'}")
    if not body:
        return None, "no certificates to check"
    return passed, "\n".join(body)


def cmd_verify(args) -> int:
    record = load_params(Path(args.params))
    suites = args.suite or list(SUITES)
    ok, text = run_suites(record.params, suites, seed=args.seed)
    if args.report:
        Path(args.report).write_text(text)
    print(text, end="")
    return EXIT_OK if ok else 1


def bench(params: SchemeParams, seconds: float = 1.0, seed: int = 0) -> dict:
    """Throughput in bits per second for the main operations; each runs for about ``seconds``."""
    rng = random.Random(seed)
    s = BitVector(params.ell, rng.getrandbits(params.ell))
    share = share_secret(params, s, rng)
    msg = encoder_message(params, s.bits, rng)
    trace = draw_trace(params.ecc, rng)
    word = encode_with_trace(params.ecc, msg, trace)
    received = np.unpackbits(np.frombuffer(word.to_bytes((params.N + 7) // 8, "little"), dtype=np.uint8),
                             bitorder="little")[:params.N].astype(np.int8)

    def timed(fn, bits: int) -> float:
        count, start = 0, time.perf_counter()
        while True:
            fn()
            count += 1
            elapsed = time.perf_counter() - start
            if elapsed >= seconds:
                return count * bits / elapsed

    def ext_forward():
        return secret_of_message(params, msg)

    results = {
        "share": timed(lambda: share_secret(params, s, rng), params.ell),
        "reconstruct": timed(lambda: reconstruct_secret(params, share), params.ell),
        "sa_encode": timed(lambda: encode_with_trace(params.ecc, msg, trace), params.msg_len),
        "sa_decode": timed(lambda: decode_coset(params.ecc, received, trace.control), params.msg_len),
        "extractor_forward": timed(ext_forward, params.ell),
        "extractor_invert": timed(lambda: encoder_message(params, s.bits, rng), params.ell),
    }
    return {"params": params.fingerprint(), "N": params.N, "ell": params.ell, "bits_per_second": results}


def cmd_bench(args) -> int:
    record = load_params(Path(args.params))
    print(json.dumps(bench(record.params, args.seconds), indent=2, sort_keys=True))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="binshare", description="Binary ramp secret sharing.")
    parser.add_argument("--version", action="version", version=f"binshare {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("split", help="share a file among N players")
    sp.add_argument("input")
    sp.add_argument("out_dir")
    sp.add_argument("-N", type=int, default=64)
    sp.add_argument("--tau", type=_fraction, default=Fraction(1, 4))
    sp.add_argument("--rho", type=_fraction, default=Fraction(3, 4))
    sp.add_argument("--scheme", choices=SCHEMES, default="nonadaptive")
    sp.add_argument("--mode", choices=("reference", "inband"), default="reference")
    sp.add_argument("--xi", type=_fraction, default=None, help="encoder slack (default: grid search)")
    sp.add_argument("--target-delta", type=_fraction, default=None, help="per-block failure target (default 1/100)")
    sp.add_argument("--seed", type=int, default=None, help="deterministic sharing randomness")
    sp.add_argument("--params", default=None, help="reuse a params file instead of deriving")
    sp.add_argument("--no-certify", action="store_true", help="skip extractor certification")
    sp.set_defaults(func=cmd_split)

    cp = sub.add_parser("combine", help="reconstruct a file from surviving shares")
    cp.add_argument("shares", nargs="+", help="share files or directories")
    cp.add_argument("-o", "--output", required=True)
    cp.add_argument("--params", default=None)
    cp.set_defaults(func=cmd_combine)

    vp = sub.add_parser("verify", help="run verification suites against a params file")
    vp.add_argument("params")
    vp.add_argument("--suite", action="append", choices=SUITES)
    vp.add_argument("--report", default=None)
    vp.add_argument("--seed", type=int, default=0)
    vp.set_defaults(func=cmd_verify)

    bp = sub.add_parser("bench", help="time the main operations")
    bp.add_argument("params")
    bp.add_argument("--seconds", type=float, default=1.0)
    bp.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except ParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
