"""Command-line front end.

Subcommands: features, synth, copy, complexity, dump, bench.  Log level is
taken from the LPCNET_LOG environment variable (DEBUG/INFO/WARNING/...).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from . import io as lpcio
from .dsp import features_from_audio
from .errors import LpcnetError
from .model import complexity_gflops, describe_tensors, load_model
from .sampler import DEFAULT_FLOOR, SamplerConfig
from .synth import bench, copy_synthesis_file, synthesize

OVERHEAD_GFLOPS = 0.5  # biases, conditioning network, activations, ...


def _add_sampler_flags(sub):
    sub.add_argument("--seed", type=int, default=0, help="sampling RNG seed")
    sub.add_argument("--temp-scale", type=float, default=1.0,
                     help="scale on the pitch-driven sharpening exponent")
    sub.add_argument("--floor", type=float, default=DEFAULT_FLOOR,
                     help="probability floor threshold")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lpcnet",
        description="Streaming neural vocoder with a linear-prediction front end",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="extract features from a WAV file")
    p.add_argument("wav_in")
    p.add_argument("features_out")

    p = sub.add_parser("synth", help="synthesize audio from a feature file")
    p.add_argument("weights")
    p.add_argument("features_in")
    p.add_argument("wav_out")
    _add_sampler_flags(p)

    p = sub.add_parser("copy", help="analyze a WAV file and re-synthesize it")
    p.add_argument("weights")
    p.add_argument("wav_in")
    p.add_argument("wav_out")
    _add_sampler_flags(p)

    p = sub.add_parser("complexity", help="print the synthesis cost model")
    p.add_argument("--na", type=int, default=384)
    p.add_argument("--nb", type=int, default=16)
    p.add_argument("--q", type=int, default=256)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--rate", type=int, default=16000)

    p = sub.add_parser("dump", help="list tensors in a weight file")
    p.add_argument("weights")

    p = sub.add_parser("bench", help="measure synthesis throughput")
    p.add_argument("weights")
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--warmup", type=int, default=100)
    p.add_argument("--runs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _sampler_config(args) -> SamplerConfig:
    return SamplerConfig(floor=args.floor, temp_scale=args.temp_scale,
                         seed=args.seed)


def run(args) -> int:
    if args.command == "features":
        audio = lpcio.read_wav(args.wav_in)
        lpcio.write_features(args.features_out, features_from_audio(audio))
        return 0

    if args.command == "synth":
        model = load_model(args.weights)
        feats = lpcio.read_features(args.features_in)
        audio = synthesize(model, feats, _sampler_config(args))
        lpcio.write_wav(args.wav_out, audio)
        return 0

    if args.command == "copy":
        model = load_model(args.weights)
        copy_synthesis_file(model, args.wav_in, args.wav_out,
                            _sampler_config(args))
        return 0

    if args.command == "complexity":
        c = complexity_gflops(args.na, args.nb, args.q, args.density, args.rate)
        print(f"network: {c:.3f} GFLOPS (N_A={args.na}, N_B={args.nb}, "
              f"Q={args.q}, d={args.density}, F_s={args.rate})")
        print(f"total with ~{OVERHEAD_GFLOPS} GFLOPS overhead (biases, "
              f"conditioning network, activations): {c + OVERHEAD_GFLOPS:.1f} "
              f"GFLOPS")
        return 0

    if args.command == "dump":
        for rec in describe_tensors(args.weights):
            shape = "x".join(str(d) for d in rec["shape"])
            if rec["kind"] == "block-sparse":
                print(f"{rec['name']}  block-sparse {shape}  "
                      f"blocks={rec['blocks']}  density={rec['density']:.3f}")
            else:
                print(f"{rec['name']}  dense {shape}")
        return 0

    if args.command == "bench":
        model = load_model(args.weights)
        report = bench(model, frames=args.frames, warmup=args.warmup,
                       runs=args.runs, seed=args.seed)
        print(report)
        formula = complexity_gflops(model.n_a, model.n_b, density=0.1) * 1e9 / 16000
        print(f"flops/sample (cost model at d=0.1): {formula:.0f}")
        return 0

    raise AssertionError(f"unhandled command {args.command}")


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("LPCNET_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return run(args)
    except (LpcnetError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
