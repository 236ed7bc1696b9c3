"""Trainer command line.

    python -m lpcnet_trainer train --corpus DIR --out weights.bin \
        [--log train_log.json] [--epochs N] [--batch-size N] ...
    python -m lpcnet_trainer make-corpus --out DIR --minutes M [--seed S]
"""

from __future__ import annotations

import argparse
import sys

from .corpus import generate_corpus
from .data import build_dataset
from .export import export_model
from .net import VocoderModel
from .train import TrainingConfig, train


def build_parser():
    parser = argparse.ArgumentParser(prog="lpcnet_trainer")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train on a WAV corpus and export")
    p.add_argument("--corpus", required=True, help="directory of 16 kHz WAVs")
    p.add_argument("--out", required=True, help="engine weight file to write")
    p.add_argument("--log", default=None, help="JSON training log path")
    p.add_argument("--epochs", type=int, default=20)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--seq-frames", type=int, default=15)
    p.add_argument("--na", type=int, default=384)
    p.add_argument("--nb", type=int, default=16)
    p.add_argument("--embed-dim", type=int, default=128)
    p.add_argument("--density", type=float, default=0.1)
    p.add_argument("--noise-max", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("make-corpus", help="generate a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--minutes", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "make-corpus":
        paths = generate_corpus(args.out, minutes=args.minutes, seed=args.seed)
        print(f"wrote {len(paths)} files under {args.out}")
        return 0

    config = TrainingConfig(
        epochs=args.epochs, batch_size=args.batch_size,
        seq_frames=args.seq_frames, n_a=args.na, n_b=args.nb,
        d_embed=args.embed_dim, target_density=args.density,
        noise_max=args.noise_max, seed=args.seed,
    )
    print("building dataset...")
    sequences = build_dataset(args.corpus, seq_frames=config.seq_frames,
                              noise_max=config.noise_max, seed=config.seed)
    print(f"{len(sequences)} sequences")
    model = VocoderModel(n_a=config.n_a, n_b=config.n_b,
                         d_embed=config.d_embed)

    def progress(epoch, update, loss):
        if update % 25 == 0:
            print(f"epoch {epoch} update {update} loss {loss:.4f}")

    log = train(model, sequences, config, log_path=args.log,
                progress=progress)
    export_model(model, args.out)
    print(f"final density {log['final_density']:.4f}; wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
