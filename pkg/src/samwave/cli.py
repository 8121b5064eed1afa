"""Command-line entry point: ``samwave <command> [options]``.

Exit codes: 0 success, 1 validation or runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from . import config as runconfig

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CommandError(Exception):
    """Expected failure reported to the user with exit code 1."""


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("SAMWAVE_THREADS", "1")))
    except ValueError:
        raise CommandError("SAMWAVE_THREADS must be a positive integer") from None


def _write_meta(out, argv, cfg, seed, started) -> None:
    out = Path(out)
    meta = {
        "command_line": ["samwave", *argv],
        "config": cfg,
        "seed": seed,
        "duration_seconds": round(time.perf_counter() - started, 3),
        "version": __version__,
    }
    meta_path = out.parent / (out.name.rstrip("/") + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")


def _write_json(path, obj) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=float) + "\n")


def _require(path, what="file") -> Path:
    p = Path(path)
    if not p.exists():
        raise CommandError(f"{what} not found: {p}")
    return p


# datasets -------------------------------------------------------------------


def _dataset(cfg: dict, role: str):
    from .synthdata import generate, load_dataset

    d = cfg["data"]
    if role in ("train", "test") and d[role]:
        return load_dataset(_require(d[role], f"{role} dataset"))
    if role == "train":
        return generate(d["task"], d["seed"], d["n_train"], d["size"])
    if role == "test":
        return generate(d["task"], d["test_seed"], d["n_test"], d["size"])
    if role == "source":
        return generate(d["source_task"], d["source_seed"], d["n_source"], d["size"])
    return generate(d["source_task"], d["source_test_seed"], d["n_source_test"], d["size"])


def _encoder_for(args, cfg):
    from .model import load_encoder, pretrain_encoder

    if getattr(args, "encoder", None):
        return load_encoder(_require(args.encoder, "encoder checkpoint"))
    res = pretrain_encoder(_dataset(cfg, "source"), runconfig.encoder_config(cfg),
                           runconfig.train_config(cfg, "pretrain"))
    return res.encoder


# commands -------------------------------------------------------------------


def cmd_wavelet(args, argv):
    from . import cwt, wavelets
    from .ndtensor import wvt1
    from .synthdata.io import load_image, save_image

    started = time.perf_counter()
    if args.action == "info" and args.wavelet.strip().lower() in cwt.ALIASES:
        fs = cwt.dtcwt_filters(args.wavelet)
        print(json.dumps({k: v if isinstance(v, str) else np.asarray(v).tolist()
                          for k, v in vars(fs).items()}, indent=2))
        return EXIT_OK
    if args.action == "info":
        bank = wavelets.filter_bank(args.wavelet)
        info = {"name": bank.name, "dec_lo": bank.dec_lo.tolist(), "dec_hi": bank.dec_hi.tolist(),
                "rec_lo": bank.rec_lo.tolist(), "rec_hi": bank.rec_hi.tolist(),
                "qmf_defects": wavelets.check_bank(bank)}
        print(json.dumps(info, indent=2))
        return EXIT_OK
    if not args.inp or not args.out:
        raise CommandError(f"wavelet {args.action} needs --in and --out")
    is_complex = args.complex or args.wavelet.strip().lower() in cwt.ALIASES
    if is_complex:
        if args.action != "decompose":
            raise CommandError("complex subbands have no inverse transform; reconstruct needs a real wavelet")
        return _decompose_complex(args, argv, started)
    if args.action == "decompose":
        img = load_image(_require(args.inp))
        sub = wavelets.dwt2(img, args.wavelet)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        for band in wavelets.SUBBANDS:
            wvt1.save(out / f"{band}.wvt1", sub[band])
        (out / "subbands.json").write_text(json.dumps(
            {"wavelet": sub.bank_name, "source_shape": list(sub.source_shape)}, indent=2) + "\n")
    else:
        src = _require(args.inp, "subband directory")
        info = json.loads(_require(src / "subbands.json").read_text())
        if wavelets.canonical_name(args.wavelet) != info["wavelet"] and args.wavelet_given:
            raise CommandError(f"subbands were produced with {info['wavelet']}, not {args.wavelet}")
        bands = {b: wvt1.load(_require(src / f"{b}.wvt1")) for b in wavelets.SUBBANDS}
        sub = wavelets.SubbandSet(**bands, source_shape=tuple(info["source_shape"]),
                                  bank_name=info["wavelet"])
        img = wavelets.iwt2(sub, info["wavelet"])
        save_image(args.out, np.clip(img, 0.0, 1.0))
    _write_meta(args.out, argv, {"action": args.action, "wavelet": args.wavelet}, None, started)
    return EXIT_OK


def _decompose_complex(args, argv, started):
    from . import cwt
    from .ndtensor import wvt1
    from .synthdata.io import load_image

    sub = cwt.dtcwt2_level1(load_image(_require(args.inp)), cwt.canonical_name(args.wavelet))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for angle, z in zip(cwt.ORIENTATIONS, sub.oriented):
        for part, values in (("re", z.real), ("im", z.imag)):
            name = f"o{angle:+d}.{part}.wvt1"
            wvt1.save(out / name, values)
            files.append(name)
    (out / "subbands.json").write_text(json.dumps(
        {"wavelet": sub.filter_name, "source_shape": list(sub.source_shape),
         "orientations": list(cwt.ORIENTATIONS), "files": files}, indent=2) + "\n")
    _write_meta(args.out, argv, {"action": "decompose", "wavelet": sub.filter_name, "complex": True},
                None, started)
    return EXIT_OK


def cmd_whf(args, argv):
    from .freqfeat import whf_extract
    from .ndtensor import wvt1
    from .synthdata.io import load_image

    started = time.perf_counter()
    m = whf_extract(load_image(_require(args.inp)), args.wavelet)
    values = np.stack([m.values.real, m.values.imag], axis=-1) if m.is_complex else m.values
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    wvt1.save(args.out, values)
    _write_meta(args.out, argv, {"wavelet": m.wavelet_name, "is_complex": m.is_complex,
                                 "layout": "H x W x C x (re, im)" if m.is_complex else "H x W x C"},
                None, started)
    return EXIT_OK


def cmd_synth(args, argv):
    from .synthdata import generate, save_dataset

    started = time.perf_counter()
    ds = generate(args.task, args.seed, args.n, args.size)
    save_dataset(ds, args.out)
    _write_meta(args.out, argv, {"task": args.task, "n": args.n, "size": args.size}, args.seed, started)
    return EXIT_OK


def cmd_pretrain(args, argv):
    from .model import pretrain_encoder, save_encoder

    started = time.perf_counter()
    cfg = runconfig.load(args.config)
    res = pretrain_encoder(_dataset(cfg, "source"), runconfig.encoder_config(cfg),
                           runconfig.train_config(cfg, "pretrain"), holdout=_dataset(cfg, "source_test"))
    save_encoder(res.encoder, args.out)
    print(json.dumps({"source_miou": res.source_metrics["miou"]}))
    _write_meta(args.out, argv, cfg, cfg["pretrain"]["seed"], started)
    return EXIT_OK


def cmd_adapt(args, argv):
    from .model import adapt_train, save_model

    started = time.perf_counter()
    cfg = runconfig.load(args.config)
    encoder = _encoder_for(args, cfg)
    rows = []
    log_fh = open(args.log, "w") if args.log else None
    try:
        def log_fn(row):
            rows.append(row)
            if log_fh:
                log_fh.write(json.dumps(row) + "\n")

        res = adapt_train(_dataset(cfg, "train"), encoder, runconfig.train_config(cfg), log_fn)
    finally:
        if log_fh:
            log_fh.close()
    save_model(res.model, args.out)
    _write_meta(args.out, argv, cfg, cfg["train"]["seed"], started)
    if args.log:
        _write_meta(args.log, argv, cfg, cfg["train"]["seed"], started)
    return EXIT_OK


def _predict_parallel(model, images, threads: int) -> np.ndarray:
    from .model import predict_mask

    if threads <= 1 or len(images) < 2:
        return predict_mask(images, model)
    chunks = np.array_split(np.arange(len(images)), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda idx: predict_mask(images[idx], model), [c for c in chunks if len(c)]))
    return np.concatenate(parts)


def cmd_eval(args, argv):
    from .model import load_model
    from .objectives import MetricsReport
    from .synthdata import load_dataset

    started = time.perf_counter()
    model = load_model(_require(args.model, "model checkpoint"))
    ds = load_dataset(_require(args.data, "dataset"))
    probs = _predict_parallel(model, ds.images, _threads())
    report = MetricsReport(config={"model": str(args.model), "train": model.config.to_dict()},
                           seed=model.config.seed)
    report.add(ds.task, probs, ds.gts)
    Path(args.report).parent.mkdir(parents=True, exist_ok=True)
    report.to_json(args.report)
    print(json.dumps(report.datasets[0], default=float))
    _write_meta(args.report, argv, report.config, model.config.seed, started)
    return EXIT_OK


def cmd_freq(args, argv):
    from .experiments import freq_analysis

    started = time.perf_counter()
    cfg = runconfig.load(args.config)
    encoder = _encoder_for(args, cfg)
    result = freq_analysis(_dataset(cfg, "train"), _dataset(cfg, "test"), encoder,
                           cfg["analysis"]["extractor_a"], cfg["analysis"]["extractor_b"],
                           runconfig.train_config(cfg), dataset_name=cfg["data"]["task"])
    result["run_config"] = cfg
    _write_json(args.out, result)
    _write_meta(args.out, argv, cfg, cfg["train"]["seed"], started)
    return EXIT_OK


def cmd_ablate(args, argv):
    from .experiments import ablate

    started = time.perf_counter()
    cfg = runconfig.load(args.config)
    encoder = _encoder_for(args, cfg)

    def progress(name, seed, scores):
        print(f"{name:>12s} seed={seed} miou={scores['miou']:.4f}", file=sys.stderr)

    report = ablate(_dataset(cfg, "train"), _dataset(cfg, "test"), encoder, runconfig.train_config(cfg),
                    cfg["ablate"]["wavelet"], tuple(cfg["ablate"]["seeds"]), progress=progress)
    report["run_config"] = cfg
    _write_json(args.out, report)
    _write_meta(args.out, argv, cfg, cfg["ablate"]["seeds"], started)
    return EXIT_OK


def cmd_selftest(args, argv):
    from .selftest import run_all

    failures = run_all(verbose=not args.quiet)
    return EXIT_FAIL if failures else EXIT_OK


# parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="samwave", description="Wavelet high-frequency adapters toolkit.")
    p.add_argument("--version", action="version", version=f"samwave {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    w = sub.add_parser("wavelet", help="single-level 2-D DWT tools")
    w.add_argument("action", choices=["decompose", "reconstruct", "info"],
                   help="decompose an image, reconstruct from subbands, or print a filter bank")
    w.add_argument("--in", dest="inp", help="input PNG (decompose) or subband directory (reconstruct)")
    w.add_argument("--out", help="output subband directory (decompose) or PNG (reconstruct)")
    w.add_argument("--wavelet", "--bank", dest="wavelet", default=None,
                   help="haar, db2, coif2, sym4; sy-a or sy-b with --complex (default haar, or sy-a with --complex)")
    w.add_argument("--complex", action="store_true",
                   help="dual-tree complex transform (sy-a or sy-b): six oriented subbands as .re/.im files")
    w.set_defaults(func=cmd_wavelet)

    h = sub.add_parser("whf", help="write the wavelet high-frequency map of an image")
    h.add_argument("--in", dest="inp", required=True, help="input PNG image")
    h.add_argument("--wavelet", default="haar", help="haar, db2, coif2, sym4, sy-a or sy-b")
    h.add_argument("--out", required=True, help="output WVT1 file (complex maps get a trailing re/im axis)")
    h.set_defaults(func=cmd_whf)

    f = sub.add_parser("freq-analyze", help="controlled comparison of two high-frequency extractors")
    f.add_argument("--config", help="TOML run config ([analysis] picks the extractors)")
    f.add_argument("--encoder", help="pretrained encoder checkpoint (pretrains one when omitted)")
    f.add_argument("--out", required=True, help="output deltas JSON")
    f.set_defaults(func=cmd_freq)

    s = sub.add_parser("synth", help="generate a synthetic dataset directory")
    s.add_argument("--task", required=True, choices=["camouflage", "defocus", "shadow", "blobs"],
                   help="which synthetic task")
    s.add_argument("--seed", type=int, default=0, help="base seed; sample i uses seed + i")
    s.add_argument("--n", type=int, default=250, help="number of samples")
    s.add_argument("--size", type=int, default=64, help="image side length in pixels")
    s.add_argument("--out", required=True, help="output directory")
    s.set_defaults(func=cmd_synth)

    pt = sub.add_parser("pretrain", help="pretrain the encoder on the source task")
    pt.add_argument("--config", help="TOML run config ([encoder], [pretrain], [data])")
    pt.add_argument("--out", required=True, help="output encoder checkpoint directory")
    pt.set_defaults(func=cmd_pretrain)

    a = sub.add_parser("adapt", help="train decoder and adapters on a frozen encoder")
    a.add_argument("--encoder", required=True, help="encoder checkpoint directory")
    a.add_argument("--config", help="TOML run config ([train], [data])")
    a.add_argument("--out", required=True, help="output model checkpoint directory")
    a.add_argument("--log", help="training log (JSON lines: step, epoch, loss, lr)")
    a.set_defaults(func=cmd_adapt)

    e = sub.add_parser("eval", help="score a model checkpoint on a dataset directory")
    e.add_argument("--model", required=True, help="model checkpoint directory")
    e.add_argument("--data", required=True, help="dataset directory with manifest.json")
    e.add_argument("--report", required=True, help="output report JSON")
    e.set_defaults(func=cmd_eval)

    ab = sub.add_parser("ablate", help="subband-selection ablation with a decoder-only baseline")
    ab.add_argument("--config", help="TOML run config ([ablate] picks wavelet and seeds)")
    ab.add_argument("--encoder", help="pretrained encoder checkpoint (pretrains one when omitted)")
    ab.add_argument("--out", required=True, help="output ablation report JSON")
    ab.set_defaults(func=cmd_ablate)

    st = sub.add_parser("selftest", help="run the built-in invariant checks")
    st.add_argument("--quiet", action="store_true", help="print only failures")
    st.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.command == "wavelet":
        args.wavelet_given = args.wavelet is not None
        args.wavelet = args.wavelet or ("sy-a" if args.complex else "haar")
    from .model.checkpoint import CheckpointError
    from .ndtensor import ContractError
    from .ndtensor.wvt1 import WVT1FormatError
    from .synthdata import IntegrityError
    from .wavelets import BankMismatchError, ConfigurationError, ShapeError

    expected = (CommandError, ConfigurationError, ShapeError, BankMismatchError, CheckpointError,
                IntegrityError, WVT1FormatError, ContractError, OSError)
    try:
        return args.func(args, argv)
    except expected as exc:
        print(f"samwave {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
