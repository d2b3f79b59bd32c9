"""Experiment runner: config loading, IDX digit-file ingestion, run
orchestration, and report emission.

Config files are flat TOML key-value pairs (see ExperimentConfig for the
key names); command-line flags override file values, and the IGL_SEED
environment variable overrides the seed list for smoke runs. Example:

    igl run --config exp.toml --algo e2g --env tab2x3 --seed 0,1,2 --out runs/
"""
from __future__ import annotations

import argparse
import json
import math
import os
import struct
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - version-dependent import
    import tomli as tomllib

from . import __version__, analysis, envs
from .baselines import (
    gather_reward_log,
    run_cb,
    run_cb_with_kmeans,
    train_cb_policy,
    train_supervised,
)
from .core import RngStream, RoundEntry, RunRecord, fork_rng
from .e2g import E2GConfig, run_e2g
from .models import GreedyPolicy
from .objective import OptConfig, train_with_restarts

ALGOS = ("sup", "cb", "igl-batch", "e2g", "cb-kmeans")


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: an environment, an algorithm, and a seed list.

    `samples` sizes batch training sets; `rounds` sizes online runs. The
    `cb` algorithm is batch when rounds == 0 and online epoch-greedy
    otherwise. Pool-environment sizes fall back to per-kind defaults when
    the *_per_class fields are None."""

    env: str = "blob"
    algo: str = "igl-batch"
    seeds: tuple[int, ...] = (0,)
    samples: int = 60000
    rounds: int = 0
    out_dir: str | None = None
    # optimizer
    step_size: float = 0.05
    momentum: float = 0.9
    minibatch: int = 128
    epochs: int = 30
    init_scale: float = 0.1
    max_restarts: int = 5
    # online scheduling
    gap: float = 0.2
    complexity: float = 1.0
    warmup_override: int | None = None
    update_every: int = 100
    # pool environments
    context_per_class: int | None = None
    feedback_per_class: int | None = None
    eval_per_class: int | None = None
    shift_radius: int = 0
    mnist_images: str | None = None
    mnist_labels: str | None = None
    mnist_eval_images: str | None = None
    mnist_eval_labels: str | None = None

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ValueError(f"algo must be one of {ALGOS}, got {self.algo!r}")
        if not self.seeds:
            raise ValueError("need at least one seed")
        if self.samples < 0 or self.rounds < 0:
            raise ValueError("samples and rounds must be >= 0")

    def opt_config(self) -> OptConfig:
        return OptConfig(
            step_size=self.step_size,
            momentum=self.momentum,
            minibatch=self.minibatch,
            epochs=self.epochs,
            init_scale=self.init_scale,
            max_restarts=self.max_restarts,
        )

    def e2g_config(self, k_actions: int) -> E2GConfig:
        return E2GConfig(
            k_actions=k_actions,
            total_rounds=self.rounds,
            gap=self.gap,
            complexity=self.complexity,
            warmup_override=self.warmup_override,
            update_every=self.update_every,
            opt=self.opt_config(),
        )


_CONFIG_KEYS = {f.name for f in fields(ExperimentConfig)}


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Defaults, then the TOML file, then explicit overrides, then the
    IGL_SEED environment variable."""
    values: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys in {path}: {sorted(unknown)}")
        values.update(data)
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    if "seeds" in values:
        values["seeds"] = tuple(int(s) for s in values["seeds"])
    env_seed = os.environ.get("IGL_SEED")
    if env_seed is not None:
        values["seeds"] = (int(env_seed),)
    return ExperimentConfig(**values)


# ---------------------------------------------------------------------------
# IDX digit files


_IDX_IMAGE_MAGIC = 2051
_IDX_LABEL_MAGIC = 2049


def _read_exact(fh, n: int, path: str, offset: int) -> bytes:
    buf = fh.read(n)
    if len(buf) != n:
        raise ValueError(
            f"{path}: truncated, expected {n} bytes at offset {offset}, found {len(buf)}"
        )
    return buf


def load_idx(images_path: str, labels_path: str) -> tuple[np.ndarray, np.ndarray]:
    """Parse the classic big-endian IDX pair: images scaled to [0, 1] as
    flat rows, labels as integers. Image and label counts must match."""
    with open(images_path, "rb") as fh:
        magic, count, rows, cols = struct.unpack(">iiii", _read_exact(fh, 16, images_path, 0))
        if magic != _IDX_IMAGE_MAGIC:
            raise ValueError(
                f"{images_path}: bad magic at offset 0, expected {_IDX_IMAGE_MAGIC}, got {magic}"
            )
        raw = _read_exact(fh, count * rows * cols, images_path, 16)
    images = np.frombuffer(raw, dtype=np.uint8).astype(np.float64).reshape(count, rows * cols)
    images /= 255.0
    with open(labels_path, "rb") as fh:
        magic, n_labels = struct.unpack(">ii", _read_exact(fh, 8, labels_path, 0))
        if magic != _IDX_LABEL_MAGIC:
            raise ValueError(
                f"{labels_path}: bad magic at offset 0, expected {_IDX_LABEL_MAGIC}, got {magic}"
            )
        raw = _read_exact(fh, n_labels, labels_path, 8)
    labels = np.frombuffer(raw, dtype=np.uint8).astype(np.int64)
    if count != n_labels:
        raise ValueError(
            f"count mismatch: {images_path} has {count} images, {labels_path} has {n_labels} labels"
        )
    return images, labels


def write_idx(images_path: str, labels_path: str, images: np.ndarray, labels: np.ndarray) -> None:
    """Inverse of load_idx, for fixtures and round-trip checks. `images`
    are flat [0, 1] rows of a square image."""
    images = np.asarray(images, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if len(images) != len(labels):
        raise ValueError("image and label counts differ")
    side = int(round(math.sqrt(images.shape[1])))
    if side * side != images.shape[1]:
        raise ValueError("images must be square")
    pixel_bytes = np.rint(images * 255.0).clip(0, 255).astype(np.uint8)
    with open(images_path, "wb") as fh:
        fh.write(struct.pack(">iiii", _IDX_IMAGE_MAGIC, len(images), side, side))
        fh.write(pixel_bytes.tobytes())
    with open(labels_path, "wb") as fh:
        fh.write(struct.pack(">ii", _IDX_LABEL_MAGIC, len(labels)))
        fh.write(labels.astype(np.uint8).tobytes())


def augment_shift(image: np.ndarray, rng: np.random.Generator, radius: int) -> np.ndarray:
    """Shift a square image by a uniform integer offset in
    [-radius, radius]^2 with zero padding; radius 0 is the identity."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    image = np.asarray(image, dtype=np.float64)
    if radius == 0:
        return image.copy()
    side = int(round(math.sqrt(image.shape[0])))
    if side * side != image.shape[0]:
        raise ValueError("image must be square")
    shift = rng.integers(-radius, radius + 1, size=2)
    return envs.shift_images(image.reshape(1, -1), side, shift.reshape(1, 2))[0]


# ---------------------------------------------------------------------------
# environment construction


def load_tabular_spec(path: str) -> envs.TabularEnvSpec:
    """Enumerable environment from a TOML file with keys context_probs,
    reward_table, feedback_alphabet, feedback_given_reward."""
    with open(path, "rb") as fh:
        data = tomllib.load(fh)
    required = {"context_probs", "reward_table", "feedback_alphabet", "feedback_given_reward"}
    missing = required - set(data)
    if missing:
        raise ValueError(f"{path}: missing keys {sorted(missing)}")
    return envs.TabularEnvSpec(
        context_probs=np.asarray(data["context_probs"], dtype=np.float64),
        reward_table=np.asarray(data["reward_table"], dtype=np.float64),
        feedback_alphabet=np.asarray(data["feedback_alphabet"], dtype=np.float64),
        feedback_given_reward=np.asarray(data["feedback_given_reward"], dtype=np.float64),
    )


def build_env(cfg: ExperimentConfig, seed: int):
    """Fresh environment for one seeded run."""
    name = cfg.env
    pool_kwargs = {}
    if cfg.feedback_per_class is not None:
        pool_kwargs["n_feedback_per_class"] = cfg.feedback_per_class
    if cfg.eval_per_class is not None:
        pool_kwargs["n_eval_per_class"] = cfg.eval_per_class
    if name == "tab2x3":
        return envs.make_tabular_env(envs.tab_2x3())
    if name.endswith(".toml"):
        return envs.make_tabular_env(load_tabular_spec(name))
    if name == "blob":
        per_class = cfg.context_per_class if cfg.context_per_class is not None else 6000
        return envs.make_blob_env(seed, n_context_per_class=per_class, **pool_kwargs)
    if name in ("env1", "env2") or name.startswith("family:"):
        member = name if name in ("env1", "env2") else int(name.split(":", 1)[1])
        if cfg.context_per_class is not None:
            pool_kwargs["n_context_per_class"] = cfg.context_per_class
        return envs.make_ambiguity_env(member, seed, **pool_kwargs)
    if name == "mnist":
        if cfg.mnist_images is None or cfg.mnist_labels is None:
            raise ValueError("mnist env needs mnist_images and mnist_labels paths")
        images, labels = load_idx(cfg.mnist_images, cfg.mnist_labels)
        if cfg.mnist_eval_images is not None and cfg.mnist_eval_labels is not None:
            eval_images, eval_labels = load_idx(cfg.mnist_eval_images, cfg.mnist_eval_labels)
        else:  # hold out a tail of the training corpus
            n_eval = max(1, len(images) // 7)
            images, eval_images = images[:-n_eval], images[-n_eval:]
            labels, eval_labels = labels[:-n_eval], labels[-n_eval:]
        return envs.make_pool_env(
            images,
            labels,
            envs.classic_feedback_mixtures(10),
            eval_images,
            eval_labels,
            shift_radius=cfg.shift_radius,
        )
    raise ValueError(f"unknown env {name!r}")


# ---------------------------------------------------------------------------
# per-seed runs


def _finalize(env, policy, algo: str, seed: int, entries=None) -> RunRecord:
    final_accuracy = env.oracle.accuracy(policy) if hasattr(env.oracle, "accuracy") else None
    try:
        final_value = env.oracle.policy_value(GreedyPolicy(policy))
    except ValueError:
        final_value = None
    return RunRecord(
        algo=algo,
        seed=seed,
        k_actions=env.k_actions,
        entries=entries or [],
        final_accuracy=final_accuracy,
        optimal_value=env.oracle.optimal_value(),
        final_value=final_value,
    )


def run_one(cfg: ExperimentConfig, seed: int) -> RunRecord:
    """Build the environment and run the configured algorithm once."""
    env = build_env(cfg, seed)
    stream = RngStream(seed)
    opt = cfg.opt_config()

    if cfg.algo == "sup":
        if not hasattr(env, "contexts"):
            raise ValueError("sup needs a labeled classification environment")
        rng = fork_rng(stream, "sup").generator()
        n_pool = len(env.contexts)
        if cfg.samples <= n_pool:
            idx = rng.permutation(n_pool)[: cfg.samples]
        else:
            idx = rng.integers(0, n_pool, size=cfg.samples)
        policy = train_supervised(
            env.contexts[idx], env.labels[idx], env.k_actions, opt, rng=rng
        )
        return _finalize(env, policy, "sup", seed)

    if cfg.algo == "cb" and cfg.rounds == 0:
        rng = fork_rng(stream, "cb").generator()
        log, rewards = gather_reward_log(env, cfg.samples, rng)
        policy = train_cb_policy(
            log.contexts, log.actions, log.behavior_probs, rewards, env.k_actions, opt, rng=rng
        )
        return _finalize(env, policy, "cb", seed)

    if cfg.algo == "cb":
        return run_cb(env, cfg.e2g_config(env.k_actions), rng=stream)

    if cfg.algo == "igl-batch":
        log = env.sample_uniform_log(cfg.samples, fork_rng(stream, "env").generator())
        env.oracle.drain()  # batch training never sees realized rewards
        result = train_with_restarts(log, opt, rng=fork_rng(stream, "opt").generator())
        return _finalize(env, result.policy, "igl-batch", seed)

    if cfg.algo == "e2g":
        return run_e2g(env, cfg.e2g_config(env.k_actions), rng=stream)

    if cfg.algo == "cb-kmeans":
        return run_cb_with_kmeans(env, cfg.samples, opt, rng=stream)

    raise ValueError(f"unknown algo {cfg.algo!r}")  # unreachable, config validated


@dataclass
class RunManifest:
    """Aggregate of one experiment. `wall_seconds` is informational and is
    not serialized, keeping report files byte-identical across re-runs."""

    config: dict
    version: str
    rows: list[dict] = field(default_factory=list)
    mean_accuracy: float | None = None
    std_accuracy: float | None = None
    mean_value: float | None = None
    std_value: float | None = None
    wall_seconds: float = 0.0

    def to_json_dict(self) -> dict:
        return {
            "config": self.config,
            "version": self.version,
            "rows": self.rows,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "mean_value": self.mean_value,
            "std_value": self.std_value,
        }


def _mean_std(values: list[float]) -> tuple[float | None, float | None]:
    if not values:
        return None, None
    mean = float(np.mean(values))
    std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
    return mean, std


def run_experiment(cfg: ExperimentConfig) -> tuple[RunManifest, list[RunRecord]]:
    """Run every seed, aggregate, and (when out_dir is set) persist the
    report files. A failing seed is recorded and the rest proceed."""
    t0 = time.perf_counter()
    rows: list[dict] = []
    records: list[RunRecord] = []
    for seed in cfg.seeds:
        try:
            record = run_one(cfg, seed)
        except Exception as exc:  # noqa: BLE001 - per-seed isolation is the contract
            rows.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
            continue
        records.append(record)
        rewards = record.rewards()
        regret = None
        if record.optimal_value is not None and len(rewards):
            regret = float(np.sum(record.optimal_value - rewards))
        restarts = sum(e.restarts for e in record.entries if e.restarts)
        rows.append(
            {
                "seed": seed,
                "accuracy": record.final_accuracy,
                "final_value": record.final_value,
                "optimal_value": record.optimal_value,
                "final_regret": regret,
                "restarts": restarts,
                "interactions": len(record),
                "error": None,
            }
        )
    accs = [r["accuracy"] for r in rows if r.get("accuracy") is not None]
    vals = [r["final_value"] for r in rows if r.get("final_value") is not None]
    manifest = RunManifest(config=asdict(cfg), version=__version__, rows=rows)
    manifest.mean_accuracy, manifest.std_accuracy = _mean_std(accs)
    manifest.mean_value, manifest.std_value = _mean_std(vals)
    manifest.wall_seconds = time.perf_counter() - t0
    if cfg.out_dir is not None:
        write_report(manifest, records, cfg.out_dir)
    return manifest, records


# ---------------------------------------------------------------------------
# report files


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def record_csv_rows(record: RunRecord) -> list[str]:
    rows = ["round,mode,action,reward,cum_regret,indicator"]
    cum_regret = 0.0
    v_star = record.optimal_value if record.optimal_value is not None else 0.0
    for e in record.entries:
        cum_regret += v_star - e.reward
        rows.append(
            f"{e.round_index},{e.mode},{e.action},{_format_cell(e.reward)},"
            f"{_format_cell(cum_regret)},{_format_cell(e.indicator)}"
        )
    return rows


def write_report(manifest: RunManifest, records: list[RunRecord], out_dir: str) -> list[str]:
    """summary.json, per-seed run_<seed>.csv, table.csv (sample std, n-1
    denominator), and curves.csv with per-round seed means."""
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def emit(name: str, text: str) -> None:
        path = os.path.join(out_dir, name)
        try:
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report file {path}: {exc}") from exc
        written.append(path)

    emit("summary.json", json.dumps(manifest.to_json_dict(), indent=2, sort_keys=True) + "\n")

    for record in records:
        emit(f"run_{record.seed}.csv", "\n".join(record_csv_rows(record)) + "\n")

    algo = manifest.config.get("algo", "")
    metric = manifest.mean_accuracy if manifest.mean_accuracy is not None else manifest.mean_value
    spread = manifest.std_accuracy if manifest.mean_accuracy is not None else manifest.std_value
    table = ["algo,mean,std,n"]
    if metric is not None:
        n = sum(1 for r in manifest.rows if r.get("error") is None)
        table.append(f"{algo},{_format_cell(metric)},{_format_cell(spread)},{n}")
    emit("table.csv", "\n".join(table) + "\n")

    curves = ["round,mean_cum_regret,mean_accuracy"]
    with_entries = [r for r in records if len(r)]
    if with_entries:
        horizon = min(len(r) for r in with_entries)
        reward_mat = np.stack([r.rewards()[:horizon] for r in with_entries])
        v_star = np.array(
            [r.optimal_value if r.optimal_value is not None else 0.0 for r in with_entries]
        )
        regret = np.cumsum(v_star[:, None] - reward_mat, axis=1).mean(axis=0)
        running_acc = (
            np.cumsum(reward_mat, axis=1) / np.arange(1, horizon + 1)
        ).mean(axis=0)
        for i in range(horizon):
            curves.append(f"{i + 1},{_format_cell(float(regret[i]))},{_format_cell(float(running_acc[i]))}")
    emit("curves.csv", "\n".join(curves) + "\n")
    return written


def report_from_dir(out_dir: str) -> list[str]:
    """Rebuild table.csv and curves.csv from a stored summary.json and the
    run_<seed>.csv files."""
    with open(os.path.join(out_dir, "summary.json"), encoding="utf-8") as fh:
        data = json.load(fh)
    manifest = RunManifest(
        config=data["config"],
        version=data.get("version", ""),
        rows=data["rows"],
        mean_accuracy=data.get("mean_accuracy"),
        std_accuracy=data.get("std_accuracy"),
        mean_value=data.get("mean_value"),
        std_value=data.get("std_value"),
    )
    records = []
    for row in manifest.rows:
        if row.get("error") is not None:
            continue
        path = os.path.join(out_dir, f"run_{row['seed']}.csv")
        if not os.path.exists(path):
            continue
        entries = []
        with open(path, encoding="utf-8") as fh:
            next(fh)
            for line in fh:
                r_i, mode, action, reward, _, ind = line.rstrip("\n").split(",")
                entries.append(
                    RoundEntry(
                        int(r_i), mode, int(action), float(reward),
                        indicator=float(ind) if ind else None,
                    )
                )
        records.append(
            RunRecord(
                algo=manifest.config.get("algo", ""),
                seed=row["seed"],
                k_actions=0,
                entries=entries,
                final_accuracy=row.get("accuracy"),
                optimal_value=row.get("optimal_value"),
                final_value=row.get("final_value"),
            )
        )
    return write_report(manifest, records, out_dir)


# ---------------------------------------------------------------------------
# entry point


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", default=None, help="TOML config file")
    p.add_argument("--env", default=None)
    p.add_argument("--algo", default=None, choices=ALGOS)
    p.add_argument("--seed", default=None, help="comma-separated seed list")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--rounds", type=int, default=None)
    p.add_argument("--out", default=None, help="report directory")


def _config_from_args(args) -> ExperimentConfig:
    overrides = {
        "env": args.env,
        "algo": args.algo,
        "samples": args.samples,
        "rounds": args.rounds,
        "out_dir": args.out,
    }
    if args.seed is not None:
        overrides["seeds"] = tuple(int(s) for s in args.seed.split(","))
    return load_config(args.config, overrides)


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="igl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run an experiment over seeds")
    _add_run_flags(run_p)

    report_p = sub.add_parser("report", help="rebuild report files from a run directory")
    report_p.add_argument("--out", required=True)

    theory_p = sub.add_parser("theory", help="deviation bounds and schedule calculators")
    theory_p.add_argument("--n", type=int, default=1000)
    theory_p.add_argument("--k", type=int, default=3)
    theory_p.add_argument("--gap", type=float, default=0.5)
    theory_p.add_argument("--complexity", type=float, default=1.0)
    theory_p.add_argument("--policy-size", type=float, default=8.0)
    theory_p.add_argument("--decoder-size", type=float, default=1.0)
    theory_p.add_argument("--delta", type=float, default=0.1)

    check_p = sub.add_parser("check-env", help="independence and identifiability report")
    check_p.add_argument("--env", default="tab2x3")

    args = parser.parse_args(argv)

    if args.command == "run":
        cfg = _config_from_args(args)
        manifest, _ = run_experiment(cfg)
        for row in manifest.rows:
            if row.get("error"):
                print(f"seed {row['seed']}: ERROR {row['error']}")
            else:
                acc = row.get("accuracy")
                val = row.get("final_value")
                bits = [f"seed {row['seed']}:"]
                if acc is not None:
                    bits.append(f"accuracy {acc:.2f}")
                if val is not None:
                    bits.append(f"value {val:.4f}")
                if row.get("final_regret") is not None:
                    bits.append(f"regret {row['final_regret']:.1f}")
                print("  ".join(bits))
        if manifest.mean_accuracy is not None:
            print(f"mean accuracy {manifest.mean_accuracy:.2f} +- {manifest.std_accuracy:.2f}")
        if manifest.mean_value is not None:
            print(f"mean value {manifest.mean_value:.4f} +- {manifest.std_value:.4f}")
        print(f"wall {manifest.wall_seconds:.1f}s")
        return 0 if all(r.get("error") is None for r in manifest.rows) else 1

    if args.command == "report":
        for path in report_from_dir(args.out):
            print(path)
        return 0

    if args.command == "theory":
        cfg = analysis.TheoryConfig(
            policy_class_size=args.policy_size,
            decoder_class_size=args.decoder_size,
            delta=args.delta,
            complexity=args.complexity,
        )
        ratio_l2 = math.sqrt(args.k)
        ratio_max = float(args.k)
        from .e2g import exploit_steps as _steps
        from .e2g import warmup_length as _warm

        print(
            f"stat_error(n={args.n}, ratio_l2=sqrt(k)={ratio_l2:.4f}, ratio_max=k={ratio_max:.0f})"
            f" = {analysis.stat_error(args.n, ratio_l2, ratio_max, cfg):.6f}"
        )
        print(
            f"uniform_deviation(n={args.n}, complexity={args.complexity})"
            f" = {analysis.uniform_deviation(args.n, args.complexity):.6f}"
        )
        warm = _warm(args.k, args.gap, args.complexity)
        print(f"warmup_length(k={args.k}, gap={args.gap}, complexity={args.complexity}) = {warm}")
        sched_cfg = E2GConfig(
            k_actions=args.k, total_rounds=1, gap=args.gap, complexity=args.complexity
        )
        print("round -> exploit steps")
        i = 1
        while i <= 10_000_000:
            print(f"  {i:>9} -> {_steps(i, sched_cfg)}")
            i *= 10
        return 0

    if args.command == "check-env":
        name = args.env
        spec = load_tabular_spec(name) if name.endswith(".toml") else None
        if spec is None:
            if name != "tab2x3":
                print("check-env supports enumerable environments only (tab2x3 or a .toml spec)")
                return 2
            spec = envs.tab_2x3()
        report = envs.check_conditional_independence(spec)
        print(f"feedback depends only on reward: {report.holds}")
        print(f"max violation: {report.max_violation:.3e}")
        if report.worst is not None:
            print(f"worst (context, action, reward, feedback): {report.worst}")
        ident = analysis.check_identifiability(spec)
        print(
            f"identifiability margin {ident.margin:.6f} (holds: {ident.holds}); "
            f"best value {ident.optimal_value:.4f}, uniform {ident.uniform_value:.4f}, "
            f"best slope {ident.best_slope:.4f}"
        )
        return 0

    return 2  # pragma: no cover - argparse enforces the subcommand set


if __name__ == "__main__":
    sys.exit(main())
