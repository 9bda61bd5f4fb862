"""fMHD Inflation Lab - エントリーポイント.

    python app.py verify
    python app.py run --r 4 --s-list 1,2
    python app.py sweep --r-list 2,4,8,16,32,64 --analytic-only

優先順位: 既定値 < config/experiment_defaults.yaml < --config < フラグ。
終了コード: 0 成功 / 1 検証失敗・実行不能・発散 / 2 設定エラー。
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from src.config_loader import ConfigError, build_config
from src.constants import Mode
from src.construction.feasibility import InfeasibleParamsError
from src.experiment.runs import print_summary, run_single, run_sweep
from src.experiment.verify import CHECKS, run_verify
from src.solver.etd import BlowUpDetected
from src.spectral.grid import GridError

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# CLI から設定へ渡すキー (未指定は None のまま渡し、build_config 側で無視する)
OVERRIDE_KEYS = (
    "alpha1", "alpha2", "epsilon", "theta1", "r", "r_list", "s_list", "grid", "slab",
    "analytic_only", "n_quad", "dt_cfl", "n_steps", "sample_every", "out", "seed", "workers",
)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"カンマ区切りの数値が必要です: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"カンマ区切りの整数が必要です: {text!r}") from exc


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None, help="YAML/JSON の設定ファイル")
    common.add_argument("--alpha1", type=float, default=None, help="速度場の散逸の冪 (>= 1)")
    common.add_argument("--alpha2", type=float, default=None, help="磁場の散逸の冪 (>= 1)")
    common.add_argument("--epsilon", type=float, default=None, help="β = 1/2 - ε (0 < ε < 1/6)")
    common.add_argument("--theta1", type=float, default=None, help="θ1 (省略時は許容区間の中点)")
    common.add_argument("--r", type=int, default=None, help="波の本数")
    common.add_argument("--r-list", dest="r_list", type=_int_list, default=None, help="例: 2,3,4,6")
    common.add_argument("--s-list", dest="s_list", type=_float_list, default=None, help="例: 1,2")
    common.add_argument("--grid", default=None, help="N1xN3 (slab) または N1xN2xN3")
    shape = common.add_mutually_exclusive_group()
    shape.add_argument("--slab", dest="slab", action="store_true", default=None, help="x2 に依存しない格子")
    shape.add_argument("--full3d", dest="slab", action="store_false", default=None, help="3次元格子")
    common.add_argument(
        "--analytic-only", dest="analytic_only", action="store_true", default=None,
        help="解かずに線形部と b10 の閉形式で評価",
    )
    common.add_argument("--n-quad", dest="n_quad", type=int, default=None, help="Gauss-Legendre 点数")
    common.add_argument("--dt-cfl", dest="dt_cfl", type=float, default=None, help="CFL 係数")
    common.add_argument("--n-steps", dest="n_steps", type=int, default=None, help="固定ステップ数")
    common.add_argument("--sample-every", dest="sample_every", type=int, default=None)
    common.add_argument("--out", type=Path, default=None, help="出力ディレクトリ")
    common.add_argument("--seed", type=int, default=None, help="検証用乱数のシード")
    common.add_argument("--workers", type=int, default=None, help="FFT スレッド数 / sweep の並列数")
    common.add_argument("--log-level", dest="log_level", default="INFO")
    return common


def parse_args(argv: Sequence[str] | None = None) -> argparse.Namespace:
    common = _common_options()
    parser = argparse.ArgumentParser(description="分数階MHDのノルム膨張構成の数値実験")
    sub = parser.add_subparsers(dest="command", required=True)
    verify = sub.add_parser(Mode.VERIFY, parents=[common], help="閉形式・不変量の検証スイート")
    verify.add_argument(
        "--check", action="append", default=None, choices=sorted(CHECKS),
        help="実行するチェック (複数指定可, 既定: すべて)",
    )
    sub.add_parser(Mode.RUN, parents=[common], help="単一の r で実行")
    sub.add_parser(Mode.SWEEP, parents=[common], help="r_list で掃引し成長指数を当てはめる")
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format=LOG_FORMAT)

    overrides = {key: getattr(args, key) for key in OVERRIDE_KEYS}
    overrides["mode"] = args.command
    try:
        config = build_config(overrides, args.config)
    except ConfigError as err:
        print(f"[error] {err}")
        return 2

    try:
        if args.command == Mode.VERIFY:
            report = run_verify(config, only=args.check)
            print_summary("verify", report.console_metrics())
            return report.exit_code
        if args.command == Mode.RUN:
            run = run_single(config)
            print_summary(f"run {run.run_id}", run.console_metrics())
            return 0
        sweep = run_sweep(config)
        print_summary("sweep", sweep.console_metrics())
        return 0
    except GridError as err:
        print(f"[error] {err}")
        return 2
    except InfeasibleParamsError as err:
        print(f"[infeasible] {err}")
        return 1
    except BlowUpDetected as err:
        print(f"[blow-up] {err}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
