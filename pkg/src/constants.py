"""数値許容誤差・既定グリッド・出力カラム名の定数定義."""

PAD_FACTOR = 4  # Besovノルム評価時のゼロパディング倍率


class Tol:
    """判定用の許容誤差."""

    HERMITIAN = 1e-12       # to_physical: 共役対称性の相対誤差
    DIVERGENCE = 1e-10      # advect / rhs_nonlinear の前提条件
    ZERO_MEAN = 1e-12       # caloric_besov_norm の前提条件 (相対)
    RESONANCE = 1e-9        # duhamel_weight: |a-b| < RESONANCE*(a+b+1) で共鳴扱い
    THETA_SUM = 1e-14       # θ1+θ2 = 2α2
    FEASIBILITY = 1e-12     # 不等式判定で境界一致を許す幅
    QUADRATURE = 1e-8       # 閉形式 vs 数値積分


class BesovDefaults:
    """caloric Besovノルムの探索窓."""

    T_MAX = 10.0
    N_SAMPLES = 128
    T_MIN_DIVISOR = 100.0  # t_min = |m|_max^{-2α} / T_MIN_DIVISOR


class SolverDefaults:
    """ETD2時間積分の既定値."""

    CFL = 0.5
    RECHECK_EVERY = 16
    BLOWUP_CAP = 1e8
    CONTOUR_POINTS = 32  # φ関数の複素周回積分点数


class GridDefaults:
    """既定グリッド (slabは n2=1)."""

    SLAB = (1024, 1, 64)
    FULL3D = (64, 64, 64)


class Col:
    """series.csv / sweep.csv / verify.csv のカラム名."""

    T = "t"
    SUP_U = "sup_u"
    SUP_B = "sup_b"
    ENERGY = "energy"
    DISSIPATION = "dissipation"
    SUP_Y = "sup_y"
    SUP_Z = "sup_z"
    RATIO_Y = "ratio_y"
    RATIO_Z = "ratio_z"
    BESOV_B_PREFIX = "besov_b_"

    R = "r"
    S = "s"
    BESOV_B_T = "besov_b_T"
    BESOV_B_0 = "besov_b_0"
    INFLATION = "inflation_factor"
    RUN_ID = "run_id"

    CHECK = "check"
    PASSED = "passed"
    VALUE = "value"
    THRESHOLD = "threshold"
    DETAIL = "detail"

    @staticmethod
    def besov_b(s: float) -> str:
        """s ごとのBesovカラム名 (例: besov_b_1)."""
        return f"{Col.BESOV_B_PREFIX}{s:g}"


class Mode:
    """CLIサブコマンド."""

    VERIFY = "verify"
    RUN = "run"
    SWEEP = "sweep"


class OutputFile:
    """実行ディレクトリ内のファイル名."""

    SERIES = "series.csv"
    SUMMARY = "summary.json"
    CONFIG_ECHO = "config.echo.json"
    SWEEP = "sweep.csv"
    FITS = "fits.csv"
    VERIFY = "verify.csv"
