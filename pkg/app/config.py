"""
Configuration settings for the SVIR toolkit
"""
import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Logging Configuration
    LOG_LEVEL = os.getenv("SVIR_LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("SVIR_LOG_FILE", "")

    # Output Configuration
    OUTPUT_DIR = os.getenv("SVIR_OUTPUT_DIR", "out")

    # Integrator defaults (days)
    RK4_STEP = float(os.getenv("SVIR_RK4_STEP", "0.01"))
    DP45_RTOL = float(os.getenv("SVIR_DP45_RTOL", "1e-8"))
    # abs_tol = DP45_ATOL_SCALE * N(0) unless given explicitly
    DP45_ATOL_SCALE = float(os.getenv("SVIR_DP45_ATOL_SCALE", "1e-8"))
    H_MIN = float(os.getenv("SVIR_H_MIN", "1e-10"))
    H_MAX = float(os.getenv("SVIR_H_MAX", "50.0"))
    OUTPUT_STEP = float(os.getenv("SVIR_OUTPUT_STEP", "0.5"))
    DEFAULT_T_END = float(os.getenv("SVIR_T_END", "200.0"))
    NEGATIVITY_BAND = 1e-9

    # Equilibrium solver
    NEWTON_MAX_ITER = int(os.getenv("SVIR_NEWTON_MAX_ITER", "200"))
    NEWTON_MAX_HALVINGS = 30
    NEWTON_TOL_SCALE = 1e-10
    ACCEPT_TOL_SCALE = 1e-8
    ENDEMIC_WARMUP_DAYS = float(os.getenv("SVIR_ENDEMIC_WARMUP_DAYS", "3000"))
    INFECTED_ZERO = 1e-9

    # Spectral checks
    EIGEN_RESIDUAL_SCALE = 1e-9
    MARGINAL_BAND = 1e-9
    HURWITZ_ZERO_TOL = 1e-12
    # |a| below this fraction of |v| |w|^2 max|d2f| counts as zero
    BIFURCATION_A_TOL = 1e-10

    # Calibration
    FIT_MAX_EVALS = int(os.getenv("SVIR_FIT_MAX_EVALS", "2000"))
    FIT_X_TOL = 1e-8
    FIT_F_TOL = 1e-14
    FIT_RTOL = 1e-10

    # Simulation sweeps
    SWEEP_WORKERS = int(os.getenv("SVIR_SWEEP_WORKERS", "4"))
    EXTINCTION_THRESHOLD = 1.0

    @classmethod
    def get_log_level(cls):
        """Get numeric-or-named log level for logging.basicConfig"""
        return cls.LOG_LEVEL.upper()

    @classmethod
    def get_output_dir(cls):
        """Get default output directory"""
        return cls.OUTPUT_DIR

    @classmethod
    def get_integrator_defaults(cls):
        """Get integrator defaults as keyword arguments"""
        return {
            "h": cls.RK4_STEP,
            "rel_tol": cls.DP45_RTOL,
            "h_min": cls.H_MIN,
            "h_max": cls.H_MAX,
            "t_end": cls.DEFAULT_T_END,
            "output_step": cls.OUTPUT_STEP,
        }
