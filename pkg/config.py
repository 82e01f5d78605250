"""
Application Configuration
=========================
Central configuration for the Unit Teissier toolkit: numerical tolerances,
search domain, simulation defaults, logging and server settings.
"""

from pathlib import Path
import os

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

BASE_DIR = Path(__file__).resolve().parent


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


class Settings:
    """Application Settings"""

    # ---------- Logging ----------
    LOG_LEVEL = os.getenv("UT_LOG_LEVEL", "INFO").upper()
    LOG_DIR = os.getenv("UT_LOG_DIR", "logs")
    LOG_FILE = os.getenv("UT_LOG_FILE", "ut_toolkit.log")
    LOG_TO_FILE = _env_bool("UT_LOG_TO_FILE", "true")

    # ---------- Parameter search domain ----------
    THETA_MIN = float(os.getenv("UT_THETA_MIN", "1e-3"))
    THETA_MAX = float(os.getenv("UT_THETA_MAX", "1e3"))

    # ---------- Solver tolerances ----------
    OPT_TOL = float(os.getenv("UT_OPT_TOL", "1e-10"))
    ROOT_TOL = float(os.getenv("UT_ROOT_TOL", "1e-12"))
    QUAD_REL_TOL = float(os.getenv("UT_QUAD_REL_TOL", "1e-10"))
    OPT_GRID_POINTS = int(os.getenv("UT_OPT_GRID_POINTS", "64"))
    OPT_MAX_ITER = 500
    QUAD_MAX_PANELS = 2 ** 15

    # ---------- Simulation study ----------
    SIM_REPLICATIONS = int(os.getenv("UT_SIM_REPLICATIONS", "1000"))
    SIM_SEED = int(os.getenv("UT_SIM_SEED", "2024"))
    SIM_WORKERS = int(os.getenv("UT_SIM_WORKERS", "1"))
    RANK_DECIMALS = int(os.getenv("UT_RANK_DECIMALS", "5"))

    # Design grid of the published study
    SIM_GRID_THETAS = [0.26, 0.35, 0.5, 1.0, 1.25, 1.75, 2.0, 2.5, 3.0, 3.2]
    SIM_GRID_SAMPLE_SIZES = [30, 50, 100, 250, 500]

    # ---------- Data ----------
    DATA_DIR = Path(os.getenv("DATA_DIR", str(BASE_DIR / "data")))
    BUILTIN_DATASETS = {
        "risk73": "risk73.txt",
    }

    # ---------- Server Configuration ----------
    HOST = os.getenv("HOST", "127.0.0.1")
    PORT = int(os.getenv("PORT", "8000"))
    # Upper bound on replications accepted by the HTTP study endpoint
    API_MAX_REPLICATIONS = int(os.getenv("UT_API_MAX_REPLICATIONS", "200"))

    @classmethod
    def validate(cls):
        """Validate that numeric settings are usable"""
        problems = []
        if not 0 < cls.THETA_MIN < cls.THETA_MAX:
            problems.append(f"UT_THETA_MIN/UT_THETA_MAX must satisfy 0 < min < max (got {cls.THETA_MIN}, {cls.THETA_MAX})")
        for name in ("OPT_TOL", "ROOT_TOL", "QUAD_REL_TOL"):
            if getattr(cls, name) <= 0:
                problems.append(f"{name} must be positive")
        if cls.OPT_GRID_POINTS < 3:
            problems.append("UT_OPT_GRID_POINTS must be at least 3")
        if cls.SIM_REPLICATIONS < 1:
            problems.append("UT_SIM_REPLICATIONS must be at least 1")
        if cls.SIM_WORKERS < 1:
            problems.append("UT_SIM_WORKERS must be at least 1")

        if problems:
            raise ValueError(
                "Invalid configuration:\n  " + "\n  ".join(problems) + "\n"
                "Please fix them in your .env file"
            )

        return True


# Create a singleton instance
settings = Settings()
