import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()

# ==================== CONFIGURATION ====================
DEFAULT_SEED = int(os.getenv("ORBITS_SEED", "0"))
DEFAULT_TRIALS = int(os.getenv("ORBITS_TRIALS", "20"))
SAMPLE_BOUND = int(os.getenv("ORBITS_SAMPLE_BOUND", "9"))
LOG_LEVEL = os.getenv("ORBITS_LOG_LEVEL", "WARNING")
SYMBOLIC_LIMIT = int(os.getenv("ORBITS_SYMBOLIC_LIMIT", "8"))


class Settings(BaseModel):
    """
    Runtime settings for the orbit calculus.
    Every value can be overridden through the environment or a .env file.
    """
    seed: int = DEFAULT_SEED
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    sample_bound: int = Field(default=SAMPLE_BOUND, ge=1)
    log_level: str = LOG_LEVEL
    symbolic_limit: int = Field(default=SYMBOLIC_LIMIT, ge=0)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Return the process-wide settings built from the environment."""
    return Settings()
