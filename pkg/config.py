import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

# Configuration settings
class Config:
    # Logging configuration
    LOG_LEVEL = os.environ.get("LOG_LEVEL", "INFO")
    LOG_FORMAT = os.environ.get("LOG_FORMAT", "%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    # Resource grid defaults: 10 Hz CAM period at 1 ms subframes, 10 MHz / 1.26 MHz subchannels
    DEFAULT_SUBFRAMES = int(os.environ.get("DEFAULT_SUBFRAMES", 100))
    DEFAULT_SUBCHANNELS = int(os.environ.get("DEFAULT_SUBCHANNELS", 7))
    SUBFRAME_DURATION_MS = float(os.environ.get("SUBFRAME_DURATION_MS", "1.0"))
    SUBCHANNEL_BANDWIDTH_MHZ = float(os.environ.get("SUBCHANNEL_BANDWIDTH_MHZ", "1.26"))

    # Synthetic channel defaults
    SINR_DB_MEAN = float(os.environ.get("SINR_DB_MEAN", "20.0"))
    SINR_DB_STDDEV = float(os.environ.get("SINR_DB_STDDEV", "5.0"))

    # Oracle budgets
    BRUTE_FORCE_BUDGET = int(os.environ.get("BRUTE_FORCE_BUDGET", 5_000_000))  # enumerated solutions
    EXHAUSTIVE_NODE_BUDGET = int(os.environ.get("EXHAUSTIVE_NODE_BUDGET", 2_000_000))  # DFS nodes
    EXHAUSTIVE_MAX_VEHICLES = int(os.environ.get("EXHAUSTIVE_MAX_VEHICLES", 10))

    # Experiment settings
    RESULTS_DIR = os.environ.get("RESULTS_DIR", "results")
    WORKERS = int(os.environ.get("WORKERS", 1))

    # Allocation service
    API_HOST = os.environ.get("API_HOST", "0.0.0.0")
    API_PORT = int(os.environ.get("API_PORT", 5000))
    DEBUG = os.environ.get("DEBUG", "false").lower() == "true"
