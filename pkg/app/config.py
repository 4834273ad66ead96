import logging
import os

from dotenv import load_dotenv

load_dotenv()

# Environment-specific defaults
ENVIRONMENT = os.getenv("ENVIRONMENT", "development")
LOG_LEVEL = os.getenv("LOG_LEVEL", "WARNING" if ENVIRONMENT == "test" else "INFO")

DEFAULT_SEED = int(os.getenv("RETRACT_SEED", "0"))
AUDIT_STAGE_LIMIT = int(os.getenv("RETRACT_AUDIT_STAGE_LIMIT", "4096"))
FIXTURE_DIR = os.getenv("RETRACT_FIXTURE_DIR", "fixtures")

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class Settings:
    def __init__(self):
        self.environment = ENVIRONMENT
        self.log_level = LOG_LEVEL
        self.seed = DEFAULT_SEED
        self.audit_stage_limit = AUDIT_STAGE_LIMIT
        self.fixture_dir = FIXTURE_DIR

    def configure_logging(self, level: str = None):
        logging.basicConfig(
            level=getattr(logging, (level or self.log_level).upper(), logging.INFO),
            format=LOG_FORMAT,
        )


# Global settings instance
settings = Settings()
