from decouple import config


class Settings:
    """
    Application settings class.
    Reads environment variables using python-decouple for configuration.
    Every value has a default so the pipeline runs without a `.env` file.
    """

    # General settings
    DEBUG = config("DEBUG", default=False, cast=bool)
    LOG_DIR = config("LOG_DIR", default="logs")

    # Default pipeline config file, overridden by --config
    SER_CONFIG = config("SER_CONFIG", default="")

    # Run ledger; an empty URL disables it
    LEDGER_URL = config("LEDGER_URL", default="sqlite:///runs.sqlite3")

    # Pipeline settings
    NOMINAL_SAMPLE_RATE = config("NOMINAL_SAMPLE_RATE", default=22050, cast=int)
    N_JOBS = config("N_JOBS", default=1, cast=int)

    @property
    def ledger_enabled(self) -> bool:
        """
        True when a ledger database URL is configured.
        """
        return bool(self.LEDGER_URL)


settings = Settings()
