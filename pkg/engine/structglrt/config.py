from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    log_level: str = "INFO"

    # Worker pool size for trial fan-out
    threads: int = 1

    # Where simulate/sweep write records, summaries and the manifest
    out_dir: str = "results"

    # Used when neither the config file nor --seed gives one
    default_seed: int = 0

    model_config = {"env_file": ".env", "env_prefix": "STRUCTGLRT_", "extra": "ignore"}


settings = Settings()
