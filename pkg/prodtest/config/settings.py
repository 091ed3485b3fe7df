"""
Runtime settings for prodtest.
Values come from the project .env (if present) and the process environment;
anything missing or unparsable falls back to the documented default.
"""
import logging
import os
from pathlib import Path

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

logger = logging.getLogger(__name__)

# prodtest/config/settings.py -> parents[2] = project root (contains .env)
root_dir = Path(__file__).resolve().parents[2]
if (root_dir / ".env").exists():
    load_dotenv(dotenv_path=root_dir / ".env")
else:
    load_dotenv()


def _env_int(key: str, default: int) -> int:
    raw = os.getenv(key, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        pass
    # allow 1e6-style values
    try:
        return int(float(raw))
    except ValueError:
        logger.warning(f"Ignoring unparsable {key}={raw!r}; using {default}")
        return default


class Settings(BaseModel):
    """Caps and defaults used across the services"""
    model_config = ConfigDict(frozen=True)

    dimension_cap: int = Field(2 ** 20, description="Largest Hilbert-space dimension any dense object may have")
    exact_dim_cap: int = Field(2 ** 12, description="Largest d^(nk) for the dense rho/sigma routes in sweeps")
    f_trace_dim_cap: int = Field(2 ** 8, description="Largest d^(nk) for the matrix route of F(k,n,d)")
    enumeration_cap: int = Field(8, description="Largest k for which S_k is enumerated")
    triple_cap: int = Field(6, description="Largest k for the (k!)^3 cycle-number histogram")
    subset_enum_cap: int = Field(12, description="Largest n for explicit subset-pair enumeration")
    bp_sweep_cap: int = Field(10, description="Largest n accepted by the naive bipartite tester")
    graph_cap: int = Field(12, description="Largest vertex count for dense graph states")
    rejection_budget: int = Field(10 ** 6, description="Default tries for conditioned sampling")
    default_seed: int = Field(20240607, description="Master seed when none is given")
    workers: int = Field(1, description="Default worker-pool size")
    psd_check_max_dim: int = Field(1024, description="Largest dim on which density operators get an eigenvalue check")
    log_level: str = Field("INFO", description="Root log level for the CLI")


def load_settings() -> Settings:
    """Build Settings from the environment (PRODTEST_* keys)."""
    defaults = Settings()
    return Settings(
        dimension_cap=_env_int("PRODTEST_DIMENSION_CAP", defaults.dimension_cap),
        exact_dim_cap=_env_int("PRODTEST_EXACT_DIM_CAP", defaults.exact_dim_cap),
        f_trace_dim_cap=_env_int("PRODTEST_F_TRACE_DIM_CAP", defaults.f_trace_dim_cap),
        enumeration_cap=_env_int("PRODTEST_ENUMERATION_CAP", defaults.enumeration_cap),
        triple_cap=_env_int("PRODTEST_TRIPLE_CAP", defaults.triple_cap),
        subset_enum_cap=_env_int("PRODTEST_SUBSET_ENUM_CAP", defaults.subset_enum_cap),
        bp_sweep_cap=_env_int("PRODTEST_BP_SWEEP_CAP", defaults.bp_sweep_cap),
        graph_cap=_env_int("PRODTEST_GRAPH_CAP", defaults.graph_cap),
        rejection_budget=_env_int("PRODTEST_REJECTION_BUDGET", defaults.rejection_budget),
        default_seed=_env_int("PRODTEST_DEFAULT_SEED", defaults.default_seed),
        workers=max(1, _env_int("PRODTEST_WORKERS", defaults.workers)),
        psd_check_max_dim=_env_int("PRODTEST_PSD_CHECK_MAX_DIM", defaults.psd_check_max_dim),
        log_level=(os.getenv("PRODTEST_LOG_LEVEL", "") or defaults.log_level).strip().upper(),
    )


settings = load_settings()
