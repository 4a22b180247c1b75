import os
from dotenv import load_dotenv

load_dotenv()


class Config:
    # Logging
    LOG_LEVEL = os.getenv("NCK_LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("NCK_LOG_FILE", "")

    # Randomized checks
    SEED = int(os.getenv("NCK_SEED", "0"))
    DETERMINISTIC = os.getenv("NCK_DETERMINISTIC", "false").lower() == "true"

    # Default truncation for generated and loaded series
    TRUNC_LEN = int(os.getenv("NCK_TRUNC_LEN", "6"))
    MAX_LETTER = int(os.getenv("NCK_MAX_LETTER", "8"))

    # Coefficient comparison |x-y| <= ATOL + RTOL*max(|x|,|y|)
    ATOL = float(os.getenv("NCK_ATOL", "1e-12"))
    RTOL = float(os.getenv("NCK_RTOL", "1e-9"))

    # E[f] below this modulus counts as zero
    ZERO_EXPECTATION_TOL = float(os.getenv("NCK_ZERO_EXPECTATION_TOL", "1e-14"))

    # Numerical rank: singular values below sigma_max * max(dim) * RANK_RTOL are dropped
    RANK_RTOL = float(os.getenv("NCK_RANK_RTOL", "1e-12"))
    RESIDUAL_TOL = float(os.getenv("NCK_RESIDUAL_TOL", "1e-10"))

    # Direct terms summed before the Euler-Maclaurin tail in zeta()
    ZETA_TERMS = int(os.getenv("NCK_ZETA_TERMS", "1000"))
