"""
Process settings read from the environment or a .env file
"""
from decouple import config

NO_COLOR = config('SPINRES_NO_COLOR', default=False, cast=bool)
LOG_LEVEL = config('SPINRES_LOG_LEVEL', default='WARNING')

# Hilbert-space capacity for build_hamiltonian
MAX_DIMENSION = config('SPINRES_MAX_DIMENSION', default=64, cast=int)

# Levenberg-Marquardt iteration cap
MAX_ITERATIONS = config('SPINRES_MAX_ITERATIONS', default=200, cast=int)

# Batch fit worker pool
WORKERS = config('SPINRES_WORKERS', default=4, cast=int)
