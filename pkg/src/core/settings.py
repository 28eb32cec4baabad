from pathlib import Path
from dotenv import load_dotenv
from decouple import config

# Load environment variables
load_dotenv()

# Import the new config
from config import config as app_config

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = app_config['SECRET_KEY']

DEBUG = app_config['DEBUG']

ALLOWED_HOSTS = []

# Application definition

INSTALLED_APPS = [
    'rest_framework',
    'signal_core',
    'varcarleson',
    'wavepacket',
    'outer_lp',
    'sparse_builder',
    'weights',
    'experiments',
]

# Everything runs in memory; no database is configured.
DATABASES = {}

USE_TZ = True

TIME_ZONE = 'UTC'

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Toolkit settings: every constant the analysis leaves unspecified lives here.
CARLESON_TOOLKIT = {
    'WAVE_PACKET': {
        'B': config('TOOLKIT_B', default=1.0, cast=float),
        'D': config('TOOLKIT_D', default=2.0, cast=float),
        'EPS': config('TOOLKIT_EPS', default=0.125, cast=float),
        'D_PRIME': config('TOOLKIT_D_PRIME', default=0.5, cast=float),
        'D_DOUBLEPRIME': config('TOOLKIT_D_DOUBLEPRIME', default=8.0, cast=float),
        'SHARPNESS': config('TOOLKIT_PSI_SHARPNESS', default=4.0, cast=float),
    },
    'TENT_GEOMETRY': {
        # multiples of b
        'THETA': (-8.0, 8.0),
        'THETA_O': (-2.0, 2.0),
    },
    'GRIDS': {
        'SPACING': config('TOOLKIT_SPACING', default=1.0 / 32, cast=float),
        'WINDOW': config('TOOLKIT_WINDOW', default=4.0, cast=float),
        'SCALE_COUNT': config('TOOLKIT_SCALE_COUNT', default=0, cast=int),
        'SCALES_PER_OCTAVE': config('TOOLKIT_SCALES_PER_OCTAVE', default=1, cast=int),
        'C_ETA': config('TOOLKIT_C_ETA', default=0.25, cast=float),
        'FREQUENCY_COUNT': config('TOOLKIT_FREQUENCY_COUNT', default=16, cast=int),
        'PAD_FACTOR': config('TOOLKIT_PAD_FACTOR', default=2, cast=int),
        'FREQUENCY_BAND': (
            config('TOOLKIT_FREQUENCY_LOW', default=-8.0, cast=float),
            config('TOOLKIT_FREQUENCY_HIGH', default=8.0, cast=float),
        ),
        # modulations of the tile grid; the Nyquist band is far too wide for desk runs
        'ETA_BAND': (
            config('TOOLKIT_ETA_LOW', default=-8.0, cast=float),
            config('TOOLKIT_ETA_HIGH', default=8.0, cast=float),
        ),
    },
    'EXPONENTS': {
        'R': config('TOOLKIT_R', default=3.0, cast=float),
        'P': config('TOOLKIT_P', default=1.5, cast=float),
        'Q': config('TOOLKIT_Q', default=4.0, cast=float),
        'T': config('TOOLKIT_T', default=1.2, cast=float),
    },
    'ITERATION': {
        'C_INITIAL': config('TOOLKIT_C_INITIAL', default=0.25, cast=float),
        'EPSILON': config('TOOLKIT_EPSILON', default=0.0, cast=float),
        'GENERATION_CAP': config('TOOLKIT_GENERATION_CAP', default=16, cast=int),
        'PACKING_EXPONENT': config('TOOLKIT_PACKING_EXPONENT', default=12, cast=int),
        'EMBEDDING_K': config('TOOLKIT_EMBEDDING_K', default=4.0, cast=float),
        'MAX_REMOVALS': config('TOOLKIT_MAX_REMOVALS', default=8, cast=int),
    },
    'EXPERIMENTS': {
        'CORPUS_SIZE': config('TOOLKIT_CORPUS_SIZE', default=8, cast=int),
        'WEIGHT_EXPONENTS': config('TOOLKIT_WEIGHT_EXPONENTS', default='0,0.05,0.1,0.2,0.3',
                                   cast=lambda v: [float(a) for a in v.split(',')]),
        'SPARSE_SCALE_COUNT': config('TOOLKIT_SPARSE_SCALE_COUNT', default=4, cast=int),
    },
    'SEED': config('TOOLKIT_SEED', default=0, cast=int),
    'THREADS': config('TOOLKIT_THREADS', default=1, cast=int),
}

# Monitoring settings
MONITORING_SETTINGS = {
    'LOG_LEVEL': app_config['LOG_LEVEL'],
    'ENABLE_PERFORMANCE_TRACKING': True,
    'ENABLE_RICH_LOGGING': app_config['RICH_LOGGING'],
}

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'handlers': {
        'console': (
            {'class': 'rich.logging.RichHandler', 'rich_tracebacks': True, 'show_path': False}
            if MONITORING_SETTINGS['ENABLE_RICH_LOGGING']
            else {'class': 'logging.StreamHandler'}
        ),
    },
    'root': {
        'handlers': ['console'],
        'level': MONITORING_SETTINGS['LOG_LEVEL'],
    },
}
