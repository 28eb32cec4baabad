import os
from pathlib import Path
BASE_DIR = Path(__file__).resolve().parent.parent

TOOLKIT_ENV = os.environ.get('TOOLKIT_ENV', 'desk').lower()
IS_BATCH_RUN = TOOLKIT_ENV == 'batch'

config = {
    'DEBUG': not IS_BATCH_RUN,
    'SECRET_KEY': os.environ.get('DJANGO_SECRET_KEY', 'dev-secret-key'),
    'LOG_LEVEL': os.environ.get('TOOLKIT_LOG_LEVEL', 'WARNING' if IS_BATCH_RUN else 'INFO'),
    # batch runs go to plain stderr so captured logs stay grep-able
    'RICH_LOGGING': not IS_BATCH_RUN,
    'OUT_DIR': BASE_DIR / 'runs',
}
