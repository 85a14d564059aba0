# init_db_tables.py
import asyncio
import logging
import os
import sys

# Скрипт лежить у корені проєкту; корінь має бути в sys.path для імпорту src
project_root = os.path.dirname(os.path.abspath(__file__))
if project_root not in sys.path:
    sys.path.insert(0, project_root)

from src import config as app_config
from src.db.database import engine, Base
from src.db.models import RunRecord  # noqa: F401

logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(name)s - %(module)s:%(lineno)d - %(message)s',
    handlers=[logging.StreamHandler(sys.stdout)]
)
logger = logging.getLogger(__name__)


async def create_tables(drop: bool = False):
    """Створює таблиці журналу запусків; з --drop спершу видаляє наявні."""
    db_url_display = app_config.DATABASE_URL
    if '@' in db_url_display:
        db_url_display = db_url_display.split('@', 1)[-1]
    logger.info(f"Attempting to connect to database: {db_url_display}")

    try:
        async with engine.begin() as conn:
            if drop:
                logger.warning("!!! Dropping all run ledger tables !!!")
                await conn.run_sync(Base.metadata.drop_all)
            await conn.run_sync(Base.metadata.create_all)
            logger.info("Run ledger tables created successfully!")
    except ConnectionRefusedError:
        logger.error("Database connection refused. Check DATABASE_URL.")
    except Exception as e:
        logger.exception("An error occurred during table creation:", exc_info=e)
    finally:
        await engine.dispose()
        logger.info("Database engine disposed.")


if __name__ == "__main__":
    if not app_config.DATABASE_URL or engine is None:
        logger.error("CRITICAL: DATABASE_URL is not configured. Cannot proceed with table creation.")
        sys.exit(1)
    asyncio.run(create_tables(drop="--drop" in sys.argv[1:]))
    logger.info("Run ledger table creation script finished.")
