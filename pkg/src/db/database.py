# src/db/database.py

import logging
from typing import Optional, Tuple

from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine
from sqlalchemy.orm import DeclarativeBase

from src import config as app_config

logger = logging.getLogger(__name__)


class Base(DeclarativeBase):
    """Базовий клас для моделей журналу запусків."""
    pass


def _display_url(url: str) -> str:
    return url.split('@', 1)[-1] if '@' in url else url


# --- Двигун створюється на рівні модуля; без DATABASE_URL журнал вимкнено ---
if not app_config.DATABASE_URL:
    logger.debug("DATABASE_URL is not set. Run ledger is disabled.")
    engine = None
else:
    try:
        engine = create_async_engine(app_config.DATABASE_URL, echo=False)
        logger.info(f"Async SQLAlchemy engine created for URL (hidden credentials): "
                    f"{_display_url(app_config.DATABASE_URL)}")
    except Exception as e:
        logger.exception("Failed to create SQLAlchemy engine at module level.", exc_info=e)
        engine = None

async_session_factory: Optional[async_sessionmaker[AsyncSession]] = None


async def initialize_database() -> Tuple[bool, Optional[async_sessionmaker[AsyncSession]]]:
    global async_session_factory

    if not engine:
        logger.info("Database engine is not available. Runs will not be recorded.")
        return False, None

    logger.info("Attempting run ledger initialization (tables and session factory)...")
    try:
        async with engine.begin() as conn:
            from src.db import models  # noqa: F401
            await conn.run_sync(Base.metadata.create_all)
            logger.info("Run ledger tables checked/created successfully.")

        async_session_factory = async_sessionmaker(
            bind=engine,
            class_=AsyncSession,
            expire_on_commit=False
        )
        return True, async_session_factory
    except ConnectionRefusedError:
        logger.error(f"Database connection refused during initialization. URL: {_display_url(app_config.DATABASE_URL)}")
        return False, None
    except Exception as e:
        logger.exception("An error occurred during run ledger initialization:", exc_info=e)
        return False, None


async def dispose_engine() -> None:
    if engine:
        await engine.dispose()
        logger.debug("Database engine disposed.")
