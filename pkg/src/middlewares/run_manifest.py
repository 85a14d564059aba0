# src/middlewares/run_manifest.py

import argparse
import json
import logging
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Awaitable, Callable, Dict, List, Optional

from pydantic import BaseModel, Field
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker

from src import config as app_config

logger = logging.getLogger(__name__)

Handler = Callable[[argparse.Namespace, Dict[str, Any]], Awaitable[Dict[str, Any]]]

RANDOMIZED_COMMANDS = {"sample", "mc", "sat-scan", "cert-scan", "cnf"}


class RunManifest(BaseModel):
    subcommand: str
    argv: List[str]
    config: Dict[str, Any]
    seed: Optional[int] = None
    version: str = app_config.APP_VERSION
    started_at: datetime
    wall_time: float = 0.0
    status: str = "success"
    exit_code: int = 0
    output: Optional[str] = None
    info: Dict[str, Any] = Field(default_factory=dict)


def exit_code_for(result: Dict[str, Any]) -> int:
    if result.get("status") == "success":
        return 0
    return 2 if result.get("code") == "UsageError" else 1


def manifest_path(out: str) -> Path:
    return Path(f"{out}.manifest.json")


def load_manifest(path: str) -> RunManifest:
    return RunManifest.model_validate_json(Path(path).read_text(encoding="utf-8"))


def write_manifest(manifest: RunManifest, out: Optional[str]) -> None:
    if out:
        manifest_path(out).write_text(manifest.model_dump_json(indent=2), encoding="utf-8")
        logger.debug(f"Manifest written to {manifest_path(out)}")
    else:
        print(manifest.model_dump_json(), file=sys.stderr)


class RunManifestMiddleware:
    """
    Обгортка навколо обробника команди: вимірює час, пише маніфест поруч із результатом
    і, якщо журнал увімкнено, додає запис RunRecord через сесію SQLAlchemy.
    """
    def __init__(self, session_pool: Optional[async_sessionmaker[AsyncSession]] = None):
        self.session_pool = session_pool

    async def __call__(self, handler: Handler, args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
        started = datetime.now(timezone.utc)
        t0 = time.perf_counter()
        logger.debug(f"RunManifestMiddleware: before handler '{args.command}'")
        result = await handler(args, data)
        exit_code = exit_code_for(result)
        out = getattr(args, "out", None)
        manifest = RunManifest(
            subcommand=args.command,
            argv=list(data.get("argv", [])),
            config={k: v for k, v in vars(args).items() if k != "command"},
            seed=args.seed if args.command in RANDOMIZED_COMMANDS else None,
            started_at=started,
            wall_time=round(time.perf_counter() - t0, 6),
            status=result.get("status", "error"),
            exit_code=exit_code,
            output=out if exit_code == 0 else None,
            info=result.get("info") or {},
        )
        write_manifest(manifest, out if exit_code == 0 else None)
        data["manifest"] = manifest
        await self._record(manifest)
        return result

    async def _record(self, manifest: RunManifest) -> None:
        if not self.session_pool:
            return
        from src.db.models import RunRecord

        try:
            async with self.session_pool() as session:
                session.add(RunRecord.from_manifest(manifest))
                await session.commit()
                logger.debug("RunManifestMiddleware: run recorded in the ledger")
        except Exception as e:
            logger.warning(f"RunManifestMiddleware: could not record run in the ledger: {e}")
