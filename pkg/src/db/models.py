# src/db/models.py

from datetime import datetime
from typing import TYPE_CHECKING, Any, Dict, List, Optional

from sqlalchemy import JSON, TIMESTAMP, Float, Integer, String, func
from sqlalchemy.orm import Mapped, mapped_column

from .database import Base

if TYPE_CHECKING:
    from src.middlewares.run_manifest import RunManifest


class RunRecord(Base):
    """
    Один запуск CLI у журналі запусків.
    """
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, autoincrement=True)
    subcommand: Mapped[str] = mapped_column(String(32), nullable=False, index=True)
    argv: Mapped[List[str]] = mapped_column(JSON, nullable=False)
    config: Mapped[Dict[str, Any]] = mapped_column(JSON, nullable=False)
    seed: Mapped[Optional[int]] = mapped_column(Integer, nullable=True)
    tool_version: Mapped[str] = mapped_column(String(32), nullable=False)
    wall_time: Mapped[float] = mapped_column(Float, nullable=False)
    exit_code: Mapped[int] = mapped_column(Integer, nullable=False)
    output_path: Mapped[Optional[str]] = mapped_column(String(512), nullable=True)

    created_at: Mapped[datetime] = mapped_column(
        TIMESTAMP(timezone=True), server_default=func.now()
    )

    @classmethod
    def from_manifest(cls, manifest: "RunManifest") -> "RunRecord":
        return cls(
            subcommand=manifest.subcommand,
            argv=manifest.argv,
            config=manifest.model_dump(mode="json")["config"],
            seed=manifest.seed,
            tool_version=manifest.version,
            wall_time=manifest.wall_time,
            exit_code=manifest.exit_code,
            output_path=manifest.output,
        )

    def __repr__(self) -> str:
        return (f"<RunRecord(id={self.id}, subcommand='{self.subcommand}', seed={self.seed}, "
                f"exit_code={self.exit_code}, wall_time={self.wall_time})>")
