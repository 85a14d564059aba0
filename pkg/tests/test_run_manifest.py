# tests/test_run_manifest.py

import argparse

import pytest
from sqlalchemy import select
from sqlalchemy.ext.asyncio import AsyncSession, async_sessionmaker, create_async_engine

from src.db.database import Base
from src.db.models import RunRecord
from src.handlers.utils import render, render_csv
from src.middlewares.run_manifest import RunManifestMiddleware, exit_code_for, load_manifest, manifest_path


def namespace(**fields):
    base = {"command": "sample", "seed": 3, "out": None, "format": "csv"}
    base.update(fields)
    return argparse.Namespace(**base)


async def succeed(args, data):
    return {"status": "success", "records": [{"a": 1}], "info": {"edges": 7}}


async def misuse(args, data):
    return {"status": "error", "code": "UsageError", "message": "bad"}


def test_exit_codes():
    assert exit_code_for({"status": "success"}) == 0
    assert exit_code_for({"status": "error", "code": "UsageError"}) == 2
    assert exit_code_for({"status": "error", "code": "CapExceeded"}) == 1


def test_rendering():
    text = render_csv([{"a": 1, "b": [1, 2]}, {"a": 2, "c": {"x": 1}}])
    assert text.splitlines() == ["a,b,c", '1,"[1, 2]",', '2,,"{""x"": 1}"']
    assert render({"text": "raw\n", "records": [{"a": 1}]}, "csv") == "raw\n"
    assert '"text"' not in render({"text": None, "records": []}, "json")


@pytest.mark.asyncio
async def test_manifest_sidecar(tmp_path):
    out = tmp_path / "result.csv"
    data = {"argv": ["sample", "--seed", "3"]}
    middleware = RunManifestMiddleware()
    await middleware(succeed, namespace(out=str(out)), data)
    manifest = data["manifest"]
    assert manifest.exit_code == 0
    assert manifest.info == {"edges": 7}
    assert manifest.config["seed"] == 3
    assert "command" not in manifest.config
    stored = load_manifest(str(manifest_path(str(out))))
    assert stored.argv == ["sample", "--seed", "3"]
    assert stored.seed == 3


@pytest.mark.asyncio
async def test_failed_run_has_no_output(tmp_path):
    out = tmp_path / "result.csv"
    data = {}
    await RunManifestMiddleware()(misuse, namespace(out=str(out)), data)
    assert data["manifest"].exit_code == 2
    assert data["manifest"].output is None
    assert not manifest_path(str(out)).exists()


@pytest.mark.asyncio
async def test_seed_only_for_randomized_commands():
    data = {}
    await RunManifestMiddleware()(succeed, namespace(command="limit", seed=None), data)
    assert data["manifest"].seed is None


@pytest.mark.asyncio
async def test_runs_are_recorded_in_the_ledger(tmp_path):
    engine = create_async_engine(f"sqlite+aiosqlite:///{tmp_path / 'runs.db'}")
    async with engine.begin() as conn:
        await conn.run_sync(Base.metadata.create_all)
    pool = async_sessionmaker(bind=engine, class_=AsyncSession, expire_on_commit=False)
    try:
        await RunManifestMiddleware(pool)(succeed, namespace(), {"argv": ["sample"]})
        await RunManifestMiddleware(pool)(misuse, namespace(), {"argv": ["sample", "--n", "x"]})
        async with pool() as session:
            records = (await session.execute(select(RunRecord).order_by(RunRecord.id))).scalars().all()
        assert [r.exit_code for r in records] == [0, 2]
        assert records[0].subcommand == "sample"
        assert records[0].seed == 3
        assert records[1].argv == ["sample", "--n", "x"]
    finally:
        await engine.dispose()
