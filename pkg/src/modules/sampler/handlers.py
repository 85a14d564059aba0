# src/modules/sampler/handlers.py

import argparse
import asyncio
import logging
from typing import Any, Dict

from src.modules.structure.serialization import dumps
from src.modules.vocabulary.presets import load_vocabulary
from src.modules.vocabulary.service import parse_densities
from src.utils.errors import SparseLimitError

from .service import SampleConfig, expected_edge_count, pattern_counts, sample

logger = logging.getLogger(__name__)


def _generate_sample_error(code: str, message: str) -> Dict[str, Any]:
    logger.error(f"sample failed: {code}: {message}")
    return {"status": "error", "code": code, "message": message}


def _draw(args: argparse.Namespace) -> Dict[str, Any]:
    vocab = load_vocabulary(args.vocab)
    regime = "p" if args.p is not None else "beta"
    densities = parse_densities(args.p if args.p is not None else args.beta, vocab)
    cfg = SampleConfig(vocabulary=args.vocab, n=args.n, densities=densities.as_dict(), seed=args.seed, regime=regime)
    H = sample(vocab, cfg, index=args.index)
    expected = expected_edge_count(vocab, densities, cfg.n, regime)
    records = [{"relation": name, "distinct_vertices": d, "edges": count}
               for (name, d), count in sorted(pattern_counts(H).items())]
    return {
        "status": "success",
        "text": dumps(H),
        "records": records,
        "info": {"vocabulary": vocab.name, "n": H.order, "edges": H.num_edges, "expected_edges": expected,
                 "regime": regime, "index": args.index},
    }


async def sample_entry_point(args: argparse.Namespace, data: Dict[str, Any]) -> Dict[str, Any]:
    logger.info(f"sample: vocabulary={args.vocab}, n={args.n}, seed={args.seed}, index={args.index}")
    loop = asyncio.get_running_loop()
    try:
        return await loop.run_in_executor(None, _draw, args)
    except SparseLimitError as e:
        return _generate_sample_error(e.code, e.message)
    except ValueError as e:
        return _generate_sample_error("UsageError", str(e))
