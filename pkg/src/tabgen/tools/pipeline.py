"""Pipeline MCP tools.

Each tool wraps one command function; the blocking work runs in a worker
thread so the server keeps serving other requests.
"""

import asyncio
from typing import Any, Dict, List, Optional

from fastmcp import Context
from fastmcp.exceptions import ToolError

from tabgen import commands
from tabgen.config import load_config_from_env
from tabgen.registry import get_model_registry


async def _run(ctx: Context, action: str, fn, *args, **kwargs) -> Dict[str, Any]:
    try:
        await ctx.info(f"{action}...")
        result = await asyncio.to_thread(fn, *args, **kwargs)
        await ctx.info(f"{action} finished")
        return result
    except ToolError:
        raise
    except Exception as e:
        await ctx.error(f"{action} failed: {str(e)}")
        raise ToolError(f"{action} failed: {str(e)}")


async def create_benchmark(
    out_dir: str,
    ctx: Context,
    patients: int = 811,
    seed: int = 0,
    missing_rate: float = 0.2
) -> Dict[str, Any]:
    """
    Write a synthetic benchmark corpus (raw.csv + schema.json).

    Args:
        out_dir: Output directory
        ctx: FastMCP Context (auto-injected)
        patients: Number of records (>= 50)
        seed: Master seed
        missing_rate: Share of values masked as missing

    Returns:
        {"raw": "...", "schema": "...", "manifest": "..."}
    """
    return await _run(ctx, "Creating benchmark", commands.cmd_benchmark, out_dir,
                      patients=patients, seed=seed, missing_rate=missing_rate)


async def prepare_data(
    schema_path: str,
    input_path: str,
    out_dir: str,
    ctx: Context,
    split: str = "0.2,0.2",
    seed: int = 0
) -> Dict[str, Any]:
    """
    Prepare a raw CSV: derive features, split, discretize, prune, encode.

    Args:
        schema_path: Raw schema JSON
        input_path: Raw CSV
        out_dir: Output directory for the prepared splits
        ctx: FastMCP Context (auto-injected)
        split: "test,validation" fractions
        seed: Split seed

    Returns:
        {"out": "...", "summary": {...}, "removed": [...]}
    """
    return await _run(ctx, "Preparing data", commands.cmd_prepare, schema_path, input_path, out_dir,
                      split=split, seed=seed)


async def train_model(
    data_dir: str,
    out_path: str,
    ctx: Context,
    config_path: Optional[str] = None,
    variant: Optional[str] = None,
    epochs: Optional[int] = None,
    seed: Optional[int] = None
) -> Dict[str, Any]:
    """
    Train a generator on a prepared directory.

    Args:
        data_dir: Prepared data directory
        out_path: Checkpoint path
        ctx: FastMCP Context (auto-injected)
        config_path: Optional training config JSON
        variant: SCCVAE, SCVAE, CCVAE or SCCVAE-Calpha
        epochs: Override the epoch budget
        seed: Override the seed

    Returns:
        {"checkpoint": "...", "history": "...", "epochs_run": 57, ...}
    """
    result = await _run(ctx, "Training", commands.cmd_train, data_dir, out_path,
                        config=config_path, seed=seed, variant=variant, epochs=epochs)
    get_model_registry().evict(out_path)
    return result


async def generate_records(
    model_path: str,
    condition: str,
    count: int,
    out_path: str,
    ctx: Context,
    k: int = 5,
    seed: int = 0,
    decode: str = "sample",
    sampler: str = "smote"
) -> Dict[str, Any]:
    """
    Generate synthetic records of one class from a checkpoint.

    Args:
        model_path: Checkpoint path
        condition: "risk" or "non-risk"
        count: Number of records
        out_path: Output CSV path
        ctx: FastMCP Context (auto-injected)
        k: Nearest neighbours for latent SMOTE
        seed: Sampling seed
        decode: "sample" or "argmax"
        sampler: "smote" or "prior"

    Returns:
        {"data": "...", "provenance": "...", "rows": 100}
    """
    threads = load_config_from_env().runtime.threads
    return await _run(ctx, f"Generating {count} '{condition}' records", commands.cmd_generate,
                      model_path, condition, count, out_path, k=k, seed=seed, decode=decode,
                      sampler=sampler, threads=threads)


async def evaluate_generator(
    data_dir: str,
    model_paths: List[str],
    out_path: str,
    ctx: Context,
    factors: Optional[List[int]] = None,
    classifiers: Optional[List[str]] = None,
    seeds: int = 5,
    seed: int = 0
) -> Dict[str, Any]:
    """
    Run the augmentation experiment for one or more checkpoints.

    Args:
        data_dir: Prepared data directory
        model_paths: Checkpoints to compare
        out_path: Report JSON path (a text table is written next to it)
        ctx: FastMCP Context (auto-injected)
        factors: Augmentation factors (default [2, 5])
        classifiers: Classifier kinds (default logreg, mlp, random_forest)
        seeds: Number of seeds per grid point
        seed: Master seed

    Returns:
        {"report": "...", "table": "...", "entries": 95, "consistency": {...}}
    """
    threads = load_config_from_env().runtime.threads
    return await _run(ctx, "Evaluating", commands.cmd_evaluate, data_dir, model_paths, out_path,
                      factors=factors or [2, 5],
                      classifiers=classifiers or ["logreg", "mlp", "random_forest"],
                      seeds=seeds, seed=seed, threads=threads)


async def describe_checkpoint(
    model_path: str,
    ctx: Context
) -> Dict[str, Any]:
    """
    Summarise a checkpoint without loading its weights into the caller.

    Args:
        model_path: Checkpoint path
        ctx: FastMCP Context (auto-injected)

    Returns:
        {"variant": "SCCVAE", "schema_hash": "...", "bank_sizes": {...}, ...}
    """
    checkpoint = await _run(ctx, "Loading checkpoint", get_model_registry().get, model_path)
    return checkpoint.describe()
