"""Component tests for error handling across commands, tools and the CLI."""

import pytest
from unittest.mock import patch
from fastmcp.exceptions import ToolError

from tabgen import errors
from tabgen.cli import run
from tabgen.config import TabgenConfig
from tabgen.tools.pipeline import create_benchmark, prepare_data, train_model


@pytest.mark.parametrize("error, code", [
    (errors.ConfigError, 2),
    (errors.ContractError, 2),
    (errors.ShapeError, 2),
    (errors.SchemaError, 2),
    (errors.EncodingError, 2),
    (errors.StratificationError, 2),
    (errors.NumericError, 3),
    (errors.InsufficientDataError, 4),
    (errors.BankError, 4),
    (errors.IoError, 5),
    (errors.MagicError, 5),
    (errors.VersionError, 5),
    (errors.SchemaMismatchError, 5),
    (errors.TruncatedCheckpointError, 5),
])
def test_exit_codes(error, code):
    """Test each error class carries its CLI exit code."""
    assert error.exit_code == code
    assert issubclass(error, errors.TabgenError)


@pytest.mark.parametrize("error, code", [
    (errors.NumericError("loss is NaN at epoch 3, batch 1"), 3),
    (errors.BankError("risk bank has 4 vectors"), 4),
    (errors.StratificationError("risk: 3 records"), 2),
])
def test_cli_maps_errors(error, code, tmp_path, caplog):
    """Test the CLI turns library errors into exit codes and logs them."""
    with patch("tabgen.cli.commands.cmd_benchmark", side_effect=error):
        assert run(["benchmark", "--out", str(tmp_path)], TabgenConfig()) == code
    assert "benchmark failed" in caplog.text


# Tool error paths
@pytest.mark.asyncio
async def test_tool_unexpected_exception(mock_context):
    """Test tools wrap unexpected exceptions in ToolError."""
    with patch("tabgen.tools.pipeline.commands.cmd_benchmark",
               side_effect=RuntimeError("Unexpected error")):
        with pytest.raises(ToolError, match="Creating benchmark failed: Unexpected error"):
            await create_benchmark(out_dir="unused", ctx=mock_context)

    mock_context.error.assert_called_once()


@pytest.mark.asyncio
async def test_tool_passes_tool_errors_through(mock_context):
    """Test an existing ToolError is not wrapped twice."""
    with patch("tabgen.tools.pipeline.commands.cmd_benchmark",
               side_effect=ToolError("already reported")):
        with pytest.raises(ToolError, match="^already reported$"):
            await create_benchmark(out_dir="unused", ctx=mock_context)

    mock_context.error.assert_not_called()


@pytest.mark.asyncio
async def test_prepare_missing_files(mock_context, tmp_path):
    """Test prepare reports a missing schema."""
    with pytest.raises(ToolError, match="Preparing data failed"):
        await prepare_data(
            schema_path=str(tmp_path / "schema.json"),
            input_path=str(tmp_path / "raw.csv"),
            out_dir=str(tmp_path / "out"),
            ctx=mock_context
        )


@pytest.mark.asyncio
async def test_prepare_column_mismatch(mock_context, tmp_path):
    """Test prepare rejects a CSV whose columns differ from the schema."""
    await create_benchmark(out_dir=str(tmp_path), ctx=mock_context, patients=60)
    raw = tmp_path / "raw.csv"
    lines = raw.read_text().splitlines()
    raw.write_text("\n".join([lines[0].replace("age", "years")] + lines[1:]) + "\n")

    with pytest.raises(ToolError, match="Preparing data failed"):
        await prepare_data(
            schema_path=str(tmp_path / "schema.json"),
            input_path=str(raw),
            out_dir=str(tmp_path / "out"),
            ctx=mock_context
        )


@pytest.mark.asyncio
async def test_train_missing_directory(mock_context, tmp_path):
    """Test training on a directory without prepared splits."""
    with pytest.raises(ToolError, match="Training failed"):
        await train_model(
            data_dir=str(tmp_path / "nothing"),
            out_path=str(tmp_path / "m.ckpt"),
            ctx=mock_context,
            epochs=4
        )


@pytest.mark.asyncio
async def test_train_bad_config(mock_context, tmp_path):
    """Test a malformed training config is reported."""
    config = tmp_path / "train.json"
    config.write_text("{not json")
    with pytest.raises(ToolError, match="Invalid JSON"):
        await train_model(
            data_dir=str(tmp_path),
            out_path=str(tmp_path / "m.ckpt"),
            ctx=mock_context,
            config_path=str(config)
        )
