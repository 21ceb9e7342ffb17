import pandera.polars as pa
import polars as pl
from prefect import get_run_logger, task

from plasmon.test.gate import Finite, _assert_zero

# -----------------------------
# Pandera Schema (griglie di campo)
# -----------------------------
_COORDS = {ax: pa.Column(pl.Float64, nullable=False, checks=Finite) for ax in "xyz"}
_FIELDS = {
    f"{part}_{name}{ax}": pa.Column(pl.Float64, nullable=False, checks=Finite, required=(name == "E"))
    for name in ("E", "H")
    for ax in "xyz"
    for part in ("re", "im")
}

FieldGridSchema = pa.DataFrameSchema(
    {
        **_COORDS,
        "region": pa.Column(pl.Utf8, nullable=False, checks=pa.Check.isin(["interior", "exterior"])),
        **_FIELDS,
    },
    strict=True,
)


def check_field_frame(df: pl.DataFrame, radius: float, delta_min: float) -> pl.DataFrame:
    r = (pl.col("x") ** 2 + pl.col("y") ** 2 + pl.col("z") ** 2).sqrt()
    _assert_zero(
        df.select(((r - radius).abs() < delta_min * radius * (1 - 1e-12)).sum()).item(),
        "FAIL: punti nella fascia esclusa",
    )
    _assert_zero(
        df.select(((pl.col("region") == "interior") != (r < radius)).sum()).item(),
        "FAIL: regione incoerente con il raggio",
    )
    return FieldGridSchema.validate(df, lazy=True)


@task(name="validate_field_grid")
def validate_field_grid(df: pl.DataFrame, radius: float, delta_min: float) -> pl.DataFrame:
    logger = get_run_logger()
    logger.info(f"Avvio quality gate sulla griglia di campo ({df.height} punti)")
    out = check_field_frame(df, radius, delta_min)
    logger.info("Quality gate griglia superato.")
    return out
