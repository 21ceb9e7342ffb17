import pandera.polars as pa
import polars as pl
from prefect import get_run_logger, task

# -----------------------------
# Pandera Schemas
# -----------------------------
def _finite(data: pa.PolarsData) -> pl.LazyFrame:
    return data.lazyframe.select(pl.col(data.key).is_finite())


Finite = pa.Check(_finite, error="valori non finiti")

SpectrumSchema = pa.DataFrameSchema(
    {
        "n": pa.Column(pl.Int64, nullable=False, checks=pa.Check.ge(1)),
        **{
            f"{part}_tau{i}": pa.Column(pl.Float64, nullable=False, checks=Finite)
            for i in range(1, 5)
            for part in ("re", "im")
        },
        # alpha = inf quando v_phi = 0: nessun controllo di finitezza
        **{f"{part}_alpha{i}": pa.Column(pl.Float64, nullable=True) for i in range(1, 5) for part in ("re", "im")},
        "flag_admissible": pa.Column(pl.Boolean, nullable=False),
        "flag_defective": pa.Column(pl.Boolean, nullable=False),
    },
    strict=True,
)

ScanSchema = pa.DataFrameSchema(
    {
        "n_star": pa.Column(pl.Int64, nullable=False, checks=pa.Check.ge(1)),
        "channel": pa.Column(pl.Int64, nullable=False, checks=pa.Check.isin([1, 2, 3, 4])),
        "objective": pa.Column(pl.Float64, nullable=False, checks=[pa.Check.ge(0), Finite]),
        "meets_threshold": pa.Column(pl.Boolean, nullable=False, required=False),
    },
    # colonne dei parametri e dei verdetti variano con la scansione
    strict=False,
)


def _assert_zero(val: int, msg: str):
    if val and int(val) != 0:
        raise ValueError(f"{msg} (count={val})")


def check_spectrum_frame(df: pl.DataFrame) -> pl.DataFrame:
    if df.height == 0:
        raise ValueError("FAIL: tabella spettrale vuota (count=0)")
    _assert_zero(
        df.select((pl.col("n").diff().drop_nulls() <= 0).sum()).item(),
        "FAIL: n non strettamente crescente",
    )
    return SpectrumSchema.validate(df, lazy=True)


def check_scan_frame(df: pl.DataFrame, n_range: tuple[int, int]) -> pl.DataFrame:
    lo, hi = n_range
    if df.height == 0:
        return df
    _assert_zero(
        df.select(((pl.col("n_star") < lo) | (pl.col("n_star") > hi)).sum()).item(),
        "FAIL: n_star fuori dall'intervallo di gradi",
    )
    return ScanSchema.validate(df, lazy=True)


@task(name="validate_spectrum")
def validate_spectrum(df: pl.DataFrame) -> pl.DataFrame:
    logger = get_run_logger()
    logger.info(f"Avvio quality gate sullo spettro ({df.height} righe)")
    out = check_spectrum_frame(df)
    logger.info("Quality gate spettro superato.")
    return out


@task(name="validate_scan")
def validate_scan(df: pl.DataFrame, n_range: tuple[int, int]) -> pl.DataFrame:
    logger = get_run_logger()
    logger.info(f"Avvio quality gate sulla scansione ({df.height} punti)")
    out = check_scan_frame(df, n_range)
    logger.info("Quality gate scansione superato.")
    return out
