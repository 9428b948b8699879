from .baseline import baseline_generate
from .config import load_config
from .dataset import (
    BenchmarkItem,
    difficulty_counts,
    estimate_spider_hardness,
    filter_by_ids,
    load_dataset,
    load_question_ids,
    subsample_sds,
)
from .runner import (
    RunEnvironment,
    item_seed,
    load_report_records,
    run_benchmark,
    run_one_item,
    summarize,
    write_predictions,
)

__all__ = [
    "BenchmarkItem",
    "RunEnvironment",
    "baseline_generate",
    "difficulty_counts",
    "estimate_spider_hardness",
    "filter_by_ids",
    "item_seed",
    "load_config",
    "load_dataset",
    "load_question_ids",
    "load_report_records",
    "run_benchmark",
    "run_one_item",
    "subsample_sds",
    "summarize",
    "write_predictions",
]
