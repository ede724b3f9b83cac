from .ablation import (LAYOUTS, AblationData, AblationRow, AblationSpec, aggregate, comparison_rows,
                       format_comparison, layout_specs, run_ablation_grid, run_single, write_comparison)
from .evaluate import (evaluate_model, model_from_checkpoint, oracle_scores, save_model_checkpoint,
                       save_oracle_checkpoint, table_from_extra, table_to_extra)
from .metrics import (REPORT_COLUMNS, MetricsReport, ground_truth_ranks, mean_rank, metrics_from_rankings,
                      metrics_from_scores, recall_at_k)
from .projection import (ProjectionReport, classical_mds, cosine_distances, embedding_projection_report, family_cosine_gap,
                         project_2d)
from .reports import metrics_csv, metrics_text, write_metrics_report
