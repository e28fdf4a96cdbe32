//! pass@k, critique-guided selection among parallel samples, and critique
//! accuracy.
//!
//! Everything here is pure; randomness comes only from explicit seeds.

mod accuracy;
mod passk;
mod report;
mod select;

pub use accuracy::{critique_accuracy_all_k, pairwise_critique_accuracy, LabeledJudgment};
pub use passk::pass_at_k;
pub use report::{
    build_report, curves_csv, gap_curves, EvalReport, GapRow, ReportRow, EXHAUSTIVE_CAP, REPORT_SCHEMA_ID,
};
pub use select::{
    binomial, draws, pass1_select_at_k, select_candidate, select_per_question, select_random, DrawPlan,
    QuestionSelection, Sample, SamplePool, Selection, Strategy,
};
