#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mpc/common.hpp"
#include "mpc/core.hpp"
#include "mpc/llm.hpp"

namespace mpc {

enum class QualityDimension {
    naturalness,
    argumentability,
    stance_consistency,
    stance_evolution,
    addressee_correctness,
    addressee_preciseness,
};
inline constexpr int kDimensionCount = 6;
const std::vector<QualityDimension>& all_dimensions();
std::string to_string(QualityDimension d);
std::optional<QualityDimension> dimension_from_string(const std::string& s);

struct RatingRecord {
    std::string mpc_id;
    std::string rater_id;  // human id or judge model id
    std::map<QualityDimension, int> scores;  // each in 1..5
    std::string raw_response;  // retained for judge raters
};

// --- Stratified sampling ----------------------------------------------------

struct SampleCell {
    std::string label;  // e.g. model/strategy
    std::vector<Mpc> population;
};

// Draws exactly n_per_cell conversations per cell; within a cell, counts per
// topic and per stance distribution deviate from uniform by at most 1.
// Deterministic under a fixed seed.
Result<std::vector<Mpc>, std::string> stratified_sample(
    const std::vector<SampleCell>& cells, int n_per_cell, std::uint64_t seed);

// --- Judge ------------------------------------------------------------------

std::string judge_rubric_prompt(const std::vector<QualityDimension>& dimensions);
std::string render_conversation_for_rating(const Mpc& mpc);

struct JudgeOptions {
    std::string judge_model_id;
    std::vector<QualityDimension> dimensions = all_dimensions();
    DecodingParams decoding;
    RetryPolicy retry{3, 200, false};
    TraceLog* trace = nullptr;
};

// One chat call per conversation; out-of-range or missing scores trigger a
// single re-prompt before failing.
Result<RatingRecord, std::string> judge_mpc(ChatClient& client, const Mpc& mpc,
                                            const JudgeOptions& options);

// --- Agreement statistics ---------------------------------------------------

// items x raters, missing entries as nullopt
using RatingMatrix = std::vector<std::vector<std::optional<double>>>;

// Krippendorff's alpha for interval data, pairwise deletion of missing
// entries. Errors: no pairable values; "undefined" when expected
// disagreement is zero (reported as -infinity by callers).
Result<double, std::string> krippendorff_alpha_interval(const RatingMatrix& ratings);

struct SpearmanResult {
    double rho = 0.0;
    double p_value = 1.0;
};

// Pearson correlation of mid-ranks; exact permutation p for n <= 8, a
// t-distribution approximation otherwise. Errors on constant input.
Result<SpearmanResult, std::string> spearman(const std::vector<double>& x,
                                             const std::vector<double>& y);

// Mid-ranks with average ranks for ties.
std::vector<double> midranks(const std::vector<double>& values);

// --- Annotation batches -----------------------------------------------------

// TSV batches: conversation text, roster with stances, and empty score
// columns for the six dimensions. Returns the files written.
std::vector<std::string> export_annotation_batch(const std::vector<Mpc>& sample,
                                                 int batch_size,
                                                 const std::string& out_dir,
                                                 const std::string& prefix = "batch");

// Validates score ranges; rejects rows with scores outside 1..5 naming the
// row, and files missing a dimension column.
Result<std::vector<RatingRecord>, std::string> import_ratings(const std::string& path);

// Rating record (de)serialization as JSON lines.
std::string serialize_rating(const RatingRecord& record);
Result<std::vector<RatingRecord>, std::string> read_ratings_jsonl(const std::string& path);
void write_ratings_jsonl(const std::string& path, const std::vector<RatingRecord>& records);

// --- Report -----------------------------------------------------------------

struct AgreementResult {
    QualityDimension dimension = QualityDimension::naturalness;
    double krippendorff_alpha = 0.0;
    bool alpha_defined = true;
    double spearman_rho = 0.0;
    double p_value = 1.0;
    std::size_t n_items = 0;
};

struct AgreementReport {
    std::vector<AgreementResult> per_dimension;
    // mean scores per rater per group label (from joined MPC metadata)
    std::map<std::string, std::map<std::string, std::map<QualityDimension, double>>>
        mean_scores;  // rater -> group -> dimension -> mean
};

// Joins on mpc id; errors when the item sets are disjoint. group_of maps an
// mpc id to its table column (e.g. model/strategy), empty = one group.
Result<AgreementReport, std::string> agreement_report(
    const std::vector<RatingRecord>& human, const std::vector<RatingRecord>& judge,
    const std::map<std::string, std::string>& group_of = {});

// Mean-score block per rater and group plus per-dimension agreement block
// with significance markers (* p < 0.05, ** p < 0.001).
std::string render_agreement_report(const AgreementReport& report);
std::string agreement_report_jsonl(const AgreementReport& report);

}  // namespace mpc
