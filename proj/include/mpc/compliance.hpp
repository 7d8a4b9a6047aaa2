#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mpc/core.hpp"
#include "mpc/generator.hpp"

namespace mpc {

enum class Constraint {
    output_format,
    interactions,
    contribution,
    speaker_count,
    message_count,
    stance_distribution,
};
inline constexpr int kConstraintCount = 6;
std::string to_string(Constraint c);
const std::array<Constraint, kConstraintCount>& all_constraints();

struct ConstraintVerdict {
    Constraint constraint = Constraint::output_format;
    bool passed = false;
    std::string detail;  // non-empty iff failed
};

struct ComplianceReport {
    std::string mpc_id;
    std::map<std::string, std::string> group_keys;  // model, strategy, variant, distribution
    std::array<ConstraintVerdict, kConstraintCount> verdicts;
    bool all_passed = false;
    std::vector<std::string> warnings;  // word-cap violations, non-gating
    bool first_turn_addresses_all = false;

    const ConstraintVerdict& verdict(Constraint c) const;
};

struct ComplianceOptions {
    bool allow_long = false;  // accept conversations with more than 15 turns
    // Alternate reading of the addressee-coverage clause: every roster
    // speaker must appear as an addressee somewhere (default: every
    // addressee must author at least one turn).
    bool speakers_must_be_addressed = false;
};

ConstraintVerdict check_output_format(const nlohmann::json& doc);
ConstraintVerdict check_interactions(const Mpc& mpc, const ComplianceOptions& options = {});
ConstraintVerdict check_contribution(const Mpc& mpc);
ConstraintVerdict check_speaker_count(const Mpc& mpc);
ConstraintVerdict check_message_count(const Mpc& mpc, const ComplianceOptions& options = {});
ConstraintVerdict check_stance_distribution(const Mpc& mpc,
                                            const StanceDistribution& expected);

// Non-gating checks.
std::vector<std::string> word_cap_warnings(const Mpc& mpc, int cap = 50);
bool first_turn_addresses_all(const Mpc& mpc);

// Runs the format check on the outcome's extracted document and the other
// five on the parsed conversation; a format failure (or a generation
// failure) short-circuits the rest to "unparseable". The stance check uses
// the document's surface forms through the synonym table.
ComplianceReport check_all(const GenerationOutcome& outcome,
                           const ComplianceOptions& options = {});

struct ComplianceTable {
    std::vector<std::string> groups;  // column labels, sorted
    // rows: constraint label (or "All Constraints") -> group -> pass count
    std::vector<std::pair<std::string, std::map<std::string, std::size_t>>> rows;
    std::map<std::string, std::size_t> totals;  // reports per group
};

ComplianceTable tabulate(const std::vector<ComplianceReport>& reports,
                         const std::vector<std::string>& group_by);

std::string render_compliance_table(const ComplianceTable& table);

// Machine-readable rows: one JSON object per (group, constraint).
std::string compliance_table_jsonl(const ComplianceTable& table);

}  // namespace mpc
