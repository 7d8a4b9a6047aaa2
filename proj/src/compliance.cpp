#include "mpc/compliance.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace mpc {

using json = nlohmann::json;

std::string to_string(Constraint c) {
    switch (c) {
        case Constraint::output_format: return "Output Format";
        case Constraint::interactions: return "Interactions";
        case Constraint::contribution: return "Contribution";
        case Constraint::speaker_count: return "Number of Speakers";
        case Constraint::message_count: return "Number of Messages";
        case Constraint::stance_distribution: return "Stance of the Speakers";
    }
    return "?";
}

const std::array<Constraint, kConstraintCount>& all_constraints() {
    static const std::array<Constraint, kConstraintCount> all = {
        Constraint::output_format,   Constraint::interactions,
        Constraint::contribution,    Constraint::speaker_count,
        Constraint::message_count,   Constraint::stance_distribution,
    };
    return all;
}

const ConstraintVerdict& ComplianceReport::verdict(Constraint c) const {
    for (const auto& v : verdicts)
        if (v.constraint == c) return v;
    return verdicts[0];
}

namespace {

ConstraintVerdict pass(Constraint c) { return {c, true, ""}; }
ConstraintVerdict fail(Constraint c, std::string detail) {
    return {c, false, std::move(detail)};
}

}  // namespace

ConstraintVerdict check_output_format(const json& doc) {
    const Constraint c = Constraint::output_format;
    if (!doc.is_object()) return fail(c, "document is not a dictionary");
    if (!doc.contains("conversation")) return fail(c, "missing key conversation");
    if (!doc.contains("speakers")) return fail(c, "missing key speakers");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "conversation" && it.key() != "speakers")
            return fail(c, "unexpected primary key " + it.key());
    }
    if (!doc["conversation"].is_array())
        return fail(c, "conversation is not a list");
    if (!doc["speakers"].is_array()) return fail(c, "speakers is not a list");
    for (std::size_t i = 0; i < doc["conversation"].size(); ++i) {
        const auto& t = doc["conversation"][i];
        const std::string where = "turn " + std::to_string(i);
        if (!t.is_object()) return fail(c, where + " is not a dictionary");
        if (!t.contains("speaker") || !t["speaker"].is_string())
            return fail(c, where + ": speaker missing or not a string");
        if (!t.contains("message") || !t["message"].is_string())
            return fail(c, where + ": message missing or not a string");
        if (!t.contains("addressees") || !t["addressees"].is_array())
            return fail(c, where + ": addressees missing or not a list");
        for (const auto& a : t["addressees"])
            if (!a.is_string())
                return fail(c, where + ": addressee entries must be strings");
    }
    for (std::size_t i = 0; i < doc["speakers"].size(); ++i) {
        const auto& s = doc["speakers"][i];
        const std::string where = "speaker " + std::to_string(i);
        if (!s.is_object()) return fail(c, where + " is not a dictionary");
        if (!s.contains("name") || !s["name"].is_string())
            return fail(c, where + ": name missing or not a string");
        if (!s.contains("stance") || !s["stance"].is_string())
            return fail(c, where + ": stance missing or not a string");
    }
    return pass(c);
}

ConstraintVerdict check_interactions(const Mpc& mpc, const ComplianceOptions& options) {
    const Constraint c = Constraint::interactions;
    std::set<std::string> roster;
    for (const auto& s : mpc.speakers) roster.insert(s.name);

    std::set<std::string> authors;
    std::set<std::string> addressed;
    for (const auto& t : mpc.turns) {
        authors.insert(t.speaker);
        if (!roster.count(t.speaker))
            return fail(c, "unknown speaker " + t.speaker + " at turn " +
                               std::to_string(t.index));
        for (const auto& a : t.addressees) {
            if (!roster.count(a))
                return fail(c, "unknown addressee " + a + " at turn " +
                                   std::to_string(t.index));
            if (a == t.speaker)
                return fail(c, "self-interaction at turn " +
                                   std::to_string(t.index));
            addressed.insert(a);
        }
    }
    if (options.speakers_must_be_addressed) {
        for (const auto& name : roster)
            if (!addressed.count(name))
                return fail(c, "speaker " + name + " is never addressed");
    } else {
        for (const auto& name : addressed)
            if (!authors.count(name))
                return fail(c, "addressee " + name + " never authors a turn");
    }
    return pass(c);
}

ConstraintVerdict check_contribution(const Mpc& mpc) {
    const Constraint c = Constraint::contribution;
    std::set<std::string> authors;
    for (const auto& t : mpc.turns) authors.insert(t.speaker);
    for (const auto& s : mpc.speakers)
        if (!authors.count(s.name))
            return fail(c, "speaker " + s.name + " authors no turn");
    return pass(c);
}

ConstraintVerdict check_speaker_count(const Mpc& mpc) {
    const Constraint c = Constraint::speaker_count;
    const auto n = mpc.speakers.size();
    if (n < 4 || n > 6)
        return fail(c, "roster has " + std::to_string(n) + " speakers");
    return pass(c);
}

ConstraintVerdict check_message_count(const Mpc& mpc, const ComplianceOptions& options) {
    const Constraint c = Constraint::message_count;
    const auto n = mpc.turns.size();
    if (n == 15) return pass(c);
    if (n > 15) {
        if (options.allow_long) return pass(c);
        return fail(c, std::to_string(n) + " turns exceed 15");
    }
    std::map<std::string, int> counts;
    for (const auto& t : mpc.turns) ++counts[t.speaker];
    for (const auto& s : mpc.speakers) {
        if (counts[s.name] < 2)
            return fail(c, std::to_string(n) + " turns and speaker " + s.name +
                               " has fewer than 2 messages");
    }
    return pass(c);
}

ConstraintVerdict check_stance_distribution(const Mpc& mpc,
                                            const StanceDistribution& expected) {
    const Constraint c = Constraint::stance_distribution;
    int pro = 0, against = 0;
    for (const auto& s : mpc.speakers)
        (s.stance == StanceValue::pro ? pro : against)++;
    if (pro != expected.pro_count || against != expected.against_count)
        return fail(c, "expected " + expected.label() + ", got " +
                           StanceDistribution{pro, against}.label());
    return pass(c);
}

std::vector<std::string> word_cap_warnings(const Mpc& mpc, int cap) {
    std::vector<std::string> warnings;
    for (const auto& t : mpc.turns) {
        int words = 0;
        std::istringstream in(t.message);
        std::string token;
        while (in >> token) ++words;
        if (words > cap)
            warnings.push_back("turn " + std::to_string(t.index) + " has " +
                               std::to_string(words) + " words (cap " +
                               std::to_string(cap) + ")");
    }
    return warnings;
}

bool first_turn_addresses_all(const Mpc& mpc) {
    if (mpc.turns.empty()) return false;
    const Turn& first = mpc.turns.front();
    std::set<std::string> addressed(first.addressees.begin(), first.addressees.end());
    for (const auto& s : mpc.speakers) {
        if (s.name == first.speaker) continue;
        if (!addressed.count(s.name)) return false;
    }
    return true;
}

namespace {

ConstraintVerdict stance_verdict_from_document(const json& doc,
                                               const StanceDistribution& expected) {
    const Constraint c = Constraint::stance_distribution;
    int pro = 0, against = 0;
    for (const auto& s : doc["speakers"]) {
        std::string raw = s.value("stance", std::string());
        auto matched = match_stance_surface(raw);
        if (!matched)
            return fail(c, "unmatched stance string \"" + raw + "\" for speaker " +
                               s.value("name", std::string()));
        (*matched == StanceValue::pro ? pro : against)++;
    }
    if (pro != expected.pro_count || against != expected.against_count)
        return fail(c, "expected " + expected.label() + ", got " +
                           StanceDistribution{pro, against}.label());
    return pass(c);
}

}  // namespace

ComplianceReport check_all(const GenerationOutcome& outcome,
                           const ComplianceOptions& options) {
    ComplianceReport report;
    report.group_keys["model"] = outcome.parsed
                                     ? outcome.parsed->provenance.model_id
                                     : std::string();
    report.group_keys["strategy"] = to_string(outcome.job.strategy);
    report.group_keys["variant"] = std::to_string(outcome.job.variant.number());
    report.group_keys["distribution"] = outcome.job.distribution.label();
    if (outcome.parsed) report.mpc_id = outcome.parsed->id;

    auto all_fail = [&](const std::string& format_detail) {
        report.verdicts[0] = fail(Constraint::output_format, format_detail);
        for (int i = 1; i < kConstraintCount; ++i)
            report.verdicts[i] = fail(all_constraints()[i], "unparseable");
        report.all_passed = false;
    };

    if (outcome.failure && outcome.document.empty()) {
        all_fail("generation failed: " + outcome.failure->stage + ": " +
                 outcome.failure->message);
        return report;
    }

    json doc = json::parse(outcome.document, nullptr, false);
    if (doc.is_discarded()) {
        all_fail("no extractable document");
        return report;
    }

    ConstraintVerdict format = check_output_format(doc);
    if (!format.passed) {
        all_fail(format.detail);
        return report;
    }
    report.verdicts[0] = format;

    // Format passed, so a lenient conversion is always available.
    Mpc mpc;
    if (outcome.parsed) {
        mpc = *outcome.parsed;
    } else {
        Provenance prov;
        prov.strategy = outcome.job.strategy;
        auto converted = mpc_from_document(doc, outcome.job.statement, prov);
        mpc = converted.value().mpc;
    }

    report.verdicts[1] = check_interactions(mpc, options);
    report.verdicts[2] = check_contribution(mpc);
    report.verdicts[3] = check_speaker_count(mpc);
    report.verdicts[4] = check_message_count(mpc, options);
    report.verdicts[5] = stance_verdict_from_document(doc, outcome.job.distribution);

    report.all_passed = std::all_of(report.verdicts.begin(), report.verdicts.end(),
                                    [](const ConstraintVerdict& v) { return v.passed; });
    report.warnings = word_cap_warnings(mpc);
    report.first_turn_addresses_all = first_turn_addresses_all(mpc);
    return report;
}

// --- Tabulation -------------------------------------------------------------

namespace {

std::string group_label(const ComplianceReport& report,
                        const std::vector<std::string>& group_by) {
    if (group_by.empty()) return "all";
    std::string label;
    for (const auto& key : group_by) {
        if (!label.empty()) label += "/";
        auto it = report.group_keys.find(key);
        label += it != report.group_keys.end() ? it->second : "?";
    }
    return label;
}

}  // namespace

ComplianceTable tabulate(const std::vector<ComplianceReport>& reports,
                         const std::vector<std::string>& group_by) {
    ComplianceTable table;
    std::map<std::string, std::map<std::string, std::size_t>> counts;
    std::map<std::string, std::size_t> all_counts;

    for (const auto& report : reports) {
        const std::string group = group_label(report, group_by);
        ++table.totals[group];
        for (const auto& v : report.verdicts)
            if (v.passed) ++counts[to_string(v.constraint)][group];
        if (report.all_passed) ++all_counts[group];
    }
    for (const auto& [group, n] : table.totals) table.groups.push_back(group);

    for (Constraint c : all_constraints()) {
        auto row = counts[to_string(c)];
        for (const auto& g : table.groups) row.emplace(g, 0);
        table.rows.emplace_back(to_string(c), std::move(row));
    }
    for (const auto& g : table.groups) all_counts.emplace(g, 0);
    table.rows.emplace_back("All Constraints", std::move(all_counts));
    return table;
}

std::string render_compliance_table(const ComplianceTable& table) {
    std::size_t label_width = 0;
    for (const auto& [label, row] : table.rows)
        label_width = std::max(label_width, label.size());
    std::vector<std::size_t> widths;
    for (const auto& g : table.groups) widths.push_back(std::max<std::size_t>(g.size(), 8));

    std::ostringstream out;
    out << std::string(label_width, ' ');
    for (std::size_t i = 0; i < table.groups.size(); ++i)
        out << "  " << std::string(widths[i] - table.groups[i].size(), ' ')
            << table.groups[i];
    out << '\n';
    for (const auto& [label, row] : table.rows) {
        out << label << std::string(label_width - label.size(), ' ');
        for (std::size_t i = 0; i < table.groups.size(); ++i) {
            std::string cell = std::to_string(row.at(table.groups[i]));
            out << "  " << std::string(widths[i] - cell.size(), ' ') << cell;
        }
        out << '\n';
    }
    out << "Total" << std::string(label_width - 5, ' ');
    for (std::size_t i = 0; i < table.groups.size(); ++i) {
        std::string cell = std::to_string(table.totals.at(table.groups[i]));
        out << "  " << std::string(widths[i] - cell.size(), ' ') << cell;
    }
    out << '\n';
    return out.str();
}

std::string compliance_table_jsonl(const ComplianceTable& table) {
    std::ostringstream out;
    for (const auto& g : table.groups) {
        for (const auto& [label, row] : table.rows) {
            json j;
            j["group"] = g;
            j["constraint"] = label;
            j["passed"] = row.at(g);
            j["total"] = table.totals.at(g);
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

}  // namespace mpc
