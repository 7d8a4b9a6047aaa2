#include "mpc/agreement.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpc {

using json = nlohmann::json;

const std::vector<QualityDimension>& all_dimensions() {
    static const std::vector<QualityDimension> all = {
        QualityDimension::naturalness,          QualityDimension::argumentability,
        QualityDimension::stance_consistency,   QualityDimension::stance_evolution,
        QualityDimension::addressee_correctness, QualityDimension::addressee_preciseness,
    };
    return all;
}

std::string to_string(QualityDimension d) {
    switch (d) {
        case QualityDimension::naturalness: return "naturalness";
        case QualityDimension::argumentability: return "argumentability";
        case QualityDimension::stance_consistency: return "stance_consistency";
        case QualityDimension::stance_evolution: return "stance_evolution";
        case QualityDimension::addressee_correctness: return "addressee_correctness";
        case QualityDimension::addressee_preciseness: return "addressee_preciseness";
    }
    return "?";
}

std::optional<QualityDimension> dimension_from_string(const std::string& s) {
    for (auto d : all_dimensions())
        if (to_string(d) == s) return d;
    return std::nullopt;
}

// --- Stratified sampling ----------------------------------------------------

Result<std::vector<Mpc>, std::string> stratified_sample(
    const std::vector<SampleCell>& cells, int n_per_cell, std::uint64_t seed) {
    using R = Result<std::vector<Mpc>, std::string>;
    if (n_per_cell <= 0) return R::err("n_per_cell must be positive");

    std::vector<Mpc> out;
    for (const auto& cell : cells) {
        if (static_cast<int>(cell.population.size()) < n_per_cell)
            return R::err("cell " + cell.label + " holds only " +
                          std::to_string(cell.population.size()) + " of " +
                          std::to_string(n_per_cell) + " required conversations");

        // deterministic order before shuffling, independent of input order
        std::vector<const Mpc*> candidates;
        for (const auto& m : cell.population) candidates.push_back(&m);
        std::sort(candidates.begin(), candidates.end(),
                  [](const Mpc* a, const Mpc* b) { return a->id < b->id; });
        std::mt19937_64 rng(seed ^ fnv1a64(cell.label));
        std::shuffle(candidates.begin(), candidates.end(), rng);

        auto topic_of = [](const Mpc& m) {
            return m.statement.topic_id + ":" + to_string(m.statement.polarity);
        };
        auto stance_of = [](const Mpc& m) {
            return m.provenance.stance_distribution.label();
        };
        std::set<std::string> topics, stances;
        for (const Mpc* m : candidates) {
            topics.insert(topic_of(*m));
            stances.insert(stance_of(*m));
        }
        const int topic_cap = (n_per_cell + static_cast<int>(topics.size()) - 1) /
                              static_cast<int>(topics.size());
        const int stance_cap = (n_per_cell + static_cast<int>(stances.size()) - 1) /
                               static_cast<int>(stances.size());

        std::map<std::string, int> topic_counts, stance_counts;
        std::vector<const Mpc*> picked;
        // first pass: strict caps in shuffle order
        for (const Mpc* m : candidates) {
            if (static_cast<int>(picked.size()) >= n_per_cell) break;
            if (topic_counts[topic_of(*m)] >= topic_cap ||
                stance_counts[stance_of(*m)] >= stance_cap)
                continue;
            picked.push_back(m);
            ++topic_counts[topic_of(*m)];
            ++stance_counts[stance_of(*m)];
        }
        // fill pass: always take the least-represented topic/stance next
        while (static_cast<int>(picked.size()) < n_per_cell) {
            const Mpc* best = nullptr;
            for (const Mpc* m : candidates) {
                if (std::find(picked.begin(), picked.end(), m) != picked.end())
                    continue;
                if (!best ||
                    std::pair(topic_counts[topic_of(*m)],
                              stance_counts[stance_of(*m)]) <
                        std::pair(topic_counts[topic_of(*best)],
                                  stance_counts[stance_of(*best)]))
                    best = m;
            }
            if (!best) break;
            picked.push_back(best);
            ++topic_counts[topic_of(*best)];
            ++stance_counts[stance_of(*best)];
        }
        if (static_cast<int>(picked.size()) < n_per_cell)
            return R::err("cell " + cell.label + " cannot be balanced");
        for (const Mpc* m : picked) out.push_back(*m);
    }
    return out;
}

// --- Judge ------------------------------------------------------------------

namespace {

std::string dimension_description(QualityDimension d) {
    switch (d) {
        case QualityDimension::naturalness:
            return "the overall flow, tone and word choice of the conversation";
        case QualityDimension::argumentability:
            return "how well the conversation presents reasoned, well-argued "
                   "positions";
        case QualityDimension::stance_consistency:
            return "whether every speaker holds their assigned stance when "
                   "entering the conversation";
        case QualityDimension::stance_evolution:
            return "whether speakers show a realistic and logical evolution of "
                   "their stance over the conversation, or hold it consistently";
        case QualityDimension::addressee_correctness:
            return "whether the assigned addressees fit the conversation "
                   "context and are logically appropriate";
        case QualityDimension::addressee_preciseness:
            return "whether addressees are precise: each message should target "
                   "the smallest relevant group of participants";
    }
    return "";
}

}  // namespace

std::string judge_rubric_prompt(const std::vector<QualityDimension>& dimensions) {
    std::ostringstream out;
    out << "You rate the quality of one multi-party conversation. Score each "
           "of the following dimensions on a Likert scale from 1 (poor) to 5 "
           "(perfect):\n";
    for (auto d : dimensions)
        out << "- " << to_string(d) << ": " << dimension_description(d) << "\n";
    out << "Respond with a single JSON dictionary mapping every dimension name "
           "to an integer from 1 to 5, and nothing else.\n";
    return out.str();
}

std::string render_conversation_for_rating(const Mpc& mpc) {
    std::ostringstream out;
    out << "Statement under discussion: " << mpc.statement.text << "\n\nSpeakers:\n";
    for (const auto& s : mpc.speakers)
        out << "- " << s.name << " (" << to_string(s.stance) << ")\n";
    out << "\nConversation:\n";
    for (const auto& t : mpc.turns) {
        out << '[' << t.index << "] " << t.speaker << " (to";
        for (const auto& a : t.addressees) out << ' ' << a;
        out << "): " << t.message << '\n';
    }
    return out.str();
}

Result<RatingRecord, std::string> judge_mpc(ChatClient& client, const Mpc& mpc,
                                            const JudgeOptions& options) {
    using R = Result<RatingRecord, std::string>;
    ChatRequest request;
    request.model_id = options.judge_model_id;
    request.decoding = options.decoding;
    request.messages.push_back({"system", judge_rubric_prompt(options.dimensions)});
    request.messages.push_back({"user", render_conversation_for_rating(mpc)});

    std::string last_error;
    for (int attempt = 0; attempt < 2; ++attempt) {
        ChatResult reply = chat_with_retry(client, request, options.retry);
        if (options.trace) options.trace->record(request, reply);
        if (!reply.ok())
            return R::err("judge call failed: " + reply.error().message);

        json doc = json::parse(reply.value(), nullptr, false);
        if (doc.is_discarded()) {
            // the judge may wrap the object in prose; fall back to a scan
            std::size_t open = reply.value().find('{');
            std::size_t close = reply.value().rfind('}');
            if (open != std::string::npos && close != std::string::npos && close > open)
                doc = json::parse(reply.value().substr(open, close - open + 1),
                                  nullptr, false);
        }
        if (doc.is_discarded() || !doc.is_object()) {
            last_error = "unparseable judge output";
            continue;
        }

        RatingRecord record;
        record.mpc_id = mpc.id;
        record.rater_id = options.judge_model_id;
        record.raw_response = reply.value();
        bool valid = true;
        for (auto d : options.dimensions) {
            const std::string key = to_string(d);
            if (!doc.contains(key) || !doc[key].is_number_integer()) {
                last_error = "missing score for " + key;
                valid = false;
                break;
            }
            int score = doc[key].get<int>();
            if (score < 1 || score > 5) {
                last_error = "score out of range for " + key + ": " +
                             std::to_string(score);
                valid = false;
                break;
            }
            record.scores[d] = score;
        }
        if (valid) return record;
    }
    return R::err("scoring failed after retry: " + last_error);
}

// --- Agreement statistics ---------------------------------------------------

Result<double, std::string> krippendorff_alpha_interval(const RatingMatrix& ratings) {
    using R = Result<double, std::string>;

    // pairable values: entries of items rated by at least 2 raters
    std::vector<std::vector<double>> units;
    std::vector<double> all_values;
    for (const auto& row : ratings) {
        std::vector<double> unit;
        for (const auto& v : row)
            if (v) unit.push_back(*v);
        if (unit.size() >= 2) {
            all_values.insert(all_values.end(), unit.begin(), unit.end());
            units.push_back(std::move(unit));
        }
    }
    const double n = static_cast<double>(all_values.size());
    if (units.empty()) return R::err("no pairable values");

    // observed disagreement: within-unit squared differences
    // sum_{i != j} (x_i - x_j)^2 = 2 * (m * sum x^2 - (sum x)^2)
    double d_obs = 0.0;
    for (const auto& unit : units) {
        const double m = static_cast<double>(unit.size());
        double sum = 0.0, sum_sq = 0.0;
        for (double x : unit) {
            sum += x;
            sum_sq += x * x;
        }
        d_obs += 2.0 * (m * sum_sq - sum * sum) / (m - 1.0);
    }
    d_obs /= n;

    double total = std::accumulate(all_values.begin(), all_values.end(), 0.0);
    double total_sq = 0.0;
    for (double x : all_values) total_sq += x * x;
    double d_exp = 2.0 * (n * total_sq - total * total) / (n * (n - 1.0));

    if (d_exp == 0.0) {
        if (d_obs == 0.0) return R::err("undefined: zero expected disagreement");
        return -std::numeric_limits<double>::infinity();
    }
    return 1.0 - d_obs / d_exp;
}

std::vector<double> midranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n, 0.0);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        syy += y[i] * y[i];
        sxy += x[i] * y[i];
    }
    const double cov = sxy - sx * sy / n;
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    return cov / std::sqrt(vx * vy);
}

// Regularized incomplete beta via Lentz's continued fraction.
double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log(1.0 - x);
    bool swapped = x >= (a + 1.0) / (a + b + 2.0);
    if (swapped) {
        std::swap(a, b);
        x = 1.0 - x;
    }
    const double front = std::exp(std::lgamma(a + b) - std::lgamma(a) -
                                  std::lgamma(b) + a * std::log(x) +
                                  b * std::log(1.0 - x)) / a;
    (void)ln_front;
    double f = 1.0, c = 1.0, d = 0.0;
    for (int m = 0; m <= 200; ++m) {
        double numerator;
        if (m == 0) {
            numerator = 1.0;
        } else if (m % 2 == 0) {
            const double k = m / 2.0;
            numerator = k * (b - k) * x / ((a + 2 * k - 1) * (a + 2 * k));
        } else {
            const double k = (m - 1) / 2.0;
            numerator = -((a + k) * (a + b + k) * x) /
                        ((a + 2 * k) * (a + 2 * k + 1));
        }
        d = 1.0 + numerator * d;
        if (std::fabs(d) < 1e-30) d = 1e-30;
        d = 1.0 / d;
        c = 1.0 + numerator / c;
        if (std::fabs(c) < 1e-30) c = 1e-30;
        const double delta = c * d;
        f *= delta;
        if (std::fabs(1.0 - delta) < 1e-12) break;
    }
    const double result = front * (f - 1.0);
    return swapped ? 1.0 - result : result;
}

// Two-sided p for Student's t with df degrees of freedom.
double t_two_sided_p(double t, double df) {
    const double x = df / (df + t * t);
    return incomplete_beta(df / 2.0, 0.5, x);
}

double exact_permutation_p(const std::vector<double>& rx, std::vector<double> ry,
                           double observed_abs_rho) {
    std::sort(ry.begin(), ry.end());
    std::size_t at_least = 0, total = 0;
    do {
        ++total;
        if (std::fabs(pearson(rx, ry)) >= observed_abs_rho - 1e-12) ++at_least;
    } while (std::next_permutation(ry.begin(), ry.end()));
    return static_cast<double>(at_least) / static_cast<double>(total);
}

}  // namespace

Result<SpearmanResult, std::string> spearman(const std::vector<double>& x,
                                             const std::vector<double>& y) {
    using R = Result<SpearmanResult, std::string>;
    if (x.size() != y.size()) return R::err("length mismatch");
    const std::size_t n = x.size();
    if (n < 3) return R::err("need at least 3 observations");
    auto constant = [](const std::vector<double>& v) {
        return std::all_of(v.begin(), v.end(),
                           [&](double e) { return e == v.front(); });
    };
    if (constant(x) || constant(y)) return R::err("constant input, rho undefined");

    std::vector<double> rx = midranks(x);
    std::vector<double> ry = midranks(y);
    SpearmanResult result;
    result.rho = pearson(rx, ry);

    if (n <= 8) {
        result.p_value = exact_permutation_p(rx, ry, std::fabs(result.rho));
    } else {
        const double df = static_cast<double>(n) - 2.0;
        const double denom = 1.0 - result.rho * result.rho;
        if (denom <= 0.0) {
            result.p_value = 0.0;
        } else {
            const double t = result.rho * std::sqrt(df / denom);
            result.p_value = t_two_sided_p(t, df);
        }
    }
    return result;
}

// --- Annotation batches -----------------------------------------------------

namespace {

std::string tsv_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '\t': out += "\\t"; break;
            case '\n': out += "\\n"; break;
            case '\r': break;
            case '\\': out += "\\\\"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

std::string tsv_unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            ++i;
            if (s[i] == 't') out.push_back('\t');
            else if (s[i] == 'n') out.push_back('\n');
            else out.push_back(s[i]);
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

std::vector<std::string> split_tsv(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == '\t') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

}  // namespace

std::vector<std::string> export_annotation_batch(const std::vector<Mpc>& sample,
                                                 int batch_size,
                                                 const std::string& out_dir,
                                                 const std::string& prefix) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    if (batch_size <= 0) batch_size = static_cast<int>(sample.size());

    std::size_t file_index = 0;
    for (std::size_t start = 0; start < sample.size();
         start += static_cast<std::size_t>(batch_size), ++file_index) {
        std::ostringstream name;
        name << out_dir << '/' << prefix << '_' << file_index << ".tsv";
        std::ofstream out(name.str());
        out << "mpc_id\trater_id\tconversation\troster";
        for (auto d : all_dimensions()) out << '\t' << to_string(d);
        out << '\n';
        const std::size_t end =
            std::min(sample.size(), start + static_cast<std::size_t>(batch_size));
        for (std::size_t i = start; i < end; ++i) {
            const Mpc& m = sample[i];
            std::ostringstream roster;
            for (const auto& s : m.speakers)
                roster << s.name << '=' << to_string(s.stance) << ';';
            out << tsv_escape(m.id) << "\t\t"
                << tsv_escape(render_conversation_for_rating(m)) << '\t'
                << tsv_escape(roster.str());
            for (int d = 0; d < kDimensionCount; ++d) out << '\t';
            out << '\n';
        }
        written.push_back(name.str());
    }
    return written;
}

Result<std::vector<RatingRecord>, std::string> import_ratings(const std::string& path) {
    using R = Result<std::vector<RatingRecord>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open rating file: " + path);

    std::string header;
    if (!std::getline(in, header)) return R::err("empty rating file");
    auto columns = split_tsv(header);
    std::map<std::string, std::size_t> column_of;
    for (std::size_t i = 0; i < columns.size(); ++i) column_of[columns[i]] = i;
    for (const char* required : {"mpc_id", "rater_id"})
        if (!column_of.count(required))
            return R::err(std::string("missing column ") + required);
    for (auto d : all_dimensions())
        if (!column_of.count(to_string(d)))
            return R::err("missing dimension column " + to_string(d));

    std::vector<RatingRecord> out;
    std::string line;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        auto fields = split_tsv(line);
        if (fields.size() < columns.size())
            return R::err("row " + std::to_string(row) + ": too few fields");
        RatingRecord record;
        record.mpc_id = tsv_unescape(fields[column_of["mpc_id"]]);
        record.rater_id = tsv_unescape(fields[column_of["rater_id"]]);
        for (auto d : all_dimensions()) {
            const std::string& cell = fields[column_of[to_string(d)]];
            if (cell.empty()) continue;  // restricted-dimension runs leave blanks
            int score = 0;
            try {
                score = std::stoi(cell);
            } catch (...) {
                return R::err("row " + std::to_string(row) + ": non-integer score for " +
                              to_string(d));
            }
            if (score < 1 || score > 5)
                return R::err("row " + std::to_string(row) + ": score " +
                              std::to_string(score) + " outside 1..5 for " +
                              to_string(d));
            record.scores[d] = score;
        }
        out.push_back(std::move(record));
    }
    return out;
}

std::string serialize_rating(const RatingRecord& record) {
    json j;
    j["mpc_id"] = record.mpc_id;
    j["rater_id"] = record.rater_id;
    j["scores"] = json::object();
    for (const auto& [d, score] : record.scores) j["scores"][to_string(d)] = score;
    if (!record.raw_response.empty()) j["raw_response"] = record.raw_response;
    return j.dump();
}

Result<std::vector<RatingRecord>, std::string> read_ratings_jsonl(
    const std::string& path) {
    using R = Result<std::vector<RatingRecord>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open rating file: " + path);
    std::vector<RatingRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            return R::err(path + ":" + std::to_string(lineno) + ": bad record");
        RatingRecord record;
        record.mpc_id = j.value("mpc_id", std::string());
        record.rater_id = j.value("rater_id", std::string());
        record.raw_response = j.value("raw_response", std::string());
        if (j.contains("scores") && j["scores"].is_object()) {
            for (auto it = j["scores"].begin(); it != j["scores"].end(); ++it) {
                auto d = dimension_from_string(it.key());
                if (!d)
                    return R::err(path + ":" + std::to_string(lineno) +
                                  ": unknown dimension " + it.key());
                int score = it.value().get<int>();
                if (score < 1 || score > 5)
                    return R::err(path + ":" + std::to_string(lineno) +
                                  ": score outside 1..5");
                record.scores[*d] = score;
            }
        }
        out.push_back(std::move(record));
    }
    return out;
}

void write_ratings_jsonl(const std::string& path,
                         const std::vector<RatingRecord>& records) {
    std::ofstream out(path);
    for (const auto& r : records) out << serialize_rating(r) << '\n';
}

// --- Report -----------------------------------------------------------------

Result<AgreementReport, std::string> agreement_report(
    const std::vector<RatingRecord>& human, const std::vector<RatingRecord>& judge,
    const std::map<std::string, std::string>& group_of) {
    using R = Result<AgreementReport, std::string>;

    std::map<std::string, const RatingRecord*> human_by_id, judge_by_id;
    for (const auto& r : human) human_by_id[r.mpc_id] = &r;
    for (const auto& r : judge) judge_by_id[r.mpc_id] = &r;

    std::vector<std::string> joined;
    for (const auto& [id, r] : human_by_id)
        if (judge_by_id.count(id)) joined.push_back(id);
    if (joined.empty()) return R::err("disjoint item sets, nothing to join");
    std::sort(joined.begin(), joined.end());

    AgreementReport report;
    for (auto d : all_dimensions()) {
        std::vector<double> xs, ys;
        for (const auto& id : joined) {
            auto hx = human_by_id[id]->scores.find(d);
            auto jy = judge_by_id[id]->scores.find(d);
            if (hx == human_by_id[id]->scores.end() ||
                jy == judge_by_id[id]->scores.end())
                continue;
            xs.push_back(hx->second);
            ys.push_back(jy->second);
        }
        if (xs.empty()) continue;

        AgreementResult result;
        result.dimension = d;
        result.n_items = xs.size();

        RatingMatrix matrix;
        for (std::size_t i = 0; i < xs.size(); ++i)
            matrix.push_back({xs[i], ys[i]});
        auto alpha = krippendorff_alpha_interval(matrix);
        if (alpha.ok()) {
            result.krippendorff_alpha = alpha.value();
            result.alpha_defined = std::isfinite(alpha.value());
        } else {
            result.alpha_defined = false;
        }

        auto rho = spearman(xs, ys);
        if (rho.ok()) {
            result.spearman_rho = rho.value().rho;
            result.p_value = rho.value().p_value;
        } else {
            result.spearman_rho = std::nan("");
            result.p_value = 1.0;
        }
        report.per_dimension.push_back(result);
    }

    auto accumulate_means = [&](const std::vector<RatingRecord>& ratings,
                                const std::string& rater_label) {
        std::map<std::string, std::map<QualityDimension, std::pair<double, int>>> acc;
        for (const auto& r : ratings) {
            std::string group = "all";
            auto it = group_of.find(r.mpc_id);
            if (it != group_of.end()) group = it->second;
            for (const auto& [d, score] : r.scores) {
                acc[group][d].first += score;
                acc[group][d].second += 1;
            }
        }
        for (const auto& [group, by_dim] : acc)
            for (const auto& [d, sum_count] : by_dim)
                report.mean_scores[rater_label][group][d] =
                    sum_count.first / sum_count.second;
    };
    accumulate_means(human, "human");
    accumulate_means(judge, "judge");
    return report;
}

std::string render_agreement_report(const AgreementReport& report) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);

    out << "Mean scores\n";
    for (const auto& [rater, by_group] : report.mean_scores) {
        out << "  [" << rater << "]\n";
        std::set<std::string> groups;
        for (const auto& [group, scores] : by_group) groups.insert(group);
        out << "    dimension              ";
        for (const auto& g : groups) out << "  " << g;
        out << '\n';
        for (auto d : all_dimensions()) {
            std::string label = to_string(d);
            out << "    " << label << std::string(23 - std::min<std::size_t>(23, label.size()), ' ');
            for (const auto& g : groups) {
                auto git = by_group.find(g);
                std::ostringstream cell;
                cell.setf(std::ios::fixed);
                cell.precision(2);
                if (git != by_group.end() && git->second.count(d))
                    cell << git->second.at(d);
                else
                    cell << "-";
                std::string s = cell.str();
                std::size_t width = std::max<std::size_t>(g.size(), s.size());
                out << "  " << std::string(width - s.size(), ' ') << s;
            }
            out << '\n';
        }
    }

    out << "\nAgreement (human vs judge)\n";
    out << "    dimension                Krippendorff   Spearman\n";
    for (const auto& r : report.per_dimension) {
        std::string label = to_string(r.dimension);
        out << "    " << label << std::string(25 - std::min<std::size_t>(25, label.size()), ' ');
        std::ostringstream alpha;
        alpha.setf(std::ios::fixed);
        alpha.precision(2);
        if (r.alpha_defined)
            alpha << r.krippendorff_alpha;
        else
            alpha << "undefined";
        out << std::setw(12) << alpha.str() << "   ";
        std::ostringstream rho;
        rho.setf(std::ios::fixed);
        rho.precision(2);
        rho << r.spearman_rho;
        if (r.p_value < 0.001)
            rho << "**";
        else if (r.p_value < 0.05)
            rho << "*";
        out << rho.str() << "  (n=" << r.n_items << ")\n";
    }
    out << "  (*) p < 0.05, (**) p < 0.001\n";
    return out.str();
}

std::string agreement_report_jsonl(const AgreementReport& report) {
    std::ostringstream out;
    for (const auto& r : report.per_dimension) {
        json j;
        j["dimension"] = to_string(r.dimension);
        if (r.alpha_defined)
            j["krippendorff_alpha"] = r.krippendorff_alpha;
        else
            j["krippendorff_alpha"] = "undefined";
        j["spearman_rho"] = r.spearman_rho;
        j["p_value"] = r.p_value;
        j["n_items"] = r.n_items;
        out << j.dump() << '\n';
    }
    for (const auto& [rater, by_group] : report.mean_scores) {
        for (const auto& [group, scores] : by_group) {
            json j;
            j["rater"] = rater;
            j["group"] = group;
            for (const auto& [d, mean] : scores) j["mean"][to_string(d)] = mean;
            out << j.dump() << '\n';
        }
    }
    return out.str();
}

}  // namespace mpc
