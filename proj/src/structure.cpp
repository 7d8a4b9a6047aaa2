#include "mpc/structure.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpc {

using json = nlohmann::json;

InteractionGraphs build_graphs(const Mpc& mpc) {
    InteractionGraphs g;
    std::map<std::string, int> index;
    for (const auto& s : mpc.speakers) {
        index.emplace(s.name, g.nodes.size());
        if (index[s.name] == static_cast<int>(g.nodes.size()))
            g.nodes.push_back(s.name);
    }
    auto node_of = [&](const std::string& name) {
        auto [it, inserted] = index.emplace(name, g.nodes.size());
        if (inserted) g.nodes.push_back(name);
        return it->second;
    };
    for (const auto& t : mpc.turns) {
        node_of(t.speaker);
        for (const auto& a : t.addressees) node_of(a);
    }
    g.weight.assign(g.nodes.size(), std::vector<int>(g.nodes.size(), 0));
    for (const auto& t : mpc.turns) {
        int from = index.at(t.speaker);
        for (const auto& a : t.addressees) {
            int to = index.at(a);
            if (to != from) ++g.weight[from][to];
        }
    }
    return g;
}

double avg_degree_centrality(const InteractionGraphs& g) {
    const int n = g.n();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (int u = 0; u < n; ++u) {
        int degree = 0;
        for (int v = 0; v < n; ++v)
            if (v != u && g.undirected_edge(u, v)) ++degree;
        sum += static_cast<double>(degree) / (n - 1);
    }
    return sum / n;
}

double avg_out_degree(const InteractionGraphs& g) {
    const int n = g.n();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (int u = 0; u < n; ++u) {
        int out = 0;
        for (int v = 0; v < n; ++v)
            if (v != u && g.weight[u][v] >= 1) ++out;
        sum += static_cast<double>(out) / (n - 1);
    }
    return sum / n;
}

namespace {

// mutual = strict threshold on both directed weights; connected = >= 1 total
void count_dyads(const InteractionGraphs& g, int weight_threshold, int* numerator,
                 int* connected_pairs) {
    int num = 0, connected = 0;
    for (int u = 0; u < g.n(); ++u) {
        for (int v = u + 1; v < g.n(); ++v) {
            bool any = g.weight[u][v] + g.weight[v][u] >= 1;
            if (any) ++connected;
            if (g.weight[u][v] >= weight_threshold &&
                g.weight[v][u] >= weight_threshold)
                ++num;
        }
    }
    *numerator = num;
    *connected_pairs = connected;
}

double dyad_ratio(const InteractionGraphs& g, int weight_threshold,
                  const StructureOptions& options) {
    int num = 0, connected = 0;
    count_dyads(g, weight_threshold, &num, &connected);
    int denom = options.all_pairs_denominator ? g.n() * (g.n() - 1) / 2 : connected;
    return denom == 0 ? 0.0 : static_cast<double>(num) / denom;
}

}  // namespace

double reciprocity(const InteractionGraphs& g, const StructureOptions& options) {
    return dyad_ratio(g, 1, options);
}

double consistent_reciprocity(const InteractionGraphs& g,
                              const StructureOptions& options) {
    return dyad_ratio(g, 2, options);
}

double transitivity(const InteractionGraphs& g) {
    const int n = g.n();
    long triangles = 0;
    long triples = 0;
    for (int u = 0; u < n; ++u) {
        int degree = 0;
        for (int v = 0; v < n; ++v)
            if (v != u && g.undirected_edge(u, v)) ++degree;
        triples += static_cast<long>(degree) * (degree - 1) / 2;
    }
    for (int u = 0; u < n; ++u)
        for (int v = u + 1; v < n; ++v)
            for (int w = v + 1; w < n; ++w)
                if (g.undirected_edge(u, v) && g.undirected_edge(v, w) &&
                    g.undirected_edge(u, w))
                    ++triangles;
    return triples == 0 ? 0.0 : 3.0 * triangles / static_cast<double>(triples);
}

bool is_connected(const InteractionGraphs& g) {
    const int n = g.n();
    if (n == 0) return false;
    std::vector<bool> seen(n, false);
    std::vector<int> stack = {0};
    seen[0] = true;
    int visited = 1;
    while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        for (int v = 0; v < n; ++v) {
            if (!seen[v] && v != u && g.undirected_edge(u, v)) {
                seen[v] = true;
                ++visited;
                stack.push_back(v);
            }
        }
    }
    return visited == n;
}

StructureSample structure_sample(const Mpc& mpc, const StructureOptions& options) {
    InteractionGraphs g = build_graphs(mpc);
    StructureSample s;
    s.mpc_id = mpc.id;
    s.n = g.n();
    s.deg_avg = avg_degree_centrality(g);
    s.outdeg_avg = avg_out_degree(g);
    s.reciprocity = reciprocity(g, options);
    s.consistent_reciprocity = consistent_reciprocity(g, options);
    s.transitivity = transitivity(g);
    return s;
}

std::vector<StructureSample> structure_samples(const std::vector<Mpc>& corpus,
                                               const StructureOptions& options) {
    std::vector<StructureSample> out(corpus.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
#endif
    for (long i = 0; i < static_cast<long>(corpus.size()); ++i)
        out[static_cast<std::size_t>(i)] =
            structure_sample(corpus[static_cast<std::size_t>(i)], options);
    return out;
}

std::vector<StructureSample> structure_samples_serial(const std::vector<Mpc>& corpus,
                                                      const StructureOptions& options) {
    std::vector<StructureSample> out;
    out.reserve(corpus.size());
    for (const auto& m : corpus) out.push_back(structure_sample(m, options));
    return out;
}

// --- ECDF -------------------------------------------------------------------

EcdfCurve ecdf(std::vector<double> values) {
    EcdfCurve curve;
    std::sort(values.begin(), values.end());
    curve.sorted_values = std::move(values);
    const auto n = curve.sorted_values.size();
    for (std::size_t i = 0; i < n; ++i) {
        // one step per distinct value, at its last occurrence
        if (i + 1 < n && curve.sorted_values[i + 1] == curve.sorted_values[i])
            continue;
        curve.steps.emplace_back(curve.sorted_values[i],
                                 static_cast<double>(i + 1) / static_cast<double>(n));
    }
    return curve;
}

double EcdfCurve::eval(double x) const {
    auto it = std::upper_bound(sorted_values.begin(), sorted_values.end(), x);
    return sorted_values.empty()
               ? 0.0
               : static_cast<double>(it - sorted_values.begin()) /
                     static_cast<double>(sorted_values.size());
}

double EcdfCurve::median() const {
    const auto n = sorted_values.size();
    if (n == 0) return std::nan("");
    if (n % 2 == 1) return sorted_values[n / 2];
    return 0.5 * (sorted_values[n / 2 - 1] + sorted_values[n / 2]);
}

// --- Reference corpus -------------------------------------------------------

Result<std::vector<ReferenceRecord>, std::string> read_reference_stream(
    const std::string& path) {
    using R = Result<std::vector<ReferenceRecord>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open reference stream: " + path);
    std::vector<ReferenceRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            return R::err(path + ":" + std::to_string(lineno) + ": bad record");
        ReferenceRecord r;
        r.order = j.value("order", static_cast<long>(lineno));
        r.speaker = j.value("speaker", std::string());
        r.text = j.value("text", std::string());
        if (j.contains("addressees") && j["addressees"].is_array())
            for (const auto& a : j["addressees"])
                if (a.is_string()) r.addressees.push_back(a.get<std::string>());
        out.push_back(std::move(r));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const ReferenceRecord& a, const ReferenceRecord& b) {
                         return a.order < b.order;
                     });
    return out;
}

namespace {

constexpr int kWindowSize = 15;

std::optional<Mpc> window_to_mpc(const std::vector<ReferenceRecord>& stream,
                                 std::size_t begin) {
    std::set<std::string> speakers;
    for (std::size_t i = begin; i < begin + kWindowSize; ++i)
        speakers.insert(stream[i].speaker);
    if (speakers.size() < 4 || speakers.size() > 6) return std::nullopt;

    Mpc mpc;
    mpc.id = "ref:" + std::to_string(stream[begin].order);
    mpc.statement.topic_id = "reference";
    mpc.statement.text = "reference corpus window";
    for (const auto& name : speakers) mpc.speakers.push_back({name, StanceValue::pro});
    int index = 0;
    for (std::size_t i = begin; i < begin + kWindowSize; ++i) {
        Turn t;
        t.index = index++;
        t.speaker = stream[i].speaker;
        t.message = stream[i].text;
        for (const auto& a : stream[i].addressees)
            if (speakers.count(a) && a != t.speaker) t.addressees.push_back(a);
        std::sort(t.addressees.begin(), t.addressees.end());
        t.addressees.erase(std::unique(t.addressees.begin(), t.addressees.end()),
                           t.addressees.end());
        mpc.turns.push_back(std::move(t));
    }
    if (!is_connected(build_graphs(mpc))) return std::nullopt;
    return mpc;
}

}  // namespace

std::vector<Mpc> extract_reference_conversations(
    const std::vector<ReferenceRecord>& stream, ExtractionStats* stats) {
    std::vector<ReferenceRecord> usable;
    std::size_t skipped = 0;
    for (const auto& r : stream) {
        if (r.addressees.empty() || r.speaker.empty()) {
            ++skipped;
            continue;
        }
        usable.push_back(r);
    }

    std::vector<Mpc> out;
    std::size_t tested = 0;
    std::size_t i = 0;
    while (i + kWindowSize <= usable.size()) {
        ++tested;
        if (auto mpc = window_to_mpc(usable, i)) {
            out.push_back(std::move(*mpc));
            i += kWindowSize;
        } else {
            ++i;
        }
    }
    if (stats) {
        stats->skipped_records = skipped;
        stats->windows_tested = tested;
    }
    return out;
}

// --- Report -----------------------------------------------------------------

namespace {

const std::vector<std::pair<std::string, double StructureSample::*>>& metric_fields() {
    static const std::vector<std::pair<std::string, double StructureSample::*>> fields = {
        {"deg_avg", &StructureSample::deg_avg},
        {"outdeg_avg", &StructureSample::outdeg_avg},
        {"reciprocity", &StructureSample::reciprocity},
        {"consistent_reciprocity", &StructureSample::consistent_reciprocity},
        {"transitivity", &StructureSample::transitivity},
    };
    return fields;
}

}  // namespace

StructureReport structure_report(const std::vector<Mpc>& group,
                                 const std::vector<Mpc>& reference,
                                 const StructureOptions& options) {
    StructureReport report;

    std::vector<Mpc> connected;
    for (const auto& m : group) {
        if (is_connected(build_graphs(m)))
            connected.push_back(m);
        else
            ++report.excluded_disconnected;
    }

    auto samples = structure_samples(connected, options);
    auto ref_samples = structure_samples(reference, options);

    for (const auto& [name, field] : metric_fields()) {
        std::map<std::string, std::vector<double>> buckets;
        for (const auto& s : samples) {
            buckets["all"].push_back(s.*field);
            if (s.n >= 4 && s.n <= 6)
                buckets["n=" + std::to_string(s.n)].push_back(s.*field);
        }
        for (const auto& s : ref_samples) buckets["reference"].push_back(s.*field);
        for (auto& [label, values] : buckets)
            report.curves[name][label] = ecdf(std::move(values));
    }
    return report;
}

namespace {

std::string svg_plot(const std::string& metric,
                     const std::map<std::string, EcdfCurve>& curves) {
    const int width = 520, height = 380;
    const int left = 50, right = 20, top = 30, bottom = 40;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;
    static const std::vector<std::string> palette = {
        "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd"};

    auto px = [&](double x) { return left + x * plot_w; };
    auto py = [&](double y) { return top + (1.0 - y) * plot_h; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
        << "\" height=\"" << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height
        << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"14\">"
        << metric << "</text>\n";
    // axes
    out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(1)
        << "\" y2=\"" << py(0) << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << px(0) << "\" y1=\"" << py(0) << "\" x2=\"" << px(0)
        << "\" y2=\"" << py(1) << "\" stroke=\"black\"/>\n";
    for (double tick = 0.0; tick <= 1.0001; tick += 0.25) {
        std::ostringstream label;
        label.setf(std::ios::fixed);
        label.precision(2);
        label << tick;
        out << "<text x=\"" << px(tick) << "\" y=\"" << py(0) + 16
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
               "font-size=\"10\">"
            << label.str() << "</text>\n";
        out << "<text x=\"" << px(0) - 6 << "\" y=\"" << py(tick) + 3
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
               "font-size=\"10\">"
            << label.str() << "</text>\n";
    }

    int color_index = 0;
    int legend_y = top + 12;
    for (const auto& [label, curve] : curves) {
        const std::string& color = palette[color_index % palette.size()];
        ++color_index;
        std::ostringstream points;
        points << px(0) << ',' << py(0) << ' ';
        double prev_y = 0.0;
        for (const auto& [value, fraction] : curve.steps) {
            points << px(value) << ',' << py(prev_y) << ' ';
            points << px(value) << ',' << py(fraction) << ' ';
            prev_y = fraction;
        }
        points << px(1) << ',' << py(prev_y);
        out << "<polyline fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.5\" points=\"" << points.str() << "\"/>\n";

        std::ostringstream med;
        med.setf(std::ios::fixed);
        med.precision(3);
        med << curve.median();
        out << "<text x=\"" << width - right - 150 << "\" y=\"" << legend_y
            << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
            << "\">" << label << " (median " << med.str() << ")</text>\n";
        legend_y += 14;
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace

std::vector<std::string> write_structure_report(const StructureReport& report,
                                                const std::string& out_dir,
                                                const std::string& group_name) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;

    for (const auto& [metric, curves] : report.curves) {
        const std::string base = out_dir + "/" + group_name + "_" + metric;

        std::ofstream tsv(base + ".tsv");
        tsv << "curve\tvalue\tcumulative_fraction\n";
        tsv.setf(std::ios::fixed);
        tsv.precision(9);
        for (const auto& [label, curve] : curves)
            for (const auto& [value, fraction] : curve.steps)
                tsv << label << '\t' << value << '\t' << fraction << '\n';
        written.push_back(base + ".tsv");

        std::ofstream svg(base + ".svg");
        svg << svg_plot(metric, curves);
        written.push_back(base + ".svg");
    }

    std::ofstream meta(out_dir + "/" + group_name + "_structure_meta.json");
    json j;
    j["excluded_disconnected"] = report.excluded_disconnected;
    j["medians"] = json::object();
    for (const auto& [metric, curves] : report.curves)
        for (const auto& [label, curve] : curves)
            j["medians"][metric][label] = curve.median();
    meta << j.dump(2) << '\n';
    written.push_back(out_dir + "/" + group_name + "_structure_meta.json");
    return written;
}

}  // namespace mpc
