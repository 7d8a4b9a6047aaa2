#pragma once

#include <map>
#include <string>
#include <vector>

#include "mpc/common.hpp"
#include "mpc/core.hpp"

namespace mpc {

struct InteractionGraphs {
    std::vector<std::string> nodes;  // MPC roster order
    // directed weights, indexed [from][to]; 0 = no edge, diagonal always 0
    std::vector<std::vector<int>> weight;

    int n() const { return static_cast<int>(nodes.size()); }
    bool undirected_edge(int u, int v) const {
        return weight[u][v] + weight[v][u] >= 1;
    }
};

// One directed edge per (speaker -> addressee) relation, multiplicity as
// weight; self-loops never created. Speakers outside the roster are added
// as extra nodes so forced (non-compliant) inputs still produce a graph.
InteractionGraphs build_graphs(const Mpc& mpc);

struct StructureOptions {
    // Reciprocity denominator: pairs with at least one directed edge
    // (default) or all C(n,2) pairs.
    bool all_pairs_denominator = false;
};

double avg_degree_centrality(const InteractionGraphs& g);
double avg_out_degree(const InteractionGraphs& g);
double reciprocity(const InteractionGraphs& g, const StructureOptions& options = {});
double consistent_reciprocity(const InteractionGraphs& g,
                              const StructureOptions& options = {});
double transitivity(const InteractionGraphs& g);

bool is_connected(const InteractionGraphs& g);

struct StructureSample {
    std::string mpc_id;
    int n = 0;
    double deg_avg = 0.0;
    double outdeg_avg = 0.0;
    double reciprocity = 0.0;
    double consistent_reciprocity = 0.0;
    double transitivity = 0.0;
};

StructureSample structure_sample(const Mpc& mpc, const StructureOptions& options = {});

// Parallel map over a corpus; results in input order. Serial reference kept
// for the benchmark and equivalence tests.
std::vector<StructureSample> structure_samples(const std::vector<Mpc>& corpus,
                                               const StructureOptions& options = {});
std::vector<StructureSample> structure_samples_serial(const std::vector<Mpc>& corpus,
                                                      const StructureOptions& options = {});

struct EcdfCurve {
    std::vector<double> sorted_values;
    std::vector<std::pair<double, double>> steps;  // (value, cumulative fraction)

    double eval(double x) const;  // fraction of samples <= x
    double median() const;
};

EcdfCurve ecdf(std::vector<double> values);

// --- Reference corpus -------------------------------------------------------

struct ReferenceRecord {
    long order = 0;
    std::string speaker;
    std::vector<std::string> addressees;
    std::string text;
};

// Line-delimited JSON: {"order":..,"speaker":..,"addressees":[..],"text":..}
Result<std::vector<ReferenceRecord>, std::string> read_reference_stream(
    const std::string& path);

struct ExtractionStats {
    std::size_t skipped_records = 0;  // missing addressee information
    std::size_t windows_tested = 0;
};

// Greedy left-to-right scan over the stream: a window of 15 consecutive
// messages is accepted when its speaker set has size 4..6 and the induced
// undirected graph is connected; acceptance advances the scan by 15,
// rejection by 1.
std::vector<Mpc> extract_reference_conversations(
    const std::vector<ReferenceRecord>& stream, ExtractionStats* stats = nullptr);

// --- Report -----------------------------------------------------------------

struct StructureReport {
    // metric name -> curve label ("n=4", "n=5", "n=6", "all", "reference") -> curve
    std::map<std::string, std::map<std::string, EcdfCurve>> curves;
    std::size_t excluded_disconnected = 0;
};

StructureReport structure_report(const std::vector<Mpc>& group,
                                 const std::vector<Mpc>& reference,
                                 const StructureOptions& options = {});

// Writes per-metric step-point TSV tables and self-contained SVG plots
// under out_dir; returns the list of files written.
std::vector<std::string> write_structure_report(const StructureReport& report,
                                                const std::string& out_dir,
                                                const std::string& group_name);

}  // namespace mpc
