#include "mpc/core.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace mpc {

using ordered_json = nlohmann::ordered_json;

std::string to_string(Polarity p) {
    return p == Polarity::progressive ? "progressive" : "conservative";
}
std::string to_string(StanceValue s) {
    return s == StanceValue::pro ? "pro" : "against";
}
std::string to_string(Strategy s) {
    return s == Strategy::one_long ? "one_long" : "turn_by_turn";
}

std::optional<Polarity> polarity_from_string(const std::string& s) {
    if (s == "progressive") return Polarity::progressive;
    if (s == "conservative") return Polarity::conservative;
    return std::nullopt;
}
std::optional<StanceValue> stance_from_string(const std::string& s) {
    if (s == "pro") return StanceValue::pro;
    if (s == "against") return StanceValue::against;
    return std::nullopt;
}
std::optional<Strategy> strategy_from_string(const std::string& s) {
    if (s == "one_long") return Strategy::one_long;
    if (s == "turn_by_turn") return Strategy::turn_by_turn;
    return std::nullopt;
}

bool StanceDistribution::admissible() const {
    const auto& all = admissible_values();
    return std::find(all.begin(), all.end(), *this) != all.end();
}

const std::vector<StanceDistribution>& StanceDistribution::admissible_values() {
    static const std::vector<StanceDistribution> values = {
        {2, 2}, {3, 2}, {2, 3}, {2, 4}, {3, 3}, {4, 2},
    };
    return values;
}

std::string StanceDistribution::label() const {
    return std::to_string(pro_count) + "v" + std::to_string(against_count);
}

std::string Mpc::make_id(const TopicStatement& st, const Provenance& prov) {
    std::ostringstream key;
    key << st.topic_id << ':' << to_string(st.polarity) << ':' << prov.model_id << ':'
        << to_string(prov.strategy) << ":v" << prov.prompt_variant << ':'
        << prov.stance_distribution.label() << ":r" << prov.replicate_index;
    return key.str();
}

std::string ParseError::to_string() const {
    std::string out = kind;
    if (!field.empty()) out += " [" + field + "]";
    if (!message.empty()) out += ": " + message;
    return out;
}

std::optional<ParseError> validate_mpc(const Mpc& mpc) {
    std::set<std::string> names;
    for (const auto& sp : mpc.speakers) {
        if (sp.name.empty())
            return ParseError{"invariant", "speakers", "empty speaker name"};
        if (!names.insert(sp.name).second)
            return ParseError{"invariant", "speakers", "duplicate speaker name: " + sp.name};
    }
    for (std::size_t i = 0; i < mpc.turns.size(); ++i) {
        const Turn& t = mpc.turns[i];
        const std::string where = "conversation[" + std::to_string(i) + "]";
        if (t.index != static_cast<int>(i))
            return ParseError{"invariant", where, "turn index out of order"};
        if (t.speaker.empty())
            return ParseError{"invariant", where, "empty speaker"};
        if (t.addressees.empty())
            return ParseError{"invariant", where, "empty addressee set"};
        for (std::size_t j = 0; j + 1 < t.addressees.size(); ++j) {
            if (t.addressees[j] >= t.addressees[j + 1])
                return ParseError{"invariant", where,
                                  "addressees not a canonical sorted set"};
        }
        if (std::find(t.addressees.begin(), t.addressees.end(), t.speaker) !=
            t.addressees.end())
            return ParseError{"invariant", where,
                              "self-interaction: " + t.speaker + " addresses itself"};
    }
    return std::nullopt;
}

namespace {

ordered_json decoding_to_json(const DecodingParams& d) {
    return ordered_json{{"temperature", d.temperature},
                        {"top_p", d.top_p},
                        {"top_k", d.top_k},
                        {"max_tokens", d.max_tokens}};
}

struct FieldReader {
    const ordered_json& obj;
    std::string prefix;
    std::optional<ParseError> error;

    const ordered_json* get(const char* key, ordered_json::value_t kind,
                            const char* kind_name) {
        if (error) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            error = ParseError{"missing_field", prefix + key, "required field missing"};
            return nullptr;
        }
        bool ok = it->type() == kind;
        // Accept any number where an integer is stored as unsigned, etc.
        if (kind == ordered_json::value_t::number_float && it->is_number()) ok = true;
        if (kind == ordered_json::value_t::number_integer && it->is_number_integer())
            ok = true;
        if (!ok) {
            error = ParseError{"type", prefix + key,
                               std::string("expected ") + kind_name};
            return nullptr;
        }
        return &*it;
    }
};

}  // namespace

std::string serialize_mpc(const Mpc& mpc) {
    ordered_json j;
    j["id"] = mpc.id;
    j["statement"] = ordered_json{{"topic_id", mpc.statement.topic_id},
                                  {"polarity", to_string(mpc.statement.polarity)},
                                  {"text", mpc.statement.text}};
    ordered_json speakers = ordered_json::array();
    for (const auto& sp : mpc.speakers)
        speakers.push_back(
            ordered_json{{"name", sp.name}, {"stance", to_string(sp.stance)}});
    j["speakers"] = std::move(speakers);
    ordered_json conv = ordered_json::array();
    for (const auto& t : mpc.turns) {
        std::vector<std::string> addr = t.addressees;
        std::sort(addr.begin(), addr.end());
        addr.erase(std::unique(addr.begin(), addr.end()), addr.end());
        conv.push_back(ordered_json{
            {"speaker", t.speaker}, {"message", t.message}, {"addressees", addr}});
    }
    j["conversation"] = std::move(conv);
    const Provenance& p = mpc.provenance;
    j["provenance"] =
        ordered_json{{"model_id", p.model_id},
                     {"strategy", to_string(p.strategy)},
                     {"prompt_variant", p.prompt_variant},
                     {"stance_distribution",
                      ordered_json{{"pro", p.stance_distribution.pro_count},
                                   {"against", p.stance_distribution.against_count}}},
                     {"replicate_index", p.replicate_index},
                     {"decoding", decoding_to_json(p.decoding)},
                     {"created_at", p.created_at}};
    return j.dump();
}

Result<Mpc, ParseError> parse_mpc(const std::string& record, bool strict) {
    using R = Result<Mpc, ParseError>;
    ordered_json j = ordered_json::parse(record, nullptr, false);
    if (j.is_discarded())
        return R::err({"syntax", "", "record is not valid structured text"});
    if (!j.is_object()) return R::err({"syntax", "", "record is not an object"});

    Mpc mpc;
    FieldReader top{j, "", std::nullopt};

    if (const auto* id = top.get("id", ordered_json::value_t::string, "string"))
        mpc.id = id->get<std::string>();

    if (const auto* st = top.get("statement", ordered_json::value_t::object, "object")) {
        FieldReader sr{*st, "statement.", std::nullopt};
        if (const auto* v = sr.get("topic_id", ordered_json::value_t::string, "string"))
            mpc.statement.topic_id = v->get<std::string>();
        if (const auto* v = sr.get("polarity", ordered_json::value_t::string, "string")) {
            auto pol = polarity_from_string(v->get<std::string>());
            if (!pol)
                return R::err({"type", "statement.polarity", "unknown polarity"});
            mpc.statement.polarity = *pol;
        }
        if (const auto* v = sr.get("text", ordered_json::value_t::string, "string"))
            mpc.statement.text = v->get<std::string>();
        if (sr.error) return R::err(*sr.error);
    }

    if (const auto* sps = top.get("speakers", ordered_json::value_t::array, "array")) {
        for (std::size_t i = 0; i < sps->size(); ++i) {
            const auto& s = (*sps)[i];
            const std::string where = "speakers[" + std::to_string(i) + "]";
            if (!s.is_object()) return R::err({"type", where, "expected object"});
            FieldReader sr{s, where + ".", std::nullopt};
            Speaker sp;
            if (const auto* v = sr.get("name", ordered_json::value_t::string, "string"))
                sp.name = v->get<std::string>();
            if (const auto* v = sr.get("stance", ordered_json::value_t::string, "string")) {
                auto stance = stance_from_string(v->get<std::string>());
                if (!stance) return R::err({"type", where + ".stance", "unknown stance"});
                sp.stance = *stance;
            }
            if (sr.error) return R::err(*sr.error);
            mpc.speakers.push_back(std::move(sp));
        }
    }

    if (const auto* conv =
            top.get("conversation", ordered_json::value_t::array, "array")) {
        for (std::size_t i = 0; i < conv->size(); ++i) {
            const auto& tj = (*conv)[i];
            const std::string where = "conversation[" + std::to_string(i) + "]";
            if (!tj.is_object()) return R::err({"type", where, "expected object"});
            FieldReader tr{tj, where + ".", std::nullopt};
            Turn t;
            t.index = static_cast<int>(i);
            if (const auto* v = tr.get("speaker", ordered_json::value_t::string, "string"))
                t.speaker = v->get<std::string>();
            if (const auto* v = tr.get("message", ordered_json::value_t::string, "string"))
                t.message = v->get<std::string>();
            if (const auto* v =
                    tr.get("addressees", ordered_json::value_t::array, "array")) {
                for (const auto& a : *v) {
                    if (!a.is_string())
                        return R::err({"type", where + ".addressees", "expected strings"});
                    t.addressees.push_back(a.get<std::string>());
                }
            }
            if (tr.error) return R::err(*tr.error);
            std::sort(t.addressees.begin(), t.addressees.end());
            if (strict) {
                if (std::adjacent_find(t.addressees.begin(), t.addressees.end()) !=
                    t.addressees.end())
                    return R::err({"invariant", where + ".addressees",
                                   "duplicate addressee"});
            } else {
                t.addressees.erase(
                    std::unique(t.addressees.begin(), t.addressees.end()),
                    t.addressees.end());
            }
            mpc.turns.push_back(std::move(t));
        }
    }

    if (const auto* pj = top.get("provenance", ordered_json::value_t::object, "object")) {
        FieldReader pr{*pj, "provenance.", std::nullopt};
        Provenance& p = mpc.provenance;
        if (const auto* v = pr.get("model_id", ordered_json::value_t::string, "string"))
            p.model_id = v->get<std::string>();
        if (const auto* v = pr.get("strategy", ordered_json::value_t::string, "string")) {
            auto strat = strategy_from_string(v->get<std::string>());
            if (!strat)
                return R::err({"type", "provenance.strategy", "unknown strategy"});
            p.strategy = *strat;
        }
        if (const auto* v = pr.get("prompt_variant",
                                   ordered_json::value_t::number_integer, "integer"))
            p.prompt_variant = v->get<int>();
        if (const auto* v = pr.get("stance_distribution",
                                   ordered_json::value_t::object, "object")) {
            FieldReader dr{*v, "provenance.stance_distribution.", std::nullopt};
            if (const auto* n =
                    dr.get("pro", ordered_json::value_t::number_integer, "integer"))
                p.stance_distribution.pro_count = n->get<int>();
            if (const auto* n =
                    dr.get("against", ordered_json::value_t::number_integer, "integer"))
                p.stance_distribution.against_count = n->get<int>();
            if (dr.error) return R::err(*dr.error);
        }
        if (const auto* v = pr.get("replicate_index",
                                   ordered_json::value_t::number_integer, "integer"))
            p.replicate_index = v->get<int>();
        if (const auto* v =
                pr.get("decoding", ordered_json::value_t::object, "object")) {
            FieldReader dr{*v, "provenance.decoding.", std::nullopt};
            if (const auto* n = dr.get("temperature",
                                       ordered_json::value_t::number_float, "number"))
                p.decoding.temperature = n->get<double>();
            if (const auto* n =
                    dr.get("top_p", ordered_json::value_t::number_float, "number"))
                p.decoding.top_p = n->get<double>();
            if (const auto* n =
                    dr.get("top_k", ordered_json::value_t::number_integer, "integer"))
                p.decoding.top_k = n->get<int>();
            if (const auto* n = dr.get("max_tokens",
                                       ordered_json::value_t::number_integer, "integer"))
                p.decoding.max_tokens = n->get<int>();
            if (dr.error) return R::err(*dr.error);
        }
        if (const auto* v = pr.get("created_at", ordered_json::value_t::string, "string"))
            p.created_at = v->get<std::string>();
        if (pr.error) return R::err(*pr.error);
    }

    if (top.error) return R::err(*top.error);

    if (strict) {
        if (auto err = validate_mpc(mpc)) return R::err(*err);
    }
    return mpc;
}

Result<std::vector<TopicStatement>, std::string> load_topic_statements(
    const std::string& path) {
    using R = Result<std::vector<TopicStatement>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open topic statement file: " + path);
    ordered_json j = ordered_json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_array())
        return R::err("topic statement file is not a valid list: " + path);

    std::vector<TopicStatement> out;
    std::map<std::string, std::set<std::string>> by_topic;
    for (const auto& e : j) {
        if (!e.is_object() || !e.contains("topic_id") || !e.contains("polarity") ||
            !e.contains("text"))
            return R::err("malformed statement entry");
        TopicStatement st;
        st.topic_id = e["topic_id"].get<std::string>();
        auto pol = polarity_from_string(e["polarity"].get<std::string>());
        if (!pol) return R::err("unknown polarity for topic " + st.topic_id);
        st.polarity = *pol;
        st.text = e["text"].get<std::string>();
        by_topic[st.topic_id].insert(e["polarity"].get<std::string>());
        out.push_back(std::move(st));
    }
    if (out.size() != 76)
        return R::err("expected 76 statements, found " + std::to_string(out.size()));
    if (by_topic.size() != 38)
        return R::err("expected 38 topics, found " + std::to_string(by_topic.size()));
    for (const auto& [topic, pols] : by_topic) {
        if (pols.size() != 2)
            return R::err("topic lacks one statement per polarity: " + topic);
    }
    return out;
}

Result<std::vector<Mpc>, std::string> read_corpus(const std::string& path, bool strict) {
    using R = Result<std::vector<Mpc>, std::string>;
    std::ifstream in(path);
    if (!in) return R::err("cannot open corpus: " + path);
    std::vector<Mpc> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto parsed = parse_mpc(line, strict);
        if (!parsed)
            return R::err(path + ":" + std::to_string(lineno) + ": " +
                          parsed.error().to_string());
        out.push_back(parsed.take());
    }
    return out;
}

void append_corpus(const std::string& path, const std::vector<Mpc>& mpcs) {
    std::ofstream out(path, std::ios::app);
    for (const auto& m : mpcs) out << serialize_mpc(m) << '\n';
}

}  // namespace mpc
