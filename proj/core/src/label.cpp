// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/label.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "driftdiff/error.hpp"
#include "driftdiff/hash.hpp"

namespace driftdiff::label {

namespace {

constexpr std::string_view kSystemSection =
    "You label one cluster of data differences between a source and a target dataset.\n"
    "Pick every label from the ontology that the evidence supports. Use Other only when no\n"
    "ontology label fits, and then explain it in other_explanation. Cite columns in backticks,\n"
    "and only columns listed in the evidence. Reply with a single JSON object matching the\n"
    "output schema and nothing else.\n";

void sort_unique(std::vector<std::string>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string render_value(const Value& v, std::string_view salt) {
    if (v.is_null()) return "<null>";
    return pseudonymize(v.raw, salt);
}

std::string row_id_for(const RowKey& key, const std::string& column, std::string_view salt) {
    // Letters only, so no digit run of a raw key can leak through the id.
    std::uint64_t h = keyed_hash64(salt, key.to_string() + '\x1f' + column);
    std::string id = "row-";
    for (int i = 0; i < 10; ++i) {
        id.push_back(static_cast<char>('a' + (h % 26)));
        h /= 26;
    }
    return id;
}

nlohmann::json row_json(const EvidenceRow& r) {
    nlohmann::json j = {{"id", r.row_id},
                        {"column", r.column},
                        {"kind", std::string(datadiff::to_string(r.kind))},
                        {"source", r.source},
                        {"target", r.target}};
    if (r.rounding_decimals) j["rounding_decimals"] = *r.rounding_decimals;
    if (r.offset_minutes) j["offset_minutes"] = *r.offset_minutes;
    if (r.null_direction) j["null_direction"] = std::string(datadiff::to_string(*r.null_direction));
    return j;
}

std::vector<std::string> backticked(std::string_view text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const auto open = text.find('`', pos);
        if (open == std::string_view::npos) break;
        const auto close = text.find('`', open + 1);
        if (close == std::string_view::npos) break;
        out.emplace_back(text.substr(open + 1, close - open - 1));
        pos = close + 1;
    }
    return out;
}

bool has_label(const LabelJudgment& j, std::string_view name) {
    return std::any_of(j.labels.begin(), j.labels.end(), [&](const DiffLabel& l) { return l.name == name; });
}

bool supports_rounding(const EvidencePack& pack) {
    std::size_t numeric = 0;
    std::map<std::optional<int>, std::size_t> signatures;
    for (const auto& r : pack.rows) {
        const bool is_numeric = r.kind == datadiff::DetailKind::FloatDelta ||
                                r.kind == datadiff::DetailKind::IntDelta || r.rounding_decimals.has_value();
        if (!is_numeric) continue;
        ++numeric;
        ++signatures[r.rounding_decimals];
    }
    if (numeric == 0) return false;
    for (const auto& [sig, count] : signatures) {
        if (sig && static_cast<double>(count) >= 0.9 * static_cast<double>(numeric)) return true;
    }
    return false;
}

bool supports_timezone_shift(const EvidencePack& pack) {
    std::set<std::optional<int>> offsets;
    for (const auto& r : pack.rows) {
        if (r.kind == datadiff::DetailKind::DateTimeDelta) offsets.insert(r.offset_minutes);
    }
    return offsets.size() == 1 && offsets.begin()->has_value();
}

bool supports_null_inflation(const EvidencePack& pack) {
    return std::any_of(pack.rows.begin(), pack.rows.end(), [](const EvidenceRow& r) {
        return r.null_direction == datadiff::NullDirection::BecameNull;
    });
}

std::vector<std::string> split_camel(std::string_view word) {
    std::vector<std::string> parts;
    std::string cur;
    for (std::size_t i = 0; i < word.size(); ++i) {
        const char c = word[i];
        if (std::isupper(static_cast<unsigned char>(c)) && !cur.empty() &&
            std::islower(static_cast<unsigned char>(word[i - 1]))) {
            parts.push_back(cur);
            cur.clear();
        }
        cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

} // namespace

const std::vector<std::string>& ontology() {
    static const std::vector<std::string> names = {
        "BusinessRuleChange", "CategoricalRemap", "KeyMismatch", "NullInflation", "Other",
        "Rounding",           "SchemaRename",     "TimeZoneShift", "Truncation",  "TypeCast"};
    return names;
}

bool in_ontology(std::string_view name) {
    const auto& o = ontology();
    return std::find(o.begin(), o.end(), name) != o.end();
}

std::vector<std::string> implied_labels(const std::vector<std::string>& patterns) {
    std::vector<std::string> out;
    for (const auto& p : patterns) {
        if (p == "Rounding" || p == "Truncation" || p == "NullInflation" || p == "TimeZoneShift") {
            out.push_back(p);
        } else if (p == "TypeMismatch") {
            out.push_back("TypeCast");
        }
    }
    sort_unique(out);
    return out;
}

std::string pseudonymize(std::string_view value, std::string_view salt) {
    const KeyedHasher hasher(salt);
    std::string out(value);
    for (std::size_t i = 0; i < value.size(); ++i) {
        const unsigned char c = static_cast<unsigned char>(value[i]);
        if (!std::isalnum(c)) continue;
        const std::uint64_t h = hasher(value.substr(0, i + 1));
        if (std::isdigit(c)) {
            out[i] = static_cast<char>('0' + h % 10);
        } else if (std::isupper(c)) {
            out[i] = static_cast<char>('A' + h % 26);
        } else {
            out[i] = static_cast<char>('a' + h % 26);
        }
    }
    return out;
}

std::size_t count_tokens(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!space && !in_token) ++n;
        in_token = !space;
    }
    return n;
}

std::string serialize_pack(const EvidencePack& pack, std::size_t rotation) {
    std::ostringstream out;
    out << "cluster: " << pack.cluster_id << '\n';
    std::vector<std::string> quoted;
    for (const auto& c : pack.columns) quoted.push_back("`" + c + "`");
    out << "columns: " << join(quoted, ", ") << '\n';
    for (const auto& line : pack.context_lines) out << line << '\n';
    out << "candidate_patterns: " << (pack.candidate_patterns.empty() ? "none" : join(pack.candidate_patterns, ", "))
        << '\n';
    const std::size_t n = pack.rows.size();
    for (std::size_t i = 0; i < n; ++i) out << "row: " << row_json(pack.rows[(i + rotation) % n]).dump() << '\n';
    return out.str();
}

EvidencePack sample_evidence(const cluster::Cluster& cluster, const std::vector<datadiff::CellDiff>& diffs,
                             std::size_t k, std::string_view salt, const PackContext& context,
                             std::size_t token_budget) {
    EvidencePack pack;
    pack.cluster_id = cluster.id;
    pack.columns = cluster.columns;
    pack.candidate_patterns = cluster.candidate_patterns;
    pack.token_budget = token_budget;

    const auto& members = cluster.members;
    std::vector<std::size_t> chosen;
    if (!members.empty() && k > 0) {
        std::vector<datadiff::FeatureVector> features;
        features.reserve(members.size());
        for (auto m : members) features.push_back(datadiff::featurize(diffs[m]));
        std::vector<double> min_dist(members.size(), std::numeric_limits<double>::infinity());
        std::vector<bool> taken(members.size(), false);
        std::size_t next = 0;
        for (std::size_t round = 0; round < std::min(k, members.size()); ++round) {
            chosen.push_back(next);
            taken[next] = true;
            std::size_t best = members.size();
            double best_d = -1.0;
            for (std::size_t i = 0; i < members.size(); ++i) {
                if (taken[i]) continue;
                min_dist[i] = std::min(min_dist[i], cluster::distance(features[i], features[next]));
                if (min_dist[i] > best_d) {
                    best_d = min_dist[i];
                    best = i;
                }
            }
            if (best == members.size()) break;
            next = best;
        }
        std::sort(chosen.begin(), chosen.end());
    }

    for (auto idx : chosen) {
        const auto& d = diffs[members[idx]];
        EvidenceRow r;
        r.row_id = row_id_for(d.key, d.column, salt);
        r.column = d.column;
        r.kind = datadiff::detail_kind(d.detail);
        r.source = render_value(d.source_value, salt);
        r.target = render_value(d.target_value, salt);
        if (const auto* f = std::get_if<datadiff::FloatDelta>(&d.detail)) r.rounding_decimals = f->rounding_decimals;
        if (const auto* t = std::get_if<datadiff::DateTimeDelta>(&d.detail)) r.offset_minutes = t->offset_minutes;
        if (const auto* nc = std::get_if<datadiff::NullChange>(&d.detail)) r.null_direction = nc->direction;
        if (r.kind == datadiff::DetailKind::StringEdit) {
            auto a = ingest::parse_float(d.source_value.raw);
            auto b = ingest::parse_float(d.target_value.raw);
            if (a && b) r.rounding_decimals = datadiff::rounding_signature(*a, *b);
        }
        pack.evidence_row_ids.push_back(r.row_id);
        pack.rows.push_back(std::move(r));
    }

    if (!context.key_spec.empty()) pack.context_lines.push_back("key: " + context.key_spec);
    for (const auto& c : cluster.columns) {
        if (auto it = context.column_types.find(c); it != context.column_types.end())
            pack.context_lines.push_back("type `" + c + "`: " + it->second);
    }
    for (const auto& c : cluster.columns) {
        if (auto it = context.column_stats.find(c); it != context.column_stats.end()) {
            for (const auto& s : it->second) pack.context_lines.push_back("stat `" + c + "`: " + s);
        }
    }
    while (!pack.context_lines.empty() && count_tokens(serialize_pack(pack)) > token_budget)
        pack.context_lines.pop_back();
    return pack;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (word.empty()) return;
        std::string lower;
        for (char c : word) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        out.push_back(lower);
        auto parts = split_camel(word);
        if (parts.size() > 1) out.insert(out.end(), parts.begin(), parts.end());
        word.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            word.push_back(c);
        } else {
            flush();
        }
    }
    flush();
    return out;
}

KnowledgeIndex KnowledgeIndex::load(const std::filesystem::path& dir) {
    KnowledgeIndex index;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) return index;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(dir, ec)) {
        if (!entry.is_regular_file()) continue;
        const auto ext = entry.path().extension().string();
        if (ext == ".txt" || ext == ".md" || ext == ".markdown") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        index.add_document(std::filesystem::relative(f, dir).generic_string(), buf.str());
    }
    return index;
}

void KnowledgeIndex::add_document(std::string doc_id, std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string paragraph;
    std::size_t index = 0;
    auto flush = [&] {
        if (paragraph.empty()) return;
        Passage p;
        p.doc_id = doc_id;
        p.index = index++;
        p.text = paragraph;
        p.tokens = tokenize(paragraph);
        sort_unique(p.tokens);
        passages_.push_back(std::move(p));
        paragraph.clear();
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const bool blank = std::all_of(line.begin(), line.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
        if (blank) {
            flush();
            continue;
        }
        if (!paragraph.empty()) paragraph += '\n';
        paragraph += line;
    }
    flush();
}

std::vector<KnowledgeSnippet> KnowledgeIndex::retrieve(const std::vector<std::string>& columns,
                                                       const std::vector<std::string>& patterns,
                                                       std::size_t top) const {
    std::vector<std::string> query;
    for (const auto& c : columns) {
        auto t = tokenize(c);
        query.insert(query.end(), t.begin(), t.end());
    }
    for (const auto& p : patterns) {
        auto t = tokenize(p);
        query.insert(query.end(), t.begin(), t.end());
    }
    sort_unique(query);

    std::vector<KnowledgeSnippet> scored;
    for (const auto& p : passages_) {
        std::size_t overlap = 0;
        for (const auto& q : query) {
            if (std::binary_search(p.tokens.begin(), p.tokens.end(), q)) ++overlap;
        }
        if (overlap == 0) continue;
        scored.push_back({p.doc_id, p.index, p.text, static_cast<double>(overlap)});
    }
    std::stable_sort(scored.begin(), scored.end(), [](const KnowledgeSnippet& a, const KnowledgeSnippet& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.doc_id != b.doc_id) return a.doc_id < b.doc_id;
        return a.passage < b.passage;
    });
    if (scored.size() > top) scored.resize(top);
    return scored;
}

nlohmann::json output_schema() {
    nlohmann::json labels = nlohmann::json::array();
    for (const auto& l : ontology()) labels.push_back(l);
    return {
        {"type", "object"},
        {"additionalProperties", false},
        {"required", {"labels", "rationale", "confidence", "evidence_row_ids"}},
        {"properties",
         {{"labels", {{"type", "array"}, {"minItems", 1}, {"items", {{"type", "string"}, {"enum", labels}}}}},
          {"other_explanation", {{"type", "string"}}},
          {"rationale", {{"type", "string"}}},
          {"confidence", {{"type", "number"}, {"minimum", 0}, {"maximum", 1}}},
          {"evidence_row_ids", {{"type", "array"}, {"items", {{"type", "string"}}}}},
          {"recommended_checks", {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
    };
}

Prompt build_prompt(const EvidencePack& pack, const std::vector<KnowledgeSnippet>& snippets,
                    std::size_t rotation) {
    Prompt p;
    p.output_schema = output_schema();
    std::ostringstream out;
    out << "## System\n" << kSystemSection;
    out << "ontology: " << join(ontology(), ", ") << '\n';
    out << "output_schema: " << p.output_schema.dump() << '\n';
    if (!snippets.empty()) {
        out << "## Context\n";
        for (const auto& s : snippets) out << '[' << s.doc_id << '#' << s.passage << "] " << s.text << '\n';
    }
    out << "## Evidence\n" << serialize_pack(pack, rotation);
    p.text = out.str();
    return p;
}

std::string_view to_string(Origin o) { return o == Origin::Model ? "Model" : "Template"; }

std::string LabelJudgment::label_string() const { return join(label_names(), ":"); }

std::vector<std::string> LabelJudgment::label_names() const {
    std::vector<std::string> out;
    for (const auto& l : labels) out.push_back(l.name);
    return out;
}

std::string_view to_string(GuardFailure f) {
    switch (f) {
        case GuardFailure::WhitelistViolation: return "WhitelistViolation";
        case GuardFailure::UnknownColumnReference: return "UnknownColumnReference";
        case GuardFailure::UnsupportedClaim: return "UnsupportedClaim";
        case GuardFailure::MalformedOutput: return "MalformedOutput";
        case GuardFailure::EvidenceIdUnknown: return "EvidenceIdUnknown";
    }
    return "MalformedOutput";
}

std::optional<LabelJudgment> parse_judgment(std::string_view text) {
    auto doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    const auto string_list = [](const nlohmann::json& j, std::vector<std::string>& out) {
        if (!j.is_array()) return false;
        for (const auto& e : j) {
            if (!e.is_string()) return false;
            out.push_back(e.get<std::string>());
        }
        return true;
    };
    LabelJudgment j;
    std::vector<std::string> names;
    if (!doc.contains("labels") || !string_list(doc["labels"], names) || names.empty()) return std::nullopt;
    if (!doc.contains("rationale") || !doc["rationale"].is_string()) return std::nullopt;
    if (!doc.contains("confidence") || !doc["confidence"].is_number()) return std::nullopt;
    if (!doc.contains("evidence_row_ids") || !string_list(doc["evidence_row_ids"], j.evidence_row_ids))
        return std::nullopt;
    if (doc.contains("recommended_checks") && !string_list(doc["recommended_checks"], j.recommended_checks))
        return std::nullopt;
    std::string other;
    if (doc.contains("other_explanation")) {
        if (!doc["other_explanation"].is_string()) return std::nullopt;
        other = doc["other_explanation"].get<std::string>();
    }
    const double conf = doc["confidence"].get<double>();
    if (!(conf >= 0.0 && conf <= 1.0)) return std::nullopt;
    sort_unique(names);
    if (!std::all_of(names.begin(), names.end(), [](const std::string& n) { return in_ontology(n); }))
        return std::nullopt;
    for (auto& n : names) j.labels.push_back({n, n == "Other" ? other : std::string()});
    j.rationale = doc["rationale"].get<std::string>();
    j.confidence = conf;
    j.origin = Origin::Model;
    return j;
}

DecodeResult decode_labels(LabelerClient& client, const EvidencePack& pack,
                           const std::vector<KnowledgeSnippet>& snippets, std::size_t m) {
    DecodeResult out;
    const std::size_t n = pack.rows.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 2);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t rotation = n ? (i * stride) % n : 0;
        const auto prompt = build_prompt(pack, snippets, rotation);
        const auto text = client.complete(prompt.text, prompt.output_schema, 0.0);
        if (auto j = parse_judgment(text)) {
            out.candidates.push_back(std::move(*j));
        } else {
            out.failures.push_back(GuardFailure::MalformedOutput);
        }
    }
    return out;
}

LabelJudgment aggregate_judgments(const std::vector<LabelJudgment>& candidates) {
    if (candidates.empty()) throw Error(ErrorCode::NoValidCandidates, "no parseable labeler candidates");
    const std::size_t n = candidates.size();
    std::map<std::string, std::size_t> votes;
    for (const auto& c : candidates) {
        for (const auto& name : c.label_names()) ++votes[name];
    }
    auto best_of = [](const std::vector<const LabelJudgment*>& pool) {
        const LabelJudgment* best = pool.front();
        for (const auto* c : pool) {
            if (c->confidence > best->confidence) best = c;
        }
        return best;
    };
    std::vector<std::string> kept;
    for (const auto& [name, count] : votes) {
        if (count * 2 > n) kept.push_back(name);
    }
    if (kept.empty()) {
        std::vector<const LabelJudgment*> all;
        for (const auto& c : candidates) all.push_back(&c);
        kept = best_of(all)->label_names();
    }
    std::vector<const LabelJudgment*> supporting;
    for (const auto& c : candidates) {
        const auto names = c.label_names();
        if (std::includes(names.begin(), names.end(), kept.begin(), kept.end())) supporting.push_back(&c);
    }
    double sum = 0;
    for (const auto* c : supporting) sum += c->confidence;
    const double mean = sum / static_cast<double>(supporting.size());
    const double ratio = static_cast<double>(supporting.size()) / static_cast<double>(n);

    const LabelJudgment* source = best_of(supporting);
    LabelJudgment out;
    for (const auto& name : kept) {
        std::string other;
        for (const auto& l : source->labels) {
            if (l.name == name) other = l.other_explanation;
        }
        out.labels.push_back({name, other});
    }
    out.rationale = source->rationale;
    out.confidence = mean * ratio;
    out.evidence_row_ids = source->evidence_row_ids;
    out.recommended_checks = source->recommended_checks;
    out.origin = Origin::Model;
    return out;
}

double calibrate_confidence(const LabelJudgment& judgment, const cluster::Cluster& cluster,
                            const std::vector<std::string>& patterns) {
    double agreement = 0;
    if (!judgment.labels.empty()) {
        const auto implied = implied_labels(patterns);
        std::size_t hits = 0;
        for (const auto& l : judgment.labels) {
            if (std::binary_search(implied.begin(), implied.end(), l.name)) ++hits;
        }
        agreement = static_cast<double>(hits) / static_cast<double>(judgment.labels.size());
    }
    const double v = 0.5 * judgment.confidence + 0.3 * agreement + 0.2 * cluster.purity;
    return std::clamp(v, 0.0, 1.0);
}

GuardReport passes_guards(const LabelJudgment& judgment, const EvidencePack& pack) {
    std::set<GuardFailure> failures;
    if (judgment.labels.empty()) failures.insert(GuardFailure::MalformedOutput);
    for (const auto& l : judgment.labels) {
        if (!in_ontology(l.name)) failures.insert(GuardFailure::WhitelistViolation);
        if (l.name == "Other" && l.other_explanation.empty()) failures.insert(GuardFailure::MalformedOutput);
    }
    for (const auto& ref : backticked(judgment.rationale)) {
        if (std::find(pack.columns.begin(), pack.columns.end(), ref) == pack.columns.end())
            failures.insert(GuardFailure::UnknownColumnReference);
    }
    if (has_label(judgment, "Rounding") && !supports_rounding(pack)) failures.insert(GuardFailure::UnsupportedClaim);
    if (has_label(judgment, "TimeZoneShift") && !supports_timezone_shift(pack))
        failures.insert(GuardFailure::UnsupportedClaim);
    if (has_label(judgment, "NullInflation") && !supports_null_inflation(pack))
        failures.insert(GuardFailure::UnsupportedClaim);
    for (const auto& id : judgment.evidence_row_ids) {
        if (std::find(pack.evidence_row_ids.begin(), pack.evidence_row_ids.end(), id) == pack.evidence_row_ids.end())
            failures.insert(GuardFailure::EvidenceIdUnknown);
    }
    GuardReport r;
    r.failures.assign(failures.begin(), failures.end());
    r.passed = r.failures.empty();
    return r;
}

LabelJudgment template_label(const cluster::Cluster& cluster, const std::vector<std::string>& patterns) {
    LabelJudgment j;
    const auto implied = implied_labels(patterns);
    if (implied.empty()) {
        j.labels.push_back({"Other", "unclassified cluster " + cluster.id});
    } else {
        for (const auto& name : implied) j.labels.push_back({name, ""});
    }
    std::vector<std::string> cols;
    for (const auto& c : cluster.columns) cols.push_back("`" + c + "`");
    j.rationale = "Cluster " + cluster.id + " groups " + std::to_string(cluster.member_count) +
                  " differences in " + join(cols, ", ") +
                  (patterns.empty() ? std::string(" with no known pattern.")
                                    : " matching " + join(patterns, ", ") + ".");
    j.confidence = 0.4 + 0.4 * cluster.purity;
    j.recommended_checks = {"Inspect the sample rows of " + join(cols, ", ") + " in both datasets."};
    j.origin = Origin::Template;
    return j;
}

LabelJudgment label_cluster(const cluster::Cluster& cluster, const std::vector<datadiff::CellDiff>& diffs,
                            const LabelConfig& config, LabelerClient* client, const KnowledgeIndex& index,
                            const PackContext& context) {
    const auto& patterns = cluster.candidate_patterns;
    if (!config.enabled || client == nullptr) return template_label(cluster, patterns);
    try {
        const auto pack = sample_evidence(cluster, diffs, config.k, config.salt, context, config.token_budget);
        const auto snippets = index.retrieve(cluster.columns, patterns);
        const auto decoded = decode_labels(*client, pack, snippets, std::max<std::size_t>(1, config.m));
        if (decoded.candidates.empty()) return template_label(cluster, patterns);
        auto judgment = aggregate_judgments(decoded.candidates);
        if (!passes_guards(judgment, pack).passed) return template_label(cluster, patterns);
        judgment.confidence = calibrate_confidence(judgment, cluster, patterns);
        judgment.origin = Origin::Model;
        return judgment;
    } catch (...) {
        // Transport failures and misbehaving clients both end on the template path.
        return template_label(cluster, patterns);
    }
}

std::vector<LabelJudgment> label_clusters(const std::vector<cluster::Cluster>& clusters,
                                          const std::vector<datadiff::CellDiff>& diffs, const LabelConfig& config,
                                          LabelerClient* client, const KnowledgeIndex& index,
                                          const PackContext& context) {
    std::vector<LabelJudgment> out(clusters.size());
    const std::size_t workers =
        (config.enabled && client) ? std::clamp<std::size_t>(config.concurrency, 1, std::max<std::size_t>(1, clusters.size())) : 1;
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < clusters.size(); i = next++)
            out[i] = label_cluster(clusters[i], diffs, config, client, index, context);
    };
    if (workers <= 1) {
        work();
        return out;
    }
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
    return out;
}

} // namespace driftdiff::label
