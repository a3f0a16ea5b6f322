// Copyright 2026 The driftdiff Authors
// SPDX-License-Identifier: Apache-2.0
#include "driftdiff/labeler_clients.hpp"

#include <map>
#include <random>
#include <set>
#include <sstream>

#include <httplib.h>

#include "driftdiff/error.hpp"
#include "driftdiff/hash.hpp"

namespace driftdiff::label {

namespace {

struct ParsedPrompt {
    std::vector<std::string> patterns;
    std::vector<nlohmann::json> rows;
};

ParsedPrompt parse_prompt(const std::string& prompt) {
    ParsedPrompt out;
    const auto evidence = prompt.find("## Evidence\n");
    if (evidence == std::string::npos) return out;
    std::istringstream in(prompt.substr(evidence));
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind("candidate_patterns: ", 0) == 0) {
            std::string rest = line.substr(20);
            if (rest == "none") continue;
            std::istringstream parts(rest);
            std::string p;
            while (std::getline(parts, p, ',')) {
                const auto b = p.find_first_not_of(' ');
                if (b != std::string::npos) out.patterns.push_back(p.substr(b));
            }
        } else if (line.rfind("row: ", 0) == 0) {
            auto j = nlohmann::json::parse(line.substr(5), nullptr, false);
            if (!j.is_discarded() && j.is_object()) out.rows.push_back(std::move(j));
        }
    }
    return out;
}

std::string field(const nlohmann::json& row, const char* name) {
    auto it = row.find(name);
    return (it != row.end() && it->is_string()) ? it->get<std::string>() : std::string();
}

// Every row is a string edit, each source value always maps to the same
// target, and at least one mapping repeats.
bool looks_like_remap(const std::vector<nlohmann::json>& rows) {
    if (rows.size() < 2) return false;
    std::map<std::string, std::string> mapping;
    for (const auto& r : rows) {
        if (field(r, "kind") != "StringEdit") return false;
        auto [it, inserted] = mapping.emplace(field(r, "source"), field(r, "target"));
        if (!inserted && it->second != field(r, "target")) return false;
    }
    return mapping.size() < rows.size();
}

bool all_numeric_deltas(const std::vector<nlohmann::json>& rows) {
    if (rows.empty()) return false;
    for (const auto& r : rows) {
        const auto k = field(r, "kind");
        if (k != "IntDelta" && k != "FloatDelta") return false;
    }
    return true;
}

nlohmann::json mock_judgment(const ParsedPrompt& p) {
    std::set<std::string> labels;
    for (const auto& pat : p.patterns) {
        if (pat == "Rounding" || pat == "Truncation" || pat == "NullInflation" || pat == "TimeZoneShift") {
            labels.insert(pat);
        } else if (pat == "TypeMismatch" || pat == "ZeroPadding") {
            labels.insert("TypeCast");
        }
    }
    double confidence = 0.9;
    std::string other;
    if (labels.empty()) {
        if (!p.patterns.empty()) {
            labels.insert("Other");
            other = "pattern without an ontology label";
            confidence = 0.5;
        } else if (looks_like_remap(p.rows)) {
            labels.insert("CategoricalRemap");
            confidence = 0.8;
        } else if (all_numeric_deltas(p.rows)) {
            labels.insert("BusinessRuleChange");
            confidence = 0.8;
        } else {
            labels.insert("Other");
            other = "no consistent rule in the evidence";
            confidence = 0.5;
        }
    }
    std::set<std::string> columns;
    nlohmann::json ids = nlohmann::json::array();
    for (const auto& r : p.rows) {
        columns.insert(field(r, "column"));
        ids.push_back(field(r, "id"));
    }
    std::string cited;
    for (const auto& c : columns) cited += (cited.empty() ? "`" : ", `") + c + "`";
    nlohmann::json out = {
        {"labels", labels},
        {"rationale", std::to_string(p.rows.size()) + " evidence rows in " + (cited.empty() ? "no column" : cited) +
                          " share the same change."},
        {"confidence", confidence},
        {"evidence_row_ids", ids},
        {"recommended_checks", {"Trace the transformation that writes these columns."}},
    };
    if (!other.empty()) out["other_explanation"] = other;
    return out;
}

} // namespace

std::string MockLabelerClient::complete(const std::string& prompt, const nlohmann::json&, double) {
    return mock_judgment(parse_prompt(prompt)).dump();
}

std::string FuzzLabelerClient::complete(const std::string& prompt, const nlohmann::json&, double) {
    std::mt19937_64 rng(seed_ ^ keyed_hash64("fuzz", prompt));
    const auto parsed = parse_prompt(prompt);
    auto valid = mock_judgment(parsed);
    switch (rng() % 8) {
        case 0: {
            std::string bytes(rng() % 200, '\0');
            for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
            return bytes;
        }
        case 1: {
            const auto text = valid.dump();
            return text.substr(0, rng() % text.size());
        }
        case 2:
            valid["labels"] = {"FooBar"};
            return valid.dump();
        case 3:
            valid["evidence_row_ids"].push_back("row-unknown");
            return valid.dump();
        case 4:
            valid["rationale"] = "Caused by `no_such_column`.";
            return valid.dump();
        case 5:
            valid["labels"] = {"Other"};
            valid.erase("other_explanation");
            return valid.dump();
        case 6:
            valid["labels"] = {"Rounding", "TimeZoneShift", "NullInflation"};
            return valid.dump();
        default:
            return valid.dump();
    }
}

HttpLabelerClient::HttpLabelerClient(std::string url, std::chrono::milliseconds timeout) : timeout_(timeout) {
    const auto scheme = url.find("://");
    if (scheme == std::string::npos) throw Error(ErrorCode::InvalidConfig, "labeler url needs a scheme: " + url);
    const auto slash = url.find('/', scheme + 3);
    origin_ = url.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : url.substr(slash);
}

std::string HttpLabelerClient::complete(const std::string& prompt, const nlohmann::json& output_schema,
                                        double temperature) {
    httplib::Client client(origin_);
    client.set_connection_timeout(timeout_);
    client.set_read_timeout(timeout_);
    client.set_write_timeout(timeout_);
    const nlohmann::json body = {{"prompt", prompt}, {"schema", output_schema}, {"temperature", temperature}};
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) throw Error(ErrorCode::ClientUnavailable, "labeler request failed: " + httplib::to_string(res.error()));
    if (res->status != 200)
        throw Error(ErrorCode::ClientUnavailable, "labeler returned HTTP " + std::to_string(res->status));
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("text") || !reply["text"].is_string())
        throw Error(ErrorCode::ClientUnavailable, "labeler reply lacks a text field");
    return reply["text"].get<std::string>();
}

} // namespace driftdiff::label
