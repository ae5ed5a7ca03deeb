// Copyright 2026 The secretsift Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "secretsift/classifier.hpp"
#include "secretsift/metrics.hpp"
#include "secretsift/scanner.hpp"
#include "secretsift/taxonomy.hpp"
#include "secretsift/utf8.hpp"
#include "secretsift/version.hpp"

namespace secretsift {

/// Masks a secret for display. Under 8 characters: "********"; 8 to 11:
/// first 2 + "…" + last 2; 12 and longer: first 4 + "…" + last 4.
/// Lengths are in characters.
inline std::string redact(std::string_view secret)
{
    const std::u32string s = utf8::decode_lossy(secret);
    const std::size_t n = s.size();
    if (n < 8) {
        return "********";
    }
    const std::size_t keep = n >= 12 ? 4 : 2;
    std::u32string out = s.substr(0, keep);
    out.push_back(U'…');
    out += s.substr(n - keep);
    return utf8::encode(out);
}

struct Finding {
    std::string candidate_id;
    std::string candidate; // possibly redacted
    std::string file_path;
    std::size_t line = 0;
    std::size_t column = 0;
    std::string pattern_id;
    double entropy_bits = 0.0;
    std::optional<Label> verdict;
    std::optional<TaxonomyClass> secret_type;
    std::optional<ErrorCode> error;
};

struct ScanSummary {
    std::size_t files_scanned = 0;
    std::size_t files_skipped = 0;
    std::size_t candidates = 0;
    std::size_t classified_secret = 0;
    std::size_t errors = 0;
};

struct ScanReport {
    std::string tool_version = kToolVersion;
    std::string catalog_source;
    std::size_t window_chars = 0;
    bool redacted = true;
    bool classified = false;
    std::vector<Finding> findings;
    std::vector<ScanError> file_errors;
    ScanSummary summary;
};

/// Collapses candidates that share (file_path, start, end); the first one in
/// scan order (lowest pattern id) is kept.
inline std::vector<Candidate> dedupe_spans(const std::vector<Candidate>& sorted)
{
    std::vector<Candidate> out;
    for (const auto& c : sorted) {
        if (!out.empty() && out.back().file_path == c.file_path && out.back().start_offset == c.start_offset
            && out.back().end_offset == c.end_offset) {
            continue;
        }
        out.push_back(c);
    }
    return out;
}

inline Finding make_finding(const Candidate& c, bool redact_text)
{
    Finding f;
    f.candidate_id = c.candidate_id;
    f.candidate = redact_text ? redact(c.matched_text) : c.matched_text;
    f.file_path = c.file_path;
    f.line = c.line;
    f.column = c.column;
    f.pattern_id = c.pattern_id;
    f.entropy_bits = c.entropy_bits;
    return f;
}

inline nlohmann::ordered_json to_json(const ScanReport& r)
{
    using json = nlohmann::ordered_json;
    json j;
    j["tool_version"] = r.tool_version;
    j["catalog_source"] = r.catalog_source;
    j["window_chars"] = r.window_chars;
    j["redacted"] = r.redacted;
    j["findings"] = json::array();
    for (const auto& f : r.findings) {
        json o;
        o["candidate_id"] = f.candidate_id;
        o["candidate"] = f.candidate;
        o["file_path"] = f.file_path;
        o["line"] = f.line;
        o["column"] = f.column;
        o["pattern_id"] = f.pattern_id;
        o["entropy_bits"] = f.entropy_bits;
        if (r.classified) {
            o["verdict"] = f.verdict ? json(std::string(to_string(*f.verdict))) : json(nullptr);
        }
        if (f.secret_type) {
            o["secret_type"] = std::string(slug(*f.secret_type));
        }
        if (f.error) {
            o["error"] = std::string(to_string(*f.error));
        }
        j["findings"].push_back(std::move(o));
    }
    j["file_errors"] = json::array();
    for (const auto& e : r.file_errors) {
        j["file_errors"].push_back({{"file_path", e.file_path}, {"message", e.message}});
    }
    j["summary"] = {
        {"files_scanned", r.summary.files_scanned},
        {"files_skipped", r.summary.files_skipped},
        {"candidates", r.summary.candidates},
        {"classified_secret", r.summary.classified_secret},
        {"errors", r.summary.errors},
    };
    return j;
}

namespace detail {

    /// Left-aligned columns separated by two spaces; widths in characters.
    inline std::string render_table(const std::vector<std::vector<std::string>>& rows)
    {
        if (rows.empty()) {
            return {};
        }
        std::vector<std::size_t> width(rows.front().size(), 0);
        for (const auto& r : rows) {
            for (std::size_t c = 0; c < r.size(); ++c) {
                width[c] = std::max(width[c], utf8::length(r[c]));
            }
        }
        std::string out;
        for (const auto& r : rows) {
            std::string line;
            for (std::size_t c = 0; c < r.size(); ++c) {
                line += r[c];
                if (c + 1 < r.size()) {
                    line.append(width[c] - utf8::length(r[c]) + 2, ' ');
                }
            }
            while (!line.empty() && line.back() == ' ') {
                line.pop_back();
            }
            out += line + "\n";
        }
        return out;
    }

    inline std::string fixed(double v, int digits)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.*f", digits, v);
        return buf;
    }

} // namespace detail

inline std::string to_table(const ScanReport& r)
{
    std::string out = "secretsift " + r.tool_version + "  catalog=" + r.catalog_source
        + "  window=" + std::to_string(r.window_chars) + "\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head {"FILE", "LINE:COL", "PATTERN", "ENTROPY"};
    if (r.classified) {
        head.push_back("VERDICT");
    }
    head.push_back("CANDIDATE");
    rows.push_back(head);
    for (const auto& f : r.findings) {
        std::vector<std::string> row {f.file_path, std::to_string(f.line) + ":" + std::to_string(f.column), f.pattern_id,
                                      detail::fixed(f.entropy_bits, 2)};
        if (r.classified) {
            std::string v = f.verdict ? std::string(to_string(*f.verdict)) : (f.error ? std::string(to_string(*f.error)) : "-");
            if (f.secret_type) {
                v += " (" + std::string(display_name(*f.secret_type)) + ")";
            }
            row.push_back(v);
        }
        std::string cand = f.candidate;
        std::replace(cand.begin(), cand.end(), '\n', ' ');
        row.push_back(cand);
        rows.push_back(std::move(row));
    }
    out += detail::render_table(rows);
    out += "files_scanned=" + std::to_string(r.summary.files_scanned) + " files_skipped=" + std::to_string(r.summary.files_skipped)
        + " candidates=" + std::to_string(r.summary.candidates) + " classified_secret=" + std::to_string(r.summary.classified_secret)
        + " errors=" + std::to_string(r.summary.errors) + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation report

struct EvaluationFailure {
    std::string id;
    ErrorCode error;
    std::string raw_response;
};

struct EvaluationReport {
    std::string tool_version = kToolVersion;
    Mode mode = Mode::Binary;
    std::string backend;
    std::string model_id;
    std::size_t shots = 0;
    std::size_t context_chars = 0;
    std::string dataset;
    std::string on_unparseable;
    std::size_t examples = 0;
    std::size_t evaluated = 0;
    std::vector<EvaluationFailure> failures;
    ConfusionMatrix confusion;
    MetricsReport metrics;
};

namespace detail {

    inline nlohmann::ordered_json scores_json(const ClassScores& s, bool with_support)
    {
        nlohmann::ordered_json j;
        j["precision"] = s.precision;
        j["recall"] = s.recall;
        j["f1"] = s.f1;
        j["f2"] = s.f2;
        if (with_support) {
            j["support"] = s.support;
        }
        return j;
    }

} // namespace detail

inline nlohmann::ordered_json to_json(const EvaluationReport& r)
{
    using json = nlohmann::ordered_json;
    json j;
    j["tool_version"] = r.tool_version;
    j["mode"] = std::string(to_string(r.mode));
    j["backend"] = r.backend;
    j["model_id"] = r.model_id;
    j["shots"] = r.shots;
    j["context_chars"] = r.context_chars;
    j["dataset"] = r.dataset;
    j["on_unparseable"] = r.on_unparseable;
    j["examples"] = r.examples;
    j["evaluated"] = r.evaluated;
    j["failures"] = json::array();
    for (const auto& f : r.failures) {
        j["failures"].push_back({{"id", f.id}, {"error", std::string(to_string(f.error))}, {"raw_response", f.raw_response}});
    }
    j["confusion_matrix"] = {{"labels", r.confusion.labels}, {"counts", r.confusion.counts}};
    if (r.mode == Mode::Binary) {
        j["positive_class"] = detail::scores_json(r.metrics.of(to_string(Label::Secret)), true);
    }
    j["per_class"] = json::object();
    for (std::size_t i = 0; i < r.metrics.labels.size(); ++i) {
        j["per_class"][r.metrics.labels[i]] = detail::scores_json(r.metrics.per_class[i], true);
    }
    j["macro"] = detail::scores_json(r.metrics.macro, false);
    j["weighted"] = detail::scores_json(r.metrics.weighted, false);
    j["accuracy"] = r.metrics.accuracy;
    return j;
}

inline std::string to_table(const EvaluationReport& r)
{
    std::string out = "mode=" + std::string(to_string(r.mode)) + "  backend=" + r.backend + "  shots=" + std::to_string(r.shots)
        + "  evaluated=" + std::to_string(r.evaluated) + "/" + std::to_string(r.examples) + "\n";
    std::vector<std::vector<std::string>> rows {{"CATEGORY", "PRECISION", "RECALL", "F1", "F2", "SUPPORT"}};
    for (std::size_t i = 0; i < r.metrics.labels.size(); ++i) {
        const auto& s = r.metrics.per_class[i];
        rows.push_back({r.metrics.labels[i], format_score(s.precision), format_score(s.recall), format_score(s.f1),
                        format_score(s.f2), std::to_string(s.support)});
    }
    const auto& m = r.metrics.macro;
    rows.push_back({"macro avg", format_score(m.precision), format_score(m.recall), format_score(m.f1), format_score(m.f2), ""});
    const auto& w = r.metrics.weighted;
    rows.push_back({"weighted avg", format_score(w.precision), format_score(w.recall), format_score(w.f1), format_score(w.f2),
                    std::to_string(w.support)});
    out += detail::render_table(rows);
    out += "accuracy=" + format_score(r.metrics.accuracy);
    if (!r.failures.empty()) {
        out += "  failures=" + std::to_string(r.failures.size());
    }
    out += "\n";
    return out;
}

} // namespace secretsift
