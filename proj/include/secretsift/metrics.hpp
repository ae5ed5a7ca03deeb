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

#include <cfenv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "secretsift/error.hpp"
#include "secretsift/taxonomy.hpp"

namespace secretsift {

/// counts[gold][pred] over an ordered label set.
struct ConfusionMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint64_t>> counts;

    std::uint64_t support(std::size_t gold) const
    {
        std::uint64_t s = 0;
        for (auto v : counts[gold]) s += v;
        return s;
    }

    std::uint64_t predicted(std::size_t pred) const
    {
        std::uint64_t s = 0;
        for (const auto& row : counts) s += row[pred];
        return s;
    }

    std::uint64_t total() const
    {
        std::uint64_t s = 0;
        for (std::size_t g = 0; g < counts.size(); ++g) s += support(g);
        return s;
    }

    std::uint64_t trace() const
    {
        std::uint64_t s = 0;
        for (std::size_t i = 0; i < counts.size(); ++i) s += counts[i][i];
        return s;
    }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

inline ConfusionMatrix confusion_matrix(const std::vector<std::string>& golds, const std::vector<std::string>& preds,
                                        const std::vector<std::string>& labels)
{
    if (golds.size() != preds.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(golds.size()) + " gold labels vs " + std::to_string(preds.size()) + " predictions");
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        index.emplace(labels[i], i);
    }
    ConfusionMatrix cm;
    cm.labels = labels;
    cm.counts.assign(labels.size(), std::vector<std::uint64_t>(labels.size(), 0));
    auto lookup = [&](const std::string& s) {
        const auto it = index.find(s);
        if (it == index.end()) {
            throw Error(ErrorCode::UnknownCategory, "label '" + s + "' is not in the category set");
        }
        return it->second;
    };
    for (std::size_t i = 0; i < golds.size(); ++i) {
        ++cm.counts[lookup(golds[i])][lookup(preds[i])];
    }
    return cm;
}

/// Binary labels in report order: Non-sensitive first, Secret (the positive
/// class) second.
inline std::vector<std::string> binary_labels()
{
    return {std::string(to_string(Label::NonSensitive)), std::string(to_string(Label::Secret))};
}

inline std::vector<std::string> taxonomy_labels()
{
    std::vector<std::string> out;
    for (auto c : kAllTaxonomyClasses) {
        out.emplace_back(display_name(c));
    }
    return out;
}

inline ConfusionMatrix confusion_matrix(const std::vector<Label>& golds, const std::vector<Label>& preds)
{
    std::vector<std::string> g;
    std::vector<std::string> p;
    for (auto l : golds) g.emplace_back(to_string(l));
    for (auto l : preds) p.emplace_back(to_string(l));
    return confusion_matrix(g, p, binary_labels());
}

inline ConfusionMatrix confusion_matrix(const std::vector<TaxonomyClass>& golds, const std::vector<TaxonomyClass>& preds)
{
    std::vector<std::string> g;
    std::vector<std::string> p;
    for (auto c : golds) g.emplace_back(display_name(c));
    for (auto c : preds) p.emplace_back(display_name(c));
    return confusion_matrix(g, p, taxonomy_labels());
}

/// Builds the binary matrix from the four cell counts.
inline ConfusionMatrix binary_confusion(std::uint64_t tn, std::uint64_t fp, std::uint64_t fn, std::uint64_t tp)
{
    ConfusionMatrix cm;
    cm.labels = binary_labels();
    cm.counts = {{tn, fp}, {fn, tp}};
    return cm;
}

/// F-beta = (1 + b^2) P R / (b^2 P + R); 0 when the denominator is 0.
inline double fbeta(double precision, double recall, double beta)
{
    if (!(precision >= 0.0 && precision <= 1.0) || !(recall >= 0.0 && recall <= 1.0)) {
        throw Error(ErrorCode::DomainError, "precision and recall must lie in [0, 1]");
    }
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw Error(ErrorCode::DomainError, "beta must be positive");
    }
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom == 0.0) {
        return 0.0;
    }
    return (1.0 + b2) * precision * recall / denom;
}

struct ClassScores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double f2 = 0.0;
    std::uint64_t support = 0;
};

struct MetricsReport {
    std::vector<std::string> labels;
    std::vector<ClassScores> per_class; // parallel to labels
    ClassScores macro;                  // support unused
    ClassScores weighted;               // support-weighted means; support = total
    double accuracy = 0.0;

    const ClassScores& of(std::string_view label) const
    {
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (labels[i] == label) return per_class[i];
        }
        throw Error(ErrorCode::UnknownCategory, "label '" + std::string(label) + "' is not in the report");
    }
};

/// Per-class precision = diag/column, recall = diag/row (0 for empty
/// denominators), F1/F2 from those; macro and support-weighted means;
/// accuracy = trace/total.
inline MetricsReport class_report(const ConfusionMatrix& cm)
{
    if (cm.labels.empty() || cm.total() == 0) {
        throw Error(ErrorCode::EmptyMatrix, "confusion matrix has no observations");
    }
    MetricsReport r;
    r.labels = cm.labels;
    const std::size_t k = cm.labels.size();
    const double total = static_cast<double>(cm.total());
    for (std::size_t i = 0; i < k; ++i) {
        ClassScores s;
        const auto tp = static_cast<double>(cm.counts[i][i]);
        const auto col = cm.predicted(i);
        const auto row = cm.support(i);
        s.precision = col ? tp / static_cast<double>(col) : 0.0;
        s.recall = row ? tp / static_cast<double>(row) : 0.0;
        s.f1 = fbeta(s.precision, s.recall, 1.0);
        s.f2 = fbeta(s.precision, s.recall, 2.0);
        s.support = row;
        r.per_class.push_back(s);

        r.macro.precision += s.precision / static_cast<double>(k);
        r.macro.recall += s.recall / static_cast<double>(k);
        r.macro.f1 += s.f1 / static_cast<double>(k);
        r.macro.f2 += s.f2 / static_cast<double>(k);

        const double w = static_cast<double>(row) / total;
        r.weighted.precision += w * s.precision;
        r.weighted.recall += w * s.recall;
        r.weighted.f1 += w * s.f1;
        r.weighted.f2 += w * s.f2;
    }
    r.weighted.support = cm.total();
    r.macro.support = cm.total();
    r.accuracy = static_cast<double>(cm.trace()) / total;
    return r;
}

/// Four decimals, ties rounded to even.
inline std::string format_score(double v)
{
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double scaled = std::nearbyint(v * 10000.0);
    std::fesetround(saved);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", scaled / 10000.0);
    return buf;
}

} // namespace secretsift
