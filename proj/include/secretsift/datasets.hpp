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
#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "secretsift/error.hpp"
#include "secretsift/taxonomy.hpp"

namespace secretsift {

struct LabeledExample {
    std::string id;
    std::string candidate;
    std::string context;
    std::optional<std::string> file_path;
    std::optional<std::pair<std::size_t, std::size_t>> span;
    Label label = Label::NonSensitive;
    std::optional<TaxonomyClass> secret_type;

    friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

inline constexpr std::array<std::string_view, 8> kDatasetColumns {
    "id", "candidate", "context", "file_path", "start_offset", "end_offset", "label", "secret_type"};

namespace csv {

    struct Record {
        std::vector<std::string> fields;
        std::size_t line = 0; // line on which the record starts
    };

    /// Splits RFC 4180 text into records. Accepts LF or CRLF terminators and
    /// quoted fields spanning lines.
    inline std::vector<Record> parse(std::string_view text, const std::string& source)
    {
        std::vector<Record> records;
        std::size_t i = 0;
        std::size_t line = 1;
        const std::size_t n = text.size();
        while (i < n) {
            Record rec;
            rec.line = line;
            std::string field;
            bool done = false;
            while (!done) {
                field.clear();
                if (i < n && text[i] == '"') {
                    ++i;
                    while (true) {
                        if (i >= n) {
                            throw Error(ErrorCode::MalformedRow, source + ": line " + std::to_string(rec.line) + ": unterminated quoted field");
                        }
                        const char c = text[i++];
                        if (c == '"') {
                            if (i < n && text[i] == '"') {
                                field.push_back('"');
                                ++i;
                                continue;
                            }
                            break;
                        }
                        if (c == '\n') {
                            ++line;
                        }
                        field.push_back(c);
                    }
                    if (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                        throw Error(ErrorCode::MalformedRow, source + ": line " + std::to_string(line) + ": text after closing quote");
                    }
                } else {
                    while (i < n && text[i] != ',' && text[i] != '\n' && text[i] != '\r') {
                        if (text[i] == '"') {
                            throw Error(ErrorCode::MalformedRow, source + ": line " + std::to_string(line) + ": quote inside unquoted field");
                        }
                        field.push_back(text[i++]);
                    }
                }
                rec.fields.push_back(field);
                if (i >= n) {
                    done = true;
                } else if (text[i] == ',') {
                    ++i;
                } else {
                    if (text[i] == '\r') {
                        ++i;
                    }
                    if (i < n && text[i] == '\n') {
                        ++i;
                    }
                    ++line;
                    done = true;
                }
            }
            records.push_back(std::move(rec));
        }
        return records;
    }

    inline void write_field(std::ostream& out, std::string_view f)
    {
        if (f.find_first_of(",\"\r\n") == std::string_view::npos) {
            out << f;
            return;
        }
        out << '"';
        for (char c : f) {
            if (c == '"') {
                out << '"';
            }
            out << c;
        }
        out << '"';
    }

} // namespace csv

namespace detail {

    inline std::optional<std::size_t> parse_offset(std::string_view s)
    {
        std::size_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            return std::nullopt;
        }
        return v;
    }

} // namespace detail

/// Parses a dataset document. Row numbers in errors count the header as row 1.
inline std::vector<LabeledExample> parse_dataset(std::string_view text, const std::string& source)
{
    const auto records = csv::parse(text, source);
    if (records.empty()) {
        throw Error(ErrorCode::MalformedRow, source + ": row 1: missing header");
    }
    const auto& header = records.front().fields;
    if (header.size() != kDatasetColumns.size() || !std::equal(header.begin(), header.end(), kDatasetColumns.begin())) {
        throw Error(ErrorCode::MalformedRow, source + ": row 1: header must be id,candidate,context,file_path,start_offset,end_offset,label,secret_type");
    }
    std::vector<LabeledExample> out;
    out.reserve(records.size() - 1);
    std::unordered_set<std::string> ids;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& f = records[r].fields;
        const std::string where = source + ": row " + std::to_string(r + 1);
        if (f.size() == 1 && f[0].empty()) {
            continue; // blank line
        }
        if (f.size() != kDatasetColumns.size()) {
            throw Error(ErrorCode::MalformedRow, where + ": expected 8 fields, got " + std::to_string(f.size()));
        }
        LabeledExample ex;
        ex.id = f[0];
        ex.candidate = f[1];
        ex.context = f[2];
        if (ex.id.empty()) {
            throw Error(ErrorCode::MalformedRow, where + ": empty id");
        }
        if (!ids.insert(ex.id).second) {
            throw Error(ErrorCode::MalformedRow, where + ": duplicate id '" + ex.id + "'");
        }
        if (!f[3].empty()) {
            ex.file_path = f[3];
        }
        if (f[4].empty() != f[5].empty()) {
            throw Error(ErrorCode::MalformedRow, where + ": start_offset and end_offset must both be set or both empty");
        }
        if (!f[4].empty()) {
            const auto s = detail::parse_offset(f[4]);
            const auto e = detail::parse_offset(f[5]);
            if (!s || !e || *s > *e) {
                throw Error(ErrorCode::MalformedRow, where + ": invalid offsets");
            }
            ex.span = std::make_pair(*s, *e);
        }
        const auto label = label_from_slug(f[6]);
        if (!label) {
            throw Error(ErrorCode::UnknownLabel, where + ": unknown label '" + f[6] + "'");
        }
        ex.label = *label;
        if (!f[7].empty()) {
            const auto type = taxonomy_from_slug(f[7]);
            if (!type) {
                throw Error(ErrorCode::UnknownType, where + ": unknown secret_type '" + f[7] + "'");
            }
            if (ex.label == Label::NonSensitive) {
                throw Error(ErrorCode::MalformedRow, where + ": non_sensitive rows cannot carry a secret_type");
            }
            ex.secret_type = *type;
        }
        if (!ex.context.empty() && ex.context.find(ex.candidate) == std::string::npos) {
            throw Error(ErrorCode::MalformedRow, where + ": context does not contain the candidate");
        }
        out.push_back(std::move(ex));
    }
    return out;
}

inline std::vector<LabeledExample> load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, path.string() + ": cannot open dataset");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dataset(buf.str(), path.string());
}

inline void write_dataset(std::ostream& out, const std::vector<LabeledExample>& examples)
{
    for (std::size_t i = 0; i < kDatasetColumns.size(); ++i) {
        out << (i ? "," : "") << kDatasetColumns[i];
    }
    out << '\n';
    for (const auto& ex : examples) {
        csv::write_field(out, ex.id);
        out << ',';
        csv::write_field(out, ex.candidate);
        out << ',';
        csv::write_field(out, ex.context);
        out << ',';
        csv::write_field(out, ex.file_path.value_or(""));
        out << ',';
        if (ex.span) {
            out << ex.span->first << ',' << ex.span->second;
        } else {
            out << ',';
        }
        out << ',' << slug(ex.label) << ',';
        if (ex.secret_type) {
            out << slug(*ex.secret_type);
        }
        out << '\n';
    }
}

inline std::string serialize_dataset(const std::vector<LabeledExample>& examples)
{
    std::ostringstream out;
    write_dataset(out, examples);
    return out.str();
}

// ---------------------------------------------------------------------------
// Seeded shuffling

/// xoshiro256** seeded through SplitMix64. Output is identical on every
/// platform for a given seed.
class Xoshiro256 {
public:
    explicit Xoshiro256(std::uint64_t seed)
    {
        for (auto& s : state_) {
            seed += 0x9e3779b97f4a7c15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            s = z ^ (z >> 31);
        }
    }

    std::uint64_t next()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Unbiased integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound)
    {
        const std::uint64_t threshold = (0 - bound) % bound;
        while (true) {
            const std::uint64_t r = next();
            if (r >= threshold) {
                return r % bound;
            }
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<std::uint64_t, 4> state_ {};
};

/// Fisher-Yates from the back: for i = n-1 .. 1 swap v[i] with v[below(i+1)].
template <typename T>
void seeded_shuffle(std::vector<T>& v, Xoshiro256& rng)
{
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.below(i));
        std::swap(v[i - 1], v[j]);
    }
}

// ---------------------------------------------------------------------------
// Splits

enum class SplitStrategy { Balanced, Imbalanced, Multiclass };

constexpr std::string_view to_string(SplitStrategy s) noexcept
{
    switch (s) {
    case SplitStrategy::Balanced: return "balanced";
    case SplitStrategy::Imbalanced: return "imbalanced";
    case SplitStrategy::Multiclass: return "multiclass";
    }
    return {};
}

struct SplitSet {
    std::vector<LabeledExample> train;
    std::vector<LabeledExample> validation;
    std::vector<LabeledExample> test;
    SplitStrategy strategy = SplitStrategy::Balanced;
    std::uint64_t seed = 0;
};

/// Per-class sizes of one binary split layout.
struct BinarySplitSizes {
    std::size_t train_pos, train_neg, val_pos, val_neg, test_pos, test_neg;
};

inline constexpr BinarySplitSizes kBalancedSizes {12000, 12000, 1500, 1500, 1500, 1500};
inline constexpr BinarySplitSizes kImbalancedSizes {3750, 20250, 1500, 1500, 1500, 1500};

inline constexpr std::size_t kMulticlassRetained = 15000;
inline constexpr std::size_t kMulticlassTrain = 9000;
inline constexpr std::size_t kMulticlassValidation = 3000;
inline constexpr std::size_t kMulticlassTest = 3000;

namespace detail {

    inline std::vector<LabeledExample> sorted_by_id(std::vector<LabeledExample> pool)
    {
        std::sort(pool.begin(), pool.end(), [](const LabeledExample& a, const LabeledExample& b) { return a.id < b.id; });
        return pool;
    }

    inline std::vector<LabeledExample> take(const std::vector<LabeledExample>& v, std::size_t from, std::size_t count)
    {
        return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(from + count)};
    }

    inline std::vector<LabeledExample> concat(std::vector<LabeledExample> a, const std::vector<LabeledExample>& b)
    {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    }

    // Sort by id, shuffle secrets then non-secrets with one generator, draw
    // train/validation/test from the front of each, then shuffle each split.
    inline SplitSet binary_split(std::vector<LabeledExample> pool, std::uint64_t seed, const BinarySplitSizes& sz,
                                 SplitStrategy strategy)
    {
        pool = sorted_by_id(std::move(pool));
        std::vector<LabeledExample> pos;
        std::vector<LabeledExample> neg;
        for (auto& ex : pool) {
            (ex.label == Label::Secret ? pos : neg).push_back(std::move(ex));
        }
        const std::size_t need_pos = sz.train_pos + sz.val_pos + sz.test_pos;
        const std::size_t need_neg = sz.train_neg + sz.val_neg + sz.test_neg;
        if (pos.size() < need_pos) {
            throw Error(ErrorCode::InsufficientPool, "secrets: need " + std::to_string(need_pos) + ", have " + std::to_string(pos.size()), "secrets");
        }
        if (neg.size() < need_neg) {
            throw Error(ErrorCode::InsufficientPool, "non-secrets: need " + std::to_string(need_neg) + ", have " + std::to_string(neg.size()), "non-secrets");
        }
        Xoshiro256 rng(seed);
        seeded_shuffle(pos, rng);
        seeded_shuffle(neg, rng);
        SplitSet s;
        s.strategy = strategy;
        s.seed = seed;
        s.train = concat(take(pos, 0, sz.train_pos), take(neg, 0, sz.train_neg));
        s.validation = concat(take(pos, sz.train_pos, sz.val_pos), take(neg, sz.train_neg, sz.val_neg));
        s.test = concat(take(pos, sz.train_pos + sz.val_pos, sz.test_pos), take(neg, sz.train_neg + sz.val_neg, sz.test_neg));
        seeded_shuffle(s.train, rng);
        seeded_shuffle(s.validation, rng);
        seeded_shuffle(s.test, rng);
        return s;
    }

} // namespace detail

inline SplitSet make_balanced_split(std::vector<LabeledExample> pool, std::uint64_t seed)
{
    return detail::binary_split(std::move(pool), seed, kBalancedSizes, SplitStrategy::Balanced);
}

inline SplitSet make_imbalanced_split(std::vector<LabeledExample> pool, std::uint64_t seed)
{
    return detail::binary_split(std::move(pool), seed, kImbalancedSizes, SplitStrategy::Imbalanced);
}

/// Positives only. Keeps the 15,000 lowest ids, then shuffles into
/// 9,000/3,000/3,000. With `stratify`, every category is allotted to the
/// three splits in proportion (largest-remainder rounding).
inline SplitSet make_multiclass_split(std::vector<LabeledExample> pool, std::uint64_t seed, bool stratify = false)
{
    std::vector<LabeledExample> positives;
    for (auto& ex : pool) {
        if (ex.label != Label::Secret) {
            continue;
        }
        if (!ex.secret_type) {
            throw Error(ErrorCode::MissingTypeLabel, "secret '" + ex.id + "' has no secret_type");
        }
        positives.push_back(std::move(ex));
    }
    if (positives.size() < kMulticlassRetained) {
        throw Error(ErrorCode::InsufficientPool, "secrets: need " + std::to_string(kMulticlassRetained) + ", have "
                                                     + std::to_string(positives.size()), "secrets");
    }
    positives = detail::sorted_by_id(std::move(positives));
    positives.resize(kMulticlassRetained);

    Xoshiro256 rng(seed);
    SplitSet s;
    s.strategy = SplitStrategy::Multiclass;
    s.seed = seed;
    if (!stratify) {
        seeded_shuffle(positives, rng);
        s.train = detail::take(positives, 0, kMulticlassTrain);
        s.validation = detail::take(positives, kMulticlassTrain, kMulticlassValidation);
        s.test = detail::take(positives, kMulticlassTrain + kMulticlassValidation, kMulticlassTest);
        return s;
    }

    std::map<int, std::vector<LabeledExample>> by_class;
    for (auto& ex : positives) {
        by_class[static_cast<int>(*ex.secret_type)].push_back(std::move(ex));
    }
    const std::array<std::size_t, 3> targets {kMulticlassTrain, kMulticlassValidation, kMulticlassTest};
    // Allocation per class and split: floor shares, then hand out the
    // remaining seats per split to the largest fractional remainders.
    std::vector<std::array<std::size_t, 3>> alloc(by_class.size(), {0, 0, 0});
    std::vector<std::pair<int, std::size_t>> classes;
    for (const auto& [cls, items] : by_class) {
        classes.emplace_back(cls, items.size());
    }
    std::vector<std::size_t> left(classes.size());
    for (std::size_t c = 0; c < classes.size(); ++c) {
        left[c] = classes[c].second;
    }
    for (std::size_t split = 0; split < 2; ++split) {
        std::vector<std::pair<std::uint64_t, std::size_t>> remainders; // (remainder numerator, class)
        std::size_t given = 0;
        for (std::size_t c = 0; c < classes.size(); ++c) {
            const std::uint64_t num = static_cast<std::uint64_t>(classes[c].second) * targets[split];
            alloc[c][split] = std::min<std::size_t>(static_cast<std::size_t>(num / kMulticlassRetained), left[c]);
            given += alloc[c][split];
            remainders.emplace_back(num % kMulticlassRetained, c);
        }
        std::stable_sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
        for (std::size_t k = 0; given < targets[split] && k < remainders.size() * 2; ++k) {
            const std::size_t c = remainders[k % remainders.size()].second;
            if (alloc[c][split] < left[c]) {
                ++alloc[c][split];
                ++given;
            }
        }
        for (std::size_t c = 0; c < classes.size(); ++c) {
            left[c] -= alloc[c][split];
        }
    }
    for (std::size_t c = 0; c < classes.size(); ++c) {
        alloc[c][2] = left[c]; // everything retained and not yet placed goes to test
    }
    std::size_t c = 0;
    for (auto& [cls, items] : by_class) {
        seeded_shuffle(items, rng);
        s.train = detail::concat(std::move(s.train), detail::take(items, 0, alloc[c][0]));
        s.validation = detail::concat(std::move(s.validation), detail::take(items, alloc[c][0], alloc[c][1]));
        s.test = detail::concat(std::move(s.test), detail::take(items, alloc[c][0] + alloc[c][1], alloc[c][2]));
        ++c;
    }
    seeded_shuffle(s.train, rng);
    seeded_shuffle(s.validation, rng);
    seeded_shuffle(s.test, rng);
    return s;
}

} // namespace secretsift
