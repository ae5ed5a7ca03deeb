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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fnmatch.h>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <tuple>
#include <vector>

#include "secretsift/error.hpp"
#include "secretsift/pattern_catalog.hpp"
#include "secretsift/utf8.hpp"

namespace secretsift {

/// Drops invalid UTF-8 byte sequences and maps CRLF to LF. Every offset the
/// scanner reports is a code-point index into the returned text.
inline std::string normalize_content(std::string_view bytes)
{
    const std::u32string decoded = utf8::decode_lossy(bytes);
    std::u32string out;
    out.reserve(decoded.size());
    for (std::size_t i = 0; i < decoded.size(); ++i) {
        if (decoded[i] == U'\r' && i + 1 < decoded.size() && decoded[i + 1] == U'\n') {
            continue;
        }
        out.push_back(decoded[i]);
    }
    return utf8::encode(out);
}

/// Shannon entropy in bits per character (log base 2). Empty input yields 0.
inline double shannon_entropy(std::u32string_view s)
{
    if (s.empty()) {
        return 0.0;
    }
    // Ordered map: the summation order depends only on the multiset of
    // characters, which makes the result exactly permutation-invariant.
    std::map<char32_t, std::size_t> counts;
    for (char32_t c : s) {
        ++counts[c];
    }
    const double n = static_cast<double>(s.size());
    double h = 0.0;
    for (const auto& [c, k] : counts) {
        const double p = static_cast<double>(k) / n;
        h -= p * std::log2(p);
    }
    return h > 0.0 ? h : 0.0;
}

inline double shannon_entropy(std::string_view utf8_text)
{
    return shannon_entropy(utf8::decode_lossy(utf8_text));
}

struct Candidate {
    std::string candidate_id;
    std::string file_path;
    std::string pattern_id;
    std::string matched_text;
    std::size_t start_offset = 0; // inclusive, code points
    std::size_t end_offset = 0;   // exclusive
    std::size_t line = 0;         // 1-based
    std::size_t column = 0;       // 1-based, code points
    double entropy_bits = 0.0;

    friend bool operator==(const Candidate&, const Candidate&) = default;
};

inline auto sort_key(const Candidate& c)
{
    return std::tie(c.file_path, c.start_offset, c.end_offset, c.pattern_id);
}

struct ScanError {
    std::string file_path;
    std::string message;
};

struct ScanResult {
    std::vector<Candidate> candidates;
    std::size_t files_scanned = 0;
    std::size_t files_skipped = 0;
    std::string catalog_source;
    std::vector<ScanError> errors;
};

struct ScanOptions {
    std::uintmax_t max_file_bytes = 1024 * 1024;
    std::vector<std::string> include_globs;
    std::vector<std::string> exclude_globs;
    unsigned jobs = 1;
};

/// FNV-1a 64-bit over (file_path, start, end, pattern_id), hex encoded.
inline std::string make_candidate_id(std::string_view file_path, std::size_t start, std::size_t end,
                                     std::string_view pattern_id)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff; // field separator
        h *= 0x100000001b3ULL;
    };
    mix(file_path);
    mix(std::to_string(start));
    mix(std::to_string(end));
    mix(pattern_id);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

namespace detail {

    inline std::vector<std::size_t> line_starts(std::u32string_view text)
    {
        std::vector<std::size_t> starts {0};
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] == U'\n') {
                starts.push_back(i + 1);
            }
        }
        return starts;
    }

    inline void sort_candidates(std::vector<Candidate>& v)
    {
        std::sort(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) { return sort_key(a) < sort_key(b); });
        v.erase(std::unique(v.begin(), v.end(), [](const Candidate& a, const Candidate& b) { return sort_key(a) == sort_key(b); }),
                v.end());
    }

} // namespace detail

/// Applies every enabled pattern to already-normalized text. Each pattern
/// reports its leftmost non-overlapping matches; matches of different
/// patterns may overlap. Candidates below a pattern's entropy gate are dropped.
inline std::vector<Candidate> scan_text(std::u32string_view text, const Catalog& catalog, std::string_view file_path = {})
{
    std::vector<Candidate> out;
    std::vector<std::size_t> starts;
    for (const auto& entry : catalog.entries()) {
        if (!entry.spec.enabled) {
            continue;
        }
        for (const auto& m : entry.compiled->find_all(text)) {
            regex::Span span = m.whole;
            if (m.groups.size() > 1 && m.groups[1] && m.groups[1]->end > m.groups[1]->begin) {
                span = *m.groups[1];
            }
            const std::u32string_view slice = text.substr(span.begin, span.end - span.begin);
            const double h = shannon_entropy(slice);
            if (entry.spec.entropy_min && h < *entry.spec.entropy_min) {
                continue;
            }
            if (starts.empty()) {
                starts = detail::line_starts(text);
            }
            const auto it = std::upper_bound(starts.begin(), starts.end(), span.begin);
            const auto line = static_cast<std::size_t>(it - starts.begin());
            Candidate c;
            c.file_path = std::string(file_path);
            c.pattern_id = entry.spec.id;
            c.matched_text = utf8::encode(slice);
            c.start_offset = span.begin;
            c.end_offset = span.end;
            c.line = line;
            c.column = span.begin - starts[line - 1] + 1;
            c.entropy_bits = h;
            c.candidate_id = make_candidate_id(c.file_path, c.start_offset, c.end_offset, c.pattern_id);
            out.push_back(std::move(c));
        }
    }
    detail::sort_candidates(out);
    return out;
}

inline std::vector<Candidate> scan_text(std::string_view normalized_utf8, const Catalog& catalog, std::string_view file_path = {})
{
    return scan_text(std::u32string_view(utf8::decode_lossy(normalized_utf8)), catalog, file_path);
}

/// True when the first 8 KiB contain a NUL byte.
inline bool looks_binary(std::string_view bytes)
{
    return bytes.substr(0, 8192).find('\0') != std::string_view::npos;
}

inline std::string read_file_bytes(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, path.string() + ": cannot open file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error(ErrorCode::IoError, path.string() + ": read failed");
    }
    return buf.str();
}

inline std::string read_normalized(const std::filesystem::path& path)
{
    return normalize_content(read_file_bytes(path));
}

/// Glob match against a '/'-separated relative path. A glob also matches
/// when it matches the file name alone.
inline bool glob_matches(const std::string& glob, const std::string& rel_path)
{
    if (::fnmatch(glob.c_str(), rel_path.c_str(), 0) == 0) {
        return true;
    }
    const auto slash = rel_path.rfind('/');
    const std::string name = slash == std::string::npos ? rel_path : rel_path.substr(slash + 1);
    return ::fnmatch(glob.c_str(), name.c_str(), 0) == 0;
}

inline bool path_selected(const ScanOptions& opts, const std::string& rel_path)
{
    if (!opts.include_globs.empty()
        && std::none_of(opts.include_globs.begin(), opts.include_globs.end(),
                        [&](const std::string& g) { return glob_matches(g, rel_path); })) {
        return false;
    }
    return std::none_of(opts.exclude_globs.begin(), opts.exclude_globs.end(),
                        [&](const std::string& g) { return glob_matches(g, rel_path); });
}

/// Scans every selected regular file below `root`. File paths in the result
/// are relative to `root` with '/' separators. Output is independent of
/// directory enumeration order and of `opts.jobs`.
inline ScanResult scan_tree(const std::filesystem::path& root, const Catalog& catalog, const ScanOptions& opts = {})
{
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::exists(root, ec)) {
        throw Error(ErrorCode::RootMissing, root.string() + ": no such file or directory");
    }

    struct Job {
        fs::path path;
        std::string rel;
    };
    std::vector<Job> jobs;
    ScanResult result;
    result.catalog_source = catalog.source();

    if (fs::is_regular_file(root, ec)) {
        jobs.push_back({root, root.filename().generic_string()});
    } else {
        fs::recursive_directory_iterator it(root, fs::directory_options::skip_permission_denied, ec);
        if (ec) {
            throw Error(ErrorCode::RootMissing, root.string() + ": " + ec.message());
        }
        for (; it != fs::recursive_directory_iterator(); it.increment(ec)) {
            std::error_code fec;
            if (!it->is_regular_file(fec)) {
                continue;
            }
            std::string rel = it->path().lexically_relative(root).generic_string();
            if (!path_selected(opts, rel)) {
                continue;
            }
            jobs.push_back({it->path(), std::move(rel)});
        }
        if (ec) {
            result.errors.push_back({"", "directory traversal stopped: " + ec.message()});
        }
    }
    std::sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) { return a.rel < b.rel; });

    struct Outcome {
        std::vector<Candidate> candidates;
        bool scanned = false;
        bool skipped = false;
        std::optional<std::string> error;
    };
    std::vector<Outcome> outcomes(jobs.size());

    auto process = [&](std::size_t i) {
        Outcome& o = outcomes[i];
        try {
            std::error_code sec;
            const auto size = fs::file_size(jobs[i].path, sec);
            if (sec) {
                o.error = sec.message();
                return;
            }
            if (size > opts.max_file_bytes) {
                o.skipped = true;
                return;
            }
            const std::string bytes = read_file_bytes(jobs[i].path);
            if (looks_binary(bytes)) {
                o.skipped = true;
                return;
            }
            const std::u32string text = utf8::decode_lossy(normalize_content(bytes));
            o.candidates = scan_text(std::u32string_view(text), catalog, jobs[i].rel);
            o.scanned = true;
        } catch (const std::exception& e) {
            o.error = e.what();
        }
    };

    const unsigned workers = std::max(1U, std::min<unsigned>(opts.jobs, static_cast<unsigned>(jobs.size())));
    if (workers <= 1) {
        for (std::size_t i = 0; i < jobs.size(); ++i) {
            process(i);
        }
    } else {
        std::atomic<std::size_t> next {0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < jobs.size(); i = next++) {
                    process(i);
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
    }

    for (std::size_t i = 0; i < jobs.size(); ++i) {
        auto& o = outcomes[i];
        result.files_scanned += o.scanned;
        result.files_skipped += o.skipped;
        if (o.error) {
            result.errors.push_back({jobs[i].rel, *o.error});
        }
        result.candidates.insert(result.candidates.end(), std::make_move_iterator(o.candidates.begin()),
                                 std::make_move_iterator(o.candidates.end()));
    }
    detail::sort_candidates(result.candidates);
    return result;
}

} // namespace secretsift
