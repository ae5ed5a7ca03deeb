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
#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "secretsift/error.hpp"
#include "secretsift/prompting.hpp"
#include "secretsift/scanner.hpp"
#include "secretsift/taxonomy.hpp"
#include "secretsift/utf8.hpp"

namespace secretsift {

enum class BackendKind { Remote, RuleMock };

struct ClassifierConfig {
    BackendKind backend = BackendKind::RuleMock;
    std::string model_id = "gpt-4o";
    double temperature = 0.0;
    /// Sent as `max_tokens`; answers are single labels.
    int max_tokens = 16;
    /// Raw responses longer than this are truncated in the verdict record.
    std::size_t max_answer_chars = 256;
    /// Fits a 300-character window with eight 300-character exemplars.
    std::size_t max_input_chars = 8192;
    int request_timeout_ms = 30000;
    int max_retries = 3;
    int backoff_base_ms = 500;
    unsigned concurrency_limit = 4;
    std::string api_base;
    std::string api_key;
};

inline constexpr const char* kApiBaseEnv = "SECRETSIFT_API_BASE";
inline constexpr const char* kApiKeyEnv = "SECRETSIFT_API_KEY";

/// Fills api_base/api_key from the environment when they are unset.
inline void apply_environment(ClassifierConfig& cfg)
{
    if (cfg.api_base.empty()) {
        if (const char* v = std::getenv(kApiBaseEnv)) {
            cfg.api_base = v;
        }
    }
    if (cfg.api_key.empty()) {
        if (const char* v = std::getenv(kApiKeyEnv)) {
            cfg.api_key = v;
        }
    }
}

struct Verdict {
    std::string candidate_id;
    Mode mode = Mode::Binary;
    std::optional<Label> binary_label;
    std::optional<TaxonomyClass> type_label;
    std::string raw_response;
    std::string model_id;
    std::int64_t latency_ms = 0;
};

/// Thrown by backends for failures worth retrying (timeouts, refused
/// connections, HTTP 429 and 5xx).
class TransientBackendError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InferenceBackend {
public:
    virtual ~InferenceBackend() = default;
    /// Returns the model's raw answer text for `prompt`.
    virtual std::string complete(const std::string& prompt, const PromptRequest& req, const ClassifierConfig& cfg) = 0;
};

// ---------------------------------------------------------------------------
// Answer parsing

namespace detail {

    inline std::string ascii_lower(std::string_view s)
    {
        std::string out(s);
        for (auto& c : out) {
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
        return out;
    }

    inline std::string strip_punct_space(std::string_view s)
    {
        auto edge = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
        std::size_t b = 0;
        std::size_t e = s.size();
        while (b < e && edge(static_cast<unsigned char>(s[b]))) ++b;
        while (e > b && edge(static_cast<unsigned char>(s[e - 1]))) --e;
        return std::string(s.substr(b, e - b));
    }

    // Lowercase, every non-alphanumeric run becomes one space, padded with a
    // space on both sides so containment respects word edges.
    inline std::string word_normalize(std::string_view s)
    {
        std::string out = " ";
        for (unsigned char c : s) {
            if (std::isalnum(c)) {
                out.push_back(static_cast<char>(std::tolower(c)));
            } else if (out.back() != ' ') {
                out.push_back(' ');
            }
        }
        if (out.back() != ' ') {
            out.push_back(' ');
        }
        return out;
    }

} // namespace detail

/// Negative phrasings are checked before "secret", so "not sensitive, not a
/// secret" reads as NonSensitive.
inline Label parse_binary_label(std::string_view raw)
{
    const std::string s = detail::ascii_lower(detail::strip_punct_space(raw));
    for (std::string_view neg : {"non-sensitive", "non sensitive", "not sensitive"}) {
        if (s.find(neg) != std::string::npos) {
            return Label::NonSensitive;
        }
    }
    if (s.find("secret") != std::string::npos) {
        return Label::Secret;
    }
    throw Error(ErrorCode::UnparseableAnswer, "no binary label in model answer", std::string(raw));
}

/// Case- and punctuation-insensitive containment against the category
/// names; the longest matching name wins, ties go to the earlier category.
inline TaxonomyClass parse_multiclass_label(std::string_view raw)
{
    const std::string s = detail::word_normalize(raw);
    std::optional<TaxonomyClass> best;
    std::size_t best_len = 0;
    for (auto c : kAllTaxonomyClasses) {
        const std::string name = detail::word_normalize(display_name(c));
        if (s.find(name) != std::string::npos && display_name(c).size() > best_len) {
            best = c;
            best_len = display_name(c).size();
        }
    }
    if (!best) {
        throw Error(ErrorCode::UnparseableAnswer, "no category name in model answer", std::string(raw));
    }
    return *best;
}

// ---------------------------------------------------------------------------
// Offline rule backend

inline constexpr std::size_t kMockMinLength = 16;
inline constexpr double kMockMinEntropy = 3.5;

inline bool is_placeholder(std::string_view candidate)
{
    const std::u32string cps = utf8::decode_lossy(candidate);
    std::u32string distinct = cps;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() <= 2) {
        return true;
    }
    const std::string lower = detail::ascii_lower(candidate);
    for (std::string_view marker : {"example", "test", "dummy", "xxxx", "placeholder", "your_", "changeme"}) {
        if (lower.find(marker) != std::string::npos) {
            return true;
        }
    }
    return false;
}

/// Deterministic offline stand-in for a model: long, high-entropy,
/// non-placeholder candidates are secrets. Thresholds are engineering
/// defaults, not a trained model.
inline Label rule_mock_classify(std::string_view candidate, std::string_view /*context*/)
{
    const bool long_enough = utf8::length(candidate) >= kMockMinLength;
    const bool random_enough = shannon_entropy(candidate) >= kMockMinEntropy;
    return (long_enough && random_enough && !is_placeholder(candidate)) ? Label::Secret : Label::NonSensitive;
}

/// Shape-based category guess used by the offline backend in multiclass mode.
inline TaxonomyClass rule_mock_type(std::string_view candidate, std::string_view context)
{
    using T = TaxonomyClass;
    auto starts = [&](std::string_view p) { return candidate.substr(0, p.size()) == p; };
    if (candidate.find("PRIVATE KEY") != std::string_view::npos || starts("PuTTY-User-Key")) {
        return T::PrivateKey;
    }
    if ((candidate.find("://") != std::string_view::npos && candidate.find('@') != std::string_view::npos) || starts("jdbc:")) {
        return T::DatabaseAndServerUrl;
    }
    for (std::string_view p : {"AKIA", "ASIA", "sk_", "rk_", "AIza", "SG."}) {
        if (starts(p)) return T::ApiKeyAndSecret;
    }
    for (std::string_view p : {"ghp_", "gho_", "ghu_", "ghs_", "ghr_", "glpat-", "xox", "eyJ"}) {
        if (starts(p)) return T::AuthenticationKeyAndToken;
    }
    // Look at the assignment key just before the candidate.
    std::string lead;
    if (const auto at = context.find(candidate); at != std::string_view::npos) {
        const auto from = at > 40 ? at - 40 : 0;
        lead = detail::ascii_lower(context.substr(from, at - from));
    }
    auto lead_has = [&](std::string_view w) { return lead.find(w) != std::string::npos; };
    if (lead_has("pass") || lead_has("pwd")) return T::Password;
    if (lead_has("user") || lead_has("login")) return T::Username;
    if (lead_has("token") || lead_has("bearer")) return T::AuthenticationKeyAndToken;
    if (lead_has("api")) return T::ApiKeyAndSecret;
    if (lead_has("secret")) return T::GenericSecret;
    return T::Other;
}

class RuleMockBackend final : public InferenceBackend {
public:
    std::string complete(const std::string&, const PromptRequest& req, const ClassifierConfig&) override
    {
        if (req.mode == Mode::Binary) {
            return std::string(to_string(rule_mock_classify(req.candidate, req.context)));
        }
        return std::string(display_name(rule_mock_type(req.candidate, req.context)));
    }
};

// ---------------------------------------------------------------------------
// Remote chat-completion backend

/// POSTs to `{api_base}/v1/chat/completions` and returns the first choice's
/// message content. The API key is sent as a bearer token and never appears
/// in error messages.
class RemoteBackend final : public InferenceBackend {
public:
    explicit RemoteBackend(const std::string& api_base)
    {
        if (api_base.empty()) {
            throw Error(ErrorCode::BackendUnavailable, std::string(kApiBaseEnv) + " is not set");
        }
        const auto scheme_end = api_base.find("://");
        if (scheme_end == std::string::npos) {
            throw Error(ErrorCode::BackendUnavailable, "API base URL must start with http:// or https://");
        }
        const auto path_start = api_base.find('/', scheme_end + 3);
        origin_ = api_base.substr(0, path_start);
        std::string prefix = path_start == std::string::npos ? std::string() : api_base.substr(path_start);
        while (!prefix.empty() && prefix.back() == '/') {
            prefix.pop_back();
        }
        path_ = prefix + "/v1/chat/completions";
    }

    std::string complete(const std::string& prompt, const PromptRequest&, const ClassifierConfig& cfg) override
    {
        httplib::Client client(origin_);
        const auto timeout = std::chrono::milliseconds(cfg.request_timeout_ms);
        client.set_connection_timeout(timeout);
        client.set_read_timeout(timeout);
        client.set_write_timeout(timeout);

        httplib::Headers headers;
        if (!cfg.api_key.empty()) {
            headers.emplace("Authorization", "Bearer " + cfg.api_key);
        }
        nlohmann::json body;
        body["model"] = cfg.model_id;
        body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
        body["temperature"] = cfg.temperature;
        body["max_tokens"] = cfg.max_tokens;

        auto res = client.Post(path_, headers, body.dump(), "application/json");
        if (!res) {
            throw TransientBackendError("request failed: " + httplib::to_string(res.error()));
        }
        if (res->status == 429 || res->status >= 500) {
            throw TransientBackendError("server returned HTTP " + std::to_string(res->status));
        }
        if (res->status != 200) {
            throw Error(ErrorCode::BackendUnavailable, "server returned HTTP " + std::to_string(res->status));
        }
        try {
            const auto doc = nlohmann::json::parse(res->body);
            return doc.at("choices").at(0).at("message").at("content").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            throw Error(ErrorCode::BackendUnavailable, "response is not a chat completion");
        }
    }

    const std::string& path() const noexcept { return path_; }
    const std::string& origin() const noexcept { return origin_; }

private:
    std::string origin_;
    std::string path_;
};

inline std::unique_ptr<InferenceBackend> make_backend(const ClassifierConfig& cfg)
{
    if (cfg.backend == BackendKind::Remote) {
        return std::make_unique<RemoteBackend>(cfg.api_base);
    }
    return std::make_unique<RuleMockBackend>();
}

// ---------------------------------------------------------------------------
// Classification

/// Renders the prompt, calls the backend with retries (delay
/// backoff_base_ms * 2^attempt, no jitter) and parses the answer.
inline Verdict classify_one(const PromptRequest& req, const ClassifierConfig& cfg, InferenceBackend& backend)
{
    const std::string prompt = build_prompt(req);
    const std::size_t length = utf8::length(prompt);
    if (length > cfg.max_input_chars) {
        throw Error(ErrorCode::InputTooLong, "prompt has " + std::to_string(length) + " characters, limit is "
                                                 + std::to_string(cfg.max_input_chars));
    }
    const auto started = std::chrono::steady_clock::now();
    std::string raw;
    for (int attempt = 0;; ++attempt) {
        try {
            raw = backend.complete(prompt, req, cfg);
            break;
        } catch (const TransientBackendError& e) {
            if (attempt >= cfg.max_retries) {
                throw Error(ErrorCode::BackendUnavailable,
                            std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<std::int64_t>(cfg.backoff_base_ms) << attempt));
        }
    }
    Verdict v;
    v.candidate_id = req.candidate_id;
    v.mode = req.mode;
    v.model_id = cfg.backend == BackendKind::RuleMock ? "rule-mock" : cfg.model_id;
    v.raw_response = raw.size() > cfg.max_answer_chars ? raw.substr(0, cfg.max_answer_chars) : raw;
    v.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
    if (req.mode == Mode::Binary) {
        v.binary_label = parse_binary_label(raw);
    } else {
        v.type_label = parse_multiclass_label(raw);
    }
    return v;
}

/// One entry of a batch: a verdict or the error that replaced it.
struct BatchOutcome {
    std::string candidate_id;
    std::optional<Verdict> verdict;
    std::optional<ErrorCode> error;
    std::string message;
    std::string raw_response; // set for UnparseableAnswer

    bool ok() const noexcept { return verdict.has_value(); }
};

/// Classifies every request with at most `cfg.concurrency_limit` in flight.
/// Results keep input order; a failing item never fails the batch.
inline std::vector<BatchOutcome> batch_classify(const std::vector<PromptRequest>& reqs, const ClassifierConfig& cfg,
                                                InferenceBackend& backend)
{
    std::vector<BatchOutcome> out(reqs.size());
    auto run = [&](std::size_t i) {
        BatchOutcome& o = out[i];
        o.candidate_id = reqs[i].candidate_id;
        try {
            o.verdict = classify_one(reqs[i], cfg, backend);
        } catch (const Error& e) {
            o.error = e.code();
            o.message = e.what();
            o.raw_response = e.detail();
        } catch (const std::exception& e) {
            o.error = ErrorCode::BackendUnavailable;
            o.message = e.what();
        }
    };
    const unsigned limit = std::max(1U, cfg.concurrency_limit);
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(limit, reqs.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < reqs.size(); ++i) {
            run(i);
        }
        return out;
    }
    std::atomic<std::size_t> next {0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < reqs.size(); i = next++) {
                run(i);
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    return out;
}

/// The regex-only baseline: every candidate is reported as a secret.
inline std::vector<Verdict> baseline_regex_only(const std::vector<Candidate>& candidates)
{
    std::vector<Verdict> out;
    out.reserve(candidates.size());
    for (const auto& c : candidates) {
        Verdict v;
        v.candidate_id = c.candidate_id;
        v.mode = Mode::Binary;
        v.binary_label = Label::Secret;
        v.raw_response = std::string(to_string(Label::Secret));
        v.model_id = "regex-only";
        out.push_back(std::move(v));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Fine-tuning manifest

/// QLoRA recipe for adapting a small model to the classification task. Every
/// field except model_id is fixed.
struct FinetuneManifest {
    std::string quantization = "nf4-4bit";
    bool double_quantization = false;
    std::string compute_precision = "fp16";
    int lora_rank = 64;
    int lora_alpha = 16;
    double lora_dropout = 0.0;
    std::string bias = "none";
    std::string optimizer = "paged-adamw";
    double learning_rate = 2e-4;
    int epochs = 7;
    int batch_size = 1;
    int gradient_accumulation = 8;
    std::string scheduler = "cosine";
    double warmup_ratio = 0.03;
    std::string model_id;

    friend bool operator==(const FinetuneManifest&, const FinetuneManifest&) = default;
};

inline FinetuneManifest emit_finetune_manifest(std::string_view model_id)
{
    if (model_id.empty()) {
        throw Error(ErrorCode::EmptyModelId, "a model id is required");
    }
    if (model_id.find_first_of("\r\n") != std::string_view::npos) {
        throw Error(ErrorCode::MalformedManifest, "model id must be a single line");
    }
    FinetuneManifest m;
    m.model_id = std::string(model_id);
    return m;
}

namespace detail {

    // Shortest round-trip form with a compact exponent: 2e-4, 0.03, 0.
    inline std::string format_real(double v)
    {
        char buf[64];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        std::string s(buf, res.ptr);
        const auto e = s.find('e');
        if (e != std::string::npos) {
            std::string mant = s.substr(0, e);
            std::string exp = s.substr(e + 1);
            std::string sign;
            if (!exp.empty() && (exp[0] == '-' || exp[0] == '+')) {
                if (exp[0] == '-') sign = "-";
                exp.erase(0, 1);
            }
            exp.erase(0, std::min(exp.find_first_not_of('0'), exp.size() - 1));
            s = mant + "e" + sign + exp;
        }
        return s;
    }

} // namespace detail

inline std::vector<std::pair<std::string, std::string>> manifest_fields(const FinetuneManifest& m)
{
    return {
        {"quantization", m.quantization},
        {"double_quantization", m.double_quantization ? "true" : "false"},
        {"compute_precision", m.compute_precision},
        {"lora_rank", std::to_string(m.lora_rank)},
        {"lora_alpha", std::to_string(m.lora_alpha)},
        {"lora_dropout", detail::format_real(m.lora_dropout)},
        {"bias", m.bias},
        {"optimizer", m.optimizer},
        {"learning_rate", detail::format_real(m.learning_rate)},
        {"epochs", std::to_string(m.epochs)},
        {"batch_size", std::to_string(m.batch_size)},
        {"gradient_accumulation", std::to_string(m.gradient_accumulation)},
        {"scheduler", m.scheduler},
        {"warmup_ratio", detail::format_real(m.warmup_ratio)},
        {"model_id", m.model_id},
    };
}

/// Flat `key=value` lines in field order.
inline std::string serialize_manifest(const FinetuneManifest& m)
{
    std::string out;
    for (const auto& [k, v] : manifest_fields(m)) {
        out += k;
        out += '=';
        out += v;
        out += '\n';
    }
    return out;
}

/// Generic reader for the flat key-value format. Blank lines and lines
/// starting with '#' are ignored; whitespace around keys and values is trimmed.
inline std::map<std::string, std::string> parse_key_values(std::string_view text)
{
    std::map<std::string, std::string> kv;
    std::size_t line_no = 0;
    std::istringstream in {std::string(text)};
    std::string line;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorCode::MalformedManifest, "line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(t.substr(0, eq));
        if (!kv.emplace(key, trim(t.substr(eq + 1))).second) {
            throw Error(ErrorCode::MalformedManifest, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

/// Reads a manifest back and checks that every fixed field has its fixed value.
inline FinetuneManifest parse_manifest(std::string_view text)
{
    auto kv = parse_key_values(text);
    const auto it = kv.find("model_id");
    if (it == kv.end() || it->second.empty()) {
        throw Error(ErrorCode::EmptyModelId, "manifest has no model_id");
    }
    FinetuneManifest expected = emit_finetune_manifest(it->second);
    const auto fields = manifest_fields(expected);
    if (kv.size() != fields.size()) {
        throw Error(ErrorCode::MalformedManifest, "manifest must contain exactly " + std::to_string(fields.size()) + " keys");
    }
    for (const auto& [k, v] : fields) {
        const auto f = kv.find(k);
        if (f == kv.end()) {
            throw Error(ErrorCode::MalformedManifest, "missing key '" + k + "'");
        }
        if (f->second != v) {
            throw Error(ErrorCode::MalformedManifest, "key '" + k + "' must be " + v + ", got " + f->second);
        }
    }
    return expected;
}

} // namespace secretsift
