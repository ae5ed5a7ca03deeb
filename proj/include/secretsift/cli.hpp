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

// Command implementations for the secretsift tool. Each command writes its
// primary output to `out` (or --out), diagnostics to `err`, and returns the
// process exit code: 0 clean, 1 findings, 2 fatal error.

#include <filesystem>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "secretsift/classifier.hpp"
#include "secretsift/context_window.hpp"
#include "secretsift/datasets.hpp"
#include "secretsift/metrics.hpp"
#include "secretsift/pattern_catalog.hpp"
#include "secretsift/prompting.hpp"
#include "secretsift/report.hpp"
#include "secretsift/scanner.hpp"
#include "secretsift/version.hpp"

namespace secretsift::cli {

inline constexpr int kExitClean = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitFatal = 2;

enum class OutputFormat { Json, Table };
enum class UnparseablePolicy { Error, NonSensitive, Secret };

struct ClassifyOptions {
    Mode mode = Mode::Binary;
    std::size_t shots = kDefaultShots;
    std::string model_id = "gpt-4o";
    std::string exemplars_path;
    int timeout_ms = 30000;
    int max_retries = 3;
    int backoff_ms = 500;
};

struct ScanArgs {
    std::string path;
    std::string catalog_path;
    std::size_t context_chars = kDefaultWindowChars;
    std::optional<BackendKind> classify;
    ClassifyOptions classify_opts;
    OutputFormat format = OutputFormat::Json;
    bool redact = true;
    std::string out_path;
    unsigned jobs = 1;
    std::uintmax_t max_file_bytes = 1024 * 1024;
    std::vector<std::string> include_globs;
    std::vector<std::string> exclude_globs;
};

enum class EvalBackend { Remote, Mock, RegexOnly };

struct EvaluateArgs {
    std::string dataset_path;
    EvalBackend backend = EvalBackend::Mock;
    ClassifyOptions classify_opts;
    UnparseablePolicy on_unparseable = UnparseablePolicy::Error;
    std::size_t context_chars = kDefaultWindowChars;
    std::string root;
    OutputFormat format = OutputFormat::Json;
    std::string out_path;
    unsigned jobs = 1;
};

struct SplitArgs {
    std::string dataset_path;
    SplitStrategy strategy = SplitStrategy::Balanced;
    std::uint64_t seed = 42;
    std::string out_dir;
    bool stratify = false;
};

struct FinetuneArgs {
    std::string model_id;
    std::string out_path;
};

namespace detail {

    inline void write_output(const std::string& text, const std::string& path, std::ostream& out)
    {
        if (path.empty()) {
            out << text;
            out.flush();
            return;
        }
        std::ofstream f(path, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw Error(ErrorCode::IoError, path + ": cannot open for writing");
        }
        f << text;
        if (!f) {
            throw Error(ErrorCode::IoError, path + ": write failed");
        }
    }

    inline std::vector<Exemplar> exemplars_for(const ClassifyOptions& o, Mode mode)
    {
        if (o.shots == 0) {
            return {};
        }
        if (o.exemplars_path.empty()) {
            return default_exemplars(mode, o.shots);
        }
        return select_exemplars(load_exemplar_bank(o.exemplars_path), mode, o.shots);
    }

    inline ClassifierConfig make_config(BackendKind kind, const ClassifyOptions& o, unsigned jobs)
    {
        ClassifierConfig cfg;
        cfg.backend = kind;
        cfg.model_id = o.model_id;
        cfg.request_timeout_ms = o.timeout_ms;
        cfg.max_retries = o.max_retries;
        cfg.backoff_base_ms = o.backoff_ms;
        cfg.concurrency_limit = std::max(1U, jobs);
        apply_environment(cfg);
        return cfg;
    }

} // namespace detail

/// scan: extract candidates, optionally classify them, write a ScanReport.
inline int cmd_scan(const ScanArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        const Catalog catalog = args.catalog_path.empty() ? builtin_catalog() : load_catalog(args.catalog_path);
        ScanOptions opts;
        opts.max_file_bytes = args.max_file_bytes;
        opts.include_globs = args.include_globs;
        opts.exclude_globs = args.exclude_globs;
        opts.jobs = std::max(1U, args.jobs);
        const ScanResult scan = scan_tree(args.path, catalog, opts);
        const std::vector<Candidate> candidates = dedupe_spans(scan.candidates);

        ScanReport report;
        report.catalog_source = scan.catalog_source;
        report.window_chars = args.context_chars;
        report.redacted = args.redact;
        report.classified = args.classify.has_value();
        report.file_errors = scan.errors;
        for (const auto& c : candidates) {
            report.findings.push_back(make_finding(c, args.redact));
        }

        if (args.classify) {
            const ClassifierConfig cfg = detail::make_config(*args.classify, args.classify_opts, args.jobs);
            auto backend = make_backend(cfg);
            const auto binary_shots = detail::exemplars_for(args.classify_opts, Mode::Binary);

            const std::filesystem::path root(args.path);
            const bool root_is_file = std::filesystem::is_regular_file(root);
            std::map<std::string, std::u32string> texts;
            std::vector<PromptRequest> reqs;
            reqs.reserve(candidates.size());
            for (const auto& c : candidates) {
                auto it = texts.find(c.file_path);
                if (it == texts.end()) {
                    const auto path = root_is_file ? root : root / c.file_path;
                    it = texts.emplace(c.file_path, utf8::decode_lossy(read_normalized(path))).first;
                }
                const auto window = extract_window(std::u32string_view(it->second), c.start_offset, c.end_offset, args.context_chars);
                PromptRequest req;
                req.mode = Mode::Binary;
                req.shots = binary_shots.size();
                req.exemplars = binary_shots;
                req.candidate = c.matched_text;
                req.context = window.text;
                req.candidate_id = c.candidate_id;
                reqs.push_back(std::move(req));
            }
            const auto outcomes = batch_classify(reqs, cfg, *backend);

            std::vector<PromptRequest> typing;
            std::vector<std::size_t> typing_index;
            for (std::size_t i = 0; i < outcomes.size(); ++i) {
                auto& f = report.findings[i];
                if (outcomes[i].ok()) {
                    f.verdict = outcomes[i].verdict->binary_label;
                } else {
                    f.error = outcomes[i].error;
                    err << "secretsift: warning: candidate " << f.candidate_id << " at " << f.file_path << ":" << f.line
                        << ": " << to_string(*outcomes[i].error) << "\n";
                }
                if (args.classify_opts.mode == Mode::Multiclass && f.verdict == Label::Secret) {
                    PromptRequest req = reqs[i];
                    req.mode = Mode::Multiclass;
                    req.exemplars = detail::exemplars_for(args.classify_opts, Mode::Multiclass);
                    req.shots = req.exemplars.size();
                    typing.push_back(std::move(req));
                    typing_index.push_back(i);
                }
            }
            if (!typing.empty()) {
                const auto typed = batch_classify(typing, cfg, *backend);
                for (std::size_t k = 0; k < typed.size(); ++k) {
                    auto& f = report.findings[typing_index[k]];
                    if (typed[k].ok()) {
                        f.secret_type = typed[k].verdict->type_label;
                    } else {
                        f.error = typed[k].error;
                        err << "secretsift: warning: candidate " << f.candidate_id << ": typing failed: "
                            << to_string(*typed[k].error) << "\n";
                    }
                }
            }
        }

        report.summary.files_scanned = scan.files_scanned;
        report.summary.files_skipped = scan.files_skipped;
        report.summary.candidates = report.findings.size();
        report.summary.errors = scan.errors.size();
        for (const auto& f : report.findings) {
            report.summary.classified_secret += f.verdict == Label::Secret;
            report.summary.errors += f.error.has_value();
        }
        for (const auto& e : scan.errors) {
            err << "secretsift: warning: " << (e.file_path.empty() ? args.path : e.file_path) << ": " << e.message << "\n";
        }

        const std::string text = args.format == OutputFormat::Json ? to_json(report).dump(2) + "\n" : to_table(report);
        detail::write_output(text, args.out_path, out);
        err << "secretsift: scanned " << report.summary.files_scanned << " files (" << report.summary.files_skipped
            << " skipped), " << report.summary.candidates << " candidates";
        if (report.classified) {
            err << ", " << report.summary.classified_secret << " classified as secrets";
        }
        err << "\n";

        const bool flagged = report.classified ? report.summary.classified_secret > 0 : !report.findings.empty();
        return flagged ? kExitFindings : kExitClean;
    } catch (const std::exception& e) {
        err << "secretsift: error: " << e.what() << "\n";
        return kExitFatal;
    }
}

/// evaluate: classify a labeled dataset and report metrics against gold labels.
inline int cmd_evaluate(const EvaluateArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        const auto examples = load_dataset(args.dataset_path);
        const Mode mode = args.classify_opts.mode;
        if (mode == Mode::Multiclass && args.backend == EvalBackend::RegexOnly) {
            throw Error(ErrorCode::MissingTypeLabel, "the regex-only baseline produces binary verdicts only");
        }

        std::vector<const LabeledExample*> items;
        for (const auto& ex : examples) {
            if (mode == Mode::Binary) {
                items.push_back(&ex);
            } else if (ex.label == Label::Secret) {
                if (!ex.secret_type) {
                    throw Error(ErrorCode::MissingTypeLabel, "secret '" + ex.id + "' has no secret_type");
                }
                items.push_back(&ex);
            }
        }
        if (mode == Mode::Multiclass && items.empty()) {
            throw Error(ErrorCode::MissingTypeLabel, "dataset has no typed secrets for multiclass evaluation");
        }

        EvaluationReport report;
        report.mode = mode;
        report.shots = args.backend == EvalBackend::RegexOnly ? 0 : args.classify_opts.shots;
        report.context_chars = args.context_chars;
        report.dataset = args.dataset_path;
        report.examples = items.size();
        report.on_unparseable = args.on_unparseable == UnparseablePolicy::Error
            ? "error"
            : (args.on_unparseable == UnparseablePolicy::Secret ? "secret" : "non-sensitive");

        std::vector<std::string> golds;
        std::vector<std::string> preds;
        if (args.backend == EvalBackend::RegexOnly) {
            report.backend = "regex-only";
            report.model_id = "regex-only";
            std::vector<Candidate> cands;
            for (const auto* ex : items) {
                Candidate c;
                c.candidate_id = ex->id;
                c.matched_text = ex->candidate;
                cands.push_back(std::move(c));
            }
            const auto verdicts = baseline_regex_only(cands);
            for (std::size_t i = 0; i < items.size(); ++i) {
                golds.emplace_back(to_string(items[i]->label));
                preds.emplace_back(to_string(*verdicts[i].binary_label));
            }
        } else {
            const BackendKind kind = args.backend == EvalBackend::Remote ? BackendKind::Remote : BackendKind::RuleMock;
            report.backend = kind == BackendKind::Remote ? "remote" : "mock";
            const ClassifierConfig cfg = detail::make_config(kind, args.classify_opts, args.jobs);
            report.model_id = kind == BackendKind::Remote ? cfg.model_id : "rule-mock";
            auto backend = make_backend(cfg);
            const auto shots = detail::exemplars_for(args.classify_opts, mode);

            std::map<std::string, std::u32string> files;
            std::vector<PromptRequest> reqs;
            for (const auto* ex : items) {
                PromptRequest req;
                req.mode = mode;
                req.shots = shots.size();
                req.exemplars = shots;
                req.candidate = ex->candidate;
                req.candidate_id = ex->id;
                if (!ex->context.empty() || !ex->file_path || !ex->span) {
                    req.context = ex->context;
                } else {
                    auto it = files.find(*ex->file_path);
                    if (it == files.end()) {
                        const auto path = std::filesystem::path(args.root.empty() ? "." : args.root) / *ex->file_path;
                        it = files.emplace(*ex->file_path, utf8::decode_lossy(read_normalized(path))).first;
                    }
                    req.context = extract_window(std::u32string_view(it->second), ex->span->first, ex->span->second,
                                                 args.context_chars).text;
                }
                reqs.push_back(std::move(req));
            }
            const auto outcomes = batch_classify(reqs, cfg, *backend);
            for (std::size_t i = 0; i < items.size(); ++i) {
                const auto* ex = items[i];
                const std::string gold = mode == Mode::Binary ? std::string(to_string(ex->label))
                                                              : std::string(display_name(*ex->secret_type));
                const auto& o = outcomes[i];
                if (o.ok()) {
                    golds.push_back(gold);
                    preds.emplace_back(mode == Mode::Binary ? to_string(*o.verdict->binary_label)
                                                            : display_name(*o.verdict->type_label));
                    continue;
                }
                const bool coerce = *o.error == ErrorCode::UnparseableAnswer && mode == Mode::Binary
                    && args.on_unparseable != UnparseablePolicy::Error;
                if (coerce) {
                    golds.push_back(gold);
                    preds.emplace_back(to_string(args.on_unparseable == UnparseablePolicy::Secret ? Label::Secret : Label::NonSensitive));
                    continue;
                }
                report.failures.push_back({ex->id, *o.error, o.raw_response});
                err << "secretsift: warning: example " << ex->id << ": " << to_string(*o.error) << "\n";
            }
        }
        report.evaluated = golds.size();
        report.confusion = confusion_matrix(golds, preds, mode == Mode::Binary ? binary_labels() : taxonomy_labels());
        report.metrics = class_report(report.confusion);

        const std::string text = args.format == OutputFormat::Json ? to_json(report).dump(2) + "\n" : to_table(report);
        detail::write_output(text, args.out_path, out);
        err << "secretsift: evaluated " << report.evaluated << " of " << report.examples << " examples\n";
        return kExitClean;
    } catch (const std::exception& e) {
        err << "secretsift: error: " << e.what() << "\n";
        return kExitFatal;
    }
}

/// split: write train/validation/test CSVs for the chosen strategy.
inline int cmd_split(const SplitArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        auto pool = load_dataset(args.dataset_path);
        SplitSet split;
        switch (args.strategy) {
        case SplitStrategy::Balanced: split = make_balanced_split(std::move(pool), args.seed); break;
        case SplitStrategy::Imbalanced: split = make_imbalanced_split(std::move(pool), args.seed); break;
        case SplitStrategy::Multiclass: split = make_multiclass_split(std::move(pool), args.seed, args.stratify); break;
        }
        const std::filesystem::path dir(args.out_dir.empty() ? "." : args.out_dir);
        std::filesystem::create_directories(dir);
        auto emit = [&](const char* name, const std::vector<LabeledExample>& rows) {
            detail::write_output(serialize_dataset(rows), (dir / name).string(), out);
            std::size_t secrets = 0;
            for (const auto& r : rows) secrets += r.label == Label::Secret;
            out << name << ": " << rows.size() << " rows (" << secrets << " secret, " << rows.size() - secrets << " non_sensitive)\n";
        };
        out << "strategy=" << to_string(split.strategy) << " seed=" << split.seed << "\n";
        emit("train.csv", split.train);
        emit("validation.csv", split.validation);
        emit("test.csv", split.test);
        return kExitClean;
    } catch (const std::exception& e) {
        err << "secretsift: error: " << e.what() << "\n";
        return kExitFatal;
    }
}

/// emit-finetune-config: write the fixed QLoRA manifest for a model id.
inline int cmd_emit_finetune_config(const FinetuneArgs& args, std::ostream& out, std::ostream& err)
{
    try {
        const auto manifest = emit_finetune_manifest(args.model_id);
        detail::write_output(serialize_manifest(manifest), args.out_path, out);
        return kExitClean;
    } catch (const std::exception& e) {
        err << "secretsift: error: " << e.what() << "\n";
        return kExitFatal;
    }
}

/// Parses `args` (without the program name) and dispatches to a command.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app {"secretsift: regex candidate extraction with model-assisted secret classification", "secretsift"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolVersion));

    const std::map<std::string, Mode> modes {{"binary", Mode::Binary}, {"multiclass", Mode::Multiclass}};
    const std::map<std::string, OutputFormat> formats {{"json", OutputFormat::Json}, {"table", OutputFormat::Table}};

    // Mode and SplitStrategy have ADL to_string overloads returning string_view,
    // which CLI11 cannot use for defaults, so they go through a string first
    std::string scan_mode = "binary";
    std::string eval_mode = "binary";
    std::string split_strategy = "balanced";
    auto add_classify_flags = [&](CLI::App* sub, ClassifyOptions& o, std::string& mode) {
        sub->add_option("--mode", mode, "binary or multiclass")->check(CLI::IsMember(modes, CLI::ignore_case));
        sub->add_option("--shots", o.shots, "labeled exemplars per prompt (0 = zero-shot)")->check(CLI::Range(0, static_cast<int>(kMaxShots)));
        sub->add_option("--model", o.model_id, "model id sent to the remote endpoint");
        sub->add_option("--exemplars", o.exemplars_path, "exemplar bank JSON (default: built-in bank)")->check(CLI::ExistingFile);
        sub->add_option("--timeout-ms", o.timeout_ms, "per-request timeout")->check(CLI::PositiveNumber);
        sub->add_option("--max-retries", o.max_retries, "retries for transient backend failures")->check(CLI::NonNegativeNumber);
        sub->add_option("--backoff-ms", o.backoff_ms, "base retry delay, doubled per attempt")->check(CLI::NonNegativeNumber);
    };

    ScanArgs scan;
    auto* scan_cmd = app.add_subcommand("scan", "scan a file or directory tree for candidate secrets");
    scan_cmd->add_option("path", scan.path, "file or directory to scan")->required();
    scan_cmd->add_option("--catalog", scan.catalog_path, "pattern catalog JSON (default: built-in catalog)");
    scan_cmd->add_option("--context-chars", scan.context_chars, "context window budget in characters (200, 300, ...)");
    scan_cmd->add_option("--classify", scan.classify, "classify candidates with a backend: remote or mock")
        ->transform(CLI::CheckedTransformer(std::map<std::string, BackendKind> {{"remote", BackendKind::Remote}, {"mock", BackendKind::RuleMock}},
                                            CLI::ignore_case));
    add_classify_flags(scan_cmd, scan.classify_opts, scan_mode);
    scan_cmd->add_option("--format", scan.format, "json or table")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    scan_cmd->add_flag("--redact,!--no-redact", scan.redact, "mask candidate text in the report (default on)");
    scan_cmd->add_option("--out", scan.out_path, "write the report to this file");
    scan_cmd->add_option("--jobs", scan.jobs, "parallel file scans and in-flight classifications")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--max-file-bytes", scan.max_file_bytes, "skip files larger than this");
    scan_cmd->add_option("--include", scan.include_globs, "only scan paths matching these globs");
    scan_cmd->add_option("--exclude", scan.exclude_globs, "skip paths matching these globs");

    EvaluateArgs eval;
    auto* eval_cmd = app.add_subcommand("evaluate", "classify a labeled dataset and report metrics");
    eval_cmd->add_option("--dataset", eval.dataset_path, "dataset CSV")->required();
    eval_cmd->add_option("--backend", eval.backend, "remote, mock or regex-only")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, EvalBackend> {{"remote", EvalBackend::Remote}, {"mock", EvalBackend::Mock}, {"regex-only", EvalBackend::RegexOnly}},
            CLI::ignore_case));
    add_classify_flags(eval_cmd, eval.classify_opts, eval_mode);
    eval_cmd->add_option("--on-unparseable", eval.on_unparseable, "error, non-sensitive or secret")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, UnparseablePolicy> {
                {"error", UnparseablePolicy::Error}, {"non-sensitive", UnparseablePolicy::NonSensitive}, {"secret", UnparseablePolicy::Secret}},
            CLI::ignore_case));
    eval_cmd->add_option("--context-chars", eval.context_chars, "window budget when re-cutting context from files");
    eval_cmd->add_option("--root", eval.root, "directory that dataset file_path values are relative to");
    eval_cmd->add_option("--format", eval.format, "json or table")->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));
    eval_cmd->add_option("--out", eval.out_path, "write the report to this file");
    eval_cmd->add_option("--jobs", eval.jobs, "in-flight classifications")->check(CLI::PositiveNumber);

    SplitArgs split;
    auto* split_cmd = app.add_subcommand("split", "write seeded train/validation/test splits");
    split_cmd->add_option("--dataset", split.dataset_path, "dataset CSV")->required();
    const std::map<std::string, SplitStrategy> strategies {
        {"balanced", SplitStrategy::Balanced}, {"imbalanced", SplitStrategy::Imbalanced}, {"multiclass", SplitStrategy::Multiclass}};
    split_cmd->add_option("--strategy", split_strategy, "balanced, imbalanced or multiclass")
        ->check(CLI::IsMember(strategies, CLI::ignore_case));
    split_cmd->add_option("--seed", split.seed, "64-bit shuffle seed");
    split_cmd->add_option("--out-dir", split.out_dir, "output directory")->required();
    split_cmd->add_flag("--stratify", split.stratify, "stratify multiclass splits by category");

    FinetuneArgs ft;
    auto* ft_cmd = app.add_subcommand("emit-finetune-config", "write the QLoRA fine-tuning manifest");
    ft_cmd->add_option("--model", ft.model_id, "base model id")->required();
    ft_cmd->add_option("--out", ft.out_path, "manifest file (default: stdout)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitFatal;
    }

    auto lower = [](std::string v) {
        for (auto& ch : v) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
        return v;
    };
    scan.classify_opts.mode = modes.at(lower(scan_mode));
    eval.classify_opts.mode = modes.at(lower(eval_mode));
    split.strategy = strategies.at(lower(split_strategy));

    if (scan_cmd->parsed()) return cmd_scan(scan, out, err);
    if (eval_cmd->parsed()) return cmd_evaluate(eval, out, err);
    if (split_cmd->parsed()) return cmd_split(split, out, err);
    if (ft_cmd->parsed()) return cmd_emit_finetune_config(ft, out, err);
    return kExitFatal;
}

} // namespace secretsift::cli
