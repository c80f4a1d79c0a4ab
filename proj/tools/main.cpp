// Command-line front end for the corpus pipeline: one subcommand per stage,
// plus run-all.  Stage summaries are printed as one JSON line on stdout;
// failures become one machine-readable JSON line on stderr and a nonzero
// exit status.  Structured logs go to stderr.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "edgartext/pipeline.hpp"

namespace {

void print_summary(const edgartext::StageSummary& summary) {
    std::cout << summary.dump() << "\n";
}

int fail(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json body;
    body["error"] = kind;
    body["message"] = message;
    std::cerr << body.dump() << "\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EDGAR business-text corpus pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Pipeline configuration file");
    std::optional<std::uint64_t> seed;
    app.add_option("--seed", seed,
                   "Override the deduplication and audit sampling seeds");

    auto* fetch_cmd = app.add_subcommand("fetch", "Download daily archives");
    std::string from_override, to_override;
    fetch_cmd->add_option("--from", from_override, "First date (YYYY-MM-DD)");
    fetch_cmd->add_option("--to", to_override, "Last date (YYYY-MM-DD)");

    auto* extract_cmd = app.add_subcommand("extract", "Extract text from fetched archives");
    auto* clean_cmd = app.add_subcommand("clean", "Filter extracted records");
    auto* dedup_cmd = app.add_subcommand("dedup", "Find near-duplicate documents");
    auto* split_cmd = app.add_subcommand("split", "Assign splits and write the dataset");

    auto* audit_cmd = app.add_subcommand("audit", "Run corpus audits");
    std::string audit_op;
    audit_cmd->add_option("op", audit_op, "pronouns|descriptors|toxicity|volume|overlap")
        ->check(CLI::IsMember({"pronouns", "descriptors", "toxicity", "volume", "overlap"}));

    auto* report_cmd = app.add_subcommand("report", "Render report tables");
    auto* run_all_cmd = app.add_subcommand("run-all", "Run every stage in order");

    CLI11_PARSE(app, argc, argv);

    try {
        edgartext::PipelineConfig config;
        if (!config_path.empty()) {
            config = edgartext::load_pipeline_config(config_path);
        }
        if (seed.has_value()) {
            config.dedup.seed = *seed;
            config.audit.sample_seed = *seed;
        }
        if (fetch_cmd->parsed()) {
            if (!from_override.empty()) config.fetch.from = from_override;
            if (!to_override.empty()) config.fetch.to = to_override;
            print_summary(edgartext::run_fetch(config));
        } else if (extract_cmd->parsed()) {
            print_summary(edgartext::run_extract(config));
        } else if (clean_cmd->parsed()) {
            print_summary(edgartext::run_clean(config));
        } else if (dedup_cmd->parsed()) {
            print_summary(edgartext::run_dedup(config));
        } else if (split_cmd->parsed()) {
            print_summary(edgartext::run_split(config));
        } else if (audit_cmd->parsed()) {
            if (audit_op.empty()) {
                print_summary(edgartext::run_audit_all(config));
            } else {
                edgartext::AuditOp op = edgartext::AuditOp::kPronouns;
                if (audit_op == "descriptors") op = edgartext::AuditOp::kDescriptors;
                else if (audit_op == "toxicity") op = edgartext::AuditOp::kToxicity;
                else if (audit_op == "volume") op = edgartext::AuditOp::kVolume;
                else if (audit_op == "overlap") op = edgartext::AuditOp::kOverlap;
                print_summary(edgartext::run_audit(config, op));
            }
        } else if (report_cmd->parsed()) {
            print_summary(edgartext::emit_report(config));
        } else if (run_all_cmd->parsed()) {
            print_summary(edgartext::run_all(config));
        }
    } catch (const edgartext::PipelineOrderError& e) {
        return fail("ordered-dependency", e.what());
    } catch (const edgartext::ConfigMismatchError& e) {
        return fail("config-mismatch", e.what());
    } catch (const std::invalid_argument& e) {
        return fail("invalid-argument", e.what());
    } catch (const std::exception& e) {
        return fail("runtime", e.what());
    }
    return 0;
}
