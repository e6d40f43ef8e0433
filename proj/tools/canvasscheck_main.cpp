// canvasscheck: reconcile election records across count phases and flag
// ballots counted more than once.
//
// Exit codes: 0 = checks ran clean, 1 = findings (discrepancies), 2 =
// usage or input error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "canvass/accounting.hpp"
#include "canvass/audit_reconcile.hpp"
#include "canvass/dup_forensics.hpp"
#include "canvass/errors.hpp"
#include "canvass/fixtures.hpp"
#include "canvass/records.hpp"
#include "canvass/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace canvass;

namespace {

struct Options {
    std::string format = "text";
    std::string out_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::uint32_t min_run = 10;
    std::uint32_t rare_write_in = 5;
    double confidence = 0.95;
};

void add_common(CLI::App* cmd, Options& opt) {
    cmd->add_option("--format", opt.format, "report format")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    cmd->add_option("--out", opt.out_path, "also write the report to this file");
}

void add_seed(CLI::App* cmd, Options& opt) {
    cmd->add_option("--seed", opt.seed, "seed for all randomness (env CANVASS_SEED overrides the default)")
        ->each([&opt](const std::string&) { opt.seed_given = true; });
}

std::uint64_t effective_seed(const Options& opt) {
    if (opt.seed_given) return opt.seed;
    if (const char* env = std::getenv("CANVASS_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return opt.seed;
}

int emit(const json& report, const Options& opt) {
    std::string text =
        opt.format == "json" ? report::to_json_text(report) : report::to_plain_text(report);
    std::cout << text;
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot write " << opt.out_path << "\n";
            return 2;
        }
        // The file always carries the JSON document; text is a console
        // projection of it.
        out << report::to_json_text(report);
    }
    return report::exit_code(report);
}

std::map<Phase, fs::path> parse_phase_paths(const std::vector<std::string>& entries,
                                            const char* flag) {
    std::map<Phase, fs::path> out;
    for (const auto& entry : entries) {
        auto eq = entry.find('=');
        if (eq == std::string::npos) {
            throw CLI::ValidationError(flag, "expected PHASE=PATH, got '" + entry + "'");
        }
        auto phase = parse_phase(entry.substr(0, eq));
        if (!phase) {
            throw CLI::ValidationError(flag, "unknown phase '" + entry.substr(0, eq) +
                                                 "' (original, recount, audit)");
        }
        out[*phase] = entry.substr(eq + 1);
    }
    return out;
}

// Duplicate groups used for tally adjustment: sequence-scan groups plus
// verified claims, skipping identical member sets.
std::vector<DuplicateGroup> merge_groups(const SequenceScan& scan,
                                         const std::vector<GroupVerification>& verified) {
    std::vector<DuplicateGroup> merged = scan.groups;
    std::set<std::vector<ImageRef>> seen;
    for (const auto& group : merged) seen.insert(group.members);
    for (const auto& check : verified) {
        if (!check.verified) continue;
        if (seen.count(check.group.members)) continue;
        seen.insert(check.group.members);
        merged.push_back(check.group);
    }
    return merged;
}

// One phase of CVR analysis for detect/verify/report-all.
void analyze_phase(json& report, std::string_view tag, const std::vector<CastVoteRecord>& cvrs,
                   const std::optional<std::vector<ClaimedGroup>>& claimed, const Options& opt,
                   std::string_view contest = "PRES") {
    SequenceScan scan = detect_sequence_runs(cvrs, opt.min_run, opt.rare_write_in);
    report::add_sequence_section(report, tag, scan);
    std::vector<GroupVerification> checks;
    if (claimed) {
        checks = detect_explicit_multiples(*claimed, cvrs);
        report::add_verify_section(report, tag, checks);
    }
    AdjustedTally adjusted = dedup_adjusted_tally(cvrs, merge_groups(scan, checks), contest);
    report::add_tally_section(report, tag, tally_cvrs(cvrs, contest), &adjusted);
}

json base_config(const std::string& subcommand, const Options& opt) {
    json config;
    config["subcommand"] = subcommand;
    config["format"] = opt.format;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"election-record reconciliation and duplicate-scan forensics"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    Options opt;

    // reconcile-audit
    std::string sheets_path, rows_path;
    auto* reconcile = app.add_subcommand("reconcile-audit",
                                         "match batch sheets against the audit spreadsheet");
    reconcile->add_option("--sheets", sheets_path, "abbs.csv")->required();
    reconcile->add_option("--rows", rows_path, "audit_rows.csv")->required();
    add_common(reconcile, opt);

    // detect-duplicates
    std::string cvrs_path, phase_tag = "original";
    auto* detect = app.add_subcommand("detect-duplicates",
                                      "find repeated scan runs and provable duplicate groups");
    detect->add_option("--cvrs", cvrs_path, "cvr.csv")->required();
    detect->add_option("--phase", phase_tag, "label for the report")->capture_default_str();
    detect->add_option("--min-run", opt.min_run, "minimum aligned run length")->capture_default_str();
    detect->add_option("--rare-writein", opt.rare_write_in, "rare write-in occurrence threshold")
        ->capture_default_str();
    add_common(detect, opt);

    // verify-groups
    std::string groups_path;
    std::int64_t sample_size = 0;
    auto* verify = app.add_subcommand("verify-groups",
                                      "check claimed duplicate groups against the CVRs");
    verify->add_option("--cvrs", cvrs_path, "cvr.csv")->required();
    verify->add_option("--groups", groups_path, "claimed-groups.csv")->required();
    verify->add_option("--phase", phase_tag, "label for the report")->capture_default_str();
    verify->add_option("--sample", sample_size, "draw a random sample of groups for manual checks");
    add_seed(verify, opt);
    add_common(verify, opt);

    // account
    std::string manifest_path, pollbook_path;
    std::vector<std::string> cvr_entries, image_entries;
    auto* account = app.add_subcommand("account",
                                       "ballot accounting: CVRs vs images vs manifest vs pollbook");
    account->add_option("--cvrs", cvr_entries, "PHASE=cvr.csv (repeatable)")->required();
    account->add_option("--images", image_entries, "PHASE=images.txt (repeatable)");
    account->add_option("--manifest", manifest_path, "manifest.csv");
    account->add_option("--pollbook", pollbook_path, "pollbook.csv");
    add_common(account, opt);

    // compare-phases
    std::string results_path;
    auto* compare = app.add_subcommand("compare-phases",
                                       "compare reported results across count phases");
    compare->add_option("--results", results_path, "results.csv")->required();
    add_common(compare, opt);

    // lcb
    std::int64_t population = 0, sample_n = 0, agreements = 0;
    auto* lcb = app.add_subcommand("lcb", "hypergeometric lower confidence bound");
    lcb->add_option("--population", population, "population size N")->required();
    lcb->add_option("--sample", sample_n, "sample size n")->required();
    lcb->add_option("--agreements", agreements, "agreements k in the sample")->required();
    lcb->add_option("--confidence", opt.confidence, "confidence level")->capture_default_str();
    add_common(lcb, opt);

    // generate-fixture
    std::string preset_name, spec_path, out_dir;
    auto* generate = app.add_subcommand("generate-fixture", "write a synthetic dataset");
    auto* preset_opt = generate->add_option("--preset", preset_name,
                                            "one of: paper-fulton, paper-tables, no-anomaly");
    auto* spec_opt = generate->add_option("--spec", spec_path, "fixture-spec.json");
    preset_opt->excludes(spec_opt);
    generate->add_option("--dir", out_dir, "output directory")->required();
    add_seed(generate, opt);

    // report-all
    std::string fixture_dir;
    auto* report_all = app.add_subcommand("report-all",
                                          "run every applicable check over a fixture directory");
    report_all->add_option("--dir", fixture_dir, "fixture directory")->required();
    report_all->add_option("--min-run", opt.min_run, "minimum aligned run length")
        ->capture_default_str();
    report_all->add_option("--rare-writein", opt.rare_write_in, "rare write-in occurrence threshold")
        ->capture_default_str();
    add_seed(report_all, opt);
    add_common(report_all, opt);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (reconcile->parsed()) {
            json config = base_config("reconcile-audit", opt);
            config["sheets"] = sheets_path;
            config["rows"] = rows_path;
            json rep = report::new_report(config);
            report::add_reconcile_section(rep, load_batch_sheets(sheets_path),
                                          load_audit_spreadsheet(rows_path));
            return emit(rep, opt);
        }

        if (detect->parsed()) {
            json config = base_config("detect-duplicates", opt);
            config["cvrs"] = cvrs_path;
            config["min_run"] = opt.min_run;
            config["rare_write_in_threshold"] = opt.rare_write_in;
            json rep = report::new_report(config);
            analyze_phase(rep, phase_tag, load_cvr_export(cvrs_path), std::nullopt, opt);
            return emit(rep, opt);
        }

        if (verify->parsed()) {
            json config = base_config("verify-groups", opt);
            config["cvrs"] = cvrs_path;
            config["groups"] = groups_path;
            config["seed"] = effective_seed(opt);
            json rep = report::new_report(config);
            auto cvrs = load_cvr_export(cvrs_path);
            auto claimed = load_claimed_groups(groups_path);
            auto checks = detect_explicit_multiples(claimed, cvrs);
            report::add_verify_section(rep, phase_tag, checks);
            if (sample_size > 0) {
                auto selection = sample_verification(checks.size(),
                                                     static_cast<std::size_t>(sample_size),
                                                     effective_seed(opt));
                report::add_sample_section(rep, selection);
            }
            return emit(rep, opt);
        }

        if (account->parsed()) {
            json config = base_config("account", opt);
            config["cvrs"] = cvr_entries;
            config["images"] = image_entries;
            if (!manifest_path.empty()) config["manifest"] = manifest_path;
            if (!pollbook_path.empty()) config["pollbook"] = pollbook_path;
            json rep = report::new_report(config);

            std::map<Phase, PhaseRecordSet> summaries;
            for (const auto& [phase, path] : parse_phase_paths(cvr_entries, "--cvrs")) {
                summaries[phase] = summarize_cvrs(load_cvr_export(path));
            }
            std::map<Phase, std::vector<ImageRef>> images;
            for (const auto& [phase, path] : parse_phase_paths(image_entries, "--images")) {
                images[phase] = load_image_inventory(path);
            }
            std::optional<Manifest> manifest;
            if (!manifest_path.empty()) manifest = load_manifest(manifest_path);
            std::optional<std::vector<PollbookSummary>> pollbook;
            if (!pollbook_path.empty()) pollbook = load_pollbook(pollbook_path);
            report::add_account_section(
                rep, count_reconciliation(summaries, images, manifest, pollbook));
            return emit(rep, opt);
        }

        if (compare->parsed()) {
            json config = base_config("compare-phases", opt);
            config["results"] = results_path;
            json rep = report::new_report(config);
            report::add_phase_section(rep, phase_compare(load_precinct_results(results_path)));
            return emit(rep, opt);
        }

        if (lcb->parsed()) {
            json config = base_config("lcb", opt);
            ConfidenceBound bound =
                hypergeometric_lcb(population, sample_n, agreements, opt.confidence);
            json rep = report::new_report(config);
            report::add_lcb_section(rep, bound);
            if (opt.format == "json") {
                std::cout << report::to_json_text(rep);
            } else {
                std::cout << bound.lower_bound << "\n"
                          << "convention: "
                          << rep["sections"]["lcb"]["convention"].get<std::string>() << "\n";
            }
            if (!opt.out_path.empty()) {
                std::ofstream out(opt.out_path, std::ios::binary);
                out << report::to_json_text(rep);
            }
            return 0;
        }

        if (generate->parsed()) {
            AnomalySpec spec;
            if (!preset_name.empty()) {
                spec = preset_spec(preset_name);
            } else if (!spec_path.empty()) {
                std::ifstream in(spec_path);
                if (!in) throw ParseError(spec_path, 0, "", "cannot open fixture spec");
                json doc = json::parse(in);
                spec = spec_from_json(doc);
            } else {
                std::cerr << "error: generate-fixture needs --preset or --spec\n";
                return 2;
            }
            if (opt.seed_given || std::getenv("CANVASS_SEED")) spec.seed = effective_seed(opt);
            generate_fixture_to_dir(spec, out_dir);
            std::cout << "fixture written to " << out_dir << "\n";
            return 0;
        }

        if (report_all->parsed()) {
            json config = base_config("report-all", opt);
            config["dir"] = fixture_dir;
            config["min_run"] = opt.min_run;
            config["rare_write_in_threshold"] = opt.rare_write_in;
            config["seed"] = effective_seed(opt);
            json rep = report::new_report(config);
            fs::path dir(fixture_dir);

            if (fs::exists(dir / "abbs.csv") && fs::exists(dir / "audit_rows.csv")) {
                report::add_reconcile_section(rep, load_batch_sheets(dir / "abbs.csv"),
                                              load_audit_spreadsheet(dir / "audit_rows.csv"));
            }

            std::map<Phase, PhaseRecordSet> summaries;
            std::map<Phase, std::vector<ImageRef>> images;
            for (Phase phase : {Phase::Original, Phase::Recount}) {
                std::string tag(to_string(phase));
                fs::path cvr_path = dir / ("cvr_" + tag + ".csv");
                if (!fs::exists(cvr_path)) continue;
                auto cvrs = load_cvr_export(cvr_path);
                summaries[phase] = summarize_cvrs(cvrs);
                std::optional<std::vector<ClaimedGroup>> claimed;
                fs::path claimed_path = dir / ("claimed_groups_" + tag + ".csv");
                if (fs::exists(claimed_path)) claimed = load_claimed_groups(claimed_path);
                analyze_phase(rep, tag, cvrs, claimed, opt);
                fs::path images_path = dir / ("images_" + tag + ".txt");
                if (fs::exists(images_path)) images[phase] = load_image_inventory(images_path);
            }
            if (!summaries.empty()) {
                std::optional<Manifest> manifest;
                if (fs::exists(dir / "manifest.csv")) manifest = load_manifest(dir / "manifest.csv");
                std::optional<std::vector<PollbookSummary>> pollbook;
                if (fs::exists(dir / "pollbook.csv")) pollbook = load_pollbook(dir / "pollbook.csv");
                report::add_account_section(
                    rep, count_reconciliation(summaries, images, manifest, pollbook));
            }
            if (fs::exists(dir / "results.csv")) {
                report::add_phase_section(rep,
                                          phase_compare(load_precinct_results(dir / "results.csv")));
            }
            if (rep["sections"].empty()) {
                std::cerr << "error: no recognizable record files under " << fixture_dir << "\n";
                return 2;
            }
            return emit(rep, opt);
        }
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const GenerationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
