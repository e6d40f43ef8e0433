#pragma once

// Randomized AnomalySpec construction shared by the fixture tests and
// the acceptance suite.

#include <set>

#include "canvass/fixtures.hpp"
#include "canvass/rng.hpp"

namespace testgen {

using namespace canvass;

inline AnomalySpec random_small_spec(std::uint64_t seed) {
    Rng rng(seed * 0x9e3779b97f4a7c15ULL + 1);
    AnomalySpec spec;
    spec.seed = seed;
    spec.precinct_count = 2 + static_cast<int>(rng.below(4));
    spec.cvr_targets[Phase::Original] = 900 + static_cast<std::int64_t>(rng.below(900));
    if (rng.below(2)) spec.cvr_targets[Phase::Recount] = 900 + static_cast<std::int64_t>(rng.below(900));

    std::uint32_t next_scanner = 300;
    for (Phase phase : {Phase::Original, Phase::Recount}) {
        if (!spec.cvr_targets.count(phase)) continue;
        std::size_t n_runs = rng.below(3);
        for (std::size_t r = 0; r < n_runs; ++r) {
            RunSpec run;
            run.phase = phase;
            run.source = {next_scanner++, 1 + static_cast<std::uint32_t>(rng.below(5))};
            run.length = 10 + static_cast<std::uint32_t>(rng.below(10));
            run.source_start = 1 + static_cast<std::uint32_t>(rng.below(6));
            int n_targets = 1 + static_cast<int>(rng.below(2));
            for (int t = 0; t < n_targets; ++t) {
                RunSpec::Target target;
                target.batch = {next_scanner++, 1 + static_cast<std::uint32_t>(rng.below(5))};
                target.orientation = rng.below(2) ? RunOrientation::Reversed : RunOrientation::Same;
                target.start = target.orientation == RunOrientation::Same
                                   ? 1 + static_cast<std::uint32_t>(rng.below(6))
                                   : run.length + static_cast<std::uint32_t>(rng.below(6));
                run.targets.push_back(target);
            }
            std::size_t n_unique = rng.below(4);
            std::set<std::uint32_t> uniques;
            while (uniques.size() < n_unique) {
                uniques.insert(run.source_start + static_cast<std::uint32_t>(rng.below(run.length)));
            }
            run.unique_source_seqs.assign(uniques.begin(), uniques.end());
            spec.duplicate_runs.push_back(std::move(run));
        }
        std::size_t n_explicit = rng.below(3);
        for (std::size_t g = 0; g < n_explicit; ++g) {
            ExplicitGroupSpec group;
            group.phase = phase;
            std::uint32_t scanner = next_scanner++;
            int members = 2 + static_cast<int>(rng.below(2));
            for (int m = 0; m < members; ++m) {
                group.refs.push_back({scanner, static_cast<std::uint32_t>(m + 1),
                                      1 + static_cast<std::uint32_t>(rng.below(20))});
            }
            spec.explicit_multiples.push_back(std::move(group));
        }
    }
    spec.sheet_count = 12 + static_cast<std::int64_t>(rng.below(25));
    std::size_t n_omitted = rng.below(4);
    for (std::size_t i = 0; i < n_omitted; ++i) {
        BatchSheet sheet;
        sheet.source_page = "1 at " + std::to_string(i + 1);
        sheet.location_or_scanner = "9";
        sheet.batch_label = "77" + std::to_string(i);
        sheet.mode = VotingMode::AbsenteeByMail;
        sheet.tally = {static_cast<std::int64_t>(2000 + rng.below(50)),
                       static_cast<std::int64_t>(3000 + rng.below(50)),
                       static_cast<std::int64_t>(rng.below(5)), 0, 0, 0};
        spec.omitted_sheets.push_back(std::move(sheet));
    }
    spec.injected_duplicate_row_pairs = static_cast<int>(rng.below(3));
    if (rng.below(2)) {
        spec.mislabeled_rows.push_back({"8", "123", "Scanner 8 Ballot 123",
                                        static_cast<std::int64_t>(4000 + rng.below(40)),
                                        static_cast<std::int64_t>(5000 + rng.below(40)), 1});
    }
    return spec;
}

}  // namespace testgen
