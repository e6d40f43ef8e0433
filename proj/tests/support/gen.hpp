#pragma once

// Shared randomized-record generators and independent oracles for the
// test suites. Oracles deliberately use different algorithms than the
// library paths they check.

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "canvass/dup_forensics.hpp"
#include "canvass/records.hpp"
#include "canvass/rng.hpp"

namespace testgen {

using namespace canvass;

inline std::string random_token(Rng& rng, std::size_t min_len = 1, std::size_t max_len = 8) {
    static const char alphabet[] = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789 -_";
    std::size_t len = min_len + rng.below(max_len - min_len + 1);
    std::string out;
    for (std::size_t i = 0; i < len; ++i) out += alphabet[rng.below(sizeof(alphabet) - 1)];
    return out;
}

inline ImageRef random_ref(Rng& rng) {
    return ImageRef{static_cast<std::uint32_t>(rng.below(100000)),
                    static_cast<std::uint32_t>(rng.below(100000)),
                    static_cast<std::uint32_t>(rng.below(1000000))};
}

inline Count random_count(Rng& rng) {
    if (rng.below(8) == 0) return std::nullopt;
    return static_cast<std::int64_t>(rng.below(1000));
}

inline TallyVector random_tally(Rng& rng) {
    return TallyVector{random_count(rng), random_count(rng), random_count(rng),
                       random_count(rng), random_count(rng), random_count(rng)};
}

inline VotingMode random_mode(Rng& rng) {
    static const VotingMode modes[] = {VotingMode::ElectionDay, VotingMode::Advance,
                                       VotingMode::AbsenteeByMail, VotingMode::Provisional,
                                       VotingMode::Unknown};
    return modes[rng.below(5)];
}

inline BatchSheet random_sheet(Rng& rng) {
    BatchSheet sheet;
    sheet.source_page = std::to_string(1 + rng.below(4)) + " at " + std::to_string(1 + rng.below(600));
    sheet.location_or_scanner = rng.below(3) == 0 ? random_token(rng) : std::to_string(rng.below(9));
    sheet.batch_label = std::to_string(1 + rng.below(400));
    sheet.mode = random_mode(rng);
    sheet.tally = random_tally(rng);
    return sheet;
}

inline AuditRow random_row(Rng& rng) {
    AuditRow row;
    row.county = rng.below(2) ? "Fulton" : "DeKalb";
    row.batch_name = "Scanner " + std::to_string(rng.below(9)) + " Batch " +
                     std::to_string(1 + rng.below(400));
    row.trump = static_cast<std::int64_t>(rng.below(700));
    row.biden = static_cast<std::int64_t>(rng.below(900));
    row.jorgensen = static_cast<std::int64_t>(rng.below(30));
    return row;
}

inline CastVoteRecord random_cvr(Rng& rng, int index) {
    CastVoteRecord cvr;
    cvr.cvr_id = "T" + std::to_string(index);
    cvr.image = random_ref(rng);
    cvr.mode = random_mode(rng);
    cvr.precinct = "P" + std::to_string(rng.below(20));
    static const char* contests[] = {"PRES", "USSEN", "PSC1", "SH10", "CC4"};
    static const char* candidates[] = {"A", "B", "C", "D"};
    std::size_t n = rng.below(5);
    std::vector<std::size_t> picks = rng.sample_indices(5, n);
    std::sort(picks.begin(), picks.end());
    for (std::size_t c : picks) {
        cvr.selections.emplace_back(contests[c], candidates[rng.below(4)]);
        if (rng.below(10) == 0) {
            cvr.write_ins.emplace_back(contests[c], random_token(rng, 3, 10));
        }
    }
    std::sort(cvr.selections.begin(), cvr.selections.end());
    std::sort(cvr.write_ins.begin(), cvr.write_ins.end());
    return cvr;
}

// ---------------------------------------------------------------------------
// Exhaustive maximum bipartite matching on tally-compatibility edges.
// ---------------------------------------------------------------------------

inline bool tally_edge(const BatchSheet& sheet, const AuditRow& row) {
    return sheet.tally.candidates_known() && *sheet.tally.trump == row.trump &&
           *sheet.tally.biden == row.biden && *sheet.tally.jorgensen == row.jorgensen;
}

inline std::size_t max_matching_oracle(const std::vector<BatchSheet>& sheets,
                                       const std::vector<AuditRow>& rows) {
    // Augmenting paths; exact for these sizes.
    std::vector<std::vector<std::size_t>> adj(sheets.size());
    for (std::size_t s = 0; s < sheets.size(); ++s) {
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (tally_edge(sheets[s], rows[r])) adj[s].push_back(r);
        }
    }
    std::vector<int> row_owner(rows.size(), -1);
    std::vector<bool> visited;
    std::function<bool(std::size_t)> try_assign = [&](std::size_t s) {
        for (std::size_t r : adj[s]) {
            if (visited[r]) continue;
            visited[r] = true;
            if (row_owner[r] < 0 || try_assign(static_cast<std::size_t>(row_owner[r]))) {
                row_owner[r] = static_cast<int>(s);
                return true;
            }
        }
        return false;
    };
    std::size_t matched = 0;
    for (std::size_t s = 0; s < sheets.size(); ++s) {
        visited.assign(rows.size(), false);
        if (try_assign(s)) ++matched;
    }
    return matched;
}

// ---------------------------------------------------------------------------
// Brute-force aligned-run oracle: every offset, both orientations, O(L^2)
// per batch pair.
// ---------------------------------------------------------------------------

struct OracleRun {
    BatchId batch_a, batch_b;
    std::uint32_t a_start, b_start, length;
    RunOrientation orientation;

    auto operator<=>(const OracleRun&) const = default;
};

inline std::vector<OracleRun> alignment_oracle(const BatchSequences& seq, std::uint32_t min_run) {
    std::vector<std::pair<BatchId, const std::vector<SequenceEntry>*>> batches;
    for (const auto& [id, entries] : seq.batches) batches.emplace_back(id, &entries);
    std::vector<OracleRun> runs;
    for (std::size_t x = 0; x < batches.size(); ++x) {
        for (std::size_t y = x + 1; y < batches.size(); ++y) {
            const auto& a = *batches[x].second;
            const auto& b = *batches[y].second;
            const std::int64_t an = static_cast<std::int64_t>(a.size());
            const std::int64_t bn = static_cast<std::int64_t>(b.size());
            // Forward: all diagonals d = j - i.
            for (std::int64_t d = -(an - 1); d <= bn - 1; ++d) {
                std::int64_t i = std::max<std::int64_t>(0, -d);
                while (i < an && i + d < bn) {
                    if (a[i].sig == b[i + d].sig) {
                        std::int64_t start = i;
                        while (i < an && i + d < bn && a[i].sig == b[i + d].sig) ++i;
                        if (i - start >= min_run) {
                            runs.push_back({batches[x].first, batches[y].first,
                                            static_cast<std::uint32_t>(start),
                                            static_cast<std::uint32_t>(start + d),
                                            static_cast<std::uint32_t>(i - start),
                                            RunOrientation::Same});
                        }
                    } else {
                        ++i;
                    }
                }
            }
            // Reversed: all anti-diagonals s = i + j.
            for (std::int64_t s = 0; s <= an + bn - 2; ++s) {
                std::int64_t i = std::max<std::int64_t>(0, s - (bn - 1));
                while (i < an && s - i >= 0) {
                    if (a[i].sig == b[s - i].sig) {
                        std::int64_t start = i;
                        while (i < an && s - i >= 0 && a[i].sig == b[s - i].sig) ++i;
                        if (i - start >= min_run) {
                            runs.push_back({batches[x].first, batches[y].first,
                                            static_cast<std::uint32_t>(start),
                                            static_cast<std::uint32_t>(s - start),
                                            static_cast<std::uint32_t>(i - start),
                                            RunOrientation::Reversed});
                        }
                    } else {
                        ++i;
                    }
                }
            }
        }
    }
    std::sort(runs.begin(), runs.end());
    return runs;
}

// ---------------------------------------------------------------------------
// Brute-force hypergeometric lower bound: factorial-based probabilities,
// linear scan over M. Independent of the incremental-binomial route.
// ---------------------------------------------------------------------------

inline boost::multiprecision::cpp_int factorial(std::int64_t n) {
    boost::multiprecision::cpp_int out = 1;
    for (std::int64_t i = 2; i <= n; ++i) out *= i;
    return out;
}

inline std::int64_t lcb_oracle(std::int64_t N, std::int64_t n, std::int64_t k, double confidence) {
    using boost::multiprecision::cpp_int;
    auto choose = [](std::int64_t a, std::int64_t b) -> cpp_int {
        if (b < 0 || b > a) return 0;
        return factorial(a) / (factorial(b) * factorial(a - b));
    };
    const double alpha = 1.0 - confidence;
    int exponent = 0;
    double mant = std::frexp(alpha, &exponent);
    cpp_int alpha_num = static_cast<std::int64_t>(std::llround(std::ldexp(mant, 53)));
    int shift = 53 - exponent;
    cpp_int denom = choose(N, n);
    for (std::int64_t M = 0; M <= N; ++M) {
        cpp_int tail = 0;
        for (std::int64_t x = k; x <= n; ++x) tail += choose(M, x) * choose(N - M, n - x);
        if ((tail << shift) > alpha_num * denom) return M;
    }
    return N;
}

}  // namespace testgen
