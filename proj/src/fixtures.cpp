#include "canvass/fixtures.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "canvass/rng.hpp"

namespace canvass {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Candidate pools and shares
// ---------------------------------------------------------------------------

constexpr std::string_view kPres = "PRES";

const std::vector<std::string> kCommonWriteIns = {
    "MICKEY MOUSE", "JOHN SMITH", "NONE OF THE ABOVE", "STACEY ABRAMS",
    "BATMAN",       "KANYE WEST", "BERNIE SANDERS",    "DONALD TRUMP",
};

const std::vector<std::string> kRareWriteIns = {
    "WILLIE NELSON", "ALEXANDER HAMILTON", "ANYONE", "XXX",
    "DOLLY PARTON",  "MR ROGERS",          "OPRAH",  "JIMMY CARTER",
};

std::string precinct_name(int index) {
    if (index == 0) return "RW01";
    char buf[16];
    std::snprintf(buf, sizeof(buf), "P%03d", index + 1);
    return buf;
}

struct ContestModel {
    std::string contest;
    std::vector<std::string> candidates;
    std::vector<double> weights;  // one more entry than candidates = undervote
};

// District contests tie signatures to precincts, which keeps signature
// multiplicity low even at county scale.
std::vector<ContestModel> precinct_contests(int precinct_index) {
    std::string sh = "SH" + std::to_string(precinct_index % 40 + 1);
    std::string cc = "CC" + std::to_string(precinct_index % 25 + 1);
    return {
        {"USSEN", {"PERDUE", "OSSOFF", "HAZEL"}, {0.487, 0.481, 0.022, 0.010}},
        {"PSC1", {"MCDONALD", "BLACKMAN", "MELTON"}, {0.483, 0.477, 0.030, 0.010}},
        {sh, {sh + "_DEM", sh + "_REP"}, {0.52, 0.45, 0.03}},
        {cc, {cc + "_DEM", cc + "_REP"}, {0.51, 0.46, 0.03}},
    };
}

struct PresShares {
    double trump = 0.2596;
    double biden = 0.7209;
    double jorgensen = 0.0119;
    double write_in = 0.0020;
    double overvote = 0.0008;
    double undervote = 0.0048;
};

PresShares shares_for(const AnomalySpec& spec, Phase phase) {
    PresShares shares;
    auto target_it = spec.tally_targets.find(phase);
    auto count_it = spec.cvr_targets.find(phase);
    if (target_it != spec.tally_targets.end() && count_it != spec.cvr_targets.end() &&
        count_it->second > 0) {
        double total = static_cast<double>(count_it->second);
        shares.trump = static_cast<double>(target_it->second.trump) / total;
        shares.biden = static_cast<double>(target_it->second.biden) / total;
        shares.jorgensen = static_cast<double>(target_it->second.jorgensen) / total;
        double rest = 1.0 - shares.trump - shares.biden - shares.jorgensen;
        if (rest < 0.002) {
            throw GenerationError("tally targets leave no room for write-ins/undervotes in phase " +
                                  std::string(to_string(phase)));
        }
        shares.write_in = rest * 0.26;
        shares.overvote = rest * 0.10;
        shares.undervote = rest - shares.write_in - shares.overvote;
    }
    return shares;
}

// ---------------------------------------------------------------------------
// Batch layout
// ---------------------------------------------------------------------------

struct BatchPlan {
    BatchId id;
    VotingMode mode = VotingMode::AbsenteeByMail;
    std::uint32_t size = 0;
    int precinct = -1;  // fixed precinct for election-day batches
};

VotingMode required_batch_mode(std::uint32_t scanner) {
    if (scanner >= 800 && scanner < 1000) return VotingMode::Advance;
    return VotingMode::AbsenteeByMail;
}

// Collects every batch the anomaly spec touches, with its minimum size.
std::map<BatchId, std::uint32_t> required_batches(const AnomalySpec& spec, Phase phase) {
    std::map<BatchId, std::uint32_t> need;
    auto bump = [&need](BatchId id, std::uint32_t min_size) {
        auto& size = need[id];
        size = std::max(size, min_size);
    };
    for (const auto& run : spec.duplicate_runs) {
        if (run.phase != phase) continue;
        if (run.length == 0 || run.targets.empty()) {
            throw GenerationError("duplicate run needs a positive length and at least one target");
        }
        bump(run.source, run.source_start + run.length - 1);
        for (const auto& target : run.targets) {
            if (target.orientation == RunOrientation::Same) {
                bump(target.batch, target.start + run.length - 1);
            } else {
                if (target.start < run.length) {
                    throw GenerationError("reversed run target start " + std::to_string(target.start) +
                                          " is shorter than the run length " + std::to_string(run.length));
                }
                bump(target.batch, target.start);
            }
        }
        for (std::uint32_t seq : run.unique_source_seqs) {
            if (seq < run.source_start || seq >= run.source_start + run.length) {
                throw GenerationError("unique position " + std::to_string(seq) +
                                      " lies outside its run span");
            }
        }
    }
    for (const auto& group : spec.explicit_multiples) {
        if (group.phase != phase) continue;
        if (group.refs.size() < 2) throw GenerationError("explicit multiple needs at least two refs");
        for (const auto& ref : group.refs) {
            bump({ref.scanner_id, ref.batch_id}, ref.image_seq);
        }
    }
    auto missing_it = spec.missing_image_batches.find(phase);
    if (missing_it != spec.missing_image_batches.end()) {
        for (const auto& id : missing_it->second) bump(id, 40);
    }
    return need;
}

std::vector<BatchPlan> plan_batches(const AnomalySpec& spec, Phase phase, Rng& rng) {
    const std::int64_t target = spec.cvr_targets.at(phase);
    std::vector<BatchPlan> plan;

    std::int64_t required_total = 0;
    for (const auto& [id, min_size] : required_batches(spec, phase)) {
        BatchPlan batch;
        batch.id = id;
        batch.mode = required_batch_mode(id.scanner);
        batch.size = min_size + static_cast<std::uint32_t>(rng.in_range(6, 20));
        required_total += batch.size;
        plan.push_back(batch);
    }
    if (required_total > target) {
        throw GenerationError("cvr target " + std::to_string(target) + " for phase " +
                              std::string(to_string(phase)) + " is smaller than the " +
                              std::to_string(required_total) + " records its anomalies require");
    }

    std::int64_t remaining = target - required_total;
    const std::int64_t ed_budget = remaining * 27 / 100;
    const std::int64_t prov_budget = remaining * 8 / 1000;
    const std::int64_t adv_budget = remaining * 49 / 100;
    const std::int64_t abs_budget = remaining - ed_budget - prov_budget - adv_budget;

    std::map<std::uint32_t, std::uint32_t> next_batch;  // per scanner
    auto sequential = [&next_batch](std::uint32_t scanner, std::uint32_t start) {
        auto [it, inserted] = next_batch.try_emplace(scanner, start);
        (void)inserted;
        return BatchId{scanner, it->second++};
    };

    auto fill = [&](std::int64_t budget, VotingMode mode, auto next_id, std::uint32_t lo,
                    std::uint32_t hi, bool per_precinct) {
        int precinct = 0;
        while (budget > 0) {
            std::uint32_t size = static_cast<std::uint32_t>(rng.in_range(lo, hi));
            if (static_cast<std::int64_t>(size) > budget) size = static_cast<std::uint32_t>(budget);
            BatchPlan batch;
            batch.id = next_id(precinct);
            batch.mode = mode;
            batch.size = size;
            if (per_precinct) {
                batch.precinct = precinct;
                precinct = (precinct + 1) % spec.precinct_count;
            }
            plan.push_back(batch);
            budget -= size;
        }
    };

    int adv_scanner = 0, abs_scanner = 0;
    fill(ed_budget, VotingMode::ElectionDay,
         [&](int precinct) { return sequential(2000 + static_cast<std::uint32_t>(precinct), 1); }, 90,
         180, true);
    fill(adv_budget, VotingMode::Advance,
         [&](int) {
             std::uint32_t scanner = 801 + static_cast<std::uint32_t>(adv_scanner);
             adv_scanner = (adv_scanner + 1) % 6;
             return sequential(scanner, 1000);
         },
         150, 260, false);
    fill(abs_budget, VotingMode::AbsenteeByMail,
         [&](int) {
             std::uint32_t scanner = 791 + static_cast<std::uint32_t>(abs_scanner);
             abs_scanner = (abs_scanner + 1) % 6;
             return sequential(scanner, 1000);
         },
         140, 240, false);
    fill(prov_budget, VotingMode::Provisional, [&](int) { return sequential(990, 1); }, 20, 60, false);

    std::sort(plan.begin(), plan.end(),
              [](const BatchPlan& a, const BatchPlan& b) { return a.id < b.id; });
    return plan;
}

// ---------------------------------------------------------------------------
// Phase generation
// ---------------------------------------------------------------------------

struct PhaseBuilder {
    const AnomalySpec& spec;
    Phase phase;
    Rng rng;
    PresShares shares;
    std::vector<BatchPlan> plan;
    std::map<BatchId, std::size_t> batch_index;  // into plan
    std::vector<std::size_t> batch_offset;       // cvr index of batch start
    std::vector<CastVoteRecord> cvrs;            // canonical order
    std::vector<bool> protected_cvr;             // no flips / redraws allowed
    std::vector<bool> stamped;                   // position carries injected content
    std::set<BatchId> anomaly_batches;           // batches involved in runs/groups
    std::vector<double> precinct_weight;
    PhaseTruth truth;

    PhaseBuilder(const AnomalySpec& s, Phase p, std::uint64_t salt)
        : spec(s), phase(p), rng(s.seed ^ salt), shares(shares_for(s, p)) {}

    std::size_t position(const ImageRef& ref, const char* what) const {
        auto it = batch_index.find({ref.scanner_id, ref.batch_id});
        if (it == batch_index.end()) {
            throw GenerationError(std::string(what) + " names batch " + std::to_string(ref.scanner_id) +
                                  "/" + std::to_string(ref.batch_id) + " which is not in the layout");
        }
        const BatchPlan& batch = plan[it->second];
        if (ref.image_seq == 0 || ref.image_seq > batch.size) {
            throw GenerationError(std::string(what) + " names image_seq " +
                                  std::to_string(ref.image_seq) + " outside batch " + batch.id.str() +
                                  " of size " + std::to_string(batch.size));
        }
        return batch_offset[it->second] + ref.image_seq - 1;
    }

    const BatchPlan& batch_of(std::size_t pos) const {
        std::size_t b = static_cast<std::size_t>(
            std::upper_bound(batch_offset.begin(), batch_offset.end(), pos) - batch_offset.begin() - 1);
        return plan[b];
    }

    int precinct_index_of(const std::string& name) const {
        for (int i = 0; i < spec.precinct_count; ++i) {
            if (precinct_name(i) == name) return i;
        }
        return 0;
    }

    // Draws a full set of selections for one CVR.
    void draw_content(CastVoteRecord& cvr, int precinct_index) {
        cvr.precinct = precinct_name(precinct_index);
        cvr.selections.clear();
        cvr.write_ins.clear();
        double p = rng.unit();
        if ((p -= shares.trump) < 0) {
            cvr.selections.emplace_back(kPres, "TRUMP");
        } else if ((p -= shares.biden) < 0) {
            cvr.selections.emplace_back(kPres, "BIDEN");
        } else if ((p -= shares.jorgensen) < 0) {
            cvr.selections.emplace_back(kPres, "JORGENSEN");
        } else if ((p -= shares.write_in) < 0) {
            cvr.selections.emplace_back(kPres, "WRITE_IN");
            cvr.write_ins.emplace_back(kPres, kCommonWriteIns[rng.below(kCommonWriteIns.size())]);
        } else if ((p -= shares.overvote) < 0) {
            cvr.selections.emplace_back(kPres, "OVERVOTE");
        }  // else: presidential undervote
        for (const auto& contest : precinct_contests(precinct_index)) {
            std::size_t pick = rng.weighted(contest.weights);
            if (pick < contest.candidates.size()) {
                cvr.selections.emplace_back(contest.contest, contest.candidates[pick]);
            }
        }
        std::sort(cvr.selections.begin(), cvr.selections.end());
    }

    void build_base() {
        plan = plan_batches(spec, phase, rng);
        for (std::size_t i = 0; i < plan.size(); ++i) batch_index[plan[i].id] = i;
        batch_offset.resize(plan.size());
        std::size_t total = 0;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            batch_offset[i] = total;
            total += plan[i].size;
        }
        precinct_weight.resize(spec.precinct_count);
        for (auto& w : precinct_weight) w = 0.4 + rng.unit();

        const char prefix = phase == Phase::Original ? 'O' : 'R';
        cvrs.resize(total);
        protected_cvr.assign(total, false);
        stamped.assign(total, false);
        std::size_t index = 0;
        for (const auto& batch : plan) {
            for (std::uint32_t seq = 1; seq <= batch.size; ++seq, ++index) {
                CastVoteRecord& cvr = cvrs[index];
                char id[16];
                std::snprintf(id, sizeof(id), "%c%08zu", prefix, index + 1);
                cvr.cvr_id = id;
                cvr.image = {batch.id.scanner, batch.id.batch, seq};
                cvr.mode = batch.mode;
                int precinct =
                    batch.precinct >= 0 ? batch.precinct : static_cast<int>(rng.weighted(precinct_weight));
                draw_content(cvr, precinct);
            }
        }
    }

    // Donors supply signatures that already exist elsewhere, so copied
    // stack positions are never mistaken for provable duplicates. The
    // pool is shuffled: consecutive stack positions must not borrow from
    // consecutive positions of one batch, or the borrowing itself would
    // form an aligned run.
    std::vector<std::size_t> donor_pool;
    std::size_t donor_cursor = 0;
    std::size_t next_donor() {
        if (donor_pool.empty()) {
            for (std::size_t i = 0; i < cvrs.size(); ++i) {
                if (anomaly_batches.count(batch_of(i).id)) continue;
                if (protected_cvr[i] || !cvrs[i].write_ins.empty()) continue;
                donor_pool.push_back(i);
            }
            rng.shuffle(donor_pool);
        }
        while (donor_cursor < donor_pool.size()) {
            std::size_t candidate = donor_pool[donor_cursor++];
            if (protected_cvr[candidate]) continue;
            protected_cvr[candidate] = true;
            return candidate;
        }
        throw GenerationError("ran out of donor records for duplicate stacks; raise the cvr target");
    }

    static void copy_content(const CastVoteRecord& from, CastVoteRecord& to) {
        to.precinct = from.precinct;
        to.selections = from.selections;
        to.write_ins = from.write_ins;
    }

    int unique_counter = 0;
    std::string next_unique_text() {
        int i = unique_counter++;
        std::string text = kRareWriteIns[static_cast<std::size_t>(i) % kRareWriteIns.size()];
        if (i >= static_cast<int>(kRareWriteIns.size())) {
            text += " " + std::to_string(i / static_cast<int>(kRareWriteIns.size()));
        }
        return text;
    }

    void stamp_unique(std::size_t pos, const std::string& precinct_override) {
        CastVoteRecord& cvr = cvrs[pos];
        int precinct = precinct_override.empty() ? precinct_index_of(cvr.precinct)
                                                 : precinct_index_of(precinct_override);
        draw_content(cvr, precinct);
        std::erase_if(cvr.selections, [](const auto& entry) { return entry.first == kPres; });
        cvr.selections.emplace_back(kPres, "WRITE_IN");
        std::sort(cvr.selections.begin(), cvr.selections.end());
        cvr.write_ins.clear();
        cvr.write_ins.emplace_back(kPres, next_unique_text());
    }

    struct PlannedRun {
        BatchId batch_a, batch_b;
        std::size_t a_first;  // cvr index of the first aligned position, a side
        std::size_t b_first;  // its partner
        std::uint32_t length;
        int a_step, b_step;
    };
    std::vector<PlannedRun> planned_runs;

    void stamp_runs() {
        for (const auto& group : spec.explicit_multiples) {
            if (group.phase != phase) continue;
            for (const auto& ref : group.refs) anomaly_batches.insert({ref.scanner_id, ref.batch_id});
        }
        for (const auto& run : spec.duplicate_runs) {
            if (run.phase != phase) continue;
            anomaly_batches.insert(run.source);
            for (const auto& target : run.targets) anomaly_batches.insert(target.batch);
        }

        for (const auto& group : spec.explicit_multiples) {
            if (group.phase != phase) continue;
            std::size_t source = position(group.refs.front(), "explicit multiple");
            if (stamped[source]) {
                throw GenerationError("explicit multiples overlap at " + group.refs.front().str());
            }
            if (!group.precinct.empty()) {
                draw_content(cvrs[source], precinct_index_of(group.precinct));
            }
            stamped[source] = protected_cvr[source] = true;
            for (std::size_t i = 1; i < group.refs.size(); ++i) {
                std::size_t copy = position(group.refs[i], "explicit multiple");
                if (stamped[copy]) {
                    throw GenerationError("explicit multiples overlap at " + group.refs[i].str());
                }
                copy_content(cvrs[source], cvrs[copy]);
                stamped[copy] = protected_cvr[copy] = true;
            }
            ClaimedGroup claim;
            claim.members = group.refs;
            truth.claimed_groups.push_back(std::move(claim));
        }

        for (const auto& run : spec.duplicate_runs) {
            if (run.phase != phase) continue;
            std::set<std::uint32_t> unique_seqs(run.unique_source_seqs.begin(),
                                                run.unique_source_seqs.end());
            std::vector<std::size_t> source_pos(run.length);
            for (std::uint32_t o = 0; o < run.length; ++o) {
                ImageRef ref{run.source.scanner, run.source.batch, run.source_start + o};
                source_pos[o] = position(ref, "duplicate run");
                if (stamped[source_pos[o]]) {
                    throw GenerationError("duplicate runs overlap at " + ref.str());
                }
            }
            // Source content: unique positions get one-of-a-kind write-in
            // signatures; the rest borrow from donors.
            for (std::uint32_t o = 0; o < run.length; ++o) {
                std::size_t pos = source_pos[o];
                if (unique_seqs.count(run.source_start + o)) {
                    stamp_unique(pos, run.unique_precinct);
                } else {
                    copy_content(cvrs[next_donor()], cvrs[pos]);
                }
                stamped[pos] = protected_cvr[pos] = true;
            }
            // Copy the stack into each target batch.
            std::vector<std::vector<std::size_t>> target_pos(run.targets.size());
            for (std::size_t t = 0; t < run.targets.size(); ++t) {
                const auto& target = run.targets[t];
                target_pos[t].resize(run.length);
                for (std::uint32_t o = 0; o < run.length; ++o) {
                    std::uint32_t seq = target.orientation == RunOrientation::Same ? target.start + o
                                                                                   : target.start - o;
                    ImageRef ref{target.batch.scanner, target.batch.batch, seq};
                    std::size_t pos = position(ref, "duplicate run");
                    if (stamped[pos]) throw GenerationError("duplicate runs overlap at " + ref.str());
                    copy_content(cvrs[source_pos[o]], cvrs[pos]);
                    stamped[pos] = protected_cvr[pos] = true;
                    target_pos[t][o] = pos;
                }
            }
            // Truth bookkeeping: groups at unique positions, pairwise runs.
            for (std::uint32_t seq : run.unique_source_seqs) {
                std::uint32_t o = seq - run.source_start;
                std::vector<ImageRef> members;
                members.push_back(cvrs[source_pos[o]].image);
                for (const auto& positions : target_pos) members.push_back(cvrs[positions[o]].image);
                std::sort(members.begin(), members.end());
                truth.sequence_groups.push_back(members);
                ClaimedGroup claim;
                claim.members = std::move(members);
                truth.claimed_groups.push_back(std::move(claim));
            }
            auto record_run = [this, &run](BatchId x, BatchId y, RunOrientation orientation) {
                truth.runs.push_back({std::min(x, y), std::max(x, y), run.length, orientation});
            };
            auto step_of = [](RunOrientation orientation) {
                return orientation == RunOrientation::Same ? 1 : -1;
            };
            for (std::size_t t = 0; t < run.targets.size(); ++t) {
                record_run(run.source, run.targets[t].batch, run.targets[t].orientation);
                planned_runs.push_back({run.source, run.targets[t].batch, source_pos[0],
                                        target_pos[t][0], run.length, 1,
                                        step_of(run.targets[t].orientation)});
                for (std::size_t u = t + 1; u < run.targets.size(); ++u) {
                    RunOrientation composed = run.targets[t].orientation == run.targets[u].orientation
                                                  ? RunOrientation::Same
                                                  : RunOrientation::Reversed;
                    record_run(run.targets[t].batch, run.targets[u].batch, composed);
                    planned_runs.push_back({run.targets[t].batch, run.targets[u].batch,
                                            target_pos[t][0], target_pos[u][0], run.length,
                                            step_of(run.targets[t].orientation),
                                            step_of(run.targets[u].orientation)});
                }
            }
        }
        std::sort(truth.runs.begin(), truth.runs.end());
        std::sort(truth.sequence_groups.begin(), truth.sequence_groups.end());
    }

    bool in_batch(BatchId id, std::size_t pos) const {
        auto it = batch_index.find(id);
        std::size_t b = it->second;
        return pos >= batch_offset[b] && pos < batch_offset[b] + plan[b].size;
    }

    // Keeps every planned run maximal: the cells just outside each end
    // must not match, or the detector would report a longer run. A
    // redraw can re-collide some other pair sharing the cell, so iterate
    // to a fixpoint before freezing the boundary cells.
    void enforce_run_boundaries() {
        auto signatures_equal = [this](std::size_t a, std::size_t b) {
            return cvrs[a].selections == cvrs[b].selections && cvrs[a].write_ins == cvrs[b].write_ins;
        };
        std::vector<std::pair<std::size_t, std::size_t>> boundary_cells;
        for (const auto& run : planned_runs) {
            const std::array<std::pair<std::int64_t, std::int64_t>, 2> ends = {{
                {static_cast<std::int64_t>(run.a_first) - run.a_step,
                 static_cast<std::int64_t>(run.b_first) - run.b_step},
                {static_cast<std::int64_t>(run.a_first) +
                     static_cast<std::int64_t>(run.length) * run.a_step,
                 static_cast<std::int64_t>(run.b_first) +
                     static_cast<std::int64_t>(run.length) * run.b_step},
            }};
            for (const auto& [a_pos, b_pos] : ends) {
                if (a_pos < 0 || b_pos < 0 || a_pos >= static_cast<std::int64_t>(cvrs.size()) ||
                    b_pos >= static_cast<std::int64_t>(cvrs.size())) {
                    continue;
                }
                std::size_t a = static_cast<std::size_t>(a_pos), b = static_cast<std::size_t>(b_pos);
                if (!in_batch(run.batch_a, a) || !in_batch(run.batch_b, b)) continue;
                boundary_cells.emplace_back(a, b);
            }
        }
        for (int pass = 0;; ++pass) {
            if (pass > 64) throw GenerationError("failed to separate adjacent runs");
            bool changed = false;
            for (const auto& [a, b] : boundary_cells) {
                int guard = 0;
                while (signatures_equal(a, b)) {
                    std::size_t redraw = !protected_cvr[a] ? a : (!protected_cvr[b] ? b : SIZE_MAX);
                    if (redraw == SIZE_MAX) {
                        throw GenerationError("two duplicate runs abut; cannot keep them maximal");
                    }
                    draw_content(cvrs[redraw], precinct_index_of(cvrs[redraw].precinct));
                    changed = true;
                    if (++guard > 64) throw GenerationError("failed to separate adjacent runs");
                }
            }
            if (!changed) break;
        }
        // Freeze the settled boundaries so tally flips cannot reconnect a run.
        for (const auto& [a, b] : boundary_cells) {
            protected_cvr[a] = true;
            protected_cvr[b] = true;
        }
    }

    void adjust_tallies() {
        auto target_it = spec.tally_targets.find(phase);
        if (target_it == spec.tally_targets.end()) return;
        const CandidateTargets& target = target_it->second;

        std::map<std::string, std::int64_t> current;
        for (const auto& cvr : cvrs) {
            if (const std::string* sel = cvr.selection_for(kPres)) ++current[*sel];
        }
        struct Delta {
            const char* candidate;
            std::int64_t value;
        };
        const std::array<Delta, 3> deltas = {{{"TRUMP", target.trump - current["TRUMP"]},
                                              {"BIDEN", target.biden - current["BIDEN"]},
                                              {"JORGENSEN", target.jorgensen - current["JORGENSEN"]}}};

        auto flippable = [&](std::size_t i) {
            return !protected_cvr[i] && !anomaly_batches.count(batch_of(i).id);
        };
        // Shed surpluses first so the freed records can absorb deficits.
        for (const auto& delta : deltas) {
            std::int64_t excess = -delta.value;
            for (std::size_t i = 0; i < cvrs.size() && excess > 0; ++i) {
                if (!flippable(i)) continue;
                const std::string* sel = cvrs[i].selection_for(kPres);
                if (!sel || *sel != delta.candidate) continue;
                std::erase_if(cvrs[i].selections, [](const auto& entry) { return entry.first == kPres; });
                --excess;
            }
            if (excess > 0) {
                throw GenerationError(std::string("cannot shed ") + std::to_string(excess) + " " +
                                      delta.candidate + " votes to reach the tally target");
            }
        }
        for (const auto& delta : deltas) {
            std::int64_t deficit = delta.value;
            for (std::size_t i = 0; i < cvrs.size() && deficit > 0; ++i) {
                if (!flippable(i)) continue;
                if (cvrs[i].selection_for(kPres) != nullptr) continue;
                cvrs[i].selections.emplace_back(kPres, delta.candidate);
                std::sort(cvrs[i].selections.begin(), cvrs[i].selections.end());
                --deficit;
            }
            if (deficit > 0) {
                throw GenerationError(std::string("not enough undervotes to add ") +
                                      std::to_string(deficit) + " " + delta.candidate + " votes");
            }
        }
    }

    void verify_and_summarize() {
        // Signature multiplicities: a unique group's signature must be
        // exactly its members; donor-backed copies must occur elsewhere.
        auto sig_key = [](const CastVoteRecord& cvr) {
            std::string key;
            for (const auto& [c, s] : cvr.selections) {
                key += c;
                key += '=';
                key += s;
                key += ';';
            }
            key += '|';
            for (const auto& [c, t] : cvr.write_ins) {
                key += c;
                key += '=';
                key += t;
                key += ';';
            }
            return key;
        };
        std::unordered_map<std::string, std::uint32_t> sig_count;
        sig_count.reserve(cvrs.size() * 2);
        std::unordered_map<std::string, std::size_t> pos_by_ref;
        pos_by_ref.reserve(cvrs.size() * 2);
        for (std::size_t i = 0; i < cvrs.size(); ++i) {
            ++sig_count[sig_key(cvrs[i])];
            pos_by_ref[cvrs[i].image.str()] = i;
        }
        std::set<std::string> unique_refs;
        for (const auto& members : truth.sequence_groups) {
            for (const auto& ref : members) unique_refs.insert(ref.str());
            std::uint32_t count = sig_count[sig_key(cvrs[pos_by_ref[members.front().str()]])];
            if (count != members.size()) {
                throw GenerationError("unique duplicate-group signature at " + members.front().str() +
                                      " occurs " + std::to_string(count) + " times, expected " +
                                      std::to_string(members.size()));
            }
        }
        for (const auto& run : planned_runs) {
            for (std::uint32_t o = 0; o < run.length; ++o) {
                std::size_t a = static_cast<std::size_t>(static_cast<std::int64_t>(run.a_first) +
                                                         static_cast<std::int64_t>(o) * run.a_step);
                if (unique_refs.count(cvrs[a].image.str())) continue;
                if (sig_count[sig_key(cvrs[a])] < 3) {
                    throw GenerationError("copied stack position " + cvrs[a].image.str() +
                                          " has no occurrence outside its stack");
                }
            }
        }

        truth.cvr_count = static_cast<std::int64_t>(cvrs.size());
        for (const auto& cvr : cvrs) {
            if (const std::string* sel = cvr.selection_for(kPres)) ++truth.pres_tally[*sel];
        }
        auto target_it = spec.tally_targets.find(phase);
        if (target_it != spec.tally_targets.end()) {
            if (truth.pres_tally["TRUMP"] != target_it->second.trump ||
                truth.pres_tally["BIDEN"] != target_it->second.biden ||
                truth.pres_tally["JORGENSEN"] != target_it->second.jorgensen) {
                throw GenerationError("tally adjustment failed to land on the target");
            }
        }
        // Expected dedup removals: each group keeps one contribution.
        for (const auto& claim : truth.claimed_groups) {
            const CastVoteRecord& sample = cvrs[pos_by_ref[claim.members.front().str()]];
            if (const std::string* sel = sample.selection_for(kPres)) {
                truth.dedup_removed[*sel] += static_cast<std::int64_t>(claim.members.size()) - 1;
            }
        }
    }

    std::vector<ImageRef> build_images() {
        std::set<BatchId> forced_missing;
        auto missing_it = spec.missing_image_batches.find(phase);
        if (missing_it != spec.missing_image_batches.end()) {
            for (const auto& id : missing_it->second) {
                if (!batch_index.count(id)) {
                    throw GenerationError("missing-image batch " + id.str() + " is not in the layout");
                }
                forced_missing.insert(id);
            }
        }
        std::int64_t forced_count = 0;
        for (const auto& id : forced_missing) forced_count += plan[batch_index.at(id)].size;

        std::int64_t missing_target = forced_count;
        auto count_it = spec.image_counts.find(phase);
        if (count_it != spec.image_counts.end()) {
            missing_target = static_cast<std::int64_t>(cvrs.size()) - count_it->second;
            if (missing_target < forced_count) {
                throw GenerationError("image count target for phase " + std::string(to_string(phase)) +
                                      " conflicts with its forced-missing batches");
            }
        }

        // Drop whole batches from the tail of the layout (never anomaly
        // batches), then part of one more batch for the remainder.
        std::set<BatchId> dropped = forced_missing;
        std::int64_t still_missing = missing_target - forced_count;
        std::int64_t partial_batch = -1, partial_keep = 0;
        for (std::size_t b = plan.size(); b-- > 0 && still_missing > 0;) {
            const BatchPlan& batch = plan[b];
            if (anomaly_batches.count(batch.id) || dropped.count(batch.id)) continue;
            if (static_cast<std::int64_t>(batch.size) <= still_missing) {
                dropped.insert(batch.id);
                still_missing -= batch.size;
            } else {
                partial_batch = static_cast<std::int64_t>(b);
                partial_keep = static_cast<std::int64_t>(batch.size) - still_missing;
                still_missing = 0;
            }
        }
        if (still_missing > 0) {
            throw GenerationError("cannot drop " + std::to_string(still_missing) +
                                  " more images; too few non-anomaly batches");
        }

        std::vector<ImageRef> present;
        present.reserve(cvrs.size());
        for (std::size_t b = 0; b < plan.size(); ++b) {
            if (dropped.count(plan[b].id)) continue;
            std::uint32_t keep = plan[b].size;
            if (static_cast<std::int64_t>(b) == partial_batch) {
                keep = static_cast<std::uint32_t>(partial_keep);
            }
            for (std::uint32_t s = 0; s < keep; ++s) present.push_back(cvrs[batch_offset[b] + s].image);
        }
        truth.missing_image_batches.assign(dropped.begin(), dropped.end());
        truth.images_present = static_cast<std::int64_t>(present.size());
        truth.images_missing = static_cast<std::int64_t>(cvrs.size()) - truth.images_present;
        auto stated_it = spec.stated_missing_images.find(phase);
        if (stated_it != spec.stated_missing_images.end()) {
            truth.stated_missing_images = stated_it->second;
        }
        if (count_it != spec.image_counts.end() && truth.images_present != count_it->second) {
            throw GenerationError("image inventory came out at " + std::to_string(truth.images_present) +
                                  ", target was " + std::to_string(count_it->second));
        }
        return present;
    }

    PhaseData finish() {
        PhaseData data;
        data.images = build_images();
        for (std::size_t i = 0; i < truth.claimed_groups.size(); ++i) {
            char id[8];
            std::snprintf(id, sizeof(id), "G%03zu", i + 1);
            truth.claimed_groups[i].group_id = id;
        }
        data.claimed = truth.claimed_groups;
        data.cvrs = std::move(cvrs);
        return data;
    }
};

// ---------------------------------------------------------------------------
// Audit (manual tally) side
// ---------------------------------------------------------------------------

struct AuditBuilder {
    const AnomalySpec& spec;
    Rng rng;
    std::vector<BatchSheet> sheets;  // parallel to rows for the transcribed part
    std::vector<AuditRow> rows;
    AuditTruth truth;

    explicit AuditBuilder(const AnomalySpec& s) : spec(s), rng(s.seed ^ 0xab155eedULL) {}

    struct Tally {
        std::int64_t t = 0, b = 0, j = 0;
        auto operator<=>(const Tally&) const = default;
    };

    std::vector<std::size_t> slack_rows;  // large rows absorbing adjustments
    std::set<std::size_t> pinned_rows;    // injected pairs + mislabeled: never perturbed

    void build() {
        const std::int64_t n_omitted = static_cast<std::int64_t>(spec.omitted_sheets.size());
        const std::int64_t n_mislabeled = static_cast<std::int64_t>(spec.mislabeled_rows.size());
        const std::int64_t n_rows = spec.sheet_count - n_omitted;
        const std::int64_t n_filler = n_rows - n_mislabeled;
        if (n_filler < 0) {
            throw GenerationError("sheet_count " + std::to_string(spec.sheet_count) +
                                  " is too small for its omitted and mislabeled sheets");
        }
        if (spec.injected_duplicate_row_pairs * 2 > n_filler) {
            throw GenerationError("not enough filler rows for the injected duplicate pairs");
        }

        // Tallies that must stay unique among the rows: omitted sheets
        // must match nothing, mislabeled sheets exactly one row.
        std::set<Tally> forbidden;
        for (const auto& sheet : spec.omitted_sheets) {
            if (sheet.tally.candidates_known()) {
                forbidden.insert({*sheet.tally.trump, *sheet.tally.biden, *sheet.tally.jorgensen});
            }
        }
        for (const auto& mislabeled : spec.mislabeled_rows) {
            forbidden.insert({mislabeled.trump, mislabeled.biden, mislabeled.jorgensen});
        }

        const std::vector<std::string> advance_locations = {
            "Chastain", "Park Tavern", "Wolf Creek", "Adamsville",
            "Buckhead", "Ponce",       "Sandtown",   "Garden Hills"};
        std::map<std::string, int> advance_counter;
        std::array<int, 4> absentee_counter = {500, 500, 500, 500};
        int ed_counter = 0;
        std::array<int, 4> page_counter = {401, 401, 401, 401};
        auto next_source_page = [&page_counter](int pdf) {
            return std::to_string(pdf + 1) + " at " + std::to_string(page_counter[pdf]++);
        };

        for (std::int64_t i = 0; i < n_filler; ++i) {
            BatchSheet sheet;
            AuditRow row;
            row.county = spec.county;
            double kind = rng.unit();
            double biden_share, trump_share;
            std::int64_t size;
            if (kind < 0.55) {  // absentee scanner batch
                int scanner = static_cast<int>(rng.below(4));
                sheet.location_or_scanner = std::to_string(scanner + 1);
                sheet.batch_label = std::to_string(absentee_counter[scanner]++);
                sheet.mode = VotingMode::AbsenteeByMail;
                row.batch_name = "Scanner " + sheet.location_or_scanner + " Batch " + sheet.batch_label;
                size = static_cast<std::int64_t>(rng.in_range(60, 160));
                biden_share = 0.74;
                trump_share = 0.24;
            } else if (kind < 0.85) {  // advance location batch
                const std::string& location =
                    advance_locations[rng.below(advance_locations.size())];
                int batch = 200 + advance_counter[location]++;
                sheet.location_or_scanner = location;
                sheet.batch_label = std::to_string(batch);
                sheet.mode = VotingMode::Advance;
                row.batch_name = location + " Batch " + sheet.batch_label;
                size = static_cast<std::int64_t>(rng.in_range(380, 820));
                biden_share = 0.70;
                trump_share = 0.28;
            } else {  // election-day precinct batch
                char label[24];
                std::snprintf(label, sizeof(label), "ED%03d%c-%d", ed_counter / 2 + 2,
                              ed_counter % 2 ? 'B' : 'A', ed_counter % 3 + 1);
                ++ed_counter;
                sheet.location_or_scanner = "";
                sheet.batch_label = label;
                sheet.mode = VotingMode::ElectionDay;
                row.batch_name = label;
                size = static_cast<std::int64_t>(rng.in_range(90, 260));
                biden_share = 0.58;
                trump_share = 0.39;
            }
            row.biden = static_cast<std::int64_t>(size * biden_share + rng.unit() * 8);
            row.trump = static_cast<std::int64_t>(size * trump_share + rng.unit() * 8);
            row.jorgensen = static_cast<std::int64_t>(size * 0.012 + rng.unit() * 2);
            sheet.source_page = next_source_page(static_cast<int>(rng.below(4)));
            sheet.tally.write_in = static_cast<std::int64_t>(rng.below(4));
            sheet.tally.undervote_blank = static_cast<std::int64_t>(rng.below(5));
            sheet.tally.overvote = static_cast<std::int64_t>(rng.below(2));
            sheets.push_back(std::move(sheet));
            rows.push_back(std::move(row));
        }

        for (const auto& mislabeled : spec.mislabeled_rows) {
            BatchSheet sheet;
            sheet.source_page = next_source_page(static_cast<int>(rng.below(4)));
            sheet.location_or_scanner = mislabeled.location_or_scanner;
            sheet.batch_label = mislabeled.batch_label;
            sheet.mode = VotingMode::AbsenteeByMail;
            sheet.tally.write_in = 0;
            sheet.tally.undervote_blank = 0;
            sheet.tally.overvote = 0;
            AuditRow row;
            row.county = spec.county;
            row.batch_name = mislabeled.row_label;
            row.trump = mislabeled.trump;
            row.biden = mislabeled.biden;
            row.jorgensen = mislabeled.jorgensen;
            sheets.push_back(std::move(sheet));
            rows.push_back(std::move(row));
            truth.tally_only_row_labels.push_back(mislabeled.row_label);
        }
        for (std::size_t i = static_cast<std::size_t>(n_filler); i < rows.size(); ++i) {
            pinned_rows.insert(i);  // mislabeled rows keep their pinned tallies
        }

        inject_duplicate_pairs(forbidden, n_filler);
        adjust_totals(n_filler);
        repair_collisions(forbidden, n_filler);

        // Sheets mirror their rows after all adjustments.
        for (std::size_t i = 0; i < rows.size(); ++i) {
            sheets[i].tally.trump = rows[i].trump;
            sheets[i].tally.biden = rows[i].biden;
            sheets[i].tally.jorgensen = rows[i].jorgensen;
        }

        for (const auto& omitted : spec.omitted_sheets) sheets.push_back(omitted);

        // Sheets arrive scattered across PDF scans; rows keep the
        // spreadsheet's own order.
        rng.shuffle(sheets);

        truth.sheet_count = static_cast<std::int64_t>(sheets.size());
        truth.row_count = static_cast<std::int64_t>(rows.size());
        truth.omitted_sheets = spec.omitted_sheets;
        for (const auto& sheet : spec.omitted_sheets) {
            truth.omission.trump += sheet.tally.trump;
            truth.omission.biden += sheet.tally.biden;
            truth.omission.jorgensen += sheet.tally.jorgensen;
            truth.omission.write_in += sheet.tally.write_in;
            truth.omission.undervote_blank += sheet.tally.undervote_blank;
            truth.omission.overvote += sheet.tally.overvote;
        }
        for (const auto& row : rows) {
            truth.totals.trump += row.trump;
            truth.totals.biden += row.biden;
            truth.totals.jorgensen += row.jorgensen;
        }
        truth.duplicate_row_census_count = spec.injected_duplicate_row_pairs * 2;
        if (spec.audit_total_targets && !(truth.totals == *spec.audit_total_targets)) {
            throw GenerationError("audit totals failed to land on the target");
        }
    }

    void inject_duplicate_pairs(std::set<Tally>& forbidden, std::int64_t n_filler) {
        std::size_t cursor = 0;
        for (int pair = 0; pair < spec.injected_duplicate_row_pairs; ++pair) {
            while (cursor + 1 < static_cast<std::size_t>(n_filler)) {
                Tally tally{rows[cursor].trump, rows[cursor].biden, rows[cursor].jorgensen};
                if (!forbidden.count(tally)) break;
                ++cursor;
            }
            if (cursor + 1 >= static_cast<std::size_t>(n_filler)) {
                throw GenerationError("could not place the injected duplicate row pairs");
            }
            rows[cursor + 1].trump = rows[cursor].trump;
            rows[cursor + 1].biden = rows[cursor].biden;
            rows[cursor + 1].jorgensen = rows[cursor].jorgensen;
            forbidden.insert({rows[cursor].trump, rows[cursor].biden, rows[cursor].jorgensen});
            pinned_rows.insert(cursor);
            pinned_rows.insert(cursor + 1);
            cursor += 2;
        }
    }

    void adjust_totals(std::int64_t n_filler) {
        if (!spec.audit_total_targets) return;
        const CandidateTargets& target = *spec.audit_total_targets;

        std::vector<std::size_t> adjustable;
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_filler); ++i) {
            if (!pinned_rows.count(i)) adjustable.push_back(i);
        }
        if (adjustable.empty()) throw GenerationError("no rows available to absorb tally targets");

        CandidateTotals current;
        for (const auto& row : rows) {
            current.trump += row.trump;
            current.biden += row.biden;
            current.jorgensen += row.jorgensen;
        }
        // Spread the difference one vote at a time over every adjustable
        // row, so no single row drifts far from its drawn magnitude.
        auto spread = [&](std::int64_t delta, std::int64_t AuditRow::* member) {
            while (delta != 0) {
                bool progress = false;
                for (std::size_t i : adjustable) {
                    if (delta == 0) break;
                    auto& value = rows[i].*member;
                    if (delta > 0) {
                        value += 1;
                        --delta;
                        progress = true;
                    } else if (value > 0) {
                        value -= 1;
                        ++delta;
                        progress = true;
                    }
                }
                if (!progress) {
                    throw GenerationError(
                        "audit total targets are unreachable from the generated magnitudes");
                }
            }
        };
        spread(target.trump - current.trump, &AuditRow::trump);
        spread(target.biden - current.biden, &AuditRow::biden);
        spread(target.jorgensen - current.jorgensen, &AuditRow::jorgensen);

        // The largest adjustable rows settle collision-repair debt later.
        std::sort(adjustable.begin(), adjustable.end(), [this](std::size_t a, std::size_t b) {
            return rows[a].trump + rows[a].biden > rows[b].trump + rows[b].biden;
        });
        const std::size_t n_slack = std::min<std::size_t>(12, adjustable.size());
        slack_rows.assign(adjustable.begin(), adjustable.begin() + n_slack);
        for (std::size_t s : slack_rows) pinned_rows.insert(s);
    }

    // Every unpinned row must carry a within-county-unique tally off the
    // forbidden list; bump trump and repay from a slack row so column
    // sums hold.
    void repair_collisions(const std::set<Tally>& forbidden, std::int64_t n_filler) {
        for (int round = 0; round < 64; ++round) {
            std::map<Tally, std::vector<std::size_t>> by_tally;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                by_tally[{rows[i].trump, rows[i].biden, rows[i].jorgensen}].push_back(i);
            }
            std::int64_t debt = 0;
            for (std::size_t i = 0; i < static_cast<std::size_t>(n_filler); ++i) {
                if (pinned_rows.count(i)) continue;
                Tally tally{rows[i].trump, rows[i].biden, rows[i].jorgensen};
                auto& peers = by_tally[tally];
                if (!forbidden.count(tally) && peers.size() == 1) continue;
                peers.erase(std::find(peers.begin(), peers.end(), i));
                for (;;) {
                    rows[i].trump += 1;
                    debt += 1;
                    tally.t = rows[i].trump;
                    if (!forbidden.count(tally) && by_tally[tally].empty()) break;
                }
                by_tally[tally].push_back(i);
            }
            if (debt != 0 && !spec.audit_total_targets) {
                debt = 0;  // no pinned totals to preserve
            }
            if (debt != 0) {
                if (slack_rows.empty()) {
                    throw GenerationError("collision repair has no slack row to repay " +
                                          std::to_string(debt) + " votes");
                }
                // Spread the repayment so no slack row goes negative.
                std::size_t payer = static_cast<std::size_t>(round) % slack_rows.size();
                while (debt > 0) {
                    auto& value = rows[slack_rows[payer]].trump;
                    std::int64_t pay = std::min(debt, std::max<std::int64_t>(value - 1, 0));
                    value -= pay;
                    debt -= pay;
                    payer = (payer + 1) % slack_rows.size();
                    if (pay == 0 && payer == static_cast<std::size_t>(round) % slack_rows.size()) {
                        throw GenerationError("collision repair exhausted its slack rows");
                    }
                }
                continue;  // next round re-checks everything
            }
            // Rows are clean; check the pinned/slack rows against each
            // other (they may have been dragged onto a collision).
            bool clean = true;
            std::map<Tally, int> counts;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                ++counts[{rows[i].trump, rows[i].biden, rows[i].jorgensen}];
            }
            std::set<std::size_t> injected;  // injected pairs may collide by design
            for (std::size_t s : slack_rows) {
                Tally tally{rows[s].trump, rows[s].biden, rows[s].jorgensen};
                if (counts[tally] > 1 || forbidden.count(tally)) {
                    clean = false;
                    std::size_t next = slack_rows[(std::find(slack_rows.begin(), slack_rows.end(), s) -
                                                   slack_rows.begin() + 1) %
                                                  slack_rows.size()];
                    rows[s].jorgensen += 1;
                    rows[next].jorgensen -= 1;
                    if (rows[next].jorgensen < 0) {
                        throw GenerationError("collision repair pushed jorgensen negative");
                    }
                }
            }
            if (clean) return;
        }
        throw GenerationError("collision repair did not converge");
    }
};

// ---------------------------------------------------------------------------
// Reported results side
// ---------------------------------------------------------------------------

std::vector<PrecinctModeTally> build_results(const AnomalySpec& spec, Rng& rng) {
    std::vector<PrecinctModeTally> out = spec.pinned_results;
    std::set<std::tuple<std::string, std::string, std::string, std::string>> seen;
    for (const auto& row : out) {
        seen.insert({std::string(to_string(row.phase)), row.precinct, std::string(to_string(row.mode)),
                     row.candidate});
    }
    const std::vector<std::pair<std::string, double>> candidates = {
        {"TRUMP", 0.27}, {"BIDEN", 0.71}, {"JORGENSEN", 0.012}};
    const std::vector<VotingMode> modes = {VotingMode::ElectionDay, VotingMode::Advance,
                                           VotingMode::AbsenteeByMail, VotingMode::Provisional};
    for (int p = 0; p < spec.precinct_count; ++p) {
        std::string precinct = precinct_name(p);
        for (VotingMode mode : modes) {
            std::int64_t base = mode == VotingMode::Provisional
                                    ? static_cast<std::int64_t>(rng.in_range(4, 18))
                                    : static_cast<std::int64_t>(rng.in_range(300, 2400));
            for (const auto& [candidate, share] : candidates) {
                std::int64_t original = static_cast<std::int64_t>(base * share + rng.unit() * 6);
                std::int64_t recount = std::max<std::int64_t>(
                    0, original + static_cast<std::int64_t>(rng.in_range(0, 6)) - 3);
                std::int64_t audit = std::max<std::int64_t>(
                    0, original + static_cast<std::int64_t>(rng.in_range(0, 8)) - 4);
                auto push = [&](Phase phase, std::int64_t votes) {
                    if (!seen.insert({std::string(to_string(phase)), precinct,
                                      std::string(to_string(mode)), candidate})
                             .second) {
                        return;  // pinned row wins
                    }
                    out.push_back({phase, precinct, mode, candidate, votes});
                };
                push(Phase::Original, original);
                push(Phase::Recount, recount);
                if (mode == VotingMode::ElectionDay) push(Phase::Audit, audit);
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const PrecinctModeTally& a, const PrecinctModeTally& b) {
        return std::tuple(to_string(a.phase), a.precinct, to_string(a.mode), a.candidate) <
               std::tuple(to_string(b.phase), b.precinct, to_string(b.mode), b.candidate);
    });
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// generate_fixture
// ---------------------------------------------------------------------------

FixtureData generate_fixture(const AnomalySpec& spec) {
    if (spec.precinct_count < 1) throw GenerationError("precinct_count must be positive");
    for (const auto& [phase, target] : spec.cvr_targets) {
        if (phase == Phase::Audit) {
            throw GenerationError("the audit phase is a manual tally; it has no CVRs to generate");
        }
        if (target <= 0) throw GenerationError("cvr target must be positive");
    }

    FixtureData data;
    data.spec = spec;
    data.truth.seed = spec.seed;

    std::vector<std::pair<BatchId, std::uint32_t>> original_batches;
    std::map<std::pair<std::string, VotingMode>, std::int64_t> pollbook_counts;

    std::uint64_t salt = 0x0c0deba5eULL;
    for (const auto& [phase, target] : spec.cvr_targets) {
        (void)target;
        PhaseBuilder builder(spec, phase, salt += 0x9e3779b97f4a7c15ULL);
        builder.build_base();
        builder.stamp_runs();
        builder.enforce_run_boundaries();
        builder.adjust_tallies();
        builder.verify_and_summarize();
        if (phase == Phase::Original) {
            for (const auto& batch : builder.plan) original_batches.emplace_back(batch.id, batch.size);
            for (const auto& cvr : builder.cvrs) ++pollbook_counts[{cvr.precinct, cvr.mode}];
        }
        data.truth.phases[phase] = builder.truth;
        data.phases[phase] = builder.finish();
    }

    if (spec.sheet_count > 0) {
        AuditBuilder audit(spec);
        audit.build();
        data.sheets = std::move(audit.sheets);
        data.rows = std::move(audit.rows);
        data.truth.audit = audit.truth;
    }

    // Manifest: one container per original-phase batch.
    std::int64_t manifest_total = 0;
    for (const auto& [id, size] : original_batches) {
        ManifestEntry entry;
        entry.container_id = "BOX-" + std::to_string(id.scanner) + "-" + std::to_string(id.batch);
        entry.location = "Warehouse " + std::to_string(id.scanner % 4 + 1);
        entry.num_cards = size;
        manifest_total += size;
        data.manifest.entries.push_back(std::move(entry));
    }
    if (spec.manifest_total && !data.manifest.entries.empty()) {
        std::int64_t delta = *spec.manifest_total - manifest_total;
        data.manifest.entries.front().num_cards += delta;
        if (data.manifest.entries.front().num_cards < 0) {
            throw GenerationError("manifest_total target is too far below the generated batches");
        }
        manifest_total = *spec.manifest_total;
    }
    data.truth.manifest_total = manifest_total;

    // Pollbook: participants per precinct and mode, from the original count.
    std::int64_t pollbook_total = 0;
    for (const auto& [key, count] : pollbook_counts) {
        data.pollbook.push_back({key.first, key.second, count});
        pollbook_total += count;
    }
    std::sort(data.pollbook.begin(), data.pollbook.end(),
              [](const PollbookSummary& a, const PollbookSummary& b) {
                  return std::tuple(a.precinct, to_string(a.mode)) <
                         std::tuple(b.precinct, to_string(b.mode));
              });
    if (spec.pollbook_total && !data.pollbook.empty()) {
        std::int64_t delta = *spec.pollbook_total - pollbook_total;
        data.pollbook.front().num_participants += delta;
        if (data.pollbook.front().num_participants < 0) {
            throw GenerationError("pollbook_total target is too far below the generated counts");
        }
        pollbook_total = *spec.pollbook_total;
    }
    data.truth.pollbook_total = pollbook_total;

    if (spec.emit_results) {
        Rng results_rng(spec.seed ^ 0x7e50175a17ULL);
        data.results = build_results(spec, results_rng);
    }
    return data;
}

// ---------------------------------------------------------------------------
// Serialization of spec / truth
// ---------------------------------------------------------------------------

namespace {

json tally_to_json(const TallyVector& tally) {
    auto cell = [](const Count& c) { return c ? json(*c) : json(nullptr); };
    return json{{"trump", cell(tally.trump)},
                {"biden", cell(tally.biden)},
                {"jorgensen", cell(tally.jorgensen)},
                {"write_in", cell(tally.write_in)},
                {"undervote_blank", cell(tally.undervote_blank)},
                {"overvote", cell(tally.overvote)}};
}

TallyVector tally_from_json(const json& doc) {
    TallyVector tally;
    auto cell = [&doc](const char* key) -> Count {
        if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
        return doc.at(key).get<std::int64_t>();
    };
    tally.trump = cell("trump");
    tally.biden = cell("biden");
    tally.jorgensen = cell("jorgensen");
    tally.write_in = cell("write_in");
    tally.undervote_blank = cell("undervote_blank");
    tally.overvote = cell("overvote");
    return tally;
}

json sheet_to_json(const BatchSheet& sheet) {
    return json{{"source_page", sheet.source_page},
                {"location_or_scanner", sheet.location_or_scanner},
                {"batch_label", sheet.batch_label},
                {"mode", std::string(to_string(sheet.mode))},
                {"tally", tally_to_json(sheet.tally)}};
}

BatchSheet sheet_from_json(const json& doc) {
    BatchSheet sheet;
    sheet.source_page = doc.value("source_page", "");
    sheet.location_or_scanner = doc.value("location_or_scanner", "");
    sheet.batch_label = doc.at("batch_label").get<std::string>();
    sheet.mode = parse_voting_mode(doc.value("mode", "unknown")).value_or(VotingMode::Unknown);
    sheet.tally = tally_from_json(doc.at("tally"));
    return sheet;
}

}  // namespace

json spec_to_json(const AnomalySpec& spec) {
    json doc;
    doc["schema_version"] = 1;
    doc["seed"] = spec.seed;
    doc["county"] = spec.county;
    doc["precinct_count"] = spec.precinct_count;
    for (const auto& [phase, target] : spec.cvr_targets) {
        doc["cvr_targets"][std::string(to_string(phase))] = target;
    }
    for (const auto& [phase, target] : spec.tally_targets) {
        doc["tally_targets"][std::string(to_string(phase))] =
            json{{"trump", target.trump}, {"biden", target.biden}, {"jorgensen", target.jorgensen}};
    }
    for (const auto& [phase, count] : spec.image_counts) {
        doc["image_counts"][std::string(to_string(phase))] = count;
    }
    for (const auto& [phase, stated] : spec.stated_missing_images) {
        doc["stated_missing_images"][std::string(to_string(phase))] = stated;
    }
    for (const auto& [phase, batches] : spec.missing_image_batches) {
        json list = json::array();
        for (const auto& id : batches) list.push_back(json{{"scanner", id.scanner}, {"batch", id.batch}});
        doc["missing_image_batches"][std::string(to_string(phase))] = list;
    }
    doc["duplicate_runs"] = json::array();
    for (const auto& run : spec.duplicate_runs) {
        json targets = json::array();
        for (const auto& target : run.targets) {
            targets.push_back(json{{"scanner", target.batch.scanner},
                                   {"batch", target.batch.batch},
                                   {"start", target.start},
                                   {"orientation", std::string(to_string(target.orientation))}});
        }
        doc["duplicate_runs"].push_back(json{{"phase", std::string(to_string(run.phase))},
                                             {"scanner", run.source.scanner},
                                             {"batch", run.source.batch},
                                             {"start", run.source_start},
                                             {"length", run.length},
                                             {"targets", targets},
                                             {"unique_source_seqs", run.unique_source_seqs},
                                             {"unique_precinct", run.unique_precinct}});
    }
    doc["explicit_multiples"] = json::array();
    for (const auto& group : spec.explicit_multiples) {
        json refs = json::array();
        for (const auto& ref : group.refs) refs.push_back(ref.str());
        doc["explicit_multiples"].push_back(json{
            {"phase", std::string(to_string(group.phase))}, {"precinct", group.precinct}, {"refs", refs}});
    }
    doc["sheet_count"] = spec.sheet_count;
    if (spec.audit_total_targets) {
        doc["audit_total_targets"] = json{{"trump", spec.audit_total_targets->trump},
                                          {"biden", spec.audit_total_targets->biden},
                                          {"jorgensen", spec.audit_total_targets->jorgensen}};
    }
    doc["omitted_sheets"] = json::array();
    for (const auto& sheet : spec.omitted_sheets) doc["omitted_sheets"].push_back(sheet_to_json(sheet));
    doc["mislabeled_rows"] = json::array();
    for (const auto& row : spec.mislabeled_rows) {
        doc["mislabeled_rows"].push_back(json{{"location_or_scanner", row.location_or_scanner},
                                              {"batch_label", row.batch_label},
                                              {"row_label", row.row_label},
                                              {"trump", row.trump},
                                              {"biden", row.biden},
                                              {"jorgensen", row.jorgensen}});
    }
    doc["injected_duplicate_row_pairs"] = spec.injected_duplicate_row_pairs;
    if (spec.manifest_total) doc["manifest_total"] = *spec.manifest_total;
    if (spec.pollbook_total) doc["pollbook_total"] = *spec.pollbook_total;
    doc["emit_results"] = spec.emit_results;
    doc["pinned_results"] = json::array();
    for (const auto& row : spec.pinned_results) {
        doc["pinned_results"].push_back(json{{"phase", std::string(to_string(row.phase))},
                                             {"precinct", row.precinct},
                                             {"mode", std::string(to_string(row.mode))},
                                             {"candidate", row.candidate},
                                             {"votes", row.votes}});
    }
    return doc;
}

AnomalySpec spec_from_json(const json& doc) {
    AnomalySpec spec;
    spec.seed = doc.value("seed", static_cast<std::uint64_t>(1));
    spec.county = doc.value("county", "Fulton");
    spec.precinct_count = doc.value("precinct_count", 6);
    auto parse_phase_or_throw = [](const std::string& name) {
        auto phase = parse_phase(name);
        if (!phase) throw GenerationError("unknown phase '" + name + "' in fixture spec");
        return *phase;
    };
    if (doc.contains("cvr_targets")) {
        for (const auto& [name, value] : doc.at("cvr_targets").items()) {
            spec.cvr_targets[parse_phase_or_throw(name)] = value.get<std::int64_t>();
        }
    }
    if (doc.contains("tally_targets")) {
        for (const auto& [name, value] : doc.at("tally_targets").items()) {
            CandidateTargets target;
            target.trump = value.at("trump").get<std::int64_t>();
            target.biden = value.at("biden").get<std::int64_t>();
            target.jorgensen = value.at("jorgensen").get<std::int64_t>();
            spec.tally_targets[parse_phase_or_throw(name)] = target;
        }
    }
    if (doc.contains("image_counts")) {
        for (const auto& [name, value] : doc.at("image_counts").items()) {
            spec.image_counts[parse_phase_or_throw(name)] = value.get<std::int64_t>();
        }
    }
    if (doc.contains("stated_missing_images")) {
        for (const auto& [name, value] : doc.at("stated_missing_images").items()) {
            spec.stated_missing_images[parse_phase_or_throw(name)] = value.get<std::int64_t>();
        }
    }
    if (doc.contains("missing_image_batches")) {
        for (const auto& [name, value] : doc.at("missing_image_batches").items()) {
            for (const auto& entry : value) {
                spec.missing_image_batches[parse_phase_or_throw(name)].push_back(
                    {entry.at("scanner").get<std::uint32_t>(), entry.at("batch").get<std::uint32_t>()});
            }
        }
    }
    for (const auto& entry : doc.value("duplicate_runs", json::array())) {
        RunSpec run;
        run.phase = parse_phase_or_throw(entry.at("phase").get<std::string>());
        run.source = {entry.at("scanner").get<std::uint32_t>(), entry.at("batch").get<std::uint32_t>()};
        run.source_start = entry.at("start").get<std::uint32_t>();
        run.length = entry.at("length").get<std::uint32_t>();
        for (const auto& target : entry.at("targets")) {
            RunSpec::Target t;
            t.batch = {target.at("scanner").get<std::uint32_t>(),
                       target.at("batch").get<std::uint32_t>()};
            t.start = target.at("start").get<std::uint32_t>();
            t.orientation = target.at("orientation").get<std::string>() == "reversed"
                                ? RunOrientation::Reversed
                                : RunOrientation::Same;
            run.targets.push_back(t);
        }
        run.unique_source_seqs = entry.value("unique_source_seqs", std::vector<std::uint32_t>{});
        run.unique_precinct = entry.value("unique_precinct", "");
        spec.duplicate_runs.push_back(std::move(run));
    }
    for (const auto& entry : doc.value("explicit_multiples", json::array())) {
        ExplicitGroupSpec group;
        group.phase = parse_phase_or_throw(entry.at("phase").get<std::string>());
        group.precinct = entry.value("precinct", "");
        for (const auto& ref : entry.at("refs")) {
            group.refs.push_back(ImageRef::parse(ref.get<std::string>()));
        }
        spec.explicit_multiples.push_back(std::move(group));
    }
    spec.sheet_count = doc.value("sheet_count", static_cast<std::int64_t>(0));
    if (doc.contains("audit_total_targets")) {
        CandidateTargets target;
        target.trump = doc.at("audit_total_targets").at("trump").get<std::int64_t>();
        target.biden = doc.at("audit_total_targets").at("biden").get<std::int64_t>();
        target.jorgensen = doc.at("audit_total_targets").at("jorgensen").get<std::int64_t>();
        spec.audit_total_targets = target;
    }
    for (const auto& entry : doc.value("omitted_sheets", json::array())) {
        spec.omitted_sheets.push_back(sheet_from_json(entry));
    }
    for (const auto& entry : doc.value("mislabeled_rows", json::array())) {
        MislabeledRowSpec row;
        row.location_or_scanner = entry.at("location_or_scanner").get<std::string>();
        row.batch_label = entry.at("batch_label").get<std::string>();
        row.row_label = entry.at("row_label").get<std::string>();
        row.trump = entry.at("trump").get<std::int64_t>();
        row.biden = entry.at("biden").get<std::int64_t>();
        row.jorgensen = entry.at("jorgensen").get<std::int64_t>();
        spec.mislabeled_rows.push_back(std::move(row));
    }
    spec.injected_duplicate_row_pairs = doc.value("injected_duplicate_row_pairs", 0);
    if (doc.contains("manifest_total")) spec.manifest_total = doc.at("manifest_total").get<std::int64_t>();
    if (doc.contains("pollbook_total")) spec.pollbook_total = doc.at("pollbook_total").get<std::int64_t>();
    spec.emit_results = doc.value("emit_results", false);
    for (const auto& entry : doc.value("pinned_results", json::array())) {
        PrecinctModeTally row;
        row.phase = parse_phase_or_throw(entry.at("phase").get<std::string>());
        row.precinct = entry.at("precinct").get<std::string>();
        row.mode = parse_voting_mode(entry.at("mode").get<std::string>()).value_or(VotingMode::Unknown);
        row.candidate = entry.at("candidate").get<std::string>();
        row.votes = entry.at("votes").get<std::int64_t>();
        spec.pinned_results.push_back(std::move(row));
    }
    return spec;
}

json GroundTruth::to_json() const {
    json doc;
    doc["schema_version"] = 1;
    doc["seed"] = seed;
    doc["manifest_total"] = manifest_total;
    doc["pollbook_total"] = pollbook_total;
    for (const auto& [phase, truth] : phases) {
        json entry;
        entry["cvr_count"] = truth.cvr_count;
        entry["pres_tally"] = truth.pres_tally;
        entry["images_present"] = truth.images_present;
        entry["images_missing"] = truth.images_missing;
        if (truth.stated_missing_images) {
            entry["stated_missing_image_files"] = *truth.stated_missing_images;
            entry["stated_missing_inconsistent_with_derived"] =
                *truth.stated_missing_images != truth.images_missing;
        }
        json batches = json::array();
        for (const auto& id : truth.missing_image_batches) {
            batches.push_back(json{{"scanner", id.scanner}, {"batch", id.batch}});
        }
        entry["missing_image_batches"] = batches;
        json runs = json::array();
        for (const auto& run : truth.runs) {
            runs.push_back(json{{"batch_a", run.batch_a.str()},
                                {"batch_b", run.batch_b.str()},
                                {"length", run.length},
                                {"orientation", std::string(to_string(run.orientation))}});
        }
        entry["sequence_runs"] = runs;
        json groups = json::array();
        for (const auto& members : truth.sequence_groups) {
            json refs = json::array();
            for (const auto& ref : members) refs.push_back(ref.str());
            groups.push_back(refs);
        }
        entry["sequence_groups"] = groups;
        entry["claimed_group_count"] = truth.claimed_groups.size();
        entry["dedup_removed"] = truth.dedup_removed;
        doc["phases"][std::string(to_string(phase))] = entry;
    }
    if (audit) {
        json entry;
        entry["sheet_count"] = audit->sheet_count;
        entry["row_count"] = audit->row_count;
        json omitted = json::array();
        for (const auto& sheet : audit->omitted_sheets) omitted.push_back(sheet_to_json(sheet));
        entry["omitted_sheets"] = omitted;
        entry["tally_only_row_labels"] = audit->tally_only_row_labels;
        entry["omission_impact"] = json{
            {"trump", audit->omission.trump.known},
            {"biden", audit->omission.biden.known},
            {"jorgensen", audit->omission.jorgensen.known},
            {"total_known", audit->omission.total_known()},
            {"write_in_known", audit->omission.write_in.known},
            {"write_in_unknown", audit->omission.write_in.has_unknown},
        };
        entry["audit_totals"] = json{{"trump", audit->totals.trump},
                                     {"biden", audit->totals.biden},
                                     {"jorgensen", audit->totals.jorgensen}};
        entry["duplicate_row_census_count"] = audit->duplicate_row_census_count;
        doc["audit"] = entry;
    }
    return doc;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

namespace {

// The documented batch-sheet omissions, verbatim.
std::vector<BatchSheet> omitted_sheet_table() {
    auto sheet = [](const char* page, const char* scanner, const char* batch, const char* mode,
                    Count trump, Count biden, Count jorgensen, Count write_in, Count under,
                    Count over) {
        BatchSheet s;
        s.source_page = page;
        s.location_or_scanner = scanner;
        s.batch_label = batch;
        s.mode = parse_voting_mode(mode).value_or(VotingMode::Unknown);
        s.tally = {trump, biden, jorgensen, write_in, under, over};
        return s;
    };
    const Count unknown = std::nullopt;
    return {
        sheet("4 at 162", "3", "48", "absentee", 4, 93, 2, 0, 0, 0),
        sheet("1 at 1", "2", "52", "absentee", 6, 92, 0, 0, 0, 0),
        sheet("4 at 128", "3", "12--14", "?", 12, 83, 1, 0, 0, 0),
        sheet("3 at 177", "3", "239", "?", 13, 87, 0, 0, 0, 0),
        sheet("3 at 519", "1", "80--84", "?", 118, 329, 3, 2, 2, 1),
        sheet("4 at 355", "3", "260", "absentee", 30, 66, 0, 0, 0, 0),
        sheet("1 at 170", "", "AP01A-1", "election day", 84, 62, 6, 2, 1, 0),
        sheet("4 at 293", "3", "179--181", "absentee", 85, 224, 5, 1, 2, 0),
        sheet("2 at 153", "2", "239", "absentee", 4, 42, 0, 0, 0, 0),
        sheet("3 at 351", "Chastain", "12", "advance", 613, 605, 24, 7, 4, 0),
        sheet("3 at 270", "Chastain", "114", "advance", 613, 605, 24, unknown, 4, 0),
    };
}

std::vector<MislabeledRowSpec> mislabeled_row_table() {
    return {
        {"3", "162", "Scanner 3 Ballot 162", 4, 93, 2},
        {"2", "400", "Absentee Scanner 2 Batch 400", 6, 92, 0},
        {"3", "253", "Absentee Scanner 3 Batch 253", 12, 83, 1},
    };
}

std::vector<RunSpec> recount_run_table() {
    return {
        {Phase::Recount,
         {801, 43},
         1,
         214,
         {{{801, 44}, 1, RunOrientation::Same}},
         {42, 83, 168},
         "RW01"},
        {Phase::Recount, {5160, 74}, 16, 12, {{{5160, 67}, 1, RunOrientation::Same}}, {23}, "RW01"},
        {Phase::Recount,
         {794, 17},
         20,
         13,
         {{{791, 26}, 95, RunOrientation::Reversed}, {{791, 19}, 6, RunOrientation::Same}},
         {24, 29},
         "RW01"},
        {Phase::Recount,
         {794, 18},
         1,
         12,
         {{{791, 26}, 9, RunOrientation::Same}, {{791, 19}, 92, RunOrientation::Reversed}},
         {1, 11},
         "RW01"},
        {Phase::Recount,
         {794, 19},
         1,
         12,
         {{{791, 26}, 80, RunOrientation::Reversed}, {{791, 19}, 21, RunOrientation::Same}},
         {2, 5, 6},
         "RW01"},
    };
}

std::vector<ExplicitGroupSpec> original_pair_table() {
    const std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs = {
        {96, 57}, {93, 54}, {74, 36}, {72, 34}, {68, 30}, {69, 31}, {54, 14},
        {31, 90}, {26, 85}, {17, 76}, {13, 72}, {14, 73}, {3, 62},  {1, 60},
    };
    std::vector<ExplicitGroupSpec> groups;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        ExplicitGroupSpec group;
        group.phase = Phase::Original;
        group.precinct = i < 12 ? "RW01" : "P002";
        group.refs = {{5162, 234, pairs[i].first}, {5162, 235, pairs[i].second}};
        groups.push_back(std::move(group));
    }
    return groups;
}

std::vector<PrecinctModeTally> rw01_result_table() {
    struct Cell {
        Phase phase;
        VotingMode mode;
        std::int64_t trump, biden, jorgensen;
    };
    const std::vector<Cell> cells = {
        {Phase::Original, VotingMode::ElectionDay, 193, 88, 11},
        {Phase::Original, VotingMode::Advance, 1455, 1003, 23},
        {Phase::Original, VotingMode::AbsenteeByMail, 619, 833, 15},
        {Phase::Original, VotingMode::Provisional, 9, 4, 1},
        {Phase::Recount, VotingMode::ElectionDay, 162, 73, 9},
        {Phase::Recount, VotingMode::Advance, 1487, 1015, 25},
        {Phase::Recount, VotingMode::AbsenteeByMail, 619, 809, 15},
        {Phase::Recount, VotingMode::Provisional, 5, 3, 1},
        {Phase::Audit, VotingMode::ElectionDay, 243, 88, 11},
    };
    std::vector<PrecinctModeTally> rows;
    for (const auto& cell : cells) {
        rows.push_back({cell.phase, "RW01", cell.mode, "TRUMP", cell.trump});
        rows.push_back({cell.phase, "RW01", cell.mode, "BIDEN", cell.biden});
        rows.push_back({cell.phase, "RW01", cell.mode, "JORGENSEN", cell.jorgensen});
    }
    return rows;
}

AnomalySpec paper_spec(bool full_scale) {
    AnomalySpec spec;
    spec.seed = 20201103;
    spec.county = "Fulton";
    spec.precinct_count = full_scale ? 350 : 8;
    if (full_scale) {
        spec.cvr_targets[Phase::Original] = 528776;
        spec.cvr_targets[Phase::Recount] = 527925;
        spec.tally_targets[Phase::Original] = {137240, 381144, 6275};
        spec.tally_targets[Phase::Recount] = {137247, 380212, 6320};
        spec.image_counts[Phase::Original] = 168726;
        spec.image_counts[Phase::Recount] = 510073;
        spec.stated_missing_images[Phase::Original] = 376863;
    } else {
        spec.cvr_targets[Phase::Original] = 7000;
        spec.cvr_targets[Phase::Recount] = 7100;
    }
    spec.missing_image_batches[Phase::Recount] = {{801, 117}, {801, 118}};
    spec.duplicate_runs = recount_run_table();
    spec.explicit_multiples = original_pair_table();
    spec.sheet_count = 1927;
    spec.audit_total_targets = CandidateTargets{137620, 381179, 6494};
    spec.omitted_sheets = omitted_sheet_table();
    spec.mislabeled_rows = mislabeled_row_table();
    spec.emit_results = true;
    spec.pinned_results = rw01_result_table();
    return spec;
}

AnomalySpec no_anomaly_spec() {
    AnomalySpec spec;
    spec.seed = 7;
    spec.precinct_count = 4;
    spec.cvr_targets[Phase::Original] = 900;
    spec.cvr_targets[Phase::Recount] = 900;
    spec.sheet_count = 25;
    spec.emit_results = false;
    return spec;
}

}  // namespace

AnomalySpec preset_spec(const std::string& name) {
    if (name == "paper-fulton") return paper_spec(true);
    if (name == "paper-tables") return paper_spec(false);
    if (name == "no-anomaly") return no_anomaly_spec();
    throw GenerationError("unknown preset '" + name +
                          "'; available: paper-fulton, paper-tables, no-anomaly");
}

std::vector<std::string> preset_names() { return {"paper-fulton", "paper-tables", "no-anomaly"}; }

// ---------------------------------------------------------------------------
// write_fixture
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw GenerationError("cannot write " + path.string());
    return out;
}

}  // namespace

void write_fixture(const FixtureData& data, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    {
        auto out = open_out(dir / "fixture-spec.json");
        out << spec_to_json(data.spec).dump(2) << '\n';
    }
    {
        auto out = open_out(dir / "ground_truth.json");
        out << data.truth.to_json().dump(2) << '\n';
    }
    for (const auto& [phase, phase_data] : data.phases) {
        std::string tag(to_string(phase));
        {
            auto out = open_out(dir / ("cvr_" + tag + ".csv"));
            serialize_cvr_export(out, phase_data.cvrs);
        }
        {
            auto out = open_out(dir / ("images_" + tag + ".txt"));
            serialize_image_inventory(out, phase_data.images);
        }
        if (!phase_data.claimed.empty()) {
            auto out = open_out(dir / ("claimed_groups_" + tag + ".csv"));
            serialize_claimed_groups(out, phase_data.claimed);
        }
    }
    if (!data.sheets.empty()) {
        auto out = open_out(dir / "abbs.csv");
        serialize_batch_sheets(out, data.sheets);
    }
    if (!data.rows.empty()) {
        auto out = open_out(dir / "audit_rows.csv");
        serialize_audit_spreadsheet(out, data.rows);
    }
    if (!data.manifest.entries.empty()) {
        auto out = open_out(dir / "manifest.csv");
        serialize_manifest(out, data.manifest);
    }
    if (!data.pollbook.empty()) {
        auto out = open_out(dir / "pollbook.csv");
        serialize_pollbook(out, data.pollbook);
    }
    if (!data.results.empty()) {
        auto out = open_out(dir / "results.csv");
        serialize_precinct_results(out, data.results);
    }
}

void generate_fixture_to_dir(const AnomalySpec& spec, const std::filesystem::path& dir) {
    write_fixture(generate_fixture(spec), dir);
}

}  // namespace canvass
