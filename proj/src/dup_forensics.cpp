#include "canvass/dup_forensics.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

#include "canvass/csv.hpp"
#include "canvass/rng.hpp"

namespace canvass {

// ---------------------------------------------------------------------------
// Signatures and batch sequences
// ---------------------------------------------------------------------------

VoteSignature signature_of(const CastVoteRecord& cvr) {
    VoteSignature sig;
    sig.selections = cvr.selections;
    sig.write_ins = cvr.write_ins;
    std::sort(sig.selections.begin(), sig.selections.end());
    std::sort(sig.write_ins.begin(), sig.write_ins.end());
    return sig;
}

std::string BatchId::str() const {
    return std::to_string(scanner) + "/" + std::to_string(batch);
}

std::string_view to_string(RunOrientation orientation) {
    return orientation == RunOrientation::Same ? "same" : "reversed";
}

std::string_view to_string(GroupEvidence evidence) {
    return evidence == GroupEvidence::SequenceRun ? "sequence_run" : "explicit_pairing";
}

namespace {

struct SignatureHash {
    std::size_t operator()(const VoteSignature& sig) const {
        std::size_t h = 0xcbf29ce484222325ULL;
        auto mix = [&h](std::string_view text) {
            for (char ch : text) {
                h ^= static_cast<unsigned char>(ch);
                h *= 0x100000001b3ULL;
            }
            h ^= 0x1f;
            h *= 0x100000001b3ULL;
        };
        for (const auto& [contest, sel] : sig.selections) {
            mix(contest);
            mix(sel);
        }
        mix("|");
        for (const auto& [contest, text] : sig.write_ins) {
            mix(contest);
            mix(text);
        }
        return h;
    }
};

}  // namespace

BatchSequences batch_sequences(const std::vector<CastVoteRecord>& cvrs) {
    BatchSequences out;
    std::unordered_map<VoteSignature, std::uint32_t, SignatureHash> intern;
    intern.reserve(cvrs.size() / 4 + 16);
    for (const auto& cvr : cvrs) {
        VoteSignature sig = signature_of(cvr);
        auto [it, inserted] = intern.try_emplace(std::move(sig), static_cast<std::uint32_t>(out.signatures.size()));
        if (inserted) {
            out.signatures.push_back(it->first);
            out.occurrences.push_back(0);
        }
        ++out.occurrences[it->second];
        BatchId batch{cvr.image.scanner_id, cvr.image.batch_id};
        out.batches[batch].push_back({cvr.image, it->second});
    }
    for (auto& [batch, entries] : out.batches) {
        std::sort(entries.begin(), entries.end(), [](const SequenceEntry& a, const SequenceEntry& b) {
            return a.ref < b.ref;  // scanner/batch equal within a bucket; orders by image_seq
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sequence-run detection
// ---------------------------------------------------------------------------

namespace {

// Counts dataset-wide occurrences of each write-in text, then flags
// signatures containing a text at or below the rarity threshold.
struct RareWriteIns {
    std::vector<std::uint32_t> hits_per_sig;  // rare write-in entries in the signature

    RareWriteIns(const BatchSequences& seq, std::uint32_t threshold) {
        std::unordered_map<std::string, std::uint64_t> text_count;
        for (std::size_t id = 0; id < seq.signatures.size(); ++id) {
            for (const auto& [contest, text] : seq.signatures[id].write_ins) {
                text_count[text] += seq.occurrences[id];
            }
        }
        hits_per_sig.resize(seq.signatures.size(), 0);
        for (std::size_t id = 0; id < seq.signatures.size(); ++id) {
            for (const auto& [contest, text] : seq.signatures[id].write_ins) {
                if (text_count[text] <= threshold) ++hits_per_sig[id];
            }
        }
    }
};

struct DisjointSet {
    std::vector<std::size_t> parent;

    explicit DisjointSet(std::size_t n) : parent(n) {
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
    }
    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent[find(a)] = find(b); }
};

}  // namespace

SequenceScan detect_sequence_runs(const BatchSequences& sequences, std::uint32_t min_run,
                                  std::uint32_t rare_write_in_threshold) {
    if (min_run < 2) throw std::domain_error("detect_sequence_runs: min_run must be >= 2");

    SequenceScan scan;
    std::vector<const std::vector<SequenceEntry>*> seqs;
    std::vector<BatchId> ids;
    for (const auto& [id, entries] : sequences.batches) {
        ids.push_back(id);
        seqs.push_back(&entries);
    }
    const std::size_t nbatches = seqs.size();
    RareWriteIns rare(sequences, rare_write_in_threshold);

    // Occurrence lists per signature, in batch-index order.
    std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> occ(sequences.signatures.size());
    for (std::uint32_t b = 0; b < nbatches; ++b) {
        const auto& entries = *seqs[b];
        for (std::uint32_t pos = 0; pos < entries.size(); ++pos) {
            occ[entries[pos].sig].emplace_back(b, pos);
        }
    }

    // Candidate batch pairs and their shared-signature cell counts. A run
    // of length L contributes L cells on one diagonal, so pairs with
    // fewer than min_run shared cells cannot contain a reportable run.
    std::unordered_map<std::uint64_t, std::uint32_t> pair_cells;
    for (const auto& list : occ) {
        for (std::size_t u = 0; u < list.size(); ++u) {
            for (std::size_t v = u + 1; v < list.size(); ++v) {
                if (list[u].first == list[v].first) continue;
                std::uint64_t key = (static_cast<std::uint64_t>(list[u].first) << 32) | list[v].first;
                ++pair_cells[key];
            }
        }
    }
    std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
    for (const auto& [key, cells] : pair_cells) {
        if (cells >= min_run) {
            pairs.emplace_back(static_cast<std::uint32_t>(key >> 32), static_cast<std::uint32_t>(key));
        }
    }
    std::sort(pairs.begin(), pairs.end());

    // Union-find over all positions of all batches, for merging aligned
    // positions into duplicate groups.
    std::vector<std::size_t> batch_offset(nbatches + 1, 0);
    for (std::size_t b = 0; b < nbatches; ++b) batch_offset[b + 1] = batch_offset[b] + seqs[b]->size();
    DisjointSet dsu(batch_offset[nbatches]);
    std::vector<std::uint32_t> best_len(batch_offset[nbatches], 0);
    std::vector<bool> any_reversed(batch_offset[nbatches], false);

    for (const auto& [ba, bb] : pairs) {
        const auto& a = *seqs[ba];
        const auto& b = *seqs[bb];
        // Local index of b: signature -> positions.
        std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> b_index;
        b_index.reserve(b.size());
        for (std::uint32_t j = 0; j < b.size(); ++j) b_index[b[j].sig].push_back(j);

        // Matching cells grouped by diagonal (forward: j - i constant) and
        // anti-diagonal (reversed: i + j constant). Iterating i ascending
        // keeps each bucket sorted; a diagonal holds at most one cell per i.
        std::unordered_map<std::int64_t, std::vector<std::uint32_t>> fwd, rev;
        for (std::uint32_t i = 0; i < a.size(); ++i) {
            auto it = b_index.find(a[i].sig);
            if (it == b_index.end()) continue;
            for (std::uint32_t j : it->second) {
                fwd[static_cast<std::int64_t>(j) - i].push_back(i);
                rev[static_cast<std::int64_t>(j) + i].push_back(i);
            }
        }

        auto emit_runs = [&](const std::unordered_map<std::int64_t, std::vector<std::uint32_t>>& diagonals,
                             RunOrientation orientation) {
            std::vector<std::int64_t> keys;
            keys.reserve(diagonals.size());
            for (const auto& [key, cells] : diagonals) keys.push_back(key);
            std::sort(keys.begin(), keys.end());
            for (std::int64_t key : keys) {
                const auto& cells = diagonals.at(key);
                std::size_t start = 0;
                while (start < cells.size()) {
                    std::size_t end = start + 1;
                    while (end < cells.size() && cells[end] == cells[end - 1] + 1) ++end;
                    std::uint32_t length = static_cast<std::uint32_t>(end - start);
                    if (length >= min_run) {
                        AlignedRun run;
                        run.batch_a = ids[ba];
                        run.batch_b = ids[bb];
                        run.orientation = orientation;
                        run.length = length;
                        run.a_start = cells[start];
                        run.b_start = orientation == RunOrientation::Same
                                          ? static_cast<std::uint32_t>(key + run.a_start)
                                          : static_cast<std::uint32_t>(key - run.a_start);
                        run.first_a = a[run.a_start].ref;
                        run.first_b = b[run.b_start].ref;
                        for (std::size_t c = start; c < end; ++c) {
                            std::uint32_t i = cells[c];
                            std::uint32_t j = orientation == RunOrientation::Same
                                                  ? static_cast<std::uint32_t>(key + i)
                                                  : static_cast<std::uint32_t>(key - i);
                            if (rare.hits_per_sig[a[i].sig] > 0) ++run.rare_write_in_hits;
                            std::size_t pa = batch_offset[ba] + i;
                            std::size_t pb = batch_offset[bb] + j;
                            dsu.unite(pa, pb);
                            best_len[pa] = std::max(best_len[pa], length);
                            best_len[pb] = std::max(best_len[pb], length);
                            if (orientation == RunOrientation::Reversed) {
                                any_reversed[pa] = true;
                                any_reversed[pb] = true;
                            }
                        }
                        scan.runs.push_back(std::move(run));
                    }
                    start = end;
                }
            }
        };
        emit_runs(fwd, RunOrientation::Same);
        emit_runs(rev, RunOrientation::Reversed);
    }

    std::sort(scan.runs.begin(), scan.runs.end(), [](const AlignedRun& x, const AlignedRun& y) {
        return std::tuple(x.batch_a, x.batch_b, x.orientation, x.a_start, x.b_start) <
               std::tuple(y.batch_a, y.batch_b, y.orientation, y.a_start, y.b_start);
    });

    // Merge aligned positions into components; a component becomes a
    // group only when the signature has no occurrences outside it.
    std::unordered_map<std::size_t, std::vector<std::size_t>> components;
    for (std::size_t b = 0; b < nbatches; ++b) {
        for (std::size_t pos = 0; pos < seqs[b]->size(); ++pos) {
            std::size_t node = batch_offset[b] + pos;
            if (dsu.parent[node] == node && best_len[node] == 0) continue;  // untouched
            components[dsu.find(node)].push_back(node);
        }
    }
    auto entry_at = [&](std::size_t node) -> const SequenceEntry& {
        std::size_t b = std::upper_bound(batch_offset.begin(), batch_offset.end(), node) -
                        batch_offset.begin() - 1;
        return (*seqs[b])[node - batch_offset[b]];
    };
    for (auto& [root, nodes] : components) {
        if (nodes.size() < 2) continue;
        std::uint32_t sig = entry_at(nodes.front()).sig;
        bool uniform = true;
        for (std::size_t node : nodes) {
            if (entry_at(node).sig != sig) uniform = false;
        }
        assert(uniform);
        if (!uniform) continue;
        if (sequences.occurrences[sig] != nodes.size()) continue;  // copies exist elsewhere
        DuplicateGroup group;
        group.evidence = GroupEvidence::SequenceRun;
        group.signature_multiplicity = sequences.occurrences[sig];
        group.rare_write_in_hits = rare.hits_per_sig[sig];
        for (std::size_t node : nodes) {
            group.members.push_back(entry_at(node).ref);
            group.run_length = std::max(group.run_length, best_len[node]);
            if (any_reversed[node]) group.orientation = RunOrientation::Reversed;
        }
        std::sort(group.members.begin(), group.members.end());
        scan.groups.push_back(std::move(group));
    }
    std::sort(scan.groups.begin(), scan.groups.end(),
              [](const DuplicateGroup& x, const DuplicateGroup& y) { return x.members < y.members; });
    return scan;
}

SequenceScan detect_sequence_runs(const std::vector<CastVoteRecord>& cvrs, std::uint32_t min_run,
                                  std::uint32_t rare_write_in_threshold) {
    return detect_sequence_runs(batch_sequences(cvrs), min_run, rare_write_in_threshold);
}

// ---------------------------------------------------------------------------
// claimed-groups.csv
// ---------------------------------------------------------------------------

namespace {
const std::vector<std::string> kClaimedHeader = {"group_id", "image_ref"};
}

std::vector<ClaimedGroup> parse_claimed_groups(std::istream& in, std::string source) {
    CsvReader reader(in, std::move(source));
    expect_header(reader, kClaimedHeader);

    std::vector<ClaimedGroup> groups;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<std::string> fields;
    while (reader.next(fields)) {
        if (fields.size() != kClaimedHeader.size()) {
            reader.fail("", "row has " + std::to_string(fields.size()) + " fields, expected 2");
        }
        if (fields[0].empty()) reader.fail("group_id", "blank group_id");
        ImageRef ref;
        try {
            ref = ImageRef::parse(fields[1]);
        } catch (const std::invalid_argument& err) {
            reader.fail("image_ref", err.what());
        }
        auto [it, inserted] = index.try_emplace(fields[0], groups.size());
        if (inserted) groups.push_back({fields[0], {}});
        groups[it->second].members.push_back(ref);
    }
    return groups;
}

void serialize_claimed_groups(std::ostream& out, const std::vector<ClaimedGroup>& groups) {
    write_csv_row(out, kClaimedHeader);
    for (const auto& group : groups) {
        for (const auto& ref : group.members) {
            write_csv_row(out, {group.group_id, ref.str()});
        }
    }
}

std::vector<ClaimedGroup> load_claimed_groups(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "", "cannot open file");
    return parse_claimed_groups(in, path.string());
}

// ---------------------------------------------------------------------------
// detect_explicit_multiples
// ---------------------------------------------------------------------------

std::vector<GroupVerification> detect_explicit_multiples(const std::vector<ClaimedGroup>& claimed,
                                                         const std::vector<CastVoteRecord>& cvrs) {
    std::unordered_map<std::string, std::vector<std::size_t>> by_ref;
    by_ref.reserve(cvrs.size());
    for (std::size_t i = 0; i < cvrs.size(); ++i) by_ref[cvrs[i].image.str()].push_back(i);

    std::unordered_map<VoteSignature, std::uint32_t, SignatureHash> sig_count;
    for (const auto& cvr : cvrs) ++sig_count[signature_of(cvr)];
    std::unordered_map<std::string, std::uint64_t> text_count;
    for (const auto& [sig, count] : sig_count) {
        for (const auto& [contest, text] : sig.write_ins) text_count[text] += count;
    }

    std::vector<GroupVerification> out;
    out.reserve(claimed.size());
    for (const auto& claim : claimed) {
        GroupVerification verdict;
        verdict.claim = claim;
        if (claim.members.size() < 2) {
            verdict.failure_reason = "too_few_members";
            out.push_back(std::move(verdict));
            continue;
        }
        std::vector<std::size_t> matched;
        for (const auto& ref : claim.members) {
            auto it = by_ref.find(ref.str());
            if (it == by_ref.end()) {
                verdict.missing.push_back(ref);
            } else {
                matched.insert(matched.end(), it->second.begin(), it->second.end());
            }
        }
        if (!verdict.missing.empty()) {
            verdict.failure_reason = "missing_reference";
            out.push_back(std::move(verdict));
            continue;
        }
        VoteSignature sig = signature_of(cvrs[matched.front()]);
        bool uniform = true;
        for (std::size_t idx : matched) {
            if (signature_of(cvrs[idx]) != sig) uniform = false;
        }
        if (!uniform) {
            verdict.failure_reason = "signature_mismatch";
            out.push_back(std::move(verdict));
            continue;
        }
        verdict.verified = true;
        verdict.group.members = claim.members;
        std::sort(verdict.group.members.begin(), verdict.group.members.end());
        verdict.group.evidence = GroupEvidence::ExplicitPairing;
        verdict.group.signature_multiplicity = sig_count[sig];
        for (const auto& [contest, text] : sig.write_ins) {
            if (text_count[text] <= kDefaultRareWriteInThreshold) ++verdict.group.rare_write_in_hits;
        }
        out.push_back(std::move(verdict));
    }
    return out;
}

// ---------------------------------------------------------------------------
// sample_verification
// ---------------------------------------------------------------------------

SampleSelection sample_verification(std::size_t population, std::size_t sample_size,
                                    std::uint64_t seed) {
    if (sample_size > population) {
        throw std::domain_error("sample_verification: sample size " + std::to_string(sample_size) +
                                " exceeds population " + std::to_string(population));
    }
    SampleSelection selection;
    selection.seed = seed;
    selection.population = population;
    Rng rng(seed);
    selection.indices = rng.sample_indices(population, sample_size);
    return selection;
}

}  // namespace canvass
