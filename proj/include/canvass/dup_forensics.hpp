#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "canvass/records.hpp"

namespace canvass {

// ---------------------------------------------------------------------------
// Vote signatures
// ---------------------------------------------------------------------------

// The full interpreted content of one scanned sheet: every contest
// selection plus write-in texts. Two sheets with equal signatures are
// indistinguishable in the vote record.
struct VoteSignature {
    std::vector<std::pair<std::string, std::string>> selections;  // sorted by contest
    std::vector<std::pair<std::string, std::string>> write_ins;   // sorted by contest

    auto operator<=>(const VoteSignature&) const = default;
};

VoteSignature signature_of(const CastVoteRecord& cvr);

struct BatchId {
    std::uint32_t scanner = 0;
    std::uint32_t batch = 0;

    auto operator<=>(const BatchId&) const = default;
    std::string str() const;
};

// One position in a batch's scan order.
struct SequenceEntry {
    ImageRef ref;
    std::uint32_t sig = 0;  // index into BatchSequences::signatures
};

// Per-batch scan sequences with signatures interned dataset-wide, so
// multiplicity queries are O(1).
struct BatchSequences {
    std::map<BatchId, std::vector<SequenceEntry>> batches;  // ordered by image_seq
    std::vector<VoteSignature> signatures;                  // sig id -> signature
    std::vector<std::uint32_t> occurrences;                 // sig id -> dataset-wide count

    const VoteSignature& signature(std::uint32_t id) const { return signatures[id]; }
};

// Groups CVRs into per-(scanner, batch) sequences ordered by image_seq.
BatchSequences batch_sequences(const std::vector<CastVoteRecord>& cvrs);

// ---------------------------------------------------------------------------
// Sequence-run detection
// ---------------------------------------------------------------------------

enum class RunOrientation { Same, Reversed };

std::string_view to_string(RunOrientation orientation);

// A write-in text is "rare" when it occurs at most this many times
// dataset-wide; rare names strengthen duplicate evidence.
inline constexpr std::uint32_t kDefaultRareWriteInThreshold = 5;

// A maximal aligned stretch of two batches whose signatures agree
// position by position, forward or reversed. Exact alignment only.
struct AlignedRun {
    BatchId batch_a;
    BatchId batch_b;
    std::uint32_t a_start = 0;  // position index within batch a (0-based)
    std::uint32_t b_start = 0;  // position of the pair partner of a_start
    std::uint32_t length = 0;
    RunOrientation orientation = RunOrientation::Same;
    std::uint32_t rare_write_in_hits = 0;  // aligned positions carrying a rare write-in
    ImageRef first_a;                      // refs at (a_start, b_start)
    ImageRef first_b;
};

enum class GroupEvidence { SequenceRun, ExplicitPairing };

std::string_view to_string(GroupEvidence evidence);

// Image references asserted to be repeated scans of one physical sheet.
struct DuplicateGroup {
    std::vector<ImageRef> members;  // sorted, size >= 2
    GroupEvidence evidence = GroupEvidence::SequenceRun;
    std::uint32_t run_length = 0;                         // longest contributing run
    RunOrientation orientation = RunOrientation::Same;    // Reversed if any contributing edge was
    std::uint32_t rare_write_in_hits = 0;
    std::uint32_t signature_multiplicity = 0;  // dataset-wide occurrences of the signature

    bool operator==(const DuplicateGroup&) const = default;
};

struct SequenceScan {
    std::vector<AlignedRun> runs;         // sorted by (batch_a, batch_b, orientation, a_start)
    std::vector<DuplicateGroup> groups;   // sorted by first member
};

// Reports every maximal aligned run of length >= min_run between every
// pair of distinct batches. An aligned position becomes a DuplicateGroup
// only when its signature occurs nowhere in the dataset outside the
// aligned copies, i.e. the evidence is consistent with exactly one
// physical sheet. Positions aligned across several batch pairs merge
// into one group. rare write-ins are texts occurring at most
// rare_write_in_threshold times dataset-wide.
SequenceScan detect_sequence_runs(const BatchSequences& sequences, std::uint32_t min_run,
                                  std::uint32_t rare_write_in_threshold = kDefaultRareWriteInThreshold);
SequenceScan detect_sequence_runs(const std::vector<CastVoteRecord>& cvrs, std::uint32_t min_run,
                                  std::uint32_t rare_write_in_threshold = kDefaultRareWriteInThreshold);

// ---------------------------------------------------------------------------
// Explicit claimed multiples
// ---------------------------------------------------------------------------

struct ClaimedGroup {
    std::string group_id;
    std::vector<ImageRef> members;

    bool operator==(const ClaimedGroup&) const = default;
};

// claimed-groups.csv: group_id,image_ref (one member per row).
std::vector<ClaimedGroup> parse_claimed_groups(std::istream& in, std::string source = "");
void serialize_claimed_groups(std::ostream& out, const std::vector<ClaimedGroup>& groups);
std::vector<ClaimedGroup> load_claimed_groups(const std::filesystem::path& path);

struct GroupVerification {
    ClaimedGroup claim;
    bool verified = false;
    std::string failure_reason;        // "", "missing_reference", "signature_mismatch", "too_few_members"
    std::vector<ImageRef> missing;     // refs absent from the CVR set
    DuplicateGroup group;              // populated when verified
};

// A claimed group is verified iff every member occurs in the CVR set and
// all members share one VoteSignature.
std::vector<GroupVerification> detect_explicit_multiples(const std::vector<ClaimedGroup>& claimed,
                                                         const std::vector<CastVoteRecord>& cvrs);

// ---------------------------------------------------------------------------
// Sampling and the confidence bound
// ---------------------------------------------------------------------------

// Uniform sample without replacement, fully determined by the seed.
struct SampleSelection {
    std::uint64_t seed = 0;
    std::size_t population = 0;
    std::vector<std::size_t> indices;  // in selection order
};

SampleSelection sample_verification(std::size_t population, std::size_t sample_size,
                                    std::uint64_t seed);

struct ConfidenceBound {
    std::int64_t population = 0;   // N
    std::int64_t sample = 0;       // n
    std::int64_t agreements = 0;   // k
    double confidence = 0;
    std::int64_t lower_bound = 0;  // M

    bool operator==(const ConfidenceBound&) const = default;
};

// Smallest M in [0, N] such that P[X >= k] > 1 - confidence for
// X ~ Hypergeometric(N, M, n). The tail is evaluated exactly in integer
// arithmetic (the confidence level is treated as the exact dyadic
// rational its double encodes), so results carry no rounding error.
ConfidenceBound hypergeometric_lcb(std::int64_t population, std::int64_t sample,
                                   std::int64_t agreements, double confidence);

}  // namespace canvass
