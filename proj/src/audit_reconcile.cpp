#include "canvass/audit_reconcile.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace canvass {

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

std::string BatchKey::str() const {
    std::string out = scanner + "/" + batch;
    if (!extra.empty()) out += "+" + extra;
    return out;
}

std::string normalize_label(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        unsigned char ch = static_cast<unsigned char>(text[i]);
        if (std::isspace(ch)) continue;
        if (ch == '-' && i + 1 < text.size() && text[i + 1] == '-') continue;  // "12--14" -> "12-14"
        out += static_cast<char>(std::tolower(ch));
    }
    return out;
}

namespace {

std::vector<std::string> label_tokens(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    for (char raw : text) {
        unsigned char ch = static_cast<unsigned char>(raw);
        if (std::isspace(ch)) {
            if (!current.empty()) tokens.push_back(normalize_label(current));
            current.clear();
        } else {
            current += raw;
        }
    }
    if (!current.empty()) tokens.push_back(normalize_label(current));
    return tokens;
}

struct TallyKey {
    std::int64_t trump, biden, jorgensen;
    auto operator<=>(const TallyKey&) const = default;
};

}  // namespace

BatchKey sheet_batch_key(const BatchSheet& sheet) {
    return BatchKey{normalize_label(sheet.location_or_scanner), normalize_label(sheet.batch_label), ""};
}

BatchKey row_batch_key(const AuditRow& row) {
    auto tokens = label_tokens(row.batch_name);
    BatchKey key;
    std::vector<std::string> leftover;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] == "scanner" && i + 1 < tokens.size() && key.scanner.empty()) {
            key.scanner = tokens[++i];
        } else if (tokens[i] == "batch" && i + 1 < tokens.size() && key.batch.empty()) {
            key.batch = tokens[++i];
        } else {
            leftover.push_back(tokens[i]);
        }
    }
    // Stray tokens fill the empty slots: "Chastain Batch 12" and
    // "Park Tavern Batch 12" are location+batch, a bare "AP01A-1" is just
    // a batch label. Leftovers that fit nowhere (mode prefixes, [sic]
    // words) become `extra` and block exact matching.
    if (leftover.size() == 1 && key.batch.empty() && key.scanner.empty()) {
        key.batch = leftover[0];
    } else if (!leftover.empty() && !key.batch.empty() && key.scanner.empty()) {
        for (const auto& token : leftover) key.scanner += token;
    } else {
        for (const auto& token : leftover) {
            if (!key.extra.empty()) key.extra += ' ';
            key.extra += token;
        }
    }
    return key;
}

int label_affinity(const BatchSheet& sheet, const AuditRow& row) {
    std::set<std::string> sheet_tokens;
    if (auto s = normalize_label(sheet.location_or_scanner); !s.empty()) sheet_tokens.insert(s);
    if (auto b = normalize_label(sheet.batch_label); !b.empty()) sheet_tokens.insert(b);
    std::set<std::string> row_tokens;
    for (auto& token : label_tokens(row.batch_name)) row_tokens.insert(std::move(token));
    int overlap = 0;
    for (const auto& token : sheet_tokens) {
        if (row_tokens.count(token)) ++overlap;
    }
    return overlap;
}

// ---------------------------------------------------------------------------
// match_sheets
// ---------------------------------------------------------------------------

MatchResult match_sheets(const std::vector<BatchSheet>& sheets, const std::vector<AuditRow>& rows) {
    MatchResult result;
    std::vector<bool> row_matched(rows.size(), false);
    std::vector<int> sheet_state(sheets.size(), 0);  // 0 pending, 1 matched

    // Pass 1: exact match on normalized batch identifier and candidate
    // tally. Greedy in sheet input order; ties broken by row position.
    std::map<std::pair<std::string, TallyKey>, std::vector<std::size_t>> pass1_index;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        TallyKey tally{rows[r].trump, rows[r].biden, rows[r].jorgensen};
        pass1_index[{row_batch_key(rows[r]).str(), tally}].push_back(r);
    }
    for (std::size_t s = 0; s < sheets.size(); ++s) {
        const BatchSheet& sheet = sheets[s];
        if (!sheet.tally.candidates_known()) continue;
        TallyKey tally{*sheet.tally.trump, *sheet.tally.biden, *sheet.tally.jorgensen};
        BatchKey key = sheet_batch_key(sheet);
        auto it = pass1_index.find({key.str(), tally});
        if (it == pass1_index.end()) continue;
        auto& queue = it->second;
        std::size_t r = queue.front();
        queue.erase(queue.begin());
        if (queue.empty()) pass1_index.erase(it);
        row_matched[r] = true;
        sheet_state[s] = 1;
        result.matched.push_back({s, r, sheet, rows[r], 1, "identifier '" + key.str() + "' and tally"});
    }

    // Pass 2: tally-only. A sheet matches when exactly one unmatched row
    // has its tally; several candidate rows make it ambiguous. When
    // several sheets compete for a single row, the labels must
    // disambiguate: the sheet with strictly greatest label overlap wins,
    // sheets tied at the top are ambiguous, and sheets that cannot win
    // are missing.
    std::map<TallyKey, std::vector<std::size_t>> pending_sheets;
    std::vector<std::size_t> unknown_tally_sheets;
    for (std::size_t s = 0; s < sheets.size(); ++s) {
        if (sheet_state[s] != 0) continue;
        if (!sheets[s].tally.candidates_known()) {
            unknown_tally_sheets.push_back(s);
            continue;
        }
        TallyKey tally{*sheets[s].tally.trump, *sheets[s].tally.biden, *sheets[s].tally.jorgensen};
        pending_sheets[tally].push_back(s);
    }
    std::map<TallyKey, std::vector<std::size_t>> pending_rows;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (row_matched[r]) continue;
        pending_rows[{rows[r].trump, rows[r].biden, rows[r].jorgensen}].push_back(r);
    }

    std::vector<std::size_t> missing, ambiguous_sheets;
    std::vector<std::vector<std::size_t>> ambiguous_candidates;
    for (const auto& [tally, sheet_list] : pending_sheets) {
        auto rows_it = pending_rows.find(tally);
        if (rows_it == pending_rows.end()) {
            for (std::size_t s : sheet_list) missing.push_back(s);
            continue;
        }
        const auto& candidate_rows = rows_it->second;
        if (candidate_rows.size() > 1) {
            for (std::size_t s : sheet_list) {
                ambiguous_sheets.push_back(s);
                ambiguous_candidates.push_back(candidate_rows);
            }
            continue;
        }
        std::size_t r = candidate_rows.front();
        if (sheet_list.size() == 1) {
            std::size_t s = sheet_list.front();
            row_matched[r] = true;
            sheet_state[s] = 1;
            result.matched.push_back({s, r, sheets[s], rows[r], 2,
                                      "tally-only; sheet identifier '" + sheet_batch_key(sheets[s]).str() +
                                          "' vs row label '" + rows[r].batch_name + "'"});
            continue;
        }
        int best = -1;
        std::size_t winner = 0;
        bool tie = false;
        for (std::size_t s : sheet_list) {
            int affinity = label_affinity(sheets[s], rows[r]);
            if (affinity > best) {
                best = affinity;
                winner = s;
                tie = false;
            } else if (affinity == best) {
                tie = true;
            }
        }
        for (std::size_t s : sheet_list) {
            int affinity = label_affinity(sheets[s], rows[r]);
            if (affinity == best && tie) {
                ambiguous_sheets.push_back(s);
                ambiguous_candidates.push_back({r});
            } else if (affinity == best && s == winner) {
                row_matched[r] = true;
                sheet_state[s] = 1;
                result.matched.push_back({s, r, sheets[s], rows[r], 2,
                                          "tally-only, labels disambiguate; sheet identifier '" +
                                              sheet_batch_key(sheets[s]).str() + "' vs row label '" +
                                              rows[r].batch_name + "'"});
            } else {
                missing.push_back(s);
            }
        }
    }
    for (std::size_t s : unknown_tally_sheets) missing.push_back(s);

    std::sort(missing.begin(), missing.end());
    for (std::size_t s : missing) result.missing_sheets.push_back(sheets[s]);
    // Keep ambiguous entries in sheet input order.
    std::vector<std::size_t> order(ambiguous_sheets.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return ambiguous_sheets[a] < ambiguous_sheets[b]; });
    for (std::size_t i : order) {
        AmbiguousSheet entry;
        entry.sheet_index = ambiguous_sheets[i];
        entry.sheet = sheets[ambiguous_sheets[i]];
        for (std::size_t r : ambiguous_candidates[i]) entry.candidates.push_back(rows[r]);
        result.ambiguous.push_back(std::move(entry));
    }
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (!row_matched[r]) result.unmatched_rows.push_back(rows[r]);
    }
    return result;
}

// ---------------------------------------------------------------------------
// omission_impact
// ---------------------------------------------------------------------------

OmissionImpact omission_impact(const std::vector<BatchSheet>& missing) {
    OmissionImpact impact;
    for (const auto& sheet : missing) {
        impact.trump += sheet.tally.trump;
        impact.biden += sheet.tally.biden;
        impact.jorgensen += sheet.tally.jorgensen;
        impact.write_in += sheet.tally.write_in;
        impact.undervote_blank += sheet.tally.undervote_blank;
        impact.overvote += sheet.tally.overvote;
    }
    return impact;
}

// ---------------------------------------------------------------------------
// discrepancy_rate
// ---------------------------------------------------------------------------

double discrepancy_rate(std::int64_t error_votes, std::int64_t base_votes) {
    if (base_votes <= 0) {
        throw std::domain_error("discrepancy_rate: base_votes must be positive, got " +
                                std::to_string(base_votes));
    }
    return static_cast<double>(error_votes) / static_cast<double>(base_votes);
}

std::string format_percent(double fraction, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f%%", decimals, fraction * 100.0);
    return buf;
}

// ---------------------------------------------------------------------------
// duplicate_row_census
// ---------------------------------------------------------------------------

DuplicateRowCensus duplicate_row_census(const std::vector<AuditRow>& rows) {
    DuplicateRowCensus census;
    census.total_rows = static_cast<std::int64_t>(rows.size());
    std::map<std::tuple<std::string, std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>>
        groups;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        groups[{rows[i].county, rows[i].trump, rows[i].biden, rows[i].jorgensen}].push_back(i);
    }
    for (auto& [key, indices] : groups) {
        if (indices.size() < 2) continue;
        census.duplicate_row_count += static_cast<std::int64_t>(indices.size());
        DuplicateRowGroup group;
        group.county = std::get<0>(key);
        group.trump = std::get<1>(key);
        group.biden = std::get<2>(key);
        group.jorgensen = std::get<3>(key);
        group.row_indices = std::move(indices);
        census.groups.push_back(std::move(group));
    }
    return census;
}

// ---------------------------------------------------------------------------
// audit_totals
// ---------------------------------------------------------------------------

CandidateTotals audit_totals(const std::vector<AuditRow>& rows) {
    CandidateTotals totals;
    for (const auto& row : rows) {
        totals.trump += row.trump;
        totals.biden += row.biden;
        totals.jorgensen += row.jorgensen;
    }
    return totals;
}

}  // namespace canvass
