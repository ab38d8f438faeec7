#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "p2p/matrix.hpp"

namespace p2p {

/// Verdict of a named market condition. Most conditions here are sufficient
/// but not necessary, so a failed premise yields `inconclusive` rather than
/// `fail` whenever the conclusion may still hold.
enum class Verdict { pass, fail, inconclusive };

std::string_view to_string(Verdict v);

struct ConditionEntry {
    std::string name;
    Verdict verdict = Verdict::inconclusive;
    Vector slacks;        // per-member slack where the condition is componentwise
    double margin = 0.0;  // minimum slack (the binding component)
    std::string notes;
};

ConditionEntry make_entry(std::string name, Vector slacks, bool strict,
                          std::string notes = {});

struct ConditionReport {
    std::vector<ConditionEntry> entries;

    void add(ConditionEntry e) { entries.push_back(std::move(e)); }
    void add(std::vector<ConditionEntry> es);
    const ConditionEntry* find(std::string_view name) const;
    bool any_failed() const;
};

}  // namespace p2p
