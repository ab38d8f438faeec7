#include "p2p/conditions.hpp"

#include <algorithm>

namespace p2p {

std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::pass: return "pass";
        case Verdict::fail: return "fail";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

ConditionEntry make_entry(std::string name, Vector slacks, bool strict, std::string notes) {
    ConditionEntry e;
    e.name = std::move(name);
    e.margin = slacks.empty() ? 0.0 : *std::min_element(slacks.begin(), slacks.end());
    e.slacks = std::move(slacks);
    e.verdict = (strict ? e.margin > 0.0 : e.margin >= 0.0) ? Verdict::pass : Verdict::fail;
    e.notes = std::move(notes);
    return e;
}

void ConditionReport::add(std::vector<ConditionEntry> es) {
    for (auto& e : es) entries.push_back(std::move(e));
}

const ConditionEntry* ConditionReport::find(std::string_view name) const {
    for (const auto& e : entries)
        if (e.name == name) return &e;
    return nullptr;
}

bool ConditionReport::any_failed() const {
    for (const auto& e : entries)
        if (e.verdict == Verdict::fail) return true;
    return false;
}

}  // namespace p2p
