#include "horizonlab/memory.hpp"

#include <algorithm>

#include "horizonlab/errors.hpp"

namespace horizonlab {

TrajectorySignature TrajectorySignature::of(const Trajectory& traj) {
    TrajectorySignature sig;
    sig.start = index(traj.front());
    sig.steps.reserve(static_cast<std::size_t>(traj.length()));
    for (int t = 0; t < traj.length(); ++t) {
        sig.steps.emplace_back(index(traj.states()[t]), index(traj.actions()[t]));
    }
    sig.sorted_steps = sig.steps;
    std::sort(sig.sorted_steps.begin(), sig.sorted_steps.end());
    return sig;
}

namespace {

double jaccard(const TrajectorySignature& a, const TrajectorySignature& b) {
    if (a.steps.empty() && b.steps.empty()) {
        return a.start == b.start ? 1.0 : 0.0;
    }
    // Sorted merge: shared elements count min(multiplicity), union counts max.
    std::size_t i = 0;
    std::size_t j = 0;
    std::size_t shared = 0;
    std::size_t either = 0;
    const auto& x = a.sorted_steps;
    const auto& y = b.sorted_steps;
    while (i < x.size() && j < y.size()) {
        if (x[i] == y[j]) {
            ++shared;
            ++i;
            ++j;
        } else if (x[i] < y[j]) {
            ++i;
        } else {
            ++j;
        }
        ++either;
    }
    either += (x.size() - i) + (y.size() - j);
    return static_cast<double>(shared) / static_cast<double>(either);
}

double prefix_ratio(const TrajectorySignature& a, const TrajectorySignature& b) {
    if (a.start != b.start) {
        return 0.0;
    }
    const std::size_t longest = std::max(a.steps.size(), b.steps.size());
    if (longest == 0) {
        return 1.0;
    }
    const auto mismatch = std::mismatch(a.steps.begin(), a.steps.end(), b.steps.begin(), b.steps.end());
    const auto common = static_cast<std::size_t>(mismatch.first - a.steps.begin());
    return static_cast<double>(common) / static_cast<double>(longest);
}

} // namespace

double similarity(const TrajectorySignature& a, const TrajectorySignature& b, SimilarityKind kind) {
    switch (kind) {
    case SimilarityKind::jaccard:
        return jaccard(a, b);
    case SimilarityKind::prefix_ratio:
        return prefix_ratio(a, b);
    case SimilarityKind::exact:
        return a == b ? 1.0 : 0.0;
    }
    return 0.0;
}

TrajectoryMemory::TrajectoryMemory(int capacity, SimilarityKind kind) : capacity_(capacity), kind_(kind) {
    if (capacity_ < 1) {
        throw InvalidParams("memory capacity must be >= 1");
    }
}

std::list<TrajectoryMemory::Entry>::const_iterator
TrajectoryMemory::best_entry(const TrajectorySignature& sig, double& best_sim) const {
    auto best = entries_.end();
    best_sim = -1.0;
    for (auto it = entries_.begin(); it != entries_.end(); ++it) {
        const double s = similarity(sig, it->signature, kind_);
        if (s > best_sim) {
            best_sim = s;
            best = it;
        }
    }
    return best;
}

std::optional<MemoryMatch> TrajectoryMemory::best_match(const Trajectory& traj) const {
    double sim = 0.0;
    const auto it = best_entry(TrajectorySignature::of(traj), sim);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return MemoryMatch{sim, it->value};
}

std::optional<double> TrajectoryMemory::lookup(const Trajectory& traj, double delta) {
    double sim = 0.0;
    const auto it = best_entry(TrajectorySignature::of(traj), sim);
    if (it == entries_.end() || sim < delta) {
        return std::nullopt;
    }
    entries_.splice(entries_.begin(), entries_, it);
    return entries_.front().value;
}

void TrajectoryMemory::insert(const Trajectory& traj, double value) {
    entries_.push_front({TrajectorySignature::of(traj), value});
    while (entries_.size() > static_cast<std::size_t>(capacity_)) {
        entries_.pop_back();
    }
}

} // namespace horizonlab
