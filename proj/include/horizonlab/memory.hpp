#pragma once

#include <cstddef>
#include <list>
#include <optional>
#include <utility>
#include <vector>

#include "horizonlab/env.hpp"

namespace horizonlab {

enum class SimilarityKind {
    jaccard,      // multiset overlap of (state, action) pairs
    prefix_ratio, // longest common prefix / longer length
    exact,        // 1 for identical step sequences, else 0
};

/// Ordered (state, action) steps of a trajectory plus its start state.
struct TrajectorySignature {
    int start = 0;
    std::vector<std::pair<int, int>> steps;
    std::vector<std::pair<int, int>> sorted_steps; // multiset view for jaccard

    static TrajectorySignature of(const Trajectory& traj);
    bool operator==(const TrajectorySignature& other) const { return start == other.start && steps == other.steps; }
};

double similarity(const TrajectorySignature& a, const TrajectorySignature& b, SimilarityKind kind);

struct MemoryMatch {
    double similarity = 0.0;
    double value = 0.0;
};

/// Bounded store of evaluated trajectories with similarity-gated reuse and
/// least-recently-used eviction. Lookups scan every entry.
class TrajectoryMemory {
public:
    TrajectoryMemory(int capacity, SimilarityKind kind);

    /// Most similar cached trajectory; recency is left untouched.
    std::optional<MemoryMatch> best_match(const Trajectory& traj) const;

    /// Cached return of the most similar entry when its similarity >= delta.
    /// A hit marks the entry as most recently used.
    std::optional<double> lookup(const Trajectory& traj, double delta);

    void insert(const Trajectory& traj, double value);
    void clear() { entries_.clear(); }

    std::size_t size() const noexcept { return entries_.size(); }
    int capacity() const noexcept { return capacity_; }
    SimilarityKind kind() const noexcept { return kind_; }

private:
    struct Entry {
        TrajectorySignature signature;
        double value = 0.0;
    };

    std::list<Entry>::const_iterator best_entry(const TrajectorySignature& sig, double& best_sim) const;

    int capacity_;
    SimilarityKind kind_;
    std::list<Entry> entries_; // most recently used first
};

} // namespace horizonlab
