// Multi-video composition: each output video takes its frames from a group
// of same-class source videos according to a per-slot frame-count pattern,
// either segment-aligned or by sorted random selection.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gvd/dataset.hpp"
#include "gvd/latent.hpp"

namespace gvd {

enum class ComposeStrategy { continuous, random };

struct CompositionPlan {
    std::vector<int> pattern;  // frames contributed per group slot, sums to F
    ComposeStrategy strategy = ComposeStrategy::random;
    uint64_t seed = 0;

    int group_size() const { return int(pattern.size()); }
    void validate(int frames) const;
};

struct FrameSource {
    int slot = 0;   // position within the group
    int frame = 0;  // source frame index
};

struct ComposedVideo {
    Mat video;
    std::vector<FrameSource> provenance;  // one entry per output frame
};

// continuous: slot j supplies its own frames at global positions [o_j, o_j +
// n_j) where o_j is the pattern prefix sum. random: slot j supplies n_j
// distinct frame indices drawn under plan.seed, sorted ascending, and slot
// contributions are concatenated in group order.
ComposedVideo mvic_compose(const std::vector<Mat> & group, const CompositionPlan & plan);

struct ComposeProvenance {
    uint32_t class_id = 0;
    std::vector<uint64_t> source_records;  // raw record indices, group order
    std::vector<FrameSource> frames;
};

struct ComposeResult {
    VideoDataset dataset;
    std::vector<ComposeProvenance> provenance;  // aligned with dataset.records
};

// Partitions each class's records into groups of pattern-length size by a
// seeded shuffle, composes one video per group. The per-class record count
// must divide evenly.
ComposeResult compose_dataset(const VideoDataset & raw, const CompositionPlan & plan, uint64_t seed);

void save_provenance_json(const ComposeResult & result, const CompositionPlan & plan,
                          const std::string & method, const std::string & path);

}  // namespace gvd
