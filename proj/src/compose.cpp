#include "gvd/compose.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <nlohmann/json.hpp>

#include "gvd/rng.hpp"

namespace gvd {

void CompositionPlan::validate(int frames) const {
    if (pattern.empty()) throw error(error_kind::config, "composition pattern is empty");
    int total = 0;
    for (int n : pattern) {
        if (n < 1) throw error(error_kind::config, "composition pattern entries must be >= 1");
        total += n;
    }
    if (total != frames) {
        throw error(error_kind::config, "composition pattern must sum to the frame count",
                    "sum=" + std::to_string(total) + " frames=" + std::to_string(frames));
    }
}

ComposedVideo mvic_compose(const std::vector<Mat> & group, const CompositionPlan & plan) {
    if (group.empty()) throw error(error_kind::precondition, "composition group is empty");
    const int F = int(group[0].rows());
    const int D = int(group[0].cols());
    plan.validate(F);
    if (int(group.size()) != plan.group_size()) {
        throw error(error_kind::dimension, "group size does not match pattern length",
                    std::to_string(group.size()) + " videos, pattern of " + std::to_string(plan.group_size()));
    }
    for (const auto & v : group) {
        if (v.rows() != F || v.cols() != D) {
            throw error(error_kind::dimension, "group videos have mixed shapes");
        }
    }

    ComposedVideo out;
    out.video = Mat(F, D);
    out.provenance.reserve(size_t(F));

    if (plan.strategy == ComposeStrategy::continuous) {
        int offset = 0;
        for (size_t j = 0; j < group.size(); ++j) {
            for (int p = offset; p < offset + plan.pattern[j]; ++p) {
                out.video.row(p) = group[j].row(p);
                out.provenance.push_back({int(j), p});
            }
            offset += plan.pattern[j];
        }
        return out;
    }

    Rng rng(plan.seed);
    int pos = 0;
    std::vector<int> all_frames(static_cast<size_t>(F));
    std::iota(all_frames.begin(), all_frames.end(), 0);
    for (size_t j = 0; j < group.size(); ++j) {
        std::vector<int> pool = all_frames;
        rng.shuffle(pool);
        std::vector<int> picks(pool.begin(), pool.begin() + plan.pattern[j]);
        std::sort(picks.begin(), picks.end());
        for (int src : picks) {
            out.video.row(pos) = group[j].row(src);
            out.provenance.push_back({int(j), src});
            ++pos;
        }
    }
    return out;
}

ComposeResult compose_dataset(const VideoDataset & raw, const CompositionPlan & plan, uint64_t seed) {
    raw.validate();
    plan.validate(raw.frames);
    const size_t U = size_t(plan.group_size());

    ComposeResult result;
    result.dataset.frames = raw.frames;
    result.dataset.dim = raw.dim;
    result.dataset.class_count = raw.class_count;

    for (int c = 0; c < raw.class_count; ++c) {
        std::vector<size_t> members = raw.indices_of_class(uint32_t(c));
        if (members.empty()) continue;
        if (members.size() % U != 0) {
            throw error(error_kind::config, "per-class instance count is not divisible by the group size",
                        "class " + std::to_string(c) + ": " + std::to_string(members.size()) +
                            " instances, group size " + std::to_string(U));
        }
        Rng group_rng(seed_chain(seed_chain(seed, seed_tag("groups")), uint64_t(c)));
        group_rng.shuffle(members);

        const size_t n_groups = members.size() / U;
        for (size_t g = 0; g < n_groups; ++g) {
            std::vector<Mat> group;
            ComposeProvenance prov;
            prov.class_id = uint32_t(c);
            for (size_t j = 0; j < U; ++j) {
                size_t rec = members[g * U + j];
                group.push_back(raw.records[rec].latent);
                prov.source_records.push_back(uint64_t(rec));
            }
            CompositionPlan instance_plan = plan;
            instance_plan.seed =
                seed_chain(seed_chain(seed_chain(seed, seed_tag("frames")), uint64_t(c)), g);
            ComposedVideo composed = mvic_compose(group, instance_plan);
            prov.frames = std::move(composed.provenance);
            result.dataset.append(uint32_t(c), std::move(composed.video));
            result.provenance.push_back(std::move(prov));
        }
    }
    return result;
}

void save_provenance_json(const ComposeResult & result, const CompositionPlan & plan,
                          const std::string & method, const std::string & path) {
    nlohmann::json root;
    root["method"] = method;
    root["pattern"] = plan.pattern;
    root["strategy"] = plan.strategy == ComposeStrategy::continuous ? "continuous" : "random";
    nlohmann::json videos = nlohmann::json::array();
    for (size_t i = 0; i < result.provenance.size(); ++i) {
        const auto & prov = result.provenance[i];
        nlohmann::json entry;
        entry["composed_index"] = i;
        entry["class_id"] = prov.class_id;
        entry["source_records"] = prov.source_records;
        nlohmann::json frames = nlohmann::json::array();
        for (const auto & fs : prov.frames) {
            frames.push_back({{"slot", fs.slot}, {"source_frame", fs.frame}});
        }
        entry["frames"] = std::move(frames);
        videos.push_back(std::move(entry));
    }
    root["videos"] = std::move(videos);

    std::FILE * f = std::fopen(path.c_str(), "wb");
    if (!f) throw error(error_kind::io, "cannot open file for writing", path);
    std::string text = root.dump(2);
    text.push_back('\n');
    size_t written = std::fwrite(text.data(), 1, text.size(), f);
    if (written != text.size() || std::fclose(f) != 0) {
        throw error(error_kind::io, "short write", path);
    }
}

}  // namespace gvd
