#include "doctest.h"

#include <set>
#include <vector>

#include "gvd/compose.hpp"
#include "gvd/rng.hpp"

using namespace gvd;

namespace {

std::vector<Mat> numbered_group(int count, int frames, int dim) {
    // Video v holds value 100*v + 10*f + d at (f, d): every frame is unique
    // and names its source.
    std::vector<Mat> group;
    for (int v = 0; v < count; ++v) {
        Mat m(frames, dim);
        for (int f = 0; f < frames; ++f)
            for (int d = 0; d < dim; ++d) m(f, d) = 100.0 * v + 10.0 * f + d;
        group.push_back(m);
    }
    return group;
}

}  // namespace

TEST_CASE("single-slot continuous composition is the identity") {
    auto group = numbered_group(1, 6, 2);
    CompositionPlan plan;
    plan.pattern = {6};
    plan.strategy = ComposeStrategy::continuous;
    ComposedVideo out = mvic_compose(group, plan);
    CHECK((out.video.array() == group[0].array()).all());
    REQUIRE(out.provenance.size() == 6);
    for (int f = 0; f < 6; ++f) {
        CHECK(out.provenance[size_t(f)].slot == 0);
        CHECK(out.provenance[size_t(f)].frame == f);
    }
}

TEST_CASE("continuous composition is segment-aligned") {
    auto group = numbered_group(2, 16, 2);
    CompositionPlan plan;
    plan.pattern = {8, 8};
    plan.strategy = ComposeStrategy::continuous;
    ComposedVideo out = mvic_compose(group, plan);
    REQUIRE(out.video.rows() == 16);
    for (int f = 0; f < 16; ++f) {
        int slot = f < 8 ? 0 : 1;
        CHECK((out.video.row(f).array() == group[size_t(slot)].row(f).array()).all());
        CHECK(out.provenance[size_t(f)].slot == slot);
        CHECK(out.provenance[size_t(f)].frame == f);
    }

    plan.pattern = {3, 5, 8};
    auto trio = numbered_group(3, 16, 2);
    ComposedVideo staged = mvic_compose(trio, plan);
    int offset = 0;
    for (int slot = 0; slot < 3; ++slot) {
        int n = plan.pattern[size_t(slot)];
        for (int i = 0; i < n; ++i) {
            int f = offset + i;
            CHECK((staged.video.row(f).array() == trio[size_t(slot)].row(f).array()).all());
            CHECK(staged.provenance[size_t(f)].slot == slot);
            CHECK(staged.provenance[size_t(f)].frame == f);
        }
        offset += n;
    }
}

TEST_CASE("random composition keeps source order and copies frames verbatim") {
    const int F = 8, D = 3;
    for (uint64_t seed = 0; seed < 1000; ++seed) {
        auto group = numbered_group(3, F, D);
        CompositionPlan plan;
        plan.pattern = {3, 2, 3};
        plan.strategy = ComposeStrategy::random;
        plan.seed = seed;
        ComposedVideo out = mvic_compose(group, plan);
        REQUIRE(out.video.rows() == F);
        REQUIRE(out.provenance.size() == size_t(F));

        int pos = 0;
        for (int slot = 0; slot < 3; ++slot) {
            int prev_frame = -1;
            std::set<int> seen;
            for (int i = 0; i < plan.pattern[size_t(slot)]; ++i, ++pos) {
                const FrameSource & src = out.provenance[size_t(pos)];
                CHECK(src.slot == slot);
                CHECK(src.frame > prev_frame);  // strictly increasing, so also distinct
                prev_frame = src.frame;
                CHECK(src.frame >= 0);
                CHECK(src.frame < F);
                seen.insert(src.frame);
                CHECK((out.video.row(pos).array() == group[size_t(slot)].row(src.frame).array()).all());
            }
            CHECK(int(seen.size()) == plan.pattern[size_t(slot)]);
        }
    }
}

TEST_CASE("composition plans validate against the frame count") {
    CompositionPlan plan;
    plan.pattern = {};
    CHECK_THROWS_AS(plan.validate(8), error);
    plan.pattern = {4, 0, 4};
    CHECK_THROWS_AS(plan.validate(8), error);
    plan.pattern = {4, 4};
    CHECK_THROWS_AS(plan.validate(9), error);
    CHECK_NOTHROW(plan.validate(8));

    auto group = numbered_group(3, 8, 2);
    ComposedVideo unused;
    CHECK_THROWS_AS(unused = mvic_compose(group, plan), error);  // group size 3 vs 2 slots
}

TEST_CASE("dataset composition partitions each class without overlap") {
    const int F = 4, D = 2;
    VideoDataset raw;
    raw.frames = F;
    raw.dim = D;
    raw.class_count = 2;
    Rng rng(5);
    for (int c = 0; c < 2; ++c)
        for (int i = 0; i < 8; ++i) raw.append(uint32_t(c), rng.normal_matrix(F, D));

    CompositionPlan plan;
    plan.pattern = {2, 2};
    plan.strategy = ComposeStrategy::random;
    ComposeResult result = compose_dataset(raw, plan, 99);

    REQUIRE(result.dataset.records.size() == 8);  // 4 per class
    REQUIRE(result.provenance.size() == 8);
    CHECK(result.dataset.count_of_class(0) == 4);
    CHECK(result.dataset.count_of_class(1) == 4);

    std::set<uint64_t> used[2];
    for (size_t i = 0; i < result.provenance.size(); ++i) {
        const ComposeProvenance & prov = result.provenance[i];
        CHECK(prov.class_id == result.dataset.records[i].class_id);
        REQUIRE(prov.source_records.size() == 2);
        REQUIRE(prov.frames.size() == size_t(F));
        for (uint64_t rec : prov.source_records) {
            CHECK(raw.records[rec].class_id == prov.class_id);
            CHECK(used[prov.class_id].insert(rec).second);  // no instance reused
        }
        for (int f = 0; f < F; ++f) {
            const FrameSource & src = prov.frames[size_t(f)];
            const Mat & source_video = raw.records[prov.source_records[size_t(src.slot)]].latent;
            CHECK((result.dataset.records[i].latent.row(f).array() == source_video.row(src.frame).array()).all());
        }
    }
    CHECK(used[0].size() == 8);  // full partition of each class
    CHECK(used[1].size() == 8);
}

TEST_CASE("single-slot dataset composition reorders the input") {
    const int F = 3, D = 2;
    VideoDataset raw;
    raw.frames = F;
    raw.dim = D;
    raw.class_count = 1;
    Rng rng(7);
    for (int i = 0; i < 5; ++i) raw.append(0, rng.normal_matrix(F, D));

    CompositionPlan plan;
    plan.pattern = {F};
    plan.strategy = ComposeStrategy::continuous;
    ComposeResult result = compose_dataset(raw, plan, 3);
    REQUIRE(result.dataset.records.size() == 5);
    for (size_t i = 0; i < 5; ++i) {
        uint64_t src = result.provenance[i].source_records[0];
        CHECK((result.dataset.records[i].latent.array() == raw.records[src].latent.array()).all());
    }
}

TEST_CASE("composition rejects class sizes that do not divide into groups") {
    VideoDataset raw;
    raw.frames = 4;
    raw.dim = 2;
    raw.class_count = 1;
    Rng rng(9);
    for (int i = 0; i < 7; ++i) raw.append(0, rng.normal_matrix(4, 2));

    CompositionPlan plan;
    plan.pattern = {2, 2};
    try {
        compose_dataset(raw, plan, 1);
        FAIL("expected a throw");
    } catch (const error & e) {
        CHECK(e.kind() == error_kind::config);
    }
}

TEST_CASE("composition groupings are seed-deterministic") {
    VideoDataset raw;
    raw.frames = 4;
    raw.dim = 2;
    raw.class_count = 1;
    Rng rng(11);
    for (int i = 0; i < 8; ++i) raw.append(0, rng.normal_matrix(4, 2));

    CompositionPlan plan;
    plan.pattern = {2, 2};
    plan.strategy = ComposeStrategy::random;
    ComposeResult a = compose_dataset(raw, plan, 42);
    ComposeResult b = compose_dataset(raw, plan, 42);
    ComposeResult c = compose_dataset(raw, plan, 43);
    bool identical = true;
    for (size_t i = 0; i < a.dataset.records.size(); ++i) {
        CHECK((a.dataset.records[i].latent.array() == b.dataset.records[i].latent.array()).all());
        identical = identical && (a.dataset.records[i].latent.array() == c.dataset.records[i].latent.array()).all();
    }
    CHECK_FALSE(identical);
}
