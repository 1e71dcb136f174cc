#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "escape4d/core.hpp"
#include "escape4d/scenegen.hpp"

using namespace escape4d;

TEST_CASE("family helpers") {
    CHECK(all_families().size() == 6);
    CHECK(family_from_name("D2M") == Family::D2M);
    CHECK_FALSE(family_from_name("D9").has_value());
    CHECK(base_difficulty(Family::D1) == 1);
    CHECK(base_difficulty(Family::D2T) == 2);
    CHECK(base_difficulty(Family::D3M) == 3);
    CHECK(step_limit_for(Family::D1) == 50);
    CHECK(step_limit_for(Family::D2) == 65);
    CHECK(step_limit_for(Family::D2M) == 65);
    CHECK(step_limit_for(Family::D2T) == 65);
    CHECK(step_limit_for(Family::D3) == 80);
    CHECK(step_limit_for(Family::D3M) == 80);
}

TEST_CASE("generated scenes validate") {
    for (Family f : all_families()) {
        SceneSpec scene = generate_scene(f, 12345);
        ValidationReport report = validate_scene(scene);
        INFO(family_name(f));
        for (const auto& v : report.violations) INFO(v);
        CHECK(report.ok());
    }
}

TEST_CASE("scene JSON round-trip is byte stable") {
    SceneSpec scene = generate_scene(Family::D3M, 777);
    std::string a = scene_to_json(scene);
    SceneSpec back = scene_from_json(a);
    std::string b = scene_to_json(back);
    CHECK(a == b);
    CHECK(back.id == scene.id);
    CHECK(back.objects.size() == scene.objects.size());
    CHECK(back.step_limit == scene.step_limit);
    CHECK(back.prop_count == scene.prop_count);
}

TEST_CASE("validation catches broken invariants") {
    SceneSpec scene = generate_scene(Family::D2, 42);

    SUBCASE("step limit mismatch") {
        scene.step_limit = 7;
        CHECK_FALSE(validate_scene(scene).ok());
    }
    SUBCASE("duplicate object id") {
        scene.objects.push_back(scene.objects.front());
        CHECK_FALSE(validate_scene(scene).ok());
    }
    SUBCASE("object out of bounds") {
        scene.objects.back().position = {scene.geometry.width + 5.0, 1.0};
        CHECK_FALSE(validate_scene(scene).ok());
    }
    SUBCASE("unsolvable lock: password clue removed") {
        for (auto& o : scene.objects)
            if (o.kind == ObjectKind::Recorder) o.audio.reset();
        CHECK_FALSE(validate_scene(scene).ok());
    }
    SUBCASE("misleading family requires a distractor") {
        SceneSpec m = generate_scene(Family::D2M, 42);
        std::erase_if(m.objects, [](const GameObject& o) {
            return o.kind == ObjectKind::Distractor;
        });
        CHECK_FALSE(validate_scene(m).ok());
    }
}

TEST_CASE("prop counts per family") {
    CHECK(generate_scene(Family::D1, 1).prop_count == 1);
    CHECK(generate_scene(Family::D2, 1).prop_count == 1);
    CHECK(generate_scene(Family::D2T, 1).prop_count == 1);
    CHECK(generate_scene(Family::D3, 1).prop_count == 2);
    CHECK(generate_scene(Family::D3M, 1).prop_count == 2);
}
