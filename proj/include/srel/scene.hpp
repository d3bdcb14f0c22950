#pragma once

// Synthetic 3D scenes: deterministic generation, salience scoring, and
// reference-object selection strategies.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srel/prompting.hpp"
#include "srel/relalg.hpp"
#include "srel/rng.hpp"

namespace srel {

struct SceneObject {
    std::string label;
    Vec3 position;
    double size = 1.0;
};

struct SceneBounds {
    Vec3 lo{0, 0, 0};
    Vec3 hi{1, 1, 1};
};

struct Scene {
    std::vector<SceneObject> objects;
    SceneBounds bounds;
    std::uint64_t seed = 0;

    const SceneObject* find(const std::string& label) const {
        for (const auto& o : objects)
            if (o.label == label) return &o;
        return nullptr;
    }
};

struct NoThirdObject : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnknownObject : std::runtime_error {
    explicit UnknownObject(const std::string& label)
        : std::runtime_error("object not in scene: " + label) {}
};

inline Scene gen_scene(std::uint64_t seed, std::size_t n_objects,
                       const SceneBounds& bounds = {}) {
    if (n_objects < 2) throw std::invalid_argument("gen_scene: need >= 2 objects");
    Scene scene;
    scene.seed = seed;
    scene.bounds = bounds;
    SplitMixStream rng(mix(seed, 0x5ce17eULL));
    auto span = [&](Axis a) { return bounds.hi.axis(a) - bounds.lo.axis(a); };
    const double min_sep = 1e-6;
    for (std::size_t i = 0; i < n_objects; ++i) {
        SceneObject obj;
        obj.label = "object-" + std::to_string(i + 1);
        for (int attempt = 0; attempt < 256; ++attempt) {
            obj.position = {bounds.lo.x + rng.next_double() * span(Axis::Horizontal),
                            bounds.lo.y + rng.next_double() * span(Axis::Vertical),
                            bounds.lo.z + rng.next_double() * span(Axis::Depth)};
            bool distinct = true;
            for (const auto& other : scene.objects) {
                const auto d = relations_from_coords(obj.position, other.position,
                                                     min_sep);
                if (d.horizontal == RelationSet(AxisRelation::Same) &&
                    d.vertical == RelationSet(AxisRelation::Same) &&
                    d.depth == RelationSet(AxisRelation::Same)) {
                    distinct = false;
                    break;
                }
            }
            if (distinct) break;
        }
        obj.size = 0.1 + rng.next_double() * 0.9;
        scene.objects.push_back(obj);
    }
    return scene;
}

inline Vec3 scene_centroid(const Scene& scene) {
    Vec3 c;
    for (const auto& o : scene.objects) {
        c.x += o.position.x;
        c.y += o.position.y;
        c.z += o.position.z;
    }
    const double n = static_cast<double>(scene.objects.size());
    return {c.x / n, c.y / n, c.z / n};
}

// In [0, 1]; grows with size, shrinks with distance from the scene
// centroid. Drives the "most obvious" strategy and the reference error
// scaling.
inline double salience(const Scene& scene, const SceneObject& obj) {
    double max_size = 0, max_dist = 0;
    const Vec3 c = scene_centroid(scene);
    auto dist = [&](const SceneObject& o) {
        const double dx = o.position.x - c.x, dy = o.position.y - c.y,
                     dz = o.position.z - c.z;
        return std::sqrt(dx * dx + dy * dy + dz * dz);
    };
    for (const auto& o : scene.objects) {
        max_size = std::max(max_size, o.size);
        max_dist = std::max(max_dist, dist(o));
    }
    const double size_part = max_size > 0 ? obj.size / max_size : 1.0;
    const double central_part = max_dist > 0 ? 1.0 - dist(obj) / max_dist : 1.0;
    return 0.5 * size_part + 0.5 * central_part;
}

// Picks Object C. Ties break toward the lexicographically first label.
inline std::string select_reference(ReferenceStrategy strategy, const Scene& scene,
                                    const std::string& a, const std::string& b,
                                    std::uint64_t seed = 0) {
    std::vector<const SceneObject*> eligible;
    for (const auto& o : scene.objects)
        if (o.label != a && o.label != b) eligible.push_back(&o);
    if (eligible.empty())
        throw NoThirdObject("no object besides " + a + " and " + b);
    std::sort(eligible.begin(), eligible.end(),
              [](const SceneObject* x, const SceneObject* y) {
                  return x->label < y->label;
              });

    auto best_by = [&](auto score, bool maximize) {
        const SceneObject* best = eligible.front();
        for (const auto* o : eligible) {
            const double s = score(*o), bs = score(*best);
            if (maximize ? s > bs : s < bs) best = o;
        }
        return best->label;
    };

    const Vec3 c = scene_centroid(scene);
    switch (strategy) {
        case ReferenceStrategy::Largest:
            return best_by([](const SceneObject& o) { return o.size; }, true);
        case ReferenceStrategy::Smallest:
            return best_by([](const SceneObject& o) { return o.size; }, false);
        case ReferenceStrategy::MostTop:
            return best_by([](const SceneObject& o) { return o.position.y; }, true);
        case ReferenceStrategy::Central:
            return best_by(
                [&](const SceneObject& o) {
                    const double dx = o.position.x - c.x, dy = o.position.y - c.y,
                                 dz = o.position.z - c.z;
                    return dx * dx + dy * dy + dz * dz;
                },
                false);
        case ReferenceStrategy::MostObvious:
            return best_by(
                [&](const SceneObject& o) { return salience(scene, o); }, true);
        case ReferenceStrategy::Random: {
            const std::uint64_t h =
                mix(mix(scene.seed, seed), fnv1a64(a + "|" + b));
            return eligible[h % eligible.size()]->label;
        }
    }
    return eligible.front()->label;
}

inline nlohmann::json to_json(const Scene& scene, const std::string& image_ref) {
    nlohmann::json objs = nlohmann::json::array();
    for (const auto& o : scene.objects)
        objs.push_back({{"label", o.label},
                        {"x", o.position.x},
                        {"y", o.position.y},
                        {"z", o.position.z},
                        {"size", o.size}});
    return {{"image_ref", image_ref}, {"seed", scene.seed}, {"objects", objs}};
}

inline Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    s.seed = j.value("seed", 0ULL);
    for (const auto& o : j.at("objects"))
        s.objects.push_back({o.at("label").get<std::string>(),
                             {o.at("x").get<double>(), o.at("y").get<double>(),
                              o.at("z").get<double>()},
                             o.value("size", 1.0)});
    if (s.objects.size() < 2)
        throw std::runtime_error("scene needs at least 2 objects");
    return s;
}

// JSONL scene store keyed by image_ref; this is how the simulated
// backend resolves the "image" of a question.
class SceneStore {
public:
    SceneStore() = default;

    static SceneStore load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open scene store: " + path);
        SceneStore store;
        std::string line;
        while (std::getline(in, line)) {
            if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
            auto j = nlohmann::json::parse(line);
            store.scenes_[j.at("image_ref").get<std::string>()] = scene_from_json(j);
        }
        return store;
    }

    void save(const std::string& path) const {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("cannot write scene store: " + path);
        for (const auto& [ref, scene] : scenes_)
            out << to_json(scene, ref).dump() << "\n";
    }

    void put(const std::string& image_ref, Scene scene) {
        scenes_[image_ref] = std::move(scene);
    }

    const Scene& get(const std::string& image_ref) const {
        auto it = scenes_.find(image_ref);
        if (it == scenes_.end()) throw UnknownObject(image_ref);
        return it->second;
    }

    bool contains(const std::string& image_ref) const {
        return scenes_.contains(image_ref);
    }
    std::size_t size() const { return scenes_.size(); }

private:
    std::map<std::string, Scene> scenes_;
};

}  // namespace srel
