#pragma once

#include <stdexcept>
#include <string>

namespace scenebal {

enum class Scene { Inshore, Offshore, Unknown };

inline std::string to_string(Scene s) {
    switch (s) {
        case Scene::Inshore: return "inshore";
        case Scene::Offshore: return "offshore";
        case Scene::Unknown: return "unknown";
    }
    return "unknown";
}

inline Scene scene_from_string(const std::string& s) {
    if (s == "inshore") return Scene::Inshore;
    if (s == "offshore") return Scene::Offshore;
    if (s == "unknown") return Scene::Unknown;
    throw std::invalid_argument("unknown scene label '" + s + "'");
}

}  // namespace scenebal
