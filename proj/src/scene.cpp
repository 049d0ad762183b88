#include "texsplat/scene.hpp"

#include <stdexcept>
#include <string>

namespace texsplat {

void Scene::validate() const {
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const Splat& s = splats[i];
    if (!satisfies_invariants(s, 1e-5)) {
      throw std::invalid_argument("splat " + std::to_string(i) + " violates its invariants");
    }
    if (s.texture_id < 0 || static_cast<std::size_t>(s.texture_id) >= textures.size()) {
      throw std::invalid_argument("splat " + std::to_string(i) + " has a dangling texture id");
    }
  }
  const int res = texture_resolution();
  for (const MaterialTextureSet& set : textures) {
    if (!set.consistent() || set.resolution() != res) {
      throw std::invalid_argument("texture sets must share one resolution and channel layout");
    }
  }
  if (environment.specular.empty()) {
    throw std::invalid_argument("environment has no specular levels");
  }
}

} // namespace texsplat
