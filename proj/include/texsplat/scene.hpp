#pragma once

#include "texsplat/bvh.hpp"
#include "texsplat/environment.hpp"
#include "texsplat/splat.hpp"
#include "texsplat/texture.hpp"

#include <memory>
#include <vector>

namespace texsplat {

/// Splats, their material texture sets (indexed by Splat::texture_id),
/// lighting, optional visibility mesh and the background color.
struct Scene {
  std::vector<Splat> splats;
  std::vector<MaterialTextureSet> textures;
  TextureConfig texture_config;
  EnvironmentLight environment;
  std::shared_ptr<const VisibilityMesh> mesh;
  Vec3 background = Vec3::Zero();

  std::size_t size() const { return splats.size(); }

  /// Resolution shared by all texture sets; texture_config.resolution when empty.
  int texture_resolution() const {
    return textures.empty() ? texture_config.resolution : textures.front().resolution();
  }

  /// Throws std::invalid_argument on broken invariants or dangling texture ids.
  void validate() const;
};

} // namespace texsplat
