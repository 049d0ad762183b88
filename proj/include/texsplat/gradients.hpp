#pragma once

#include "texsplat/scene.hpp"

#include <array>
#include <string_view>
#include <vector>

namespace texsplat {

struct SplatGrad {
  Vec3 position = Vec3::Zero();
  Vec3 tangent_u = Vec3::Zero();
  Vec3 tangent_v = Vec3::Zero();
  double scale_u = 0.0;
  double scale_v = 0.0;
  double opacity = 0.0;
  std::vector<double> sh;
};

/// Texel gradients laid out like the texture maps.
struct TextureGrad {
  std::vector<double> albedo;
  std::vector<double> roughness;
  std::vector<double> metallic;
  std::vector<double> tangent_normal;
};

struct EnvironmentGrad {
  std::vector<std::vector<double>> specular;
  std::vector<double> diffuse;
};

struct SceneGradients {
  std::vector<SplatGrad> splats;
  std::vector<TextureGrad> textures;
  EnvironmentGrad environment;

  /// Zeroed gradients shaped like `scene`.
  static SceneGradients zeros_like(const Scene& scene);
  void add(const SceneGradients& other);
  void scale(double factor);
};

/// Parameter groups shared by the optimizer, the gradient checker and the CLI.
enum class ParamClass {
  Position,
  Frame,
  Scale,
  Opacity,
  Albedo,
  Roughness,
  Metallic,
  TangentNormal,
  IndirectSH,
  Environment,
};

inline constexpr std::array<ParamClass, 10> kAllParamClasses = {
    ParamClass::Position,  ParamClass::Frame,         ParamClass::Scale,
    ParamClass::Opacity,   ParamClass::Albedo,        ParamClass::Roughness,
    ParamClass::Metallic,  ParamClass::TangentNormal, ParamClass::IndirectSH,
    ParamClass::Environment};

std::string_view to_string(ParamClass c);
/// Throws std::invalid_argument for unknown names.
ParamClass param_class_from_string(std::string_view name);

std::size_t param_count(const Scene& scene, ParamClass c);
/// Current values of one class in a fixed order.
std::vector<double> gather_params(const Scene& scene, ParamClass c);
/// Writes values back in gather order; texel and lighting values are stored
/// in single precision.
void scatter_params(Scene& scene, ParamClass c, const std::vector<double>& values);
std::vector<double> gather_grads(const SceneGradients& grads, ParamClass c);

} // namespace texsplat
