#include "texsplat/gradients.hpp"

#include <stdexcept>
#include <string>

namespace texsplat {

SceneGradients SceneGradients::zeros_like(const Scene& scene) {
  SceneGradients g;
  g.splats.resize(scene.splats.size());
  for (std::size_t i = 0; i < scene.splats.size(); ++i) {
    g.splats[i].sh.assign(scene.splats[i].indirect_sh.coeffs.size(), 0.0);
  }
  g.textures.resize(scene.textures.size());
  for (std::size_t i = 0; i < scene.textures.size(); ++i) {
    const MaterialTextureSet& t = scene.textures[i];
    g.textures[i].albedo.assign(t.albedo.texels.size(), 0.0);
    g.textures[i].roughness.assign(t.roughness.texels.size(), 0.0);
    g.textures[i].metallic.assign(t.metallic.texels.size(), 0.0);
    g.textures[i].tangent_normal.assign(t.tangent_normal.texels.size(), 0.0);
  }
  for (const LatLongMap& level : scene.environment.specular) {
    g.environment.specular.emplace_back(level.texels.size(), 0.0);
  }
  g.environment.diffuse.assign(scene.environment.diffuse.texels.size(), 0.0);
  return g;
}

namespace {

void add_into(std::vector<double>& dst, const std::vector<double>& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] += src[i];
  }
}

void scale_into(std::vector<double>& v, double f) {
  for (double& x : v) {
    x *= f;
  }
}

} // namespace

void SceneGradients::add(const SceneGradients& o) {
  for (std::size_t i = 0; i < splats.size(); ++i) {
    SplatGrad& a = splats[i];
    const SplatGrad& b = o.splats[i];
    a.position += b.position;
    a.tangent_u += b.tangent_u;
    a.tangent_v += b.tangent_v;
    a.scale_u += b.scale_u;
    a.scale_v += b.scale_v;
    a.opacity += b.opacity;
    add_into(a.sh, b.sh);
  }
  for (std::size_t i = 0; i < textures.size(); ++i) {
    add_into(textures[i].albedo, o.textures[i].albedo);
    add_into(textures[i].roughness, o.textures[i].roughness);
    add_into(textures[i].metallic, o.textures[i].metallic);
    add_into(textures[i].tangent_normal, o.textures[i].tangent_normal);
  }
  for (std::size_t l = 0; l < environment.specular.size(); ++l) {
    add_into(environment.specular[l], o.environment.specular[l]);
  }
  add_into(environment.diffuse, o.environment.diffuse);
}

void SceneGradients::scale(double f) {
  for (SplatGrad& a : splats) {
    a.position *= f;
    a.tangent_u *= f;
    a.tangent_v *= f;
    a.scale_u *= f;
    a.scale_v *= f;
    a.opacity *= f;
    scale_into(a.sh, f);
  }
  for (TextureGrad& t : textures) {
    scale_into(t.albedo, f);
    scale_into(t.roughness, f);
    scale_into(t.metallic, f);
    scale_into(t.tangent_normal, f);
  }
  for (auto& level : environment.specular) {
    scale_into(level, f);
  }
  scale_into(environment.diffuse, f);
}

std::string_view to_string(ParamClass c) {
  switch (c) {
    case ParamClass::Position:
      return "position";
    case ParamClass::Frame:
      return "frame";
    case ParamClass::Scale:
      return "scale";
    case ParamClass::Opacity:
      return "opacity";
    case ParamClass::Albedo:
      return "albedo";
    case ParamClass::Roughness:
      return "roughness";
    case ParamClass::Metallic:
      return "metallic";
    case ParamClass::TangentNormal:
      return "tangent_normal";
    case ParamClass::IndirectSH:
      return "indirect_sh";
    case ParamClass::Environment:
      return "environment";
  }
  return "unknown";
}

ParamClass param_class_from_string(std::string_view name) {
  for (ParamClass c : kAllParamClasses) {
    if (to_string(c) == name) {
      return c;
    }
  }
  throw std::invalid_argument("unknown parameter class: " + std::string(name));
}

namespace {

TextureMap& texture_of(MaterialTextureSet& set, ParamClass c) {
  switch (c) {
    case ParamClass::Albedo:
      return set.albedo;
    case ParamClass::Roughness:
      return set.roughness;
    case ParamClass::Metallic:
      return set.metallic;
    default:
      return set.tangent_normal;
  }
}

const std::vector<double>& texture_grad_of(const TextureGrad& g, ParamClass c) {
  switch (c) {
    case ParamClass::Albedo:
      return g.albedo;
    case ParamClass::Roughness:
      return g.roughness;
    case ParamClass::Metallic:
      return g.metallic;
    default:
      return g.tangent_normal;
  }
}

bool is_texture_class(ParamClass c) {
  return c == ParamClass::Albedo || c == ParamClass::Roughness || c == ParamClass::Metallic ||
         c == ParamClass::TangentNormal;
}

// Visits every scalar of a class in gather order. `f` receives a reference
// to the stored value (double or float).
template <typename F>
void visit(Scene& scene, ParamClass c, F&& f) {
  if (is_texture_class(c)) {
    for (auto& set : scene.textures) {
      auto& map = texture_of(set, c);
      for (float& x : map.texels) {
        f(x);
      }
    }
    return;
  }
  if (c == ParamClass::Environment) {
    auto& env = scene.environment;
    for (LatLongMap& level : env.specular) {
      for (float& x : level.texels) {
        f(x);
      }
    }
    for (float& x : env.diffuse.texels) {
      f(x);
    }
    return;
  }
  for (Splat& s : scene.splats) {
    switch (c) {
      case ParamClass::Position:
        for (int k = 0; k < 3; ++k) f(s.position[k]);
        break;
      case ParamClass::Frame:
        for (int k = 0; k < 3; ++k) f(s.tangent_u[k]);
        for (int k = 0; k < 3; ++k) f(s.tangent_v[k]);
        break;
      case ParamClass::Scale:
        f(s.scale_u);
        f(s.scale_v);
        break;
      case ParamClass::Opacity:
        f(s.opacity);
        break;
      case ParamClass::IndirectSH:
        for (double& x : s.indirect_sh.coeffs) f(x);
        break;
      default:
        break;
    }
  }
}

} // namespace

std::size_t param_count(const Scene& scene, ParamClass c) {
  std::size_t n = 0;
  visit(const_cast<Scene&>(scene), c, [&](auto&) { ++n; });
  return n;
}

std::vector<double> gather_params(const Scene& scene, ParamClass c) {
  std::vector<double> out;
  out.reserve(param_count(scene, c));
  visit(const_cast<Scene&>(scene), c, [&](auto& x) { out.push_back(static_cast<double>(x)); });
  return out;
}

void scatter_params(Scene& scene, ParamClass c, const std::vector<double>& values) {
  if (values.size() != param_count(scene, c)) {
    throw std::invalid_argument("scatter_params: size mismatch for " + std::string(to_string(c)));
  }
  std::size_t i = 0;
  visit(scene, c, [&](auto& x) {
    using T = std::remove_reference_t<decltype(x)>;
    x = static_cast<T>(values[i++]);
  });
}

std::vector<double> gather_grads(const SceneGradients& g, ParamClass c) {
  std::vector<double> out;
  if (is_texture_class(c)) {
    for (const TextureGrad& t : g.textures) {
      const auto& v = texture_grad_of(t, c);
      out.insert(out.end(), v.begin(), v.end());
    }
    return out;
  }
  if (c == ParamClass::Environment) {
    for (const auto& level : g.environment.specular) {
      out.insert(out.end(), level.begin(), level.end());
    }
    out.insert(out.end(), g.environment.diffuse.begin(), g.environment.diffuse.end());
    return out;
  }
  for (const SplatGrad& s : g.splats) {
    switch (c) {
      case ParamClass::Position:
        out.insert(out.end(), s.position.data(), s.position.data() + 3);
        break;
      case ParamClass::Frame:
        out.insert(out.end(), s.tangent_u.data(), s.tangent_u.data() + 3);
        out.insert(out.end(), s.tangent_v.data(), s.tangent_v.data() + 3);
        break;
      case ParamClass::Scale:
        out.push_back(s.scale_u);
        out.push_back(s.scale_v);
        break;
      case ParamClass::Opacity:
        out.push_back(s.opacity);
        break;
      case ParamClass::IndirectSH:
        out.insert(out.end(), s.sh.begin(), s.sh.end());
        break;
      default:
        break;
    }
  }
  return out;
}

} // namespace texsplat
