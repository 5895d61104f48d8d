#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "goat/rng.hpp"

namespace goat {

using Feature = std::vector<double>;

constexpr int kFeatureDim = 64;

inline double dot(const Feature& a, const Feature& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double feature_norm(const Feature& a) { return std::sqrt(dot(a, a)); }

inline Feature normalized(Feature f) {
  double n = feature_norm(f);
  if (n > 0.0)
    for (double& v : f) v /= n;
  return f;
}

inline double cosine(const Feature& a, const Feature& b) { return dot(a, b); }

// Unit vector generated deterministically from a seed.
inline Feature unit_feature(uint64_t seed, int dim = kFeatureDim) {
  Rng rng(seed);
  Feature f(dim);
  for (double& v : f) v = rng.gaussian();
  return normalized(f);
}

// Adds isotropic Gaussian noise of expected magnitude sigma, renormalizes.
inline Feature perturbed(const Feature& f, double sigma, Rng& rng) {
  Feature out = f;
  double scale = sigma / std::sqrt(double(f.size()));
  for (double& v : out) v += scale * rng.gaussian();
  return normalized(out);
}

// Normalized convex blend: (1-w)*a + w*b.
inline Feature blend(const Feature& a, const Feature& b, double w) {
  Feature out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
  return normalized(out);
}

// Salts for the id -> feature hashing streams.
constexpr uint64_t kSaltCategoryProto = 0xC47E60ULL;
constexpr uint64_t kSaltObjectIndiv = 0x0B1EC7ULL;
constexpr uint64_t kSaltObjectContext = 0xC047E7ULL;
constexpr uint64_t kSaltBackground = 0xBAC6ULL;

// Category prototype: shared component of all instances of a category,
// also used as the text-embedding stand-in for the category name.
inline Feature category_prototype(int category) {
  return unit_feature(hash_mix(kSaltCategoryProto, uint64_t(category)));
}

// Latent appearance of an object: category prototype plus an individual
// component. Same-category instances are deliberately correlated so that
// telling them apart is a real matching problem.
inline Feature object_latent(int object_id, int category, double individuality = 0.5) {
  Feature proto = category_prototype(category);
  Feature indiv = unit_feature(hash_mix(kSaltObjectIndiv, uint64_t(object_id)));
  Feature f(proto.size());
  for (size_t i = 0; i < f.size(); ++i) f[i] = proto[i] + individuality * indiv[i];
  return normalized(f);
}

// Surroundings of an object, mixed into padded / full-image view features.
inline Feature object_context(int object_id) {
  return unit_feature(hash_mix(kSaltObjectContext, uint64_t(object_id)));
}

}  // namespace goat
