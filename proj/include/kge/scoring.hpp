#pragma once

// Embedding tables and the scoring functions s(x,y) with analytic gradients.
// RotatE relations are stored as phases so each rotation coordinate has unit
// modulus by construction.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kge/data.hpp"
#include "kge/errors.hpp"

namespace kge {

enum class ModelKind : std::uint8_t {
  TransE_L1 = 0,
  TransE_L2 = 1,
  DistMult = 2,
  ComplEx = 3,
  RotatE = 4,
};

inline const char* model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::TransE_L1: return "transe-l1";
    case ModelKind::TransE_L2: return "transe-l2";
    case ModelKind::DistMult: return "distmult";
    case ModelKind::ComplEx: return "complex";
    case ModelKind::RotatE: return "rotate";
  }
  return "?";
}

inline bool needs_even_dim(ModelKind k) {
  return k == ModelKind::ComplEx || k == ModelKind::RotatE;
}

struct ModelParams {
  ModelKind kind = ModelKind::DistMult;
  int dim = 0;      // entity dimension
  int rel_dim = 0;  // dim, or dim/2 phases for RotatE
  std::uint64_t seed = 0;
  std::size_t num_entities = 0;
  std::size_t num_relations = 0;
  std::vector<double> entities;   // row-major |E| x dim
  std::vector<double> relations;  // row-major |R| x rel_dim

  double* entity(EntityId id) { return entities.data() + static_cast<std::size_t>(id) * dim; }
  const double* entity(EntityId id) const {
    return entities.data() + static_cast<std::size_t>(id) * dim;
  }
  double* relation(RelationId id) {
    return relations.data() + static_cast<std::size_t>(id) * rel_dim;
  }
  const double* relation(RelationId id) const {
    return relations.data() + static_cast<std::size_t>(id) * rel_dim;
  }
};

// Uniform init in [-6/sqrt(d), 6/sqrt(d)]; RotatE phases uniform in [-pi, pi).
inline ModelParams init_params(const Vocab& vocab, ModelKind kind, int dim,
                               std::uint64_t seed) {
  if (dim <= 0) throw ParameterError("dim must be positive");
  if (needs_even_dim(kind) && dim % 2 != 0) {
    throw ParameterError(std::string(model_kind_name(kind)) +
                         " needs an even embedding dimension");
  }
  ModelParams p;
  p.kind = kind;
  p.dim = dim;
  p.rel_dim = kind == ModelKind::RotatE ? dim / 2 : dim;
  p.seed = seed;
  p.num_entities = vocab.num_entities();
  p.num_relations = vocab.num_relations();
  p.entities.resize(p.num_entities * static_cast<std::size_t>(dim));
  p.relations.resize(p.num_relations * static_cast<std::size_t>(p.rel_dim));

  std::mt19937_64 rng(seed);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim));
  std::uniform_real_distribution<double> ent_dist(-bound, bound);
  for (auto& v : p.entities) v = ent_dist(rng);
  if (kind == ModelKind::RotatE) {
    std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
    for (auto& v : p.relations) v = phase(rng);
  } else {
    for (auto& v : p.relations) v = ent_dist(rng);
  }
  return p;
}

struct ScoreGradient {
  double value = 0;
  // Entity entries merge head and tail contributions when head == tail.
  std::map<EntityId, std::vector<double>> entity;
  std::map<RelationId, std::vector<double>> relation;
};

inline double score(const ModelParams& p, const Triple& t) {
  const double* h = p.entity(t.head);
  const double* r = p.relation(t.relation);
  const double* tl = p.entity(t.tail);
  const int d = p.dim;
  switch (p.kind) {
    case ModelKind::TransE_L1: {
      double s = 0;
      for (int i = 0; i < d; ++i) s += std::abs(h[i] + r[i] - tl[i]);
      return -s;
    }
    case ModelKind::TransE_L2: {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        double u = h[i] + r[i] - tl[i];
        s += u * u;
      }
      return -std::sqrt(s);
    }
    case ModelKind::DistMult: {
      double s = 0;
      for (int i = 0; i < d; ++i) s += h[i] * r[i] * tl[i];
      return s;
    }
    case ModelKind::ComplEx: {
      // First half real, second half imaginary. Re(sum h * r * conj(t)).
      const int c = d / 2;
      double s = 0;
      for (int i = 0; i < c; ++i) {
        double hr = h[i], hi = h[c + i];
        double rr = r[i], ri = r[c + i];
        double tr = tl[i], ti = tl[c + i];
        s += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
      }
      return s;
    }
    case ModelKind::RotatE: {
      const int c = d / 2;
      double s = 0;
      for (int i = 0; i < c; ++i) {
        double cph = std::cos(r[i]), sph = std::sin(r[i]);
        double re = h[i] * cph - h[c + i] * sph - tl[i];
        double im = h[i] * sph + h[c + i] * cph - tl[c + i];
        s += std::sqrt(re * re + im * im);
      }
      return -s;
    }
  }
  throw ParameterError("unknown model kind");
}

// Analytic d(score)/d(head, relation, tail). L1 kinks use subgradient 0.
inline ScoreGradient score_gradient(const ModelParams& p, const Triple& t) {
  const double* h = p.entity(t.head);
  const double* r = p.relation(t.relation);
  const double* tl = p.entity(t.tail);
  const int d = p.dim;

  ScoreGradient g;
  std::vector<double> gh(static_cast<std::size_t>(d), 0.0);
  std::vector<double> gt(static_cast<std::size_t>(d), 0.0);
  std::vector<double> gr(static_cast<std::size_t>(p.rel_dim), 0.0);

  switch (p.kind) {
    case ModelKind::TransE_L1: {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        double u = h[i] + r[i] - tl[i];
        s += std::abs(u);
        double sg = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
        gh[i] = -sg;
        gr[i] = -sg;
        gt[i] = sg;
      }
      g.value = -s;
      break;
    }
    case ModelKind::TransE_L2: {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        double u = h[i] + r[i] - tl[i];
        s += u * u;
      }
      double norm = std::sqrt(s);
      g.value = -norm;
      if (norm > 0) {
        for (int i = 0; i < d; ++i) {
          double u = (h[i] + r[i] - tl[i]) / norm;
          gh[i] = -u;
          gr[i] = -u;
          gt[i] = u;
        }
      }
      break;
    }
    case ModelKind::DistMult: {
      double s = 0;
      for (int i = 0; i < d; ++i) {
        s += h[i] * r[i] * tl[i];
        gh[i] = r[i] * tl[i];
        gr[i] = h[i] * tl[i];
        gt[i] = h[i] * r[i];
      }
      g.value = s;
      break;
    }
    case ModelKind::ComplEx: {
      const int c = d / 2;
      double s = 0;
      for (int i = 0; i < c; ++i) {
        double hr = h[i], hi = h[c + i];
        double rr = r[i], ri = r[c + i];
        double tr = tl[i], ti = tl[c + i];
        s += hr * rr * tr + hi * rr * ti + hr * ri * ti - hi * ri * tr;
        gh[i] = rr * tr + ri * ti;
        gh[c + i] = rr * ti - ri * tr;
        gr[i] = hr * tr + hi * ti;
        gr[c + i] = hr * ti - hi * tr;
        gt[i] = hr * rr - hi * ri;
        gt[c + i] = hi * rr + hr * ri;
      }
      g.value = s;
      break;
    }
    case ModelKind::RotatE: {
      const int c = d / 2;
      double s = 0;
      for (int i = 0; i < c; ++i) {
        double cph = std::cos(r[i]), sph = std::sin(r[i]);
        double rot_re = h[i] * cph - h[c + i] * sph;
        double rot_im = h[i] * sph + h[c + i] * cph;
        double re = rot_re - tl[i];
        double im = rot_im - tl[c + i];
        double mod = std::sqrt(re * re + im * im);
        s += mod;
        if (mod == 0) continue;  // subgradient 0 at the kink
        double ure = re / mod, uim = im / mod;
        // d mod / d h = R(phi)^T u; d mod / d t = -u; d mod / d phi via
        // d rot / d phi = i * rot.
        gh[i] = -(ure * cph + uim * sph);
        gh[c + i] = -(-ure * sph + uim * cph);
        gt[i] = ure;
        gt[c + i] = uim;
        gr[i] = -(ure * -rot_im + uim * rot_re);
      }
      g.value = -s;
      break;
    }
  }

  auto& eh = g.entity[t.head];
  eh.assign(gh.begin(), gh.end());
  if (t.tail == t.head) {
    for (int i = 0; i < d; ++i) eh[static_cast<std::size_t>(i)] += gt[static_cast<std::size_t>(i)];
  } else {
    g.entity[t.tail] = gt;
  }
  g.relation[t.relation] = gr;
  return g;
}

// ---- checkpoint ----
// Binary layout: magic "KGE1", version u32, kind u8, dim i32, seed u64,
// num_entities u64, num_relations u64, entity doubles, relation doubles.

namespace detail {
constexpr char kCheckpointMagic[4] = {'K', 'G', 'E', '1'};
constexpr std::uint32_t kCheckpointVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw CheckpointError("truncated checkpoint");
}
}  // namespace detail

inline void save_checkpoint(const ModelParams& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(detail::kCheckpointMagic, 4);
  detail::write_pod(out, detail::kCheckpointVersion);
  detail::write_pod(out, static_cast<std::uint8_t>(p.kind));
  detail::write_pod(out, static_cast<std::int32_t>(p.dim));
  detail::write_pod(out, p.seed);
  detail::write_pod(out, static_cast<std::uint64_t>(p.num_entities));
  detail::write_pod(out, static_cast<std::uint64_t>(p.num_relations));
  out.write(reinterpret_cast<const char*>(p.entities.data()),
            static_cast<std::streamsize>(p.entities.size() * sizeof(double)));
  out.write(reinterpret_cast<const char*>(p.relations.data()),
            static_cast<std::streamsize>(p.relations.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path);
}

inline ModelParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, detail::kCheckpointMagic, 4) != 0) {
    throw CheckpointError(path + ": bad magic bytes");
  }
  std::uint32_t version = 0;
  detail::read_pod(in, version);
  if (version != detail::kCheckpointVersion) {
    throw CheckpointError(path + ": unsupported checkpoint version " +
                          std::to_string(version));
  }
  ModelParams p;
  std::uint8_t kind = 0;
  std::int32_t dim = 0;
  std::uint64_t ne = 0, nr = 0;
  detail::read_pod(in, kind);
  detail::read_pod(in, dim);
  detail::read_pod(in, p.seed);
  detail::read_pod(in, ne);
  detail::read_pod(in, nr);
  if (kind > static_cast<std::uint8_t>(ModelKind::RotatE) || dim <= 0) {
    throw CheckpointError(path + ": corrupt header");
  }
  p.kind = static_cast<ModelKind>(kind);
  p.dim = dim;
  p.rel_dim = p.kind == ModelKind::RotatE ? dim / 2 : dim;
  p.num_entities = ne;
  p.num_relations = nr;
  p.entities.resize(ne * static_cast<std::size_t>(dim));
  p.relations.resize(nr * static_cast<std::size_t>(p.rel_dim));
  in.read(reinterpret_cast<char*>(p.entities.data()),
          static_cast<std::streamsize>(p.entities.size() * sizeof(double)));
  in.read(reinterpret_cast<char*>(p.relations.data()),
          static_cast<std::streamsize>(p.relations.size() * sizeof(double)));
  if (!in) throw CheckpointError(path + ": truncated checkpoint");
  return p;
}

inline ModelParams load_checkpoint_as(const std::string& path, ModelKind expected) {
  ModelParams p = load_checkpoint(path);
  if (p.kind != expected) {
    throw CheckpointError(path + ": checkpoint holds " +
                          model_kind_name(p.kind) + " but " +
                          model_kind_name(expected) + " was requested");
  }
  return p;
}

}  // namespace kge
