#include "grad_cases.hpp"

#include <cmath>
#include <random>

#include "mick/encoder.hpp"
#include "mick/matching.hpp"
#include "mick/support_classifier.hpp"
#include "oracles.hpp"

namespace mick::testing {

namespace {

constexpr std::size_t kT = 6;
constexpr std::size_t kVocab = 8;
constexpr std::size_t kWordDim = 3;
constexpr std::size_t kPosDim = 2;
constexpr std::size_t kHidden = 4;
constexpr std::size_t kWindow = 3;

EncodedInstance random_instance(std::mt19937_64& rng, std::size_t slot) {
  std::uniform_int_distribution<std::size_t> len(3, kT);
  std::uniform_int_distribution<std::uint32_t> tok(2, kVocab - 1);
  EncodedInstance inst;
  inst.true_length = len(rng);
  inst.relation_slot = slot;
  std::uniform_int_distribution<std::size_t> pos(0, inst.true_length - 1);
  const std::size_t h = pos(rng), t = pos(rng);
  for (std::size_t i = 0; i < kT; ++i) {
    inst.token_ids.push_back(i < inst.true_length ? tok(rng) : 0);
    inst.pos_head.push_back(position_bucket(static_cast<std::ptrdiff_t>(i), h, kT));
    inst.pos_tail.push_back(position_bucket(static_cast<std::ptrdiff_t>(i), t, kT));
  }
  return inst;
}

std::vector<Tensor> encoder_tensors(std::mt19937_64& rng) {
  return {random_tensor({kVocab, kWordDim}, rng, -0.5, 0.5),
          random_tensor({2 * kT - 1, kPosDim}, rng, -0.5, 0.5),
          random_tensor({2 * kT - 1, kPosDim}, rng, -0.5, 0.5),
          random_tensor({kHidden, kWindow * (kWordDim + 2 * kPosDim)}, rng, -0.5, 0.5),
          random_tensor({kHidden}, rng, 0.1, 0.5)};
}

EncoderNodes encoder_nodes(std::span<const NodeId> p) {
  return EncoderNodes{p[0], p[1], p[2], p[3], p[4], kWindow};
}

}  // namespace

NodeId reduce_to_scalar(Graph& g, NodeId out) {
  Tensor target(g.value(out).shape());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = 0.3 * std::sin(double(i) + 1.0);
  return g.squared_distance(out, g.leaf(std::move(target)));
}

std::vector<GradCase> primitive_grad_cases(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto r = [&](Shape s) { return random_tensor(std::move(s), rng); };
  std::vector<GradCase> cases;

  cases.push_back({"matmul", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.matmul(p[0], p[1]));
                   }, {r({3, 4}), r({4, 2})}});
  cases.push_back({"matmul_vector", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.matmul(p[0], p[1]));
                   }, {r({3, 4}), r({4})}});
  cases.push_back({"add", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.add(p[0], p[1]));
                   }, {r({3, 2}), r({3, 2})}});
  cases.push_back({"scale", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.scale(p[0], 1.7));
                   }, {r({5})}});
  cases.push_back({"negate", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.negate(p[0]));
                   }, {r({2, 3})}});
  cases.push_back({"sum", [](Graph& g, std::span<const NodeId> p) {
                     return g.sum(g.relu(p[0]));
                   }, {r({4, 2})}});
  cases.push_back({"concat_rows", [](Graph& g, std::span<const NodeId> p) {
                     const NodeId parts[] = {p[0], p[1]};
                     return reduce_to_scalar(g, g.concat_rows(parts));
                   }, {r({2, 3}), r({1, 3})}});
  cases.push_back({"concat_rows_vector", [](Graph& g, std::span<const NodeId> p) {
                     const NodeId parts[] = {p[0], p[1]};
                     return reduce_to_scalar(g, g.concat_rows(parts));
                   }, {r({3}), r({2})}});
  cases.push_back({"concat_cols", [](Graph& g, std::span<const NodeId> p) {
                     const NodeId parts[] = {p[0], p[1], p[2]};
                     return reduce_to_scalar(g, g.concat_cols(parts));
                   }, {r({3, 2}), r({3, 1}), r({3, 2})}});
  cases.push_back({"lookup", [](Graph& g, std::span<const NodeId> p) {
                     const std::uint32_t ids[] = {0, 2, 2, 5};
                     return reduce_to_scalar(g, g.lookup(p[0], ids));
                   }, {r({6, 3})}});
  cases.push_back({"conv1d", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.conv1d(p[0], p[1], p[2], 5, 3));
                   }, {r({6, 3}), r({4, 9}), r({4})}});
  cases.push_back({"conv1d_width1", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.conv1d(p[0], p[1], p[2], 4, 1));
                   }, {r({4, 2}), r({3, 2}), r({3})}});
  cases.push_back({"max_over_rows", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.max_over_rows(p[0]));
                   }, {r({5, 3})}});
  cases.push_back({"relu", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.relu(p[0]));
                   }, {r({7})}});
  cases.push_back({"softmax", [](Graph& g, std::span<const NodeId> p) {
                     return reduce_to_scalar(g, g.softmax(p[0]));
                   }, {r({5})}});
  cases.push_back({"cross_entropy", [](Graph& g, std::span<const NodeId> p) {
                     return g.cross_entropy(g.softmax(p[0]), 2);
                   }, {r({5})}});
  cases.push_back({"squared_distance", [](Graph& g, std::span<const NodeId> p) {
                     return g.squared_distance(p[0], p[1]);
                   }, {r({2, 3}), r({2, 3})}});
  return cases;
}

GradCase encoder_grad_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const EncodedInstance inst = random_instance(rng, 0);
  return {"encoder",
          [inst](Graph& g, std::span<const NodeId> p) {
            return reduce_to_scalar(g, encode(g, encoder_nodes(p), inst));
          },
          encoder_tensors(rng)};
}

GradCase support_loss_grad_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  // params: W, b, then four support vectors (slot-major).
  std::vector<Tensor> params{random_tensor({2, 4}, rng), random_tensor({2}, rng)};
  for (int i = 0; i < 4; ++i) params.push_back(random_tensor({4}, rng));
  return {"support_loss",
          [](Graph& g, std::span<const NodeId> p) {
            const ClassifierNodes clf{p[0], p[1], 2};
            const std::vector<std::vector<NodeId>> support{{p[2], p[3]}, {p[4], p[5]}};
            return support_loss(g, clf, support);
          },
          std::move(params)};
}

GradCase match_loss_grad_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Tensor> params;
  for (int i = 0; i < 12; ++i) params.push_back(random_tensor({4}, rng));
  return {"match_loss",
          [](Graph& g, std::span<const NodeId> p) {
            std::vector<std::vector<NodeId>> support(3), query(3);
            for (std::size_t c = 0; c < 3; ++c) {
              support[c] = {p[4 * c], p[4 * c + 1]};
              query[c] = {p[4 * c + 2], p[4 * c + 3]};
            }
            const PrototypeSet protos = compute_prototypes(g, support);
            return match_loss(g, query, protos);
          },
          std::move(params)};
}

GradCase episode_loss_grad_case(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<EncodedInstance>> support(2), query(2);
  for (std::size_t c = 0; c < 2; ++c) {
    for (int k = 0; k < 2; ++k) support[c].push_back(random_instance(rng, c));
    query[c].push_back(random_instance(rng, c));
  }
  std::vector<Tensor> params = encoder_tensors(rng);
  params.push_back(random_tensor({2, kHidden}, rng, -0.5, 0.5));
  params.push_back(random_tensor({2}, rng, -0.5, 0.5));
  return {"episode_loss",
          [support, query](Graph& g, std::span<const NodeId> p) {
            const EncoderNodes enc = encoder_nodes(p);
            const ClassifierNodes clf{p[5], p[6], 2};
            std::vector<std::vector<NodeId>> s(2), q(2);
            for (std::size_t c = 0; c < 2; ++c) {
              for (const auto& inst : support[c]) s[c].push_back(encode(g, enc, inst));
              for (const auto& inst : query[c]) q[c].push_back(encode(g, enc, inst));
            }
            const NodeId l_sup = support_loss(g, clf, s);
            const PrototypeSet protos = compute_prototypes(g, s);
            return g.add(l_sup, match_loss(g, q, protos));
          },
          std::move(params)};
}

}  // namespace mick::testing
